"""Dirac factorization toolkit: superalgebra checks, higher-order Hermite
polynomials, partner potentials and split-step Jaynes-Cummings dynamics."""

__version__ = "0.1.0"
