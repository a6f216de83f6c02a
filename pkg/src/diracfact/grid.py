"""Uniform 1-D position grids carrying ``q`` and ``p = -i d/dq`` as matrices."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import trapezoid

from .operator_algebra import OperatorMatrix

SCHEMES = ("spectral", "fd4")
BOUNDARY_FRACTION = 0.10


def fourier_derivative_matrix(n: int, length: float) -> np.ndarray:
    """First-derivative matrix of trigonometric interpolation on ``n`` periodic points (n even)."""
    j = np.arange(n)
    k = j[:, None] - j[None, :]
    d = np.zeros((n, n))
    off = k != 0
    d[off] = (np.pi / length) * (-1.0) ** k[off] / np.tan(np.pi * k[off] / n)
    return d


def fd4_derivative_matrix(n: int, h: float) -> np.ndarray:
    """Fourth-order central differences with one-sided 5-point stencils at the two edge points."""
    if n < 5:
        raise ValueError("fourth-order stencils need at least 5 points")
    d = np.zeros((n, n))
    central = np.array([1.0, -8.0, 0.0, 8.0, -1.0])
    for i in range(2, n - 2):
        d[i, i - 2 : i + 3] = central
    d[0, :5] = [-25.0, 48.0, -36.0, 16.0, -3.0]
    d[1, :5] = [-3.0, -10.0, 18.0, -6.0, 1.0]
    d[-1, -5:] = -d[0, :5][::-1]
    d[-2, -5:] = -d[1, :5][::-1]
    return d / (12.0 * h)


@dataclass(frozen=True)
class PositionGrid:
    """Uniform grid on ``[q_min, q_max]``.

    ``spectral``: periodic Fourier scheme, points ``q_min + j L/n`` (``q_max``
    excluded), ``n`` a power of two. ``fd4``: both endpoints included,
    fourth-order finite differences.
    """

    q_min: float
    q_max: float
    n_points: int
    scheme: str = "spectral"
    q: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.q_max > self.q_min:
            raise ValueError(f"need q_max > q_min, got [{self.q_min}, {self.q_max}]")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown derivative scheme {self.scheme!r}; use one of {SCHEMES}")
        n = self.n_points
        if n < 64:
            raise ValueError(f"grid needs at least 64 points, got {n}")
        if self.scheme == "spectral":
            if n & (n - 1):
                raise ValueError(f"spectral grids need a power-of-two size, got {n}")
            q = self.q_min + (self.q_max - self.q_min) * np.arange(n) / n
        else:
            q = np.linspace(self.q_min, self.q_max, n)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def h(self) -> float:
        return float(self.q[1] - self.q[0])

    @cached_property
    def derivative_matrix(self) -> np.ndarray:
        if self.scheme == "spectral":
            d = fourier_derivative_matrix(self.n_points, self.q_max - self.q_min)
        else:
            d = fd4_derivative_matrix(self.n_points, self.h)
        d.setflags(write=False)
        return d

    def derivative(self, v) -> np.ndarray:
        return self.derivative_matrix @ np.asarray(v)

    @property
    def q_op(self) -> OperatorMatrix:
        return OperatorMatrix(np.diag(self.q), "grid")

    @property
    def p_op(self) -> OperatorMatrix:
        return OperatorMatrix(-1j * self.derivative_matrix, "grid")

    def integrate(self, v) -> complex | float:
        """Quadrature of a grid function (exact trapezoid for periodic data)."""
        if self.scheme == "spectral":
            return np.sum(v) * self.h
        return trapezoid(v, dx=self.h)

    def l2_norm(self, v) -> float:
        return float(np.sqrt(self.integrate(np.abs(v) ** 2).real))

    def interior(self, fraction: float = BOUNDARY_FRACTION) -> np.ndarray:
        """Boolean mask excluding a boundary band of ``fraction`` of the points per side."""
        n = self.n_points
        band = int(np.ceil(fraction * n))
        mask = np.zeros(n, dtype=bool)
        mask[band : n - band] = True
        return mask

    def refined(self, factor: int = 2) -> "PositionGrid":
        return PositionGrid(self.q_min, self.q_max, self.n_points * factor, self.scheme)


def build_grid(q_min: float, q_max: float, n_points: int, scheme: str = "spectral") -> PositionGrid:
    return PositionGrid(float(q_min), float(q_max), int(n_points), scheme)


def parse_grid(text: str, scheme: str = "spectral") -> PositionGrid:
    """Parse ``min:max:n`` grid syntax."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must look like min:max:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValueError(f"grid must look like min:max:n, got {text!r}") from None
    return build_grid(lo, hi, n, scheme)
