"""Dirac factorization of ``H = (p^2 + f(q))/2`` on a position grid.

Builds the generalized ladders ``A^(+/-) = (sqrt f -/+ i p)/sqrt2``, the operator
``Upsilon = [[0, A^-], [A^+, 0]]``, the partner potentials
``f +/- f'/(4 sqrt f)`` and the Riccati partner pair used by the Liouville
reduction of ``z'' + mu_- z = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import cumulative_simpson

from .expression import Expression, kinks
from .grid import PositionGrid
from .operator_algebra import OperatorMatrix

SQRT2 = np.sqrt(2.0)
EXP_LIMIT = 700.0


@dataclass(frozen=True)
class PotentialSpec:
    """``f(q)`` as a parsed expression plus the positivity floor it must clear."""

    expression: Expression
    positivity_floor: float = 1e-10

    def __post_init__(self):
        if isinstance(self.expression, str):
            object.__setattr__(self, "expression", Expression.parse(self.expression))
        if not self.positivity_floor > 0:
            raise ValueError("positivity floor must be > 0")

    @property
    def text(self) -> str:
        return self.expression.text

    def sample(self, grid: PositionGrid) -> tuple[np.ndarray, np.ndarray]:
        """``(f, f')`` on the grid, after validation."""
        f = self.expression(grid.q)
        df = self.expression.derivative(grid.q)
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(df))):
            raise ValueError(f"f(q) = {self.text} is not finite and differentiable on the grid")
        low = f < self.positivity_floor
        if np.any(low):
            i = int(np.argmax(low))
            raise ValueError(
                f"f(q) = {self.text} drops below the positivity floor {self.positivity_floor:g} "
                f"(f({grid.q[i]:.6g}) = {f[i]:.6g}); sqrt f is singular there, shrink the domain"
            )
        if kinks(self.expression.tree, grid.q):
            raise ValueError(f"f(q) = {self.text} is not continuously differentiable on the grid")
        return f, df


def as_potential(f) -> PotentialSpec:
    return f if isinstance(f, PotentialSpec) else PotentialSpec(f)


def block_operator(upper_right, lower_left, diag=None) -> OperatorMatrix:
    n = upper_right.shape[0]
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    m[:n, n:] = upper_right
    m[n:, :n] = lower_left
    if diag is not None:
        m[:n, :n] = diag[0]
        m[n:, n:] = diag[1]
    return OperatorMatrix(m, "spin_grid")


@dataclass(frozen=True)
class Ladders:
    A_minus: OperatorMatrix
    A_plus: OperatorMatrix

    @cached_property
    def upsilon(self) -> OperatorMatrix:
        return block_operator(self.A_minus.m, self.A_plus.m)

    def supercharges(self) -> tuple[OperatorMatrix, OperatorMatrix]:
        """``(V_-, V_+)``: the upper-right and lower-left halves of Upsilon."""
        z = np.zeros_like(self.A_minus.m)
        return block_operator(self.A_minus.m, z), block_operator(z, self.A_plus.m)


def general_ladders(f, grid: PositionGrid) -> Ladders:
    fv, _ = as_potential(f).sample(grid)
    g = np.diag(np.sqrt(fv))
    d = grid.derivative_matrix
    # i p = d/dq
    return Ladders(
        OperatorMatrix((g + d) / SQRT2, "grid"),
        OperatorMatrix((g - d) / SQRT2, "grid"),
    )


def smooth_test_vectors(grid: PositionGrid) -> list[np.ndarray]:
    """Gaussian packets well inside the grid, in both spin components."""
    lo, hi = grid.q_min, grid.q_max
    length = hi - lo
    width = length / 40
    out = []
    for frac in (0.3, 0.5, 0.7):
        c = lo + frac * length
        for k in (0.0, 2.0):
            g = np.exp(-((grid.q - c) ** 2) / (2 * width**2) + 1j * k * grid.q)
            out.append(np.concatenate([g, 0.5 * g]))
            out.append(np.concatenate([0.3 * g, -g]))
    return out


@dataclass(frozen=True)
class PartnerDecomposition:
    grid: PositionGrid
    potential: PotentialSpec
    f: np.ndarray
    f_prime: np.ndarray
    ladders: Ladders
    gap_term: np.ndarray = field(init=False)
    f_plus: np.ndarray = field(init=False)
    f_minus: np.ndarray = field(init=False)

    def __post_init__(self):
        gap = self.f_prime / (4 * np.sqrt(self.f))
        object.__setattr__(self, "gap_term", gap)
        object.__setattr__(self, "f_plus", self.f + gap)
        object.__setattr__(self, "f_minus", self.f - gap)

    @property
    def upsilon(self) -> OperatorMatrix:
        return self.ladders.upsilon

    @cached_property
    def hamiltonian_block(self) -> np.ndarray:
        """``(p^2 + f)/2`` on the grid."""
        d = self.grid.derivative_matrix
        return (-(d @ d) + np.diag(self.f)) / 2

    @cached_property
    def H(self) -> OperatorMatrix:
        h = self.hamiltonian_block
        return block_operator(np.zeros_like(h), np.zeros_like(h), diag=(h, h))

    def apply_H(self, v) -> np.ndarray:
        n = self.grid.n_points
        h = self.hamiltonian_block
        return np.concatenate([h @ v[:n], h @ v[n:]])

    def apply_upsilon(self, v) -> np.ndarray:
        n = self.grid.n_points
        return np.concatenate([self.ladders.A_minus.m @ v[n:], self.ladders.A_plus.m @ v[:n]])

    def apply_gap_sigma3(self, v) -> np.ndarray:
        n = self.grid.n_points
        return np.concatenate([self.gap_term * v[:n], -self.gap_term * v[n:]])

    def identity_defect(self, v) -> np.ndarray:
        """``(H - Upsilon^2 + gap s3) v``."""
        return self.apply_H(v) - self.apply_upsilon(self.apply_upsilon(v)) + self.apply_gap_sigma3(v)

    def identity_residual(self, vectors=None) -> float:
        """Max interior ``|(H - (Upsilon^2 - gap s3)) v|`` over smooth test vectors, relative to ``max|v|``."""
        vectors = smooth_test_vectors(self.grid) if vectors is None else vectors
        mask = np.tile(self.grid.interior(), 2)
        worst = 0.0
        for v in vectors:
            r = self.identity_defect(v)
            worst = max(worst, float(np.max(np.abs(r[mask])) / np.max(np.abs(v))))
        return worst


def partner_decomposition(f, grid: PositionGrid) -> PartnerDecomposition:
    spec = as_potential(f)
    fv, df = spec.sample(grid)
    return PartnerDecomposition(grid, spec, fv, df, general_ladders(spec, grid))


@dataclass(frozen=True)
class RiccatiPair:
    phi: np.ndarray
    mu_minus: np.ndarray
    mu_plus: np.ndarray


def _grid_function(phi, grid: PositionGrid) -> np.ndarray:
    if isinstance(phi, str):
        phi = Expression.parse(phi)
    if callable(phi):
        phi = phi(grid.q)
    phi = np.broadcast_to(np.asarray(phi, dtype=float), grid.q.shape)
    return phi


def riccati_potentials(phi, grid: PositionGrid) -> RiccatiPair:
    """``mu_-/+ = -phi^2/4 -/+ phi'/2`` with ``phi'`` from the grid scheme."""
    phi = _grid_function(phi, grid)
    dphi = grid.derivative(phi)
    quad = -(phi * phi) / 4
    return RiccatiPair(phi, quad - dphi / 2, quad + dphi / 2)


def _standard_form(a: np.ndarray, b: np.ndarray, grid: PositionGrid) -> np.ndarray:
    """Coefficient ``c = b - (a^2 + 2a')/4`` of ``v'' + c v = 0`` from ``y'' + a y' + b y = 0``."""
    return b - (a * a + 2 * grid.derivative(a)) / 4


def _cumulative(v: np.ndarray, grid: PositionGrid) -> np.ndarray:
    return cumulative_simpson(v, dx=grid.h, initial=0.0)


def second_difference(z: np.ndarray, h: float) -> np.ndarray:
    """Three-point ``z''`` (end points left as zero)."""
    out = np.zeros_like(z)
    out[1:-1] = (z[2:] - 2 * z[1:-1] + z[:-2]) / (h * h)
    return out


@dataclass(frozen=True)
class LiouvilleSolution:
    grid: PositionGrid
    z: np.ndarray
    mu_minus: np.ndarray

    @cached_property
    def residual(self) -> float:
        """Interior ``max|z'' + mu_- z| / max|z|`` with a three-point ``z''``."""
        r = second_difference(self.z, self.grid.h) + self.mu_minus * self.z
        mask = self.grid.interior()
        return float(np.max(np.abs(r[mask])) / np.max(np.abs(self.z)))


def liouville_solve(phi, grid: PositionGrid) -> LiouvilleSolution:
    """Solve ``z'' + mu_- z = 0`` for ``mu_- = -phi^2/4 - phi'/2`` in closed form.

    ``z = exp(1/2 int phi) int exp(-int phi)``, all lower limits at ``q_min``.
    The equation ``u'' + phi u' = 0`` maps onto the standard form with
    coefficient ``mu_-``.
    """
    phi = _grid_function(phi, grid)
    mu_minus = _standard_form(phi, np.zeros_like(phi), grid)
    big_phi = _cumulative(phi, grid)
    if np.max(np.abs(big_phi)) > EXP_LIMIT:
        raise OverflowError(
            f"int phi reaches {np.max(np.abs(big_phi)):.3g} on [{grid.q_min}, {grid.q_max}]; "
            "exponentials overflow, shrink the domain"
        )
    u = _cumulative(np.exp(-big_phi), grid)
    z = np.exp(big_phi / 2) * u
    if not np.all(np.isfinite(z)):
        raise OverflowError("Liouville solution overflowed; shrink the domain")
    return LiouvilleSolution(grid, z, mu_minus)
