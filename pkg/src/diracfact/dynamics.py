"""Heisenberg-picture identities and time evolution.

Covers the oscillation of Sigma, symmetric (Strang) split evolution of the
generalized Jaynes-Cummings Hamiltonian ``Upsilon - omega(q) s3 / 2``, the
Jaynes-Cummings form without rotating-wave approximation, spin precession under
``c (p s1 + m c s3)`` and the squared Landau operator identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .factorization import as_potential, block_operator, general_ladders, smooth_test_vectors
from .grid import PositionGrid
from .operator_algebra import (
    FockSpec,
    OperatorMatrix,
    build_sigma,
    build_susy_hamiltonian,
    commutator,
    fock_operators,
    operator_norm,
    pauli_set,
    project_interior,
    spin_tensor,
)

HERMITIAN_ATOL = 1e-12


def _require_hermitian(op: OperatorMatrix, what: str = "Hamiltonian part"):
    scale = max(1.0, float(np.max(np.abs(op.m))))
    if not op.is_hermitian(HERMITIAN_ATOL * scale):
        raise ValueError(f"{what} is not Hermitian")


def heisenberg_derivative(H: OperatorMatrix, O: OperatorMatrix) -> OperatorMatrix:
    """``dO/dt = i [H, O]`` (hbar = 1)."""
    if H.dim != O.dim:
        raise ValueError(f"dimension mismatch: H is {H.dim}, O is {O.dim}")
    _require_hermitian(H, "H")
    return 1j * commutator(H, O)


def sigma_second_derivative(spec: FockSpec) -> OperatorMatrix:
    """``d^2 Sigma/dt^2 = -[H, [H, Sigma]]`` under the factorized oscillator Hamiltonian."""
    H = build_susy_hamiltonian(spec)["H"]
    sigma = build_sigma(spec)
    return -commutator(H, commutator(H, sigma))


def sigma_oscillation_check(spec: FockSpec) -> float:
    """Interior norm of ``[H, [H, Sigma]] - Sigma``."""
    sigma = build_sigma(spec)
    defect = -sigma_second_derivative(spec) - sigma
    return operator_norm(project_interior(defect, spec.interior_margin))


# --- propagators --------------------------------------------------------------


class SpectralPropagator:
    """``exp(-i t H)`` from one eigendecomposition of a Hermitian ``H``."""

    def __init__(self, H: OperatorMatrix):
        _require_hermitian(H)
        m = H.m
        self.dim = H.dim
        self.diagonal = not np.any(m - np.diag(np.diagonal(m)))
        if self.diagonal:
            self.energies = np.diagonal(m).real.copy()
            self.vectors = None
        else:
            self.energies, self.vectors = np.linalg.eigh(m)

    def matrix(self, t: float) -> np.ndarray:
        phases = np.exp(-1j * t * self.energies)
        if self.diagonal:
            return np.diag(phases)
        return (self.vectors * phases) @ self.vectors.conj().T

    def apply(self, t: float, psi) -> np.ndarray:
        phases = np.exp(-1j * t * self.energies)
        if self.diagonal:
            return phases * psi
        v = self.vectors
        return v @ (phases * (v.conj().T @ psi))


def exact_oracle(H: OperatorMatrix, t: float, psi) -> np.ndarray:
    """Reference propagation ``exp(-i H t) psi`` by full spectral decomposition."""
    return SpectralPropagator(H).apply(t, np.asarray(psi, dtype=complex))


class StrangStepper:
    """``exp(-i dt A/2) exp(-i dt B) exp(-i dt A/2)`` with cached step matrices."""

    def __init__(self, outer: OperatorMatrix, inner: OperatorMatrix):
        if outer.dim != inner.dim:
            raise ValueError("split parts must share one dimension")
        self.outer = SpectralPropagator(outer)
        self.inner = SpectralPropagator(inner)
        self._cache: dict[float, tuple] = {}

    def _factors(self, dt: float):
        if dt not in self._cache:
            half = self.outer.matrix(dt / 2)
            if self.inner.diagonal:
                mid = np.exp(-1j * dt * self.inner.energies)
            else:
                mid = self.inner.matrix(dt)
            self._cache[dt] = (half, mid)
        return self._cache[dt]

    def step(self, dt: float, psi) -> np.ndarray:
        half, mid = self._factors(dt)
        v = half @ psi
        v = mid * v if mid.ndim == 1 else mid @ v
        return half @ v


def strang_step(outer: OperatorMatrix, inner: OperatorMatrix, dt: float, psi) -> np.ndarray:
    return StrangStepper(outer, inner).step(dt, np.asarray(psi, dtype=complex))


# --- evolution plans ----------------------------------------------------------

SCHEMES = ("strang", "exact-oracle")


@dataclass(frozen=True)
class EvolutionPlan:
    """Outer (half-step) and inner (full-step) parts, time increments and scheme.

    ``swap`` exchanges the split roles.
    """

    outer: OperatorMatrix
    inner: OperatorMatrix
    steps: tuple
    scheme: str = "strang"
    swap: bool = False

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(float(s) for s in self.steps))
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; use one of {SCHEMES}")
        if self.outer.dim != self.inner.dim:
            raise ValueError("split parts must share one dimension")
        if any(not s > 0 for s in self.steps):
            raise ValueError("time steps must be positive")
        _require_hermitian(self.outer)
        _require_hermitian(self.inner)

    @classmethod
    def uniform(cls, outer, inner, dt: float, T: float, **kw) -> "EvolutionPlan":
        n = int(round(T / dt))
        if n < 0 or abs(n * dt - T) > 1e-9 * max(1.0, T):
            raise ValueError(f"T={T} is not a whole number of steps dt={dt}")
        return cls(outer, inner, (dt,) * n, **kw)

    @property
    def dim(self) -> int:
        return self.outer.dim

    @property
    def total(self) -> OperatorMatrix:
        return self.outer + self.inner

    @property
    def times(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.steps)])


def spin_expectations(psi: np.ndarray) -> tuple[float, float, float, float]:
    """``<s1>, <s2>, <s3>`` (for ``s (x) I``) and the norm of a spin-mode state."""
    n = psi.shape[0] // 2
    up, down = psi[:n], psi[n:]
    cross = np.vdot(up, down)
    pu = float(np.vdot(up, up).real)
    pd = float(np.vdot(down, down).real)
    return 2 * cross.real, 2 * cross.imag, pu - pd, np.sqrt(pu + pd)


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    observables: dict = field(default_factory=dict)

    @property
    def norm_drift(self) -> float:
        norms = self.observables["norm"]
        return float(np.max(np.abs(norms - norms[0])))


def evolve(plan: EvolutionPlan, psi0) -> Trajectory:
    psi = np.asarray(psi0, dtype=complex)
    if psi.shape != (plan.dim,):
        raise ValueError(f"state has shape {psi.shape}, plan acts on dimension {plan.dim}")
    times = plan.times
    states = [psi]
    if plan.scheme == "exact-oracle":
        prop = SpectralPropagator(plan.total)
        states += [prop.apply(t, psi) for t in times[1:]]
    else:
        outer, inner = (plan.inner, plan.outer) if plan.swap else (plan.outer, plan.inner)
        stepper = StrangStepper(outer, inner)
        for dt in plan.steps:
            psi = stepper.step(dt, psi)
            states.append(psi)
    obs = np.array([spin_expectations(s) for s in states]).reshape(-1, 4)
    return Trajectory(
        times,
        states,
        {"s1": obs[:, 0], "s2": obs[:, 1], "s3": obs[:, 2], "norm": obs[:, 3]},
    )


# --- generalized Jaynes-Cummings ----------------------------------------------


@dataclass(frozen=True)
class JCParts:
    H_JC: OperatorMatrix
    outer: OperatorMatrix
    inner: OperatorMatrix
    omega: np.ndarray


def generalized_jc_hamiltonian(f, grid: PositionGrid, omega_prefactor: float = 0.5) -> JCParts:
    """``H_JC = Upsilon - omega(q) s3 / 2`` with ``omega = prefactor * f'/sqrt f``.

    Upsilon is the outer (half-step) part, the ``s3`` term the inner part.
    """
    spec = as_potential(f)
    fv, df = spec.sample(grid)
    omega = omega_prefactor * df / np.sqrt(fv)
    upsilon = general_ladders(spec, grid).upsilon
    z = np.zeros((grid.n_points, grid.n_points))
    inner = block_operator(z, z, diag=(np.diag(-omega / 2), np.diag(omega / 2)))
    return JCParts(upsilon + inner, upsilon, inner, omega)


def wavepacket(grid: PositionGrid, center: float | None = None, width: float | None = None,
               k0: float = 0.0, spin: Sequence[complex] = (1.0, 0.0)) -> np.ndarray:
    """Normalized Gaussian packet times a spinor, as a spin-grid state vector."""
    lo, hi = grid.q_min, grid.q_max
    center = (lo + hi) / 2 if center is None else center
    width = (hi - lo) / 20 if width is None else width
    g = np.exp(-((grid.q - center) ** 2) / (2 * width**2) + 1j * k0 * grid.q)
    spin = np.asarray(spin, dtype=complex)
    psi = np.concatenate([spin[0] * g, spin[1] * g])
    return psi / np.linalg.norm(psi)


def jc_no_rwa(spec: FockSpec, m: float = 1.0, c: float = 1.0, g: float | None = None,
              hbar: float = 1.0) -> OperatorMatrix:
    """``m c^2 s3 + i hbar g (a^+ + a^-)(s+ - s-)``; ``g`` defaults to ``c / sqrt(2 hbar)``."""
    g = c / np.sqrt(2 * hbar) if g is None else g
    f = fock_operators(spec)
    pauli = pauli_set()
    boson_id = OperatorMatrix(np.eye(spec.dim), "boson")
    H = m * c**2 * spin_tensor(pauli["s3"], boson_id) + (1j * hbar * g) * spin_tensor(
        pauli["s_plus"] - pauli["s_minus"], f["a_plus"] + f["a_minus"]
    )
    return H


# --- spin precession ----------------------------------------------------------


@dataclass(frozen=True)
class ZitterParams:
    p: float
    m: float = 1.0
    c: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.m < 0 or not self.c > 0 or not self.hbar > 0:
            raise ValueError("need m >= 0, c > 0, hbar > 0")

    @property
    def field(self) -> np.ndarray:
        """``b`` in ``H = b . sigma``: ``(p c, 0, m c^2)``."""
        return np.array([self.p * self.c, 0.0, self.m * self.c**2])

    @property
    def angular_frequency(self) -> float:
        """Precession rate ``2 |b| / hbar`` of Pauli expectations."""
        return 2 * float(np.linalg.norm(self.field)) / self.hbar

    @property
    def omega_vector_quoted(self) -> np.ndarray:
        """``(p c, 0, m c^2)/hbar``, half the precession rate of the commutator dynamics."""
        return self.field / self.hbar

    def hamiltonian(self) -> np.ndarray:
        pauli = pauli_set()
        b = self.field
        return b[0] * pauli["s1"].m + b[2] * pauli["s3"].m


def zitter_precession(zp: ZitterParams, sigma0, times) -> np.ndarray:
    """``<sigma>(t)`` for ``H = c (p s1 + m c s3)``: rotation of ``sigma0`` about ``b``.

    Rows are times, columns the three components.
    """
    s0 = np.asarray(sigma0, dtype=float)
    if abs(np.linalg.norm(s0) - 1) > 1e-12:
        raise ValueError("initial Bloch vector must have unit length")
    times = np.asarray(times, dtype=float)
    b = zp.field
    nb = np.linalg.norm(b)
    if nb == 0:
        return np.tile(s0, (times.size, 1))
    axis = b / nb
    theta = zp.angular_frequency * times[:, None]
    along = np.dot(axis, s0) * axis
    return (
        s0 * np.cos(theta)
        + np.cross(axis, s0) * np.sin(theta)
        + along * (1 - np.cos(theta))
    )


def bloch_state(sigma0) -> np.ndarray:
    """Pure qubit state whose Bloch vector is ``sigma0``."""
    x, y, z = np.asarray(sigma0, dtype=float)
    theta = np.arccos(np.clip(z, -1, 1))
    phi = np.arctan2(y, x)
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def zitter_oracle(zp: ZitterParams, sigma0, times) -> np.ndarray:
    """Bloch vectors from ``exp(-i H t / hbar)`` acting on the corresponding pure state."""
    H = OperatorMatrix(zp.hamiltonian(), "spin")
    prop = SpectralPropagator(H)
    psi0 = bloch_state(sigma0)
    pauli = [pauli_set()[k].m for k in ("s1", "s2", "s3")]
    out = []
    for t in np.asarray(times, dtype=float):
        psi = prop.apply(t / zp.hbar, psi0)
        out.append([np.vdot(psi, s @ psi).real for s in pauli])
    return np.array(out)


def measure_frequency(times, series) -> float:
    """Angular frequency from linearly interpolated zero crossings of ``series``."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(series, dtype=float)
    idx = np.flatnonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)
    if idx.size < 2:
        raise ValueError("need at least two zero crossings to measure a frequency")
    crossings = t[idx] - y[idx] * (t[idx + 1] - t[idx]) / (y[idx + 1] - y[idx])
    half_period = (crossings[-1] - crossings[0]) / (crossings.size - 1)
    return np.pi / half_period


# --- Landau levels ------------------------------------------------------------


@dataclass(frozen=True)
class LandauParams:
    B: float
    k_y: float = 0.0
    m: float = 1.0
    e: float = 1.0
    hbar: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not self.B > 0 or not self.m > 0:
            raise ValueError("need B > 0 and m > 0")

    @property
    def omega_c(self) -> float:
        return abs(self.e) * self.B / (self.m * self.c)

    @property
    def x_B(self) -> float:
        return self.hbar * self.k_y / (self.m * self.omega_c)

    @property
    def magnetic_length(self) -> float:
        return float(np.sqrt(self.hbar / (self.m * self.omega_c)))

    @property
    def kappa_squared(self) -> float:
        """``(hbar k_y)^2 - m omega_c^2 x_B^2 + (m c)^2``, the squared ``s3`` coefficient of W."""
        return (self.hbar * self.k_y) ** 2 - self.m * self.omega_c**2 * self.x_B**2 + (
            self.m * self.c
        ) ** 2

    @property
    def sigma3_coefficient(self) -> float:
        return self.m * self.hbar * self.omega_c

    def grid(self, n_points: int = 1024, lengths: float = 10.0) -> PositionGrid:
        """Spectral grid spanning ``x_B +/- lengths`` magnetic lengths."""
        half = lengths * self.magnetic_length
        return PositionGrid(self.x_B - half, self.x_B + half, n_points, "spectral")


@dataclass(frozen=True)
class LandauCheck:
    residual: float
    dimensionless_residual: float
    sigma3_coefficient: float


def landau_identity_check(lp: LandauParams, grid: PositionGrid) -> LandauCheck:
    """Residual of ``W^2 - m hbar omega_c s3 = p_x^2 + m^2 omega_c^2 X^2 + kappa^2`` on smooth vectors.

    ``W = p_x s1 + m omega_c X s2 + kappa s3``. The dimensionless residual is
    scaled by ``(hbar / l_B)^2``.
    """
    k2 = lp.kappa_squared
    if k2 < 0:
        raise ValueError(
            f"(hbar k_y)^2 - m omega_c^2 x_B^2 + (m c)^2 = {k2:.6g} < 0: the s3 coefficient of W "
            "is imaginary in this parameter regime"
        )
    kappa = np.sqrt(k2)
    n = grid.n_points
    d = grid.derivative_matrix
    X = grid.q - lp.x_B
    mw = lp.m * lp.omega_c

    def p(v):
        return -1j * lp.hbar * (d @ v)

    def W(v):
        up, down = v[:n], v[n:]
        # s1 -> swap, s2 -> (-i down, i up), s3 -> (up, -down)
        top = p(down) - 1j * mw * X * down + kappa * up
        bottom = p(up) + 1j * mw * X * up - kappa * down
        return np.concatenate([top, bottom])

    def rhs(v):
        up, down = v[:n], v[n:]
        scalar = lambda u: p(p(u)) + (mw * X) ** 2 * u + k2 * u
        c3 = lp.sigma3_coefficient
        return np.concatenate([scalar(up) + c3 * up, scalar(down) - c3 * down])

    mask = np.tile(grid.interior(), 2)
    worst = 0.0
    for v in smooth_test_vectors(grid):
        r = W(W(v)) - rhs(v)
        worst = max(worst, float(np.max(np.abs(r[mask])) / np.max(np.abs(v))))
    scale = (lp.hbar / lp.magnetic_length) ** 2
    return LandauCheck(worst, worst / scale, lp.sigma3_coefficient)
