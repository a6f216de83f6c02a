"""Higher-order (multi-variable) Hermite polynomials.

``H_n^(m)(x_1, ..., x_m)`` is the n-th coefficient of the generating function

    exp(x_1 t + x_2 t^2 + ... + x_m t^m) = sum_n H_n^(m)(x) t^n / n!

All combinatorial coefficients are exact Python integers, so the routines are
exact for ``int``/``Fraction`` arguments and work elementwise on numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from numbers import Rational
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class HermiteArgs:
    """Argument vector ``(x_1, ..., x_m)``; ``m`` is the polynomial order."""

    values: tuple

    def __init__(self, values):
        values = tuple(values)
        if not values:
            raise ValueError("HermiteArgs needs at least one argument (m >= 1)")
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return len(self.values)

    def __add__(self, other: "HermiteArgs") -> "HermiteArgs":
        if other.m != self.m:
            raise ValueError(f"order mismatch: m={self.m} vs m={other.m}")
        return HermiteArgs(a + b for a, b in zip(self.values, other.values))

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, Rational) for v in self.values)


def _as_args(args) -> HermiteArgs:
    return args if isinstance(args, HermiteArgs) else HermiteArgs(args)


@lru_cache(maxsize=None)
def _recursion_weight(n: int, m: int, k: int) -> int:
    # n! / (k! (n - m k)!) is always an integer
    return factorial(n) // (factorial(k) * factorial(n - m * k))


def _hermite(n: int, xs: tuple):
    m = len(xs)
    if m == 1:
        return xs[0] ** n
    xm = xs[-1]
    lower = xs[:-1]
    total = 0
    for k in range(n // m + 1):
        total = total + _recursion_weight(n, m, k) * xm**k * _hermite(n - m * k, lower)
    return total


def hermite_eval(n: int, args):
    """Evaluate ``H_n^(m)`` by the order-lowering recursion.

    ``H_n^(m) = n! sum_{k<=n//m} x_m^k / (k! (n-mk)!) H_{n-mk}^(m-1)``, with
    ``H_n^(1)(x_1) = x_1^n``. Exact for rational inputs.
    """
    if n < 0:
        raise ValueError(f"degree must be non-negative, got {n}")
    return _hermite(n, _as_args(args).values)


def hermite_series_oracle(n_max: int, args) -> list:
    """Return ``[H_0, ..., H_{n_max}]`` from the power series of the generator.

    Independent of :func:`hermite_eval`: the Taylor coefficients ``c_n`` of
    ``exp(P(t))`` follow from ``E' = P' E``, i.e.
    ``n c_n = sum_k k x_k c_{n-k}``, and ``H_n = n! c_n``.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    xs = _as_args(args).values
    exact = all(isinstance(v, Rational) for v in xs)
    one = Fraction(1) if exact else 1.0
    c = [one + 0 * xs[0]]
    for n in range(1, n_max + 1):
        acc = 0 * c[0]
        for k, xk in enumerate(xs, start=1):
            if k <= n:
                acc = acc + k * xk * c[n - k]
        c.append(acc * Fraction(1, n) if exact else acc / n)
    return [factorial(n) * cn for n, cn in enumerate(c)]


def cubic_args(x, alpha) -> HermiteArgs:
    """``(alpha x^2, alpha x, alpha/3)``, the arguments generated by ``P(x) = alpha x^2``."""
    third = Fraction(1, 3) if isinstance(alpha, Rational) else 1.0 / 3.0
    return HermiteArgs((alpha * x * x, alpha * x, alpha * third))


@dataclass(frozen=True)
class OrderedPowerExpansion:
    """Normal-ordered form of ``O_n = (d/dx + alpha x^2)^n``.

    ``O_n = sum_k C(n, k) c_{n-k}(x) d^k/dx^k`` with
    ``c_j(x) = H_j^(3)(alpha x^2, alpha x, alpha/3)``.
    """

    n: int
    alpha: object

    def coefficient(self, j: int, x):
        """The function ``c_j`` evaluated at ``x`` (scalar or array)."""
        return hermite_eval(j, cubic_args(x, self.alpha))

    @property
    def coeffs(self) -> list[Callable]:
        return [lambda x, j=j: self.coefficient(j, x) for j in range(self.n + 1)]

    def derivative_weights(self, x) -> list:
        """Multipliers of ``f, f', ..., f^(n)`` at ``x``."""
        return [comb(self.n, k) * self.coefficient(self.n - k, x) for k in range(self.n + 1)]

    def apply(self, derivatives: Sequence, x):
        """Apply ``O_n`` to a function given its derivatives ``[f, f', ..., f^(n)]`` at ``x``."""
        if len(derivatives) < self.n + 1:
            raise ValueError(f"need {self.n + 1} derivatives, got {len(derivatives)}")
        w = self.derivative_weights(x)
        total = 0
        for wk, dk in zip(w, derivatives):
            total = total + wk * dk
        return total


def ordered_power(n: int, alpha) -> OrderedPowerExpansion:
    if n < 0:
        raise ValueError(f"power must be non-negative, got {n}")
    return OrderedPowerExpansion(n, alpha)


def derivative_exp_cubic(k: int, a, x):
    """``(d/dx)^k exp(-a x^3/3)`` divided by ``exp(-a x^3/3)``.

    Equals ``H_k^(3)(-a x^2, -a x, -a/3)``; ``a = 3`` gives the derivatives of
    ``exp(-x^3)``.
    """
    if k < 0:
        raise ValueError(f"derivative order must be non-negative, got {k}")
    return hermite_eval(k, cubic_args(x, -a))


def addition_combine(n: int, x, y) -> tuple:
    """Both sides of the addition theorem for third-order polynomials.

    Returns ``(sum_k C(n,k) H_{n-k}(x) H_k(y), H_n(x + y))``.
    """
    x, y = _as_args(x), _as_args(y)
    if x.m != 3 or y.m != 3:
        raise ValueError(f"addition theorem needs m=3 arguments, got m={x.m} and m={y.m}")
    lhs = sum(comb(n, k) * hermite_eval(n - k, x) * hermite_eval(k, y) for k in range(n + 1))
    return lhs, hermite_eval(n, x + y)


def hermite_on_grid(n: int, args) -> np.ndarray:
    """Float evaluation with array-valued arguments, broadcasting scalars."""
    vals = [np.asarray(v, dtype=float) for v in _as_args(args).values]
    shape = np.broadcast_shapes(*(v.shape for v in vals))
    vals = tuple(np.broadcast_to(v, shape) for v in vals)
    return np.asarray(hermite_eval(n, HermiteArgs(vals)), dtype=float) * np.ones(shape)
