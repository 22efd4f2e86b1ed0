"""Chebyshev approximation of the step function and of ``|A| v``.

With ``sign(t) = 2*h0(t) - 1`` we have ``|A| = (2*h0(A) - I) A``. Replacing the
step ``h0`` by its degree ``m-1`` Chebyshev least-squares approximation ``q``
on an interval ``[a, b]`` containing the spectrum gives the polynomial
``p_m(A) = (2*q(A) - I) A``, which needs only products with ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridLevel
from .operators import LinearOperator


def cheb_step_coeffs(alpha: float, m: int) -> np.ndarray:
    """Coefficients ``gamma_0..gamma_{m-1}`` of the step at ``alpha`` on ``[-1, 1]``.

    ``gamma_0 = arccos(alpha)/pi`` and ``gamma_i = 2 sin(i arccos(alpha)) / (pi i)``.
    """
    if not -1.0 < alpha < 1.0:
        raise ValueError(f"step location must satisfy |alpha| < 1, got {alpha}")
    if m < 1:
        raise ValueError("need at least one coefficient")
    phi = np.arccos(alpha)
    i = np.arange(1, m)
    return np.concatenate(([phi / np.pi], 2.0 / np.pi * np.sin(i * phi) / i))


def jackson_factors(m: int) -> np.ndarray:
    """Jackson damping factors for a degree ``m-1`` Chebyshev series."""
    M = m  # number of terms
    k = np.arange(m)
    a = np.pi / (M + 1)
    return ((M - k + 1) * np.cos(k * a) + np.sin(k * a) / np.tan(a)) / (M + 1)


@dataclass(frozen=True)
class ChebStepFilter:
    """Step-function filter ``q_{m-1}`` for spectra inside ``[a, b]`` with ``a < 0 < b``.

    ``damping`` is ``"none"`` (plain truncated series) or ``"jackson"``.
    """

    m: int
    a: float
    b: float
    damping: str = "none"
    alpha: float = field(init=False)
    gamma: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"polynomial degree bound m must be >= 2, got {self.m}")
        if not self.a < 0 < self.b:
            raise ValueError(f"interval [{self.a}, {self.b}] must contain 0 in its interior")
        alpha = -(self.b + self.a) / (self.b - self.a)
        gamma = cheb_step_coeffs(alpha, self.m)
        if self.damping == "jackson":
            gamma = gamma * jackson_factors(self.m)
        elif self.damping != "none":
            raise ValueError(f"unknown damping {self.damping!r}")
        object.__setattr__(self, "alpha", float(alpha))
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def for_level(cls, level: GridLevel, c2: float, m: int, damping: str = "none") -> "ChebStepFilter":
        """Filter for ``L - c2 I`` on ``level`` with interval ``[-c2, 4*dim/h^2 - c2]``."""
        b = 4.0 * level.dim / level.h ** 2 - c2
        if not (c2 > 0 and b > 0):
            raise ValueError(f"shift c2={c2} does not make the operator indefinite on n1d={level.n1d}")
        return cls(int(m), -float(c2), float(b), damping)

    def mapped(self, t):
        """Affine map of ``[a, b]`` onto ``[-1, 1]``."""
        return (2.0 * np.asarray(t) - (self.b + self.a)) / (self.b - self.a)

    def step_scalar(self, t):
        """``q_{m-1}(t)`` via numpy's Chebyshev evaluator (independent of the recurrence)."""
        return np.polynomial.chebyshev.chebval(self.mapped(t), self.gamma)

    def abs_scalar(self, t):
        """``p_m(t) = (2 q_{m-1}(t) - 1) t``."""
        t = np.asarray(t, dtype=float)
        return (2.0 * self.step_scalar(t) - 1.0) * t


def apply_step_poly(filt: ChebStepFilter, op: LinearOperator, v: np.ndarray) -> np.ndarray:
    """``q_{m-1}(op) v`` by the three-term recurrence; ``m-1`` applications of ``op``.

    Accuracy degrades if the spectrum of ``op`` leaves ``[a, b]``; this is not detected.
    """
    s = 2.0 / (filt.b - filt.a)
    o = (filt.b + filt.a) / (filt.b - filt.a)
    g = filt.gamma
    v0 = np.asarray(v, dtype=float)
    v1 = s * op(v0) - o * v0
    w = g[0] * v0 + g[1] * v1
    for i in range(2, filt.m):
        v0, v1 = v1, 2.0 * (s * op(v1) - o * v1) - v0
        w += g[i] * v1
    return w


def apply_poly_abs(filt: ChebStepFilter, op: LinearOperator, v: np.ndarray) -> np.ndarray:
    """``p_m(op) v ~ |op| v``; exactly ``m`` applications of ``op``."""
    t = op(v)
    return 2.0 * apply_step_poly(filt, op, t) - t


def poly_abs_operator(filt: ChebStepFilter, op: LinearOperator) -> LinearOperator:
    """``p_m(op)`` as an operator. Symmetric; definiteness depends on the filter."""
    return LinearOperator(op.n, lambda v: apply_poly_abs(filt, op, v), True, False, f"p{filt.m}({op.name})")


def abs_relative_error(filt: ChebStepFilter, t: np.ndarray) -> tuple:
    """Min and max of ``|p_m(t) - |t|| / |t|`` over the points ``t``."""
    t = np.asarray(t, dtype=float)
    err = np.abs(filt.abs_scalar(t) - np.abs(t)) / np.abs(t)
    return float(err.min()), float(err.max())
