"""Minimal-norm activation functions with prescribed Gaussian moments.

Under ``||s||_2 = sqrt(E s'(Z)^2)`` the minimizers are the quadratics
``a x^2 + mu1 x + (mu0 - a)`` with ``a = +-mu_star / sqrt(2)``.

Under ``||s||_1 = E |s'(Z)|`` every AF obeys ``||s||_1 >= |E s'(Z)| = |mu1|``,
with equality for any monotone AF.  The symmetric saturated-linear family
``mu0 + b clip(x, -s, s)`` attains every ``zeta^2 >= 2 / (pi - 2)``.  Smaller
ratios are out of its reach, and there a scaled shifted ReLU, also monotone,
is returned instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special
from scipy.optimize import brentq

from .errors import InvalidMoments, SolverDiverged
from .moments import WINDOW, ActivationSpec, Moments

__all__ = [
    "SynthesizedAF",
    "erf",
    "l1_rhs",
    "shifted_relu_zeta_sq",
    "synthesize_l1",
    "synthesize_l2",
    "SATLIN_ZETA_SQ_MIN",
]

_SQRT2 = math.sqrt(2.0)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
# zeta^2 of the sign function, the s -> 0 end of the saturated-linear family.
SATLIN_ZETA_SQ_MIN = 2.0 / (math.pi - 2.0)
S_CAP = 40.0
# Keep the ReLU kink well inside the quadrature window.
SHIFT_CAP = WINDOW - 2.0


def erf(x: float) -> float:
    """Gauss error function (scipy's double-precision implementation)."""
    return float(special.erf(x))


@dataclass(frozen=True)
class SynthesizedAF:
    """A concrete AF together with the moments it was built for.

    ``norm_kind`` is ``"one"`` or ``"two"``.  ``s_param`` is the saturation
    point of a saturated-linear AF (``inf`` for the linear limit) and ``None``
    for other families.
    """

    af: ActivationSpec
    target: Moments
    norm_kind: str
    norm_value: float
    s_param: Optional[float] = None

    def to_dict(self) -> dict:
        out = self.af.to_dict()
        out.update(
            {
                "target": self.target.to_dict(),
                "norm_kind": self.norm_kind,
                "norm_value": self.norm_value,
            }
        )
        if self.s_param is not None:
            out["s"] = self.s_param
        return out


def _check(target: Moments) -> None:
    if not target.mu_star_sq >= 0:
        raise InvalidMoments(f"mu_star_sq must be >= 0, got {target.mu_star_sq}")


def synthesize_l2(target: Moments, sign: str = "+") -> SynthesizedAF:
    """Quadratic AF with minimal ``||.||_2`` norm; ``sign`` picks one of the two minimizers."""
    _check(target)
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    mu0, mu1 = target.mu0, target.mu1
    norm = math.sqrt(mu1 * mu1 + 2.0 * target.mu_star_sq)
    if target.mu_star_sq == 0.0:
        return SynthesizedAF(ActivationSpec.linear(mu1, mu0), target, "two", norm)
    a = (1.0 if sign == "+" else -1.0) * target.mu_star / _SQRT2
    return SynthesizedAF(ActivationSpec.quadratic(a, mu1, mu0 - a), target, "two", norm)


def l1_rhs(s):
    """``zeta^2`` of ``clip(x, -s, s)`` as a function of the saturation point ``s >= 0``.

    Written with the scaled complementary error function so that the ratio
    stays accurate and monotone for large ``s``.
    """
    s = np.asarray(s, dtype=float)
    y = s / _SQRT2
    e = special.erf(y)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        den = special.erfcx(y) * (s * s + e) - _SQRT_2_OVER_PI * s
        out = e * e * np.exp(0.5 * s * s) / den
    out = np.where(s == 0, SATLIN_ZETA_SQ_MIN, out)
    return out if out.ndim else float(out)


def _solve_s(zeta_sq: float) -> float:
    hi = 1.0
    while l1_rhs(hi) < zeta_sq:
        if hi >= S_CAP:
            raise SolverDiverged(f"no saturation point up to s = {S_CAP} reaches zeta^2 = {zeta_sq}")
        hi = min(2.0 * hi, S_CAP)
    lo = 0.0
    tol = 1e-12 * max(1.0, zeta_sq)
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return mid
        r = l1_rhs(mid)
        if abs(r - zeta_sq) <= tol:
            return mid
        if r < zeta_sq:
            lo = mid
        else:
            hi = mid


def shifted_relu_zeta_sq(c: float) -> float:
    """``zeta^2`` of ``max(x - c, 0)``; decreasing in ``c``, 2.75 at ``c = 0``."""
    phi = math.exp(-0.5 * c * c) / math.sqrt(2.0 * math.pi)
    m = math.sqrt(math.pi / 2.0) * float(special.erfcx(c / _SQRT2))
    den = (1.0 + c * c) * m - c - phi * ((1.0 - c * m) ** 2 + m * m)
    return phi * m * m / den


def _shifted_relu(target: Moments) -> ActivationSpec:
    z = target.zeta_sq
    hi = 1.0
    while shifted_relu_zeta_sq(hi) > z:
        if hi >= SHIFT_CAP:
            raise SolverDiverged(f"no shift up to {SHIFT_CAP} reaches zeta^2 = {z}")
        hi = min(2.0 * hi, SHIFT_CAP)
    c = brentq(lambda v: shifted_relu_zeta_sq(v) - z, -1.0, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    tail = 0.5 * float(special.erfc(c / _SQRT2))
    phi = math.exp(-0.5 * c * c) / math.sqrt(2.0 * math.pi)
    b = target.mu1 / tail
    return ActivationSpec.shifted_relu(c, b, target.mu0 - b * (phi - c * tail))


def synthesize_l1(target: Moments) -> SynthesizedAF:
    """Monotone AF with minimal ``||.||_1`` norm ``|mu1|``.

    Saturated-linear when ``zeta^2 >= 2 / (pi - 2)``; otherwise a scaled and
    shifted ReLU.
    """
    _check(target)
    mu0, mu1 = target.mu0, target.mu1
    norm = abs(mu1)
    if target.mu_star_sq == 0.0:
        return SynthesizedAF(ActivationSpec.linear(mu1, mu0), target, "one", norm, math.inf)
    if mu1 == 0.0:
        raise InvalidMoments("mu1 = 0 with mu_star > 0 has no monotone realization")
    if target.zeta_sq < SATLIN_ZETA_SQ_MIN:
        return SynthesizedAF(_shifted_relu(target), target, "one", norm)
    s = _solve_s(target.zeta_sq)
    if s == 0.0:
        return SynthesizedAF(_shifted_relu(target), target, "one", norm)
    b = mu1 / erf(s / _SQRT2)
    return SynthesizedAF(ActivationSpec.saturated_linear(mu0, b, s), target, "one", norm, s)
