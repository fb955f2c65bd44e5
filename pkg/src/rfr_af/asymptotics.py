"""Closed-form asymptotic test error and sensitivity of random features regression.

Three limits are covered:

* ``R1``: ridgeless (lambda -> 0+), finite psi1 = N/d and psi2 = n/d;
* ``R2``: highly overparameterized (psi1 -> inf), ridge lambda >= 0;
* ``R3``: large sample (psi2 -> inf), ridge lambda >= 0.

In R1 the AF enters through ``chi = chi(zeta_sq, min(psi1, psi2))``.  Error and
sensitivity are evaluated through exact rational functions of ``chi``
obtained by substituting ``zeta_sq(chi)`` into the degree-six polynomial ratios.
These reduced forms are finite at the linear-AF end point ``chi = x_R``, so no
separate limit branch is needed.  The raw polynomial ratios are kept in
:func:`error_r1_polynomial` and :func:`sensitivity_r1_polynomial` as an
independent cross-check.

In R2 and R3 the AF enters only through ``omega``.  It is computed from the
moments in homogeneous form, so ``mu_star = 0`` with ``lambda > 0`` needs no
special casing.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InterpolationThreshold
from .moments import Moments

__all__ = [
    "Regime",
    "RegimeParams",
    "RegimeEvaluation",
    "ZETA_SQ_INF",
    "chi",
    "omega",
    "zeta_sq_from_chi",
    "r1_interval",
    "r1_components",
    "evaluate_r1_x",
    "evaluate_r1_grid",
    "evaluate_r2_grid",
    "evaluate_r3_grid",
    "evaluate_r2_omega",
    "evaluate_r3_omega",
    "omega_from_moments",
    "error_r1",
    "sensitivity_r1",
    "error_r1_polynomial",
    "sensitivity_r1_polynomial",
    "error_r2",
    "sensitivity_r2",
    "error_r3",
    "sensitivity_r3",
    "objective",
]

# zeta^2 above this is treated as infinite (linear AF).
ZETA_SQ_INF = 1e12


class Regime(str, Enum):
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"

    @classmethod
    def parse(cls, value: "str | Regime") -> "Regime":
        if isinstance(value, Regime):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown regime {value!r}; expected R1, R2 or R3") from None


@dataclass(frozen=True)
class RegimeParams:
    """Problem constants.

    ``psi1`` is ignored in R2 and ``psi2`` in R3; ``lam`` is ignored in R1.
    ``rho = F1^2 / (F_star^2 + tau^2)`` is infinite in the noiseless case.
    """

    psi1: float
    psi2: float
    lam: float = 0.0
    alpha: float = 0.0
    F1: float = 1.0
    F_star: float = 0.0
    tau: float = 0.0

    def __post_init__(self) -> None:
        if not (self.psi1 > 0 and self.psi2 > 0):
            raise ValueError("psi1 and psi2 must be positive")
        if not self.lam >= 0:
            raise ValueError("lambda must be nonnegative")
        if not 0 <= self.alpha < 1:
            raise ValueError("alpha must lie in [0, 1)")
        if not self.F1 > 0:
            raise ValueError("F1 must be positive")
        if not (self.F_star >= 0 and self.tau >= 0):
            raise ValueError("F_star and tau must be nonnegative")

    @property
    def noise_sq(self) -> float:
        """``F_star^2 + tau^2``."""
        return self.F_star**2 + self.tau**2

    @property
    def rho(self) -> float:
        n = self.noise_sq
        return math.inf if n == 0 else self.F1**2 / n

    @property
    def inv_rho(self) -> float:
        return self.noise_sq / self.F1**2

    def replace(self, **changes) -> "RegimeParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "psi1": self.psi1,
            "psi2": self.psi2,
            "lambda": self.lam,
            "alpha": self.alpha,
            "F1": self.F1,
            "F_star": self.F_star,
            "tau": self.tau,
        }


@dataclass(frozen=True)
class RegimeEvaluation:
    error: float
    sensitivity: float
    objective: float

    @classmethod
    def combine(cls, error: float, sensitivity: float, alpha: float) -> "RegimeEvaluation":
        if alpha == 0:
            obj = error
        else:
            obj = (1.0 - alpha) * error + alpha * sensitivity
        return cls(error, sensitivity, obj)


# ---------------------------------------------------------------------------
# chi and omega
# ---------------------------------------------------------------------------


def chi(zeta_sq: float, psi: float) -> float:
    """The ridgeless resolvent variable ``chi(zeta^2, psi)``.

    Lies in ``[-psi, min(0, 1 - psi)]``: ``-psi`` at ``zeta_sq = 0`` and
    ``min(0, 1 - psi)`` as ``zeta_sq -> inf``.
    """
    if not psi > 0:
        raise ValueError("psi must be positive")
    if not zeta_sq >= 0:
        raise ValueError("zeta_sq must be nonnegative")
    x_r = min(0.0, 1.0 - psi)
    if zeta_sq == 0:
        return -psi
    if zeta_sq > ZETA_SQ_INF:
        return x_r
    a = (psi - 1.0) * zeta_sq - 1.0
    root = math.sqrt(a * a + 4.0 * zeta_sq * psi)
    if a <= 0:
        x = -2.0 * psi / (root - a)
    else:
        x = -(root + a) / (2.0 * zeta_sq)
    return min(max(x, -psi), x_r)


def zeta_sq_from_chi(x: float, psi: float) -> float:
    """Invert :func:`chi`: the ``zeta^2`` with ``chi(zeta^2, psi) = x``."""
    x_r = min(0.0, 1.0 - psi)
    if x <= -psi:
        return 0.0
    if x >= x_r:
        return math.inf
    return (x + psi) / (x * (x + psi - 1.0))


def omega(zeta_sq: float, psi: float, lambda_bar: float) -> float:
    """The regularized resolvent variable ``omega(zeta^2, psi, lambda_bar)`` (always <= 0).

    ``lambda_bar = lambda / mu_star^2``.  Limits: ``0`` when ``lambda_bar = inf``;
    for ``zeta_sq = inf`` with finite ``lambda_bar`` it is ``-psi / (1 - psi)``
    if ``psi < 1`` and ``-inf`` otherwise.  The pair ``zeta_sq = lambda_bar = inf``
    is ambiguous; use :func:`omega_from_moments` instead.
    """
    if not psi > 0:
        raise ValueError("psi must be positive")
    if not (zeta_sq >= 0 and lambda_bar >= 0):
        raise ValueError("zeta_sq and lambda_bar must be nonnegative")
    if math.isinf(lambda_bar):
        if math.isinf(zeta_sq):
            raise ValueError("omega is ambiguous for zeta_sq = lambda_bar = inf; use omega_from_moments")
        return 0.0
    if zeta_sq > ZETA_SQ_INF:
        return -psi / (1.0 - psi) if psi < 1 else -math.inf
    k = lambda_bar * psi + 1.0
    b = (psi - 1.0) * zeta_sq - k
    root = math.sqrt(b * b + 4.0 * psi * zeta_sq * k)
    if b < 0:
        return -2.0 * psi * zeta_sq / (root - b)
    return -(root + b) / (2.0 * k)


def omega_from_moments(mu1_sq: float, mu_star_sq: float, lam: float, psi: float) -> tuple[float, float]:
    """Return ``(omega, omega / zeta^2)`` computed in homogeneous moment form.

    Multiplying the defining quadratic by ``mu_star^2`` gives coefficients
    ``K = lam psi + mu_star^2`` and ``B = (psi - 1) mu1^2 - K`` that stay finite
    at ``mu_star = 0``.
    """
    k = lam * psi + mu_star_sq
    if k == 0:
        # Linear AF without ridge.
        if mu1_sq == 0:
            return 0.0, 0.0
        if psi < 1:
            return -psi / (1.0 - psi), 0.0
        return -math.inf, -(psi - 1.0)
    b = (psi - 1.0) * mu1_sq - k
    root = math.sqrt(b * b + 4.0 * psi * mu1_sq * k)
    if b < 0:
        den = root - b
        w = -2.0 * psi * mu1_sq / den
        t = -2.0 * psi * mu_star_sq / den
    else:
        w = -(root + b) / (2.0 * k)
        t = w * mu_star_sq / mu1_sq
    return w, t


# ---------------------------------------------------------------------------
# R1
# ---------------------------------------------------------------------------


def r1_interval(psi1: float, psi2: float) -> tuple[float, float]:
    """``(x_L, x_R) = (-psi, min(0, 1 - psi))`` with ``psi = min(psi1, psi2)``."""
    psi = min(psi1, psi2)
    return -psi, min(0.0, 1.0 - psi)


def _div(num: float, den: float) -> float:
    if den == 0:
        return math.inf if num >= 0 else -math.inf
    return num / den


def _r1_generic(x, p1: float, p2: float):
    """Reduced rational forms at interior points; works on floats and numpy arrays."""
    d12 = p1 - p2
    if p1 < p2:
        bias = p2 * (p1 + x - 1.0) / d12
        var = -p1 / d12 + 0.0 * x
        sv = -(p1 + x) / d12
        if p1 == 1.0:
            sb = -(x + 1.0) * (x * x + (4.0 - 2.0 * p2) * x + 2.0 - 2.0 * p2) / ((p2 - 1.0) * (x + 2.0))
        else:
            num = (p1 + x) * (
                2 * p1**3 - p1**2 * p2 + 6 * p1**2 * x - 3 * p1**2 - 3 * p1 * p2 * x + p1 * p2
                + 5 * p1 * x**2 - 4 * p1 * x + p1 - 2 * p2 * x**2 + p2 * x + x**3 - x**2
            )
            sb = num / (d12 * ((x + p1) ** 2 - p1))
        return bias, var, sb, sv
    den = d12 * ((x + p2) ** 2 - p2)
    bias = -p2 * (p2 + x - 1.0) * (p1 * p2 + p1 * x - p1 + p2 * x + x * x) / den
    var = -(p1 * p2**2 + 2 * p1 * p2 * x + p1 * x**2 - 2 * p2**3 - 4 * p2**2 * x + p2**2 - 2 * p2 * x**2) / den
    sb = -(p2 + x) * (
        -p1 * p2**2 - 3 * p1 * p2 * x + p1 * p2 - 2 * p1 * x**2 + p1 * x + 2 * p2**3 + 6 * p2**2 * x
        - 3 * p2**2 + 5 * p2 * x**2 - 4 * p2 * x + p2 + x**3 - x**2
    ) / den
    sv = (p2 + x) * (-p1 * p2 - p1 * x + 2 * p2**2 + 3 * p2 * x - p2 + x**2) / den
    return bias, var, sb, sv


def r1_components(x: float, psi1: float, psi2: float) -> tuple[float, float, float, float]:
    """Bias, variance and the two sensitivity coefficients in R1 as functions of ``x = chi``.

    Returns ``(B, V, SB, SV)`` with ``E = F1^2 B + (F_star^2 + tau^2) V + F_star^2``
    and ``S = F1^2 SB + (F_star^2 + tau^2) SV``.  At ``x = x_R`` the removable
    singularities are replaced by their limits; for ``psi2 = 1 < psi1`` the
    variance terms are infinite there.
    """
    if psi1 == psi2:
        raise InterpolationThreshold("psi1 == psi2: the ridgeless objective is undefined")
    p1, p2 = psi1, psi2
    d12 = p1 - p2
    _, x_r = r1_interval(p1, p2)
    if x == x_r:
        if p1 < p2:
            if p1 != 1.0:
                bias, var, _, sv = _r1_generic(x, p1, p2)
                return bias, var, (1.0 if p1 > 1 else p1 * (2.0 * p1 - p2 - 1.0) / d12), sv
        elif p2 > 1:
            return 0.0, (p1 + p2 * p2 - 2 * p2) / (d12 * (p2 - 1.0)), 1.0, (p1 - 1.0) / (d12 * (p2 - 1.0))
        elif p2 < 1:
            c = p2 * (p1 - 2 * p2 + 1.0)
            return -p1 * (p2 - 1.0) / d12, -c / (d12 * (p2 - 1.0)), c / d12, -c / (d12 * (p2 - 1.0))
        else:
            return 0.0, math.inf, 1.0, math.inf
    return tuple(float(v) for v in _r1_generic(x, p1, p2))


def evaluate_r1_grid(xs, params: RegimeParams):
    """Vectorised R1 ``(error, sensitivity, objective)`` over an array of ``chi`` values."""
    xs = np.asarray(xs, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        bias, var, sb, sv = (np.asarray(v, dtype=float) for v in _r1_generic(xs, params.psi1, params.psi2))
    _, x_r = r1_interval(params.psi1, params.psi2)
    at_r = xs == x_r
    if np.any(at_r):
        vals = r1_components(x_r, params.psi1, params.psi2)
        for arr, v in zip((bias, var, sb, sv), vals):
            arr[at_r] = v
    f1sq, noise = params.F1**2, params.noise_sq
    err = f1sq * bias + (noise * var if noise else 0.0) + params.F_star**2
    sens = f1sq * sb + (noise * sv if noise else 0.0)
    return err, sens, (1.0 - params.alpha) * err + params.alpha * sens


def evaluate_r1_x(x: float, params: RegimeParams) -> RegimeEvaluation:
    """Error, sensitivity and objective in R1 at ``chi = x``."""
    bias, var, sb, sv = r1_components(x, params.psi1, params.psi2)
    f1sq, fs_sq, noise = params.F1**2, params.F_star**2, params.noise_sq
    err = f1sq * bias + (noise * var if noise else 0.0) + fs_sq
    sens = f1sq * sb + (noise * sv if noise else 0.0)
    return RegimeEvaluation.combine(err, sens, params.alpha)


def _r1_x(moments: Moments, params: RegimeParams) -> float:
    if params.psi1 == params.psi2:
        raise InterpolationThreshold("psi1 == psi2: the ridgeless objective is undefined")
    psi = min(params.psi1, params.psi2)
    if moments.mu_star_sq == 0:
        if moments.mu1 == 0:
            return -psi
        return min(0.0, 1.0 - psi)
    return chi(moments.zeta_sq, psi)


def error_r1(moments: Moments, params: RegimeParams) -> float:
    """Ridgeless asymptotic test error."""
    return evaluate_r1_x(_r1_x(moments, params), params).error


def sensitivity_r1(moments: Moments, params: RegimeParams) -> float:
    """Ridgeless asymptotic sensitivity."""
    return evaluate_r1_x(_r1_x(moments, params), params).sensitivity


def _r1_polys(z: float, x: float, p1: float, p2: float):
    z2, z3 = z * z, z * z * z
    e0 = (
        -(x**5) * z3 + 3 * x**4 * z2 + (p1 * p2 - p2 - p1 + 1) * x**3 * z3 - 2 * x**3 * z2 - 3 * x**3 * z
        + (p1 + p2 - 3 * p1 * p2 + 1) * x**2 * z2 + 2 * x**2 * z + x**2 + 3 * p1 * p2 * x * z - p1 * p2
    )
    e1 = p2 * x**3 * z2 - p2 * x**2 * z + p1 * p2 * x * z - p1 * p2
    e2 = (
        x**5 * z3 - 3 * x**4 * z2 + (p1 - 1) * x**3 * z3 + 2 * x**3 * z2 + 3 * x**3 * z
        + (-p1 - 1) * x**2 * z2 - 2 * x**2 * z - x**2
    )
    d0 = (
        x**5 * z3 - 3 * x**4 * z2 + (p1 + p2 - p1 * p2 - 1) * x**3 * z3 + 2 * x**3 * z2 + 3 * x**3 * z
        + (3 * p1 * p2 - p2 - p1 - 1) * x**2 * z2 - 2 * x**2 * z - x**2 - 3 * p1 * p2 * x * z + p1 * p2
    )
    d1 = (
        x**6 * z3 - 2 * x**5 * z2 - (p1 * p2 - p1 - p2 + 1) * x**4 * z3 + x**4 * z2 + x**4 * z
        - 2 * (1 - p1 * p2) * x**3 * z2 - (p1 + p2 + p1 * p2 + 1) * x**2 * z - x**2
    )
    d2 = -(p1 - 1) * x**3 * z2 - x**3 * z + (p1 + 1) * x**2 * z + x**2
    return e0, e1, e2, d0, d1, d2


def error_r1_polynomial(moments: Moments, params: RegimeParams) -> float:
    """R1 error from the raw degree-six polynomial ratios (finite ``zeta^2`` only).

    Loses accuracy when ``chi * zeta^2`` approaches 1; kept for cross-checks.
    """
    if params.psi1 == params.psi2:
        raise InterpolationThreshold("psi1 == psi2: the ridgeless objective is undefined")
    z = moments.zeta_sq
    if not 0 < z < math.inf:
        raise ValueError("the polynomial form needs 0 < zeta_sq < inf")
    x = chi(z, min(params.psi1, params.psi2))
    e0, e1, e2, *_ = _r1_polys(z, x, params.psi1, params.psi2)
    return params.F1**2 * e1 / e0 + params.noise_sq * e2 / e0 + params.F_star**2


def sensitivity_r1_polynomial(moments: Moments, params: RegimeParams) -> float:
    """R1 sensitivity from the raw polynomial ratios (finite ``zeta^2`` only)."""
    if params.psi1 == params.psi2:
        raise InterpolationThreshold("psi1 == psi2: the ridgeless objective is undefined")
    z = moments.zeta_sq
    if not 0 < z < math.inf:
        raise ValueError("the polynomial form needs 0 < zeta_sq < inf")
    x = chi(z, min(params.psi1, params.psi2))
    _, _, _, d0, d1, d2 = _r1_polys(z, x, params.psi1, params.psi2)
    return z * (params.F1**2 * d1 / ((x * z - 1.0) * d0) + params.noise_sq * d2 / d0)


# ---------------------------------------------------------------------------
# R2 and R3
# ---------------------------------------------------------------------------


def _wide_terms_small(w, psi: float):
    q = (psi - 1.0) * w * w - 2.0 * psi * w + psi
    den = (w - 1.0) * q
    return (
        (psi * w - psi) / den,
        (w**3 - w**2) / den,
        w * w * (w * (psi - 1.0) - 1.0 - psi) / den,
        w * w * (w - 1.0) / den,
    )


def _wide_terms_large(u, psi: float):
    # Same rational functions rewritten in u = 1 / omega.
    qu = psi - 1.0 - 2.0 * psi * u + psi * u * u
    den = (1.0 - u) * qu
    return (
        (psi * u * u - psi * u**3) / den,
        1.0 / qu,
        ((psi - 1.0) - (1.0 + psi) * u) / den,
        1.0 / qu,
    )


def _wide_terms(w: float, psi: float) -> tuple[float, float, float, float]:
    """Return ``(B_wide, V_wide, S_F1, S_noise)`` at ``omega = w`` for sample ratio ``psi``.

    For ``w < -1`` the rational functions are evaluated in ``u = 1/w`` so
    that ``w = -inf`` is the plain value at ``u = 0``.
    """
    if w >= -1.0:
        return _wide_terms_small(w, psi)
    u = 1.0 / w
    try:
        return _wide_terms_large(u, psi)
    except ZeroDivisionError:
        # psi == 1 with a linear ridgeless AF: the variance blows up.
        return 0.0, math.inf, math.inf, math.inf


def evaluate_r2_omega(w: float, params: RegimeParams) -> RegimeEvaluation:
    """Error, sensitivity and objective in R2 as functions of ``omega_2``."""
    bias, var, s_f1, s_noise = _wide_terms(w, params.psi2)
    f1sq, noise = params.F1**2, params.noise_sq
    err = f1sq * bias + (noise * var if noise else 0.0) + params.F_star**2
    sens = f1sq * s_f1 + (noise * s_noise if noise else 0.0)
    return RegimeEvaluation.combine(err, sens, params.alpha)


def evaluate_r3_omega(w: float, t: float, params: RegimeParams) -> RegimeEvaluation:
    """Error, sensitivity and objective in R3 at ``omega_1 = w`` with ``t = omega_1 / zeta^2``."""
    psi = params.psi1
    f1sq = params.F1**2
    if math.isinf(w):
        bias, s = 0.0, f1sq
    else:
        q = (psi - 1.0) * w * w - 2.0 * psi * w + psi
        bias = (t * (w * w - w) + psi * w - psi) / ((w - 1.0) * q)
        s = f1sq * (1.0 + 2.0 / (w - 1.0) + psi / q)
    err = f1sq * bias + params.F_star**2
    return RegimeEvaluation.combine(err, s, params.alpha)


def _omega(moments: Moments, params: RegimeParams, psi: float) -> tuple[float, float]:
    return omega_from_moments(moments.mu1**2, moments.mu_star_sq, params.lam, psi)


def error_r2(moments: Moments, params: RegimeParams) -> float:
    """Highly overparameterized asymptotic test error."""
    return evaluate_r2_omega(_omega(moments, params, params.psi2)[0], params).error


def sensitivity_r2(moments: Moments, params: RegimeParams) -> float:
    """Highly overparameterized asymptotic sensitivity."""
    return evaluate_r2_omega(_omega(moments, params, params.psi2)[0], params).sensitivity


def error_r3(moments: Moments, params: RegimeParams) -> float:
    """Large-sample asymptotic test error."""
    w, t = _omega(moments, params, params.psi1)
    return evaluate_r3_omega(w, t, params).error


def sensitivity_r3(moments: Moments, params: RegimeParams) -> float:
    """Large-sample asymptotic sensitivity."""
    w, t = _omega(moments, params, params.psi1)
    return evaluate_r3_omega(w, t, params).sensitivity


def objective(regime: "str | Regime", moments: Moments, params: RegimeParams) -> RegimeEvaluation:
    """``(E, S, (1 - alpha) E + alpha S)`` in the requested regime."""
    regime = Regime.parse(regime)
    if regime is Regime.R1:
        return evaluate_r1_x(_r1_x(moments, params), params)
    if regime is Regime.R2:
        return evaluate_r2_omega(_omega(moments, params, params.psi2)[0], params)
    w, t = _omega(moments, params, params.psi1)
    return evaluate_r3_omega(w, t, params)


def _wide_terms_grid(w, psi: float):
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        small = _wide_terms_small(np.maximum(w, -1.0), psi)
        u = 1.0 / np.minimum(w, -1.0)
        large = _wide_terms_large(u, psi)
    pick = w >= -1.0
    return tuple(np.where(pick, a, b) for a, b in zip(small, large))


def evaluate_r2_grid(ws, params: RegimeParams):
    """Vectorised R2 ``(error, sensitivity, objective)`` over an array of ``omega_2`` values."""
    bias, var, s_f1, s_noise = _wide_terms_grid(ws, params.psi2)
    f1sq, noise = params.F1**2, params.noise_sq
    err = f1sq * bias + (noise * var if noise else 0.0) + params.F_star**2
    sens = f1sq * s_f1 + (noise * s_noise if noise else 0.0)
    return err, sens, (1.0 - params.alpha) * err + params.alpha * sens


def evaluate_r3_grid(ws, params: RegimeParams):
    """Vectorised R3 ``(error, sensitivity, objective)`` for linear AFs (``omega / zeta^2 = 0``)."""
    w = np.asarray(ws, dtype=float)
    psi = params.psi1
    f1sq = params.F1**2
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        q = (psi - 1.0) * w * w - 2.0 * psi * w + psi
        bias = (psi * w - psi) / ((w - 1.0) * q)
        sens = f1sq * (1.0 + 2.0 / (w - 1.0) + psi / q)
    err = f1sq * bias + params.F_star**2
    return err, sens, (1.0 - params.alpha) * err + params.alpha * sens
