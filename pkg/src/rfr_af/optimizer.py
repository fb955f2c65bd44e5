"""Optimal activation-function moments in the three asymptotic regimes.

The objective ``O = (1 - alpha) E + alpha S`` depends on the AF through a
single scalar ``x``:

* R1: ``x = chi`` on ``[x_L, x_R] = [-psi, min(0, 1 - psi)]``; the optimum is
  picked by a case table driven by curvature thresholds (``beta``), slope and
  level thresholds (``alpha_L``, ``alpha_C``, ``alpha_R``) and the real roots of
  a quintic ``p(x)``, the numerator of ``dO/dx``;
* R2: ``x = (1 + omega_2) / (omega_2 - 1)``, where ``O`` is convex and the
  optimum is the unique root of a quartic;
* R3: the optimal AF is linear; ``x`` is the root of the same quartic with
  ``rho = inf`` and ``psi2`` replaced by ``psi1``.

All polynomial coefficients are stored in ascending order and normalized so
that ``F1^2 = 1`` and ``F_star^2 + tau^2 = 1/rho``.  This keeps ``rho = inf``
finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .asymptotics import (
    Regime,
    RegimeParams,
    evaluate_r1_grid,
    evaluate_r1_x,
    evaluate_r2_grid,
    evaluate_r2_omega,
    evaluate_r3_grid,
    objective,
    r1_interval,
    zeta_sq_from_chi,
)
from .errors import (
    DegenerateLeadingCoefficient,
    InterpolationThreshold,
    RootNotFound,
    TieBreakAmbiguous,
)
from .moments import Moments

__all__ = [
    "Optimum",
    "R1Thresholds",
    "real_roots_in_interval",
    "r1_polynomial",
    "r1_thresholds",
    "r2_polynomial",
    "r3_polynomial",
    "solve_r1",
    "solve_r2",
    "solve_r3",
    "solve",
    "grid_oracle",
    "TIE_TOL",
]

TIE_TOL = 1e-12
_DEDUP = 1e-9


# ---------------------------------------------------------------------------
# Root isolation
# ---------------------------------------------------------------------------


def _trim(coeffs: Sequence[float]) -> list[float]:
    c = [float(v) for v in coeffs]
    if not c or all(abs(v) <= 1e-300 for v in c):
        raise DegenerateLeadingCoefficient("all polynomial coefficients vanish")
    while abs(c[-1]) <= 1e-300:
        c.pop()
    return c


def _horner(c: Sequence[float], x: float) -> float:
    acc = 0.0
    for v in reversed(c):
        acc = acc * x + v
    return acc


def _scale(c: Sequence[float], x: float) -> float:
    ax = abs(x)
    acc = 0.0
    for v in reversed(c):
        acc = acc * ax + abs(v)
    return acc


def _bisect(c: Sequence[float], a: float, b: float, fa: float) -> float:
    for _ in range(200):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = _horner(c, m)
        if fm == 0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _roots_rec(c: list[float], lo: float, hi: float, tol: float) -> list[float]:
    deg = len(c) - 1
    if deg <= 0:
        return []
    if deg == 1:
        r = -c[0] / c[1]
        return [r] if lo < r < hi else []
    dc = [i * c[i] for i in range(1, len(c))]
    crit = _roots_rec(dc, lo, hi, tol)
    knots = [lo, *crit, hi]
    roots: list[float] = []
    for cp in crit:
        # A critical point where p vanishes is an even-multiplicity root.
        if abs(_horner(c, cp)) <= tol * _scale(c, cp):
            roots.append(cp)
    for a, b in zip(knots[:-1], knots[1:]):
        fa, fb = _horner(c, a), _horner(c, b)
        if fa == 0 or fb == 0 or (fa < 0) == (fb < 0):
            continue
        roots.append(_bisect(c, a, b, fa))
    return sorted(roots)


def real_roots_in_interval(coeffs: Sequence[float], lo: float, hi: float, tol: float = 1e-12) -> list[float]:
    """All real roots of ``sum(coeffs[i] x**i)`` strictly inside ``(lo, hi)``.

    Roots are isolated by recursing on the derivative: between consecutive
    critical points the polynomial is monotone, so a sign change there brackets
    exactly one root, which is refined by bisection.  Critical points at which
    ``|p| <= tol * sum |c_i| |x|^i`` are reported as repeated roots.  Roots
    closer than 1e-9 are merged.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    c = _trim(coeffs)
    if len(c) > 6:
        raise ValueError("degree above 5 is not supported")
    found = _roots_rec(c, lo, hi, tol)
    out: list[float] = []
    for r in found:
        if out and r - out[-1] < _DEDUP:
            continue
        out.append(r)
    return out


def _cauchy_bound(coeffs: Sequence[float]) -> float:
    c = _trim(coeffs)
    return 1.0 + max(abs(v / c[-1]) for v in c[:-1]) if len(c) > 1 else 1.0


# ---------------------------------------------------------------------------
# Result type
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Optimum:
    """Optimal AF moments for one regime.

    ``canonical_moments`` is one representative of the optimal set, chosen
    with ``mu0 = 0``.  ``branch`` records which case-table cell or solver path
    produced ``x_opt``.
    """

    regime: Regime
    x_opt: float
    branch: str
    canonical_moments: Moments
    objective: float
    error: float
    sensitivity: float
    is_linear: bool

    def to_dict(self) -> dict:
        m = self.canonical_moments
        return {
            "regime": self.regime.value,
            "x_opt": self.x_opt,
            "branch": self.branch,
            "mu0": m.mu0,
            "mu1": math.sqrt(m.mu1**2) if not math.isinf(m.mu1) else math.inf,
            "mu1_sq": m.mu1**2,
            "mu_star": m.mu_star,
            "objective": self.objective,
            "error": self.error,
            "sensitivity": self.sensitivity,
            "is_linear": self.is_linear,
        }


# ---------------------------------------------------------------------------
# R1
# ---------------------------------------------------------------------------


def r1_polynomial(params: RegimeParams) -> list[float]:
    """Ascending coefficients of the numerator of ``dO/dx`` in R1.

    A quintic for ``psi1 != 1``; a cubic when ``psi1 = 1 < psi2``.  The sign
    of ``dO/dx`` equals the sign of ``p(x)`` times ``sign(psi1 - psi2)``; in the
    cubic case it equals the sign of ``p(x)``.
    """
    p1, p2, a, e = params.psi1, params.psi2, params.alpha, params.inv_rho
    if p1 == p2:
        raise InterpolationThreshold("psi1 == psi2: the ridgeless objective is undefined")
    if p1 < p2 and p1 == 1.0:
        return [
            (-10 * a + 10 * a * p2 - 4 * p2) + 4 * a * e,
            (-20 * a + 12 * a * p2 - 4 * p2) + 4 * a * e,
            (-11 * a + 3 * a * p2 - p2) + a * e,
            -2 * a,
        ]
    if p1 < p2:
        s = (p1 - 1.0) * p1
        return [
            -(s * s) * ((a - 4 * a * p1 + (3 * a - 1) * p2) + a * e),
            2 * s * ((a * (p1 * (9 * p1 - 6 * p2 - 4) + p2) + 2 * p1 * p2) - 2 * a * p1 * e),
            2 * p1 * ((a + 4 * a * p1 * (4 * p1 - 3) + p2 * (4 * a - 9 * a * p1 + 3 * p1 - 1)) - a * (3 * p1 - 1) * e),
            4 * p1 * ((a * (7 * p1 - 2) - 3 * a * p2 + p2) - a * e),
            (a * (12 * p1 - 1) - 3 * a * p2 + p2) - a * e,
            2 * a,
        ]
    u = p2 - 1.0
    return [
        p2 * p2 * (u * u * (2 * a * p1 - (3 * a + 1) * p2 + a) + (a * p2 * p2 - 2 * (a + 1) * p2 + a + 2 * p1) * e),
        2 * p2 * ((p2 * (2 * a * u - 1) + p1) * e - u * ((7 * a + 2) * p2 * p2 - p2 * (4 * a * p1 + 3 * a + 1) + p1)),
        2 * p2 * (a * (3 * p2 - 1) * e - ((13 * a + 3) * p2 * p2 - 2 * p2 * (3 * a * p1 + 5 * a + 1) + 2 * a * p1 + a + p1)),
        4 * p2 * ((2 * a * (p1 + 1) - (6 * a + 1) * p2) + a * e),
        (2 * a * p1 - (11 * a + 1) * p2 + a) + a * e,
        -2 * a,
    ]


def _r1_otilde_gt(x, p2: float, e: float):
    # Convex part of the curvature for psi1 > psi2, normalized by F1^2.
    return -(2 * p2 * (3 * x**2 * (e - (p2 - 1)) - 2 * x**3 + 6 * x * p2 * e + p2 * ((p2 - 1) ** 2 + (3 * p2 + 1) * e))) / (
        ((x + p2) ** 2 - p2) ** 3
    )


@dataclass(frozen=True)
class R1Thresholds:
    """Constants selecting the Table cell in R1.

    ``A`` and ``B`` are only defined for ``psi1 > psi2``.
    """

    beta1: float
    beta2: float
    beta3: float
    alphaL: float
    alphaC: float
    alphaR: float
    A: Optional[float]
    B: Optional[float]
    e1: bool
    e2: bool


def _beta1_gt(params: RegimeParams) -> float:
    """Curvature threshold for ``psi1 > psi2`` as the root of ``r`` above ``psi2``.

    ``r`` is obtained by substituting ``y = 2 alpha / ((psi1 - psi2) psi2)``
    (normalized by ``F1^2``) into the quartic ``g`` whose roots are the
    critical values of the convex curvature part, then clearing denominators.
    """
    p2, a, e = params.psi2, params.alpha, params.inv_rho
    if a == 0:
        return p2
    k = p2 + 1.0 + e
    g = [
        1.0,
        -4.0 * k * (p2 * (2 * p2 - 3 + 4 * e) + 2 * (1 + e) ** 2),
        -4.0 * p2**2 * (p2 * (7 * p2 - 20 + 14 * e) + 7 * (1 + e) ** 2),
        -16.0 * p2**4 * k,
        16.0 * p2**6,
    ]
    lin = np.array([-p2 * p2, p2])  # (x - psi2) psi2
    r = np.zeros(5)
    for j, gj in enumerate(g):
        term = gj * (2.0 * a) ** j * P.polypow(lin, 4 - j)
        r[: len(term)] += term
    hi = max(_cauchy_bound(r), p2) * 2.0 + 1.0
    roots = real_roots_in_interval(r, p2, hi)
    if not roots:
        raise RootNotFound("no root of r above psi2")
    if len(roots) == 1:
        return roots[0]
    # Several candidates: keep the one matching the minimum of the convex curvature part.
    x_l, x_r = -p2, min(0.0, 1.0 - p2)
    xs = np.linspace(x_l, x_r, 4001)[1:-1]
    a2 = float(np.min(_r1_otilde_gt(xs, p2, e)))
    target = p2 + 2.0 * a / a2
    return min(roots, key=lambda v: abs(v - target))


def r1_thresholds(params: RegimeParams) -> R1Thresholds:
    """Curvature thresholds ``beta``, slope/level thresholds ``alpha`` and events ``E1``, ``E2``."""
    p1, p2, a, e = params.psi1, params.psi2, params.alpha, params.inv_rho
    if p1 == p2:
        raise InterpolationThreshold("psi1 == psi2: the ridgeless objective is undefined")
    if p1 < p2:
        d = abs(1.0 - p1)
        beta1 = min(p1 - 4.0, -3.0 * p1) - 8.0 * math.sqrt(d) * max(1.0 / p1, p1**1.5) + 8.0 * max(1.0 / p1, p1 * p1)
        beta2 = p1 * (p1 + 2.0) / (p1 + 1.0)
        beta3 = p1 + d * min(p1, 1.0 / p1)
        alpha_l = p2 / (p2 + 1.0 + e)
        alpha_c = p2 / (2.0 * p2 - p1 + max(0.0, 1.0 - p1) + e)
        alpha_r = p2 / (3.0 * p2 + 1.0 - 2.0 * min(1.0 + p1, 2.0 * p1) + e)
        if p1 == 1.0:
            # x_R is a double root of the quintic; the slope sign there comes from the cubic.
            alpha_r = 2.0 * p2 / (5.0 * p2 - 5.0 + 2.0 * e)
        e1 = a < alpha_r
        return R1Thresholds(beta1, beta2, beta3, alpha_l, alpha_c, alpha_r, None, None, e1, not e1)

    u = p2 - 1.0
    beta1 = _beta1_gt(params)
    beta2 = p2 + a * p2 / (p2 + 1.0 + e)
    k3 = (p2 + 3.0) if p2 > 1 else (3.0 * p2 + 1.0)
    beta3 = p2 if u == 0 else p2 + a * min(p2, 1.0 / p2) * abs(u) ** 3 / (u * u + k3 * e)
    alpha_l = (2.0 * p1 - p2) / (2.0 * p1 - p2 + 1.0 + e)
    if p2 == 1.0:
        return R1Thresholds(beta1, beta2, beta3, alpha_l, -math.inf, math.nan, math.inf, -math.inf, False, True)
    alpha_c = (p1 - (p1 - p2) * e / abs(u)) / (max(0.0, -u) + 2.0 * p1 - p2 + e)
    alpha_r = (2.0 * (p1 - p2) * max(1.0, p2) * e - u * u * p2) / (
        u * u * (2.0 * min(1.0, p2) - 2.0 * p1 + p2 - 1.0 - e)
    )
    big_a = math.inf if e == 0 else p2 + min(1.0, p2) * u * u / (2.0 * e)
    big_b = (u * u * (2.0 * p2 + 1.0 + 2.0 * min(u, 0.0)) + e * (2.0 * p2 - 1.0 + 2.0 * p2 * max(p2, 1.0) - p2 * p2)) / (
        2.0 * u * u + 2.0 * max(1.0, p2) * e
    )
    mid = big_b < p1 < big_a
    e1 = p1 < big_b or (a < alpha_r and mid)
    e2 = p1 > big_a or (a > alpha_r and mid)
    return R1Thresholds(beta1, beta2, beta3, alpha_l, alpha_c, alpha_r, big_a, big_b, e1, e2)


_TABLE = {
    1: ("xR", "xR|x1", "xR", "xR"),
    2: ("x1", "x1|x3", "x1", None),
    3: ("x1", "x1|x3", "x1", None),
    4: (None, "xL", "xL", "xL"),
    5: (None, "xR", "xR", "xR"),
    6: ("xL", "xL|x2", "xL|x2", "xL"),
}


def _check_tie(value: float, threshold: Optional[float], name: str, label: str) -> None:
    if threshold is not None and math.isfinite(threshold) and abs(value - threshold) <= TIE_TOL:
        raise TieBreakAmbiguous(f"{label} = {value!r} sits on {name} = {threshold!r}; the optimum is not unique")


def r1_table_cell(params: RegimeParams, th: Optional[R1Thresholds] = None) -> tuple[int, int, Optional[str]]:
    """Return ``(row, column, cell)`` of the R1 case table for ``params``."""
    th = th or r1_thresholds(params)
    a = params.alpha
    _check_tie(a, th.alphaL, "alpha_L", "alpha")
    if th.A is not None:
        _check_tie(params.psi1, th.A, "A", "psi1")
        _check_tie(params.psi1, th.B, "B", "psi1")
        if th.B < params.psi1 < th.A:
            _check_tie(a, th.alphaR, "alpha_R", "alpha")
    else:
        _check_tie(a, th.alphaR, "alpha_R", "alpha")
    if th.e1 == th.e2:
        raise RootNotFound("events E1 and E2 are not complementary")
    if a < th.alphaL:
        if th.e1:
            row = 1
        else:
            _check_tie(a, th.alphaC, "alpha_C", "alpha")
            row = 2 if a > th.alphaC else 3
    else:
        if th.e2:
            row = 6
        else:
            _check_tie(a, th.alphaC, "alpha_C", "alpha")
            row = 4 if a > th.alphaC else 5
    psi_bar = max(params.psi1, params.psi2)
    if th.beta1 <= psi_bar:
        col = 1
    elif th.beta2 < psi_bar:
        col = 2
    elif th.beta3 < psi_bar:
        col = 3
    else:
        col = 4
    return row, col, _TABLE[row][col - 1]


def _r1_moments(x: float, psi: float) -> Moments:
    z = zeta_sq_from_chi(x, psi)
    if math.isinf(z):
        return Moments.from_components(0.0, 1.0, 0.0)
    return Moments.from_components(0.0, math.sqrt(z), 1.0)


def solve_r1(params: RegimeParams) -> Optimum:
    """Optimal AF moments in the ridgeless regime."""
    p1, p2 = params.psi1, params.psi2
    if p1 == p2:
        raise InterpolationThreshold("psi1 == psi2: the ridgeless objective is undefined")
    x_l, x_r = r1_interval(p1, p2)
    if p2 == 1.0 and params.noise_sq == 0:
        # The pole at x_R cancels without noise, so O is smooth on [x_L, x_R];
        # compare the end points with every stationary point.
        cands = [x_l, x_r, *real_roots_in_interval(r1_polynomial(params), x_l, x_r)]
        x_opt = min(cands, key=lambda v: evaluate_r1_x(v, params).objective)
        return _r1_optimum(x_opt, "psi2 = 1 without noise: end points and stationary points", params)
    th = r1_thresholds(params)
    row, col, cell = r1_table_cell(params, th)
    if cell is None:
        raise RootNotFound(f"case table cell (row {row}, column {col}) is unreachable")
    roots = real_roots_in_interval(r1_polynomial(params), x_l, x_r)
    named = {"xL": x_l, "xR": x_r}
    for i, r in enumerate(roots[:3]):
        named[f"x{i + 1}"] = r

    def value(name: str) -> Optional[float]:
        return named.get(name)

    first, _, second = cell.partition("|")
    x_opt = value(first)
    if x_opt is None:
        raise RootNotFound(f"cell {cell!r} needs {first} but p has {len(roots)} roots in (x_L, x_R)")
    if second:
        y = value(second)
        if y is not None and evaluate_r1_x(y, params).objective < evaluate_r1_x(x_opt, params).objective:
            x_opt = y
    return _r1_optimum(x_opt, f"row {row} col {col}: {cell}", params)


def _r1_optimum(x_opt: float, branch: str, params: RegimeParams) -> Optimum:
    ev = evaluate_r1_x(x_opt, params)
    psi = min(params.psi1, params.psi2)
    x_r = r1_interval(params.psi1, params.psi2)[1]
    return Optimum(
        Regime.R1, x_opt, branch, _r1_moments(x_opt, psi), ev.objective, ev.error, ev.sensitivity, x_opt == x_r
    )


# ---------------------------------------------------------------------------
# R2 and R3
# ---------------------------------------------------------------------------


def r2_polynomial(params: RegimeParams) -> list[float]:
    """Ascending coefficients of the quartic whose root in ``(-1, min(1, 2 psi2 - 1))`` is optimal in R2."""
    a, p2, e = params.alpha, params.psi2, params.inv_rho
    return _quartic(a, p2, e)


def r3_polynomial(params: RegimeParams) -> list[float]:
    """The R2 quartic with ``rho = inf`` and ``psi2`` replaced by ``psi1``."""
    return _quartic(params.alpha, params.psi1, 0.0)


def _quartic(a: float, p: float, e: float) -> list[float]:
    return [
        8 * p * e + (a + 4 * p * (2 * p - 1) * (2 * a - 1)),
        8 * p * e + 4 * ((1 - 4 * p) * a + 2 * p * p),
        -2 * (-3 * a + p * (2 + 4 * a)),
        4 * a,
        a,
    ]


def _mobius_interval(psi: float) -> tuple[float, float]:
    return -1.0, min(1.0, 2.0 * psi - 1.0)


def _omega_of_x(x):
    return (x + 1.0) / (x - 1.0)


def _unique_root(coeffs: list[float], lo: float, hi: float, score) -> float:
    roots = real_roots_in_interval(coeffs, lo, hi)
    if not roots:
        raise RootNotFound("no root of the optimality polynomial in the admissible interval")
    if len(roots) == 1:
        return roots[0]
    return min(roots, key=score)


def solve_r2(params: RegimeParams) -> Optimum:
    """Optimal AF moments in the highly overparameterized regime."""
    p2, lam = params.psi2, params.lam
    lo, hi = _mobius_interval(p2)
    if params.alpha == 0 and params.noise_sq == 0:
        # The quartic's root sits on the right end point: the infimum is the
        # ridgeless linear fit, approached as mu1 -> inf.
        f1sq = params.F1**2
        err = params.F_star**2 + f1sq * max(0.0, 1.0 - p2)
        m = Moments(0.0, math.inf, math.inf, 1.0, math.inf)
        return Optimum(Regime.R2, hi, "alpha = 0 without noise: mu1 -> inf", m, err, err, f1sq * min(1.0, p2), True)
    x = _unique_root(r2_polynomial(params), lo, hi, lambda v: evaluate_r2_omega(_omega_of_x(v), params).objective)
    mu1_sq = 2.0 * (1.0 + lam * p2) * (1.0 + x) / ((2.0 * p2 - 1.0 - x) * (1.0 - x))
    m = Moments.from_components(0.0, math.sqrt(mu1_sq), 1.0)
    ev = objective(Regime.R2, m, params)
    return Optimum(Regime.R2, x, "unique root of the R2 quartic", m, ev.objective, ev.error, ev.sensitivity, False)


def solve_r3(params: RegimeParams) -> Optimum:
    """Optimal AF moments in the large-sample regime; the optimal AF is always linear.

    When the infimum is only approached as ``mu1 -> inf`` the returned moments
    carry ``mu1 = inf`` and the objective is the limiting value.
    """
    a, p1, lam = params.alpha, params.psi1, params.lam
    f1sq, fs_sq = params.F1**2, params.F_star**2
    lo, hi = _mobius_interval(p1)
    inf_moments = Moments(0.0, math.inf, math.inf, 0.0, math.inf)
    if a == 0:
        obj = fs_sq + f1sq * max(0.0, 1.0 - p1)
        return Optimum(Regime.R3, hi, "alpha = 0: mu1 -> inf", inf_moments, obj, obj, f1sq, True)
    if p1 == 1.0 and a <= 0.25:
        obj = a * f1sq + (1.0 - a) * fs_sq
        return Optimum(Regime.R3, hi, "psi1 = 1, alpha <= 1/4: mu1 -> inf", inf_moments, obj, fs_sq, f1sq, True)
    if lam == 0:
        raise ValueError("R3 with lambda = 0 has no attainable optimum for alpha > 0")
    if p1 == 1.0:
        sa = math.sqrt(a)
        mu1_sq = lam * (-4.0 * a * a + 3.0 * a + sa) / (16.0 * a * a - 8.0 * a + 1.0)
        x = 2.0 / sa - 3.0
        branch = "psi1 = 1, alpha > 1/4: closed form"
    else:
        x = _unique_root(r3_polynomial(params), lo, hi, lambda v: float(evaluate_r3_grid(_omega_of_x(v), params)[2]))
        mu1_sq = 2.0 * lam * p1 * (1.0 + x) / ((2.0 * p1 - 1.0 - x) * (1.0 - x))
        branch = "unique root of the R3 quartic"
    m = Moments.from_components(0.0, math.sqrt(mu1_sq), 0.0)
    ev = objective(Regime.R3, m, params)
    return Optimum(Regime.R3, x, branch, m, ev.objective, ev.error, ev.sensitivity, True)


def solve(regime: "str | Regime", params: RegimeParams) -> Optimum:
    """Dispatch to :func:`solve_r1`, :func:`solve_r2` or :func:`solve_r3`."""
    regime = Regime.parse(regime)
    return {Regime.R1: solve_r1, Regime.R2: solve_r2, Regime.R3: solve_r3}[regime](params)


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


def grid_oracle(regime: "str | Regime", params: RegimeParams, grid_points: int = 20001) -> tuple[float, float]:
    """Argmin of ``O`` over a uniform grid of the regime's ``x`` interval.

    R1 includes both end points.  In R2 and R3 the open end points are
    approached to within 1e-6.  R3 is evaluated on the linear-AF family.
    """
    if grid_points < 1001:
        raise ValueError("grid_points must be at least 1001")
    regime = Regime.parse(regime)
    if regime is Regime.R1:
        x_l, x_r = r1_interval(params.psi1, params.psi2)
        xs = np.linspace(x_l, x_r, grid_points)
        obj = evaluate_r1_grid(xs, params)[2]
    else:
        psi = params.psi2 if regime is Regime.R2 else params.psi1
        lo, hi = _mobius_interval(psi)
        xs = np.linspace(lo + 1e-6, hi - 1e-6, grid_points)
        ws = _omega_of_x(xs)
        obj = (evaluate_r2_grid if regime is Regime.R2 else evaluate_r3_grid)(ws, params)[2]
    obj = np.where(np.isnan(obj), np.inf, obj)
    i = int(np.argmin(obj))
    return float(xs[i]), float(obj[i])
