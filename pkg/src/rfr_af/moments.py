"""Activation functions and their Gaussian moments.

An activation function (AF) enters the asymptotic theory only through

    mu0 = E sigma(Z),  mu1 = E Z sigma(Z),  mu2 = E sigma(Z)^2,   Z ~ N(0, 1)

and the derived quantities ``mu_star_sq = mu2 - mu0^2 - mu1^2`` and
``zeta_sq = mu1^2 / mu_star_sq``.  Smooth AFs are integrated with
probabilists' Gauss-Hermite quadrature.  AFs with kinks are integrated with
Gauss-Legendre panels on [-12, 12] split at the kinks, because Hermite
quadrature converges only algebraically across a kink.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_hermitenorm

from .errors import InvalidMoments, NegativeMuStar, NonFiniteValue

__all__ = [
    "ActivationSpec",
    "Moments",
    "compute_moments",
    "functional_norms",
    "parse_af",
    "DEFAULT_NODES",
    "WINDOW",
]

DEFAULT_NODES = 201
WINDOW = 12.0
# Below this, mu_star_sq is treated as exactly zero (linear AF).
LINEAR_TOL = 1e-12
# Clearly negative mu_star_sq means the quadrature failed.
NEGATIVE_TOL = 1e-8

_KINDS = ("linear", "relu", "shifted-relu", "tanh", "quadratic", "saturated-linear", "tabulated")

Array = np.ndarray


@dataclass(frozen=True)
class ActivationSpec:
    """An evaluable activation function with its weak derivative.

    Use the classmethod constructors rather than building instances by hand.

    Kinds and parameters:

    * ``linear(slope, intercept)``: ``slope * x + intercept``
    * ``relu()``: ``max(x, 0)``
    * ``shifted_relu(shift, scale=1, offset=0)``: ``offset + scale * max(x - shift, 0)``
    * ``tanh()``
    * ``quadratic(a, b, c)``: ``a x^2 + b x + c``
    * ``saturated_linear(offset, b, s)``: ``offset + b * clip(x, -s, s)``
    * ``tabulated(func, deriv, kinks)``: user callables, vectorised over numpy arrays
    """

    kind: str
    params: tuple[float, ...] = ()
    func: Callable[[Array], Array] | None = field(default=None, compare=False, repr=False)
    deriv: Callable[[Array], Array] | None = field(default=None, compare=False, repr=False)
    kinks: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown activation kind {self.kind!r}")
        if self.kind == "saturated-linear" and not self.params[2] >= 0:
            raise ValueError("saturated-linear requires s >= 0")
        if self.kind == "tabulated" and (self.func is None or self.deriv is None):
            raise ValueError("tabulated activations need both a value and a derivative callable")

    # -- constructors -----------------------------------------------------
    @classmethod
    def linear(cls, slope: float = 1.0, intercept: float = 0.0) -> "ActivationSpec":
        return cls("linear", (float(slope), float(intercept)))

    @classmethod
    def relu(cls) -> "ActivationSpec":
        return cls("relu", (), kinks=(0.0,))

    @classmethod
    def shifted_relu(cls, shift: float, scale: float = 1.0, offset: float = 0.0) -> "ActivationSpec":
        return cls("shifted-relu", (float(shift), float(scale), float(offset)), kinks=(float(shift),))

    @classmethod
    def tanh(cls) -> "ActivationSpec":
        return cls("tanh", ())

    @classmethod
    def quadratic(cls, a: float, b: float, c: float) -> "ActivationSpec":
        return cls("quadratic", (float(a), float(b), float(c)))

    @classmethod
    def saturated_linear(cls, offset: float, b: float, s: float) -> "ActivationSpec":
        s = float(s)
        kinks = () if math.isinf(s) else ((-s, s) if s > 0 else (0.0,))
        return cls("saturated-linear", (float(offset), float(b), s), kinks=kinks)

    @classmethod
    def tabulated(
        cls,
        func: Callable[[Array], Array],
        deriv: Callable[[Array], Array],
        kinks: Sequence[float] = (),
    ) -> "ActivationSpec":
        """Wrap user callables. The derivative must be supplied; no finite differences are taken."""
        return cls("tabulated", (), func=func, deriv=deriv, kinks=tuple(sorted(float(k) for k in kinks)))

    # -- evaluation -------------------------------------------------------
    def value(self, x):
        """Evaluate sigma at ``x`` (scalar or array)."""
        x = np.asarray(x, dtype=float)
        k, p = self.kind, self.params
        if k == "linear":
            out = p[0] * x + p[1]
        elif k == "relu":
            out = np.maximum(x, 0.0)
        elif k == "shifted-relu":
            out = p[2] + p[1] * np.maximum(x - p[0], 0.0)
        elif k == "tanh":
            out = np.tanh(x)
        elif k == "quadratic":
            out = (p[0] * x + p[1]) * x + p[2]
        elif k == "saturated-linear":
            out = p[0] + p[1] * np.clip(x, -p[2], p[2])
        else:
            out = np.asarray(self.func(x), dtype=float)
        return out if out.ndim else float(out)

    def weak_derivative(self, x):
        """Evaluate a weak derivative of sigma; kinks take the value of the flat side."""
        x = np.asarray(x, dtype=float)
        k, p = self.kind, self.params
        if k == "linear":
            out = np.full_like(x, p[0])
        elif k == "relu":
            out = (x > 0).astype(float)
        elif k == "shifted-relu":
            out = p[1] * (x > p[0]).astype(float)
        elif k == "tanh":
            out = 1.0 / np.cosh(x) ** 2
        elif k == "quadratic":
            out = 2.0 * p[0] * x + p[1]
        elif k == "saturated-linear":
            out = p[1] * (np.abs(x) < p[2]).astype(float)
        else:
            out = np.asarray(self.deriv(x), dtype=float)
        return out if out.ndim else float(out)

    @property
    def is_smooth(self) -> bool:
        return not self.kinks

    def describe(self) -> str:
        """Compact ``kind:params`` string, parseable by :func:`parse_af` for builtin kinds."""
        if self.kind == "relu" or self.kind == "tanh":
            return self.kind
        if self.kind == "saturated-linear":
            return "satlin:" + ",".join(_fmt(v) for v in self.params)
        if self.kind == "tabulated":
            return "tabulated"
        return self.kind + ":" + ",".join(_fmt(v) for v in self.params)

    def to_dict(self) -> dict:
        names = {
            "linear": ("slope", "intercept"),
            "relu": (),
            "shifted-relu": ("shift", "scale", "offset"),
            "tanh": (),
            "quadratic": ("a", "b", "c"),
            "saturated-linear": ("offset", "b", "s"),
            "tabulated": (),
        }[self.kind]
        return {"kind": self.kind, "params": dict(zip(names, self.params))}


def _fmt(v: float) -> str:
    return format(v, ".17g")


def parse_af(text: str) -> ActivationSpec:
    """Parse the CLI activation syntax.

    Accepted forms: ``relu``, ``tanh``, ``linear:c,d``, ``quadratic:a,b,c``,
    ``satlin:mu0,b,s``, ``shifted-relu:shift`` and ``shifted-relu:shift,scale,offset``.
    """
    name, _, rest = text.strip().partition(":")
    name = name.lower()
    try:
        vals = [float(v) for v in rest.split(",")] if rest else []
    except ValueError as exc:
        raise ValueError(f"bad numeric parameter in activation {text!r}") from exc
    arity = {
        "relu": (0,),
        "tanh": (0,),
        "linear": (2,),
        "quadratic": (3,),
        "satlin": (3,),
        "saturated-linear": (3,),
        "shifted-relu": (1, 3),
    }
    if name not in arity:
        raise ValueError(f"unknown activation {name!r}")
    if len(vals) not in arity[name]:
        raise ValueError(f"activation {name!r} takes {arity[name]} parameters, got {len(vals)}")
    if name == "relu":
        return ActivationSpec.relu()
    if name == "tanh":
        return ActivationSpec.tanh()
    if name == "linear":
        return ActivationSpec.linear(*vals)
    if name == "quadratic":
        return ActivationSpec.quadratic(*vals)
    if name in ("satlin", "saturated-linear"):
        if vals[2] < 0:
            raise ValueError("satlin requires s >= 0")
        return ActivationSpec.saturated_linear(*vals)
    return ActivationSpec.shifted_relu(*vals)


@dataclass(frozen=True)
class Moments:
    """Gaussian moments of an activation function.

    ``zeta_sq`` is ``inf`` for a (numerically) linear AF with ``mu1 != 0`` and
    ``0`` when ``mu1 == 0``.
    """

    mu0: float
    mu1: float
    mu2: float
    mu_star_sq: float
    zeta_sq: float

    @classmethod
    def from_components(cls, mu0: float, mu1: float, mu_star_sq: float) -> "Moments":
        """Build moments from (mu0, mu1, mu_star^2); mu2 follows from the definition."""
        if not mu_star_sq >= 0:
            raise InvalidMoments(f"mu_star_sq must be >= 0, got {mu_star_sq}")
        mu2 = mu_star_sq + mu0 * mu0 + mu1 * mu1
        return cls(mu0, mu1, mu2, mu_star_sq, _zeta_sq(mu1, mu_star_sq))

    @classmethod
    def from_triple(cls, mu0: float, mu1: float, mu2: float) -> "Moments":
        """Build moments from (mu0, mu1, mu2); raises if Cauchy-Schwarz is violated."""
        mu_star_sq = mu2 - mu0 * mu0 - mu1 * mu1
        if mu_star_sq < -NEGATIVE_TOL * max(1.0, abs(mu2)):
            raise InvalidMoments(f"mu2 < mu0^2 + mu1^2 (mu_star_sq = {mu_star_sq})")
        mu_star_sq = max(mu_star_sq, 0.0)
        if mu_star_sq <= LINEAR_TOL:
            mu_star_sq = 0.0
        return cls(mu0, mu1, mu2, mu_star_sq, _zeta_sq(mu1, mu_star_sq))

    @property
    def mu_star(self) -> float:
        return math.sqrt(self.mu_star_sq)

    @property
    def is_linear(self) -> bool:
        return self.mu_star_sq == 0.0

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.mu0, self.mu1, self.mu2, self.mu_star_sq, self.zeta_sq)

    def to_dict(self) -> dict:
        return {
            "mu0": self.mu0,
            "mu1": self.mu1,
            "mu2": self.mu2,
            "mu_star_sq": self.mu_star_sq,
            "zeta_sq": self.zeta_sq,
        }


def _zeta_sq(mu1: float, mu_star_sq: float) -> float:
    if mu_star_sq == 0.0:
        return math.inf if mu1 != 0.0 else 0.0
    return mu1 * mu1 / mu_star_sq


@lru_cache(maxsize=32)
def _hermite_rule(nodes: int) -> tuple[Array, Array]:
    x, w = roots_hermitenorm(nodes)
    return x, w / math.sqrt(2.0 * math.pi)


@lru_cache(maxsize=32)
def _legendre_rule(nodes: int) -> tuple[Array, Array]:
    return leggauss(nodes)


@lru_cache(maxsize=256)
def _panel_rule(kinks: tuple[float, ...], nodes: int) -> tuple[Array, Array]:
    """Gauss-Legendre panels on [-WINDOW, WINDOW] split at the kinks, Gaussian-weighted."""
    cuts = sorted({-WINDOW, WINDOW, *(k for k in kinks if -WINDOW < k < WINDOW)})
    t, w = _legendre_rule(nodes)
    xs, ws = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        half = 0.5 * (hi - lo)
        if half <= 0:
            continue
        x = lo + half * (t + 1.0)
        xs.append(x)
        ws.append(half * w * np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi))
    return np.concatenate(xs), np.concatenate(ws)


def quadrature_rule(af: ActivationSpec, nodes: int = DEFAULT_NODES) -> tuple[Array, Array]:
    """Nodes and weights approximating expectations under N(0, 1) for ``af``."""
    if nodes < 21:
        raise ValueError("at least 21 quadrature nodes are required")
    if af.is_smooth:
        return _hermite_rule(nodes)
    return _panel_rule(af.kinks, nodes)


def _eval_checked(fn: Callable, x: Array, what: str) -> Array:
    y = np.asarray(fn(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)][0]
        raise NonFiniteValue(f"{what} is not finite at x = {bad!r}")
    return y


def compute_moments(af: ActivationSpec, nodes: int = DEFAULT_NODES) -> Moments:
    """Gaussian moments of ``af``.

    ``mu_star_sq`` is computed as ``E (sigma - mu0 - mu1 Z)^2``, which equals
    ``mu2 - mu0^2 - mu1^2`` for an exact rule but does not cancel
    catastrophically for nearly linear AFs.
    """
    x, w = quadrature_rule(af, nodes)
    y = _eval_checked(af.value, x, "activation")
    mu0 = float(w @ y)
    mu1 = float(w @ (x * y))
    mu2 = float(w @ (y * y))
    resid = y - mu0 - mu1 * x
    mu_star_sq = float(w @ (resid * resid))
    if mu_star_sq < -NEGATIVE_TOL:
        raise NegativeMuStar(f"mu_star_sq = {mu_star_sq:.3e} < 0; quadrature failed")
    if mu_star_sq <= LINEAR_TOL:
        mu_star_sq = 0.0
        # A constant AF leaves quadrature round-off in mu1.
        if abs(mu1) <= 1e-14 * max(1.0, abs(mu0)):
            mu1 = 0.0
    return Moments(mu0, mu1, mu2, mu_star_sq, _zeta_sq(mu1, mu_star_sq))


def functional_norms(af: ActivationSpec, nodes: int = DEFAULT_NODES) -> tuple[float, float]:
    """Return ``(E|sigma'(Z)|, sqrt(E sigma'(Z)^2))``."""
    x, w = quadrature_rule(af, nodes)
    dy = _eval_checked(af.weak_derivative, x, "weak derivative")
    return float(w @ np.abs(dy)), math.sqrt(float(w @ (dy * dy)))
