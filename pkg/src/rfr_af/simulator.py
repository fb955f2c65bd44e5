"""Finite-size Monte-Carlo simulation of random features regression.

The model is ``f(x) = sum_i a_i sigma(<theta_i, x> / sqrt(d))`` with frozen
first-layer weights ``theta_i`` on the sphere of radius ``sqrt(d)``.  The
second layer is fitted by ridge regression:

    a = argmin (1/n) ||y - Z a||^2 + (N lambda / d) ||a||^2.

For ``lambda = 0`` the minimum-norm least-squares solution is used.  Test
error and sensitivity (mean squared gradient norm) are estimated on fresh
sphere points, and trials are seeded from ``(seed, trial_index)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import SolveFailed
from .moments import ActivationSpec, parse_af

__all__ = [
    "SimConfig",
    "SimEstimate",
    "Target",
    "RFRModel",
    "sample_sphere",
    "make_target",
    "ridge_weights",
    "train_rfr",
    "run_trial",
    "estimate",
    "trial_rng",
    "CSV_COLUMNS",
]

CALIBRATION_POINTS = 10_000
PINV_RCOND = 1e-10
CSV_COLUMNS = (
    "d",
    "psi1",
    "psi2",
    "lambda",
    "af",
    "error_mean",
    "error_se",
    "sens_mean",
    "sens_se",
    "trials",
    "seed",
)


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings; ``N = round(psi1 d)`` features, ``n = round(psi2 d)`` samples."""

    d: int
    psi1: float
    psi2: float
    lam: float = 0.0
    af: ActivationSpec = field(default_factory=ActivationSpec.relu)
    F0: float = 0.0
    F1: float = 1.0
    F_star: float = 0.0
    tau: float = 0.0
    n_test: int = 2000
    trials: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if int(self.d) != self.d or self.d < 20:
            raise ValueError("d must be an integer >= 20")
        if not (self.psi1 > 0 and self.psi2 > 0):
            raise ValueError("psi1 and psi2 must be positive")
        if not self.lam >= 0:
            raise ValueError("lambda must be >= 0")
        if not self.F1 > 0:
            raise ValueError("F1 must be positive")
        if not (self.F_star >= 0 and self.tau >= 0):
            raise ValueError("F_star and tau must be >= 0")
        if self.n_test < 100:
            raise ValueError("n_test must be >= 100")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.N < 1 or self.n < 1:
            raise ValueError("psi1 * d and psi2 * d must round to at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def N(self) -> int:
        return int(round(self.psi1 * self.d))

    @property
    def n(self) -> int:
        return int(round(self.psi2 * self.d))

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "psi1": self.psi1,
            "psi2": self.psi2,
            "lambda": self.lam,
            "af": self.af.describe(),
            "F0": self.F0,
            "F1": self.F1,
            "F_star": self.F_star,
            "tau": self.tau,
            "n_test": self.n_test,
            "trials": self.trials,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        af = data.get("af", "relu")
        data["af"] = af if isinstance(af, ActivationSpec) else parse_af(str(af))
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key in ("d", "n_test", "trials", "seed"):
            if key in data:
                data[key] = int(data[key])
        for key in ("psi1", "psi2", "lam", "F0", "F1", "F_star", "tau"):
            if key in data:
                data[key] = float(data[key])
        return cls(**data)


@dataclass(frozen=True)
class SimEstimate:
    """Trial means and standard errors of test error and sensitivity."""

    error_mean: float
    error_se: float
    sens_mean: float
    sens_se: float
    per_trial: list

    def to_dict(self) -> dict:
        return {
            "error_mean": self.error_mean,
            "error_se": self.error_se,
            "sens_mean": self.sens_mean,
            "sens_se": self.sens_se,
            "per_trial": [list(t) for t in self.per_trial],
        }


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Private generator for one trial, derived from ``(seed, trial)``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def sample_sphere(d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` i.i.d. uniform points on the sphere of radius ``sqrt(d)`` in R^d, one per row."""
    if d < 2:
        raise ValueError("d must be >= 2")
    g = rng.standard_normal((count, d))
    return g * (math.sqrt(d) / np.linalg.norm(g, axis=1, keepdims=True))


@dataclass(frozen=True)
class Target:
    """``f(x) = F0 + <beta1, x> + c (x^T G x - tr G) / d``."""

    F0: float
    beta1: np.ndarray
    G: np.ndarray
    c: float

    def nonlinear(self, X: np.ndarray) -> np.ndarray:
        if self.c == 0.0:
            return np.zeros(X.shape[0])
        d = X.shape[1]
        quad = np.einsum("ij,jk,ik->i", X, self.G, X)
        return self.c * (quad - np.trace(self.G)) / d

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return self.F0 + X @ self.beta1 + self.nonlinear(X)


def make_target(config: SimConfig, rng: np.random.Generator) -> Target:
    """Random target with linear part of norm ``F1`` and a centered quadratic part.

    The quadratic part is scaled so that its empirical second moment over
    10^4 fresh sphere points equals ``F_star^2``.
    """
    d = config.d
    beta = rng.standard_normal(d)
    beta *= config.F1 / np.linalg.norm(beta)
    G = rng.standard_normal((d, d))
    c = 0.0
    if config.F_star > 0:
        probe = Target(0.0, np.zeros(d), G, 1.0)
        raw = probe.nonlinear(sample_sphere(d, CALIBRATION_POINTS, rng))
        c = config.F_star / math.sqrt(float(np.mean(raw**2)))
    return Target(config.F0, beta, G, c)


@dataclass(frozen=True)
class RFRModel:
    """Fitted random features model."""

    theta: np.ndarray
    a: np.ndarray
    af: ActivationSpec

    def _pre(self, X: np.ndarray) -> np.ndarray:
        return X @ self.theta.T / math.sqrt(self.theta.shape[1])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(self.af.value(self._pre(X))) @ self.a

    def gradient(self, X: np.ndarray) -> np.ndarray:
        """Ambient gradient ``(1/sqrt d) sum_i a_i sigma'(<theta_i, x>/sqrt d) theta_i``, one row per point."""
        w = np.asarray(self.af.weak_derivative(self._pre(X))) * self.a
        return w @ self.theta / math.sqrt(self.theta.shape[1])


def ridge_weights(Z: np.ndarray, y: np.ndarray, lam: float, N: int, d: int) -> np.ndarray:
    """Minimizer of ``(1/n)||y - Z a||^2 + (N lam / d)||a||^2``; minimum-norm solution at ``lam = 0``."""
    n = Z.shape[0]
    try:
        if lam == 0:
            return np.linalg.lstsq(Z, y, rcond=PINV_RCOND)[0]
        A = Z.T @ Z / n
        A[np.diag_indices_from(A)] += N * lam / d
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(A), Z.T @ y / n)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as exc:
        raise SolveFailed(f"ridge solve failed: {exc}") from exc


def train_rfr(
    config: SimConfig,
    rng: np.random.Generator,
    target: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[RFRModel, np.ndarray, np.ndarray]:
    """Draw features and noisy training data, then fit the second layer.

    Returns ``(model, X, y)``.  When ``target`` is omitted a fresh one is drawn
    with :func:`make_target`.
    """
    d, N, n = config.d, config.N, config.n
    if target is None:
        target = make_target(config, rng)
    theta = sample_sphere(d, N, rng)
    X = sample_sphere(d, n, rng)
    y = target(X) + config.tau * rng.standard_normal(n)
    Z = np.asarray(config.af.value(X @ theta.T / math.sqrt(d)))
    if not np.all(np.isfinite(Z)):
        raise SolveFailed("non-finite feature matrix")
    a = ridge_weights(Z, y, config.lam, N, d)
    return RFRModel(theta, a, config.af), X, y


def run_trial(config: SimConfig, trial: int) -> tuple[float, float]:
    """Test error and sensitivity of one independent trial."""
    rng = trial_rng(config.seed, trial)
    target = make_target(config, rng)
    model, _, _ = train_rfr(config, rng, target)
    X = sample_sphere(config.d, config.n_test, rng)
    err = float(np.mean((model.predict(X) - target(X)) ** 2))
    sens = float(np.mean(np.sum(model.gradient(X) ** 2, axis=1)))
    return err, sens


def _mean_se(v: np.ndarray) -> tuple[float, float]:
    if v.size < 2:
        return float(v.mean()), 0.0
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def estimate(config: SimConfig) -> SimEstimate:
    """Mean and standard error of test error and sensitivity over ``config.trials`` trials."""
    per_trial = [run_trial(config, t) for t in range(config.trials)]
    arr = np.array(per_trial, dtype=float)
    em, es = _mean_se(arr[:, 0])
    sm, ss = _mean_se(arr[:, 1])
    return SimEstimate(em, es, sm, ss, per_trial)
