"""Online estimators and the estimation-error ledger.

Two estimator families: exponential-weights posteriors over finite model
classes (log-loss aggregation) and projected regularized least squares for
linear models. Both are consumed by the policies through small pure update
functions; states are single-owner values, one per run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .instances import FiniteInstance, LinearInstance, SimplexVector, as_weights
from .rng import RngStream


def gaussian_loglik(inst: FiniteInstance, pi: int, y) -> np.ndarray:
    """Log density of observation y at decision pi under every model."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    means = inst.obs_mean[:, pi, :]
    if y.size != means.shape[1]:
        raise ValueError(f"observation has dimension {y.size}, expected {means.shape[1]}")
    var = inst.obs_variance
    sq = np.sum((y[None, :] - means) ** 2, axis=1)
    return -0.5 * y.size * math.log(2.0 * math.pi * var) - sq / (2.0 * var)


@dataclass
class EwaState:
    """Exponential-weights posterior over a finite model class.

    log_weights accumulate eta times the log likelihoods (so the posterior is
    softmax(log_weights)); cum_mixture_loss is the running log loss of the
    mixture predictor, from which the pathwise regret is derived.
    """

    log_weights: np.ndarray
    eta: float = 1.0
    cum_mixture_loss: float = 0.0

    def posterior(self) -> np.ndarray:
        w = np.exp(self.log_weights - self.log_weights.max())
        return w / w.sum()

    def mixture_regret(self) -> float:
        """Mixture log-loss regret against the best single model so far.

        Valid because log_weights start at zero: the best model's cumulative
        loss is -max(log_weights) / eta.
        """
        return self.cum_mixture_loss + float(self.log_weights.max()) / self.eta


def make_ewa_state(n_models: int, eta: float = 1.0) -> EwaState:
    if eta <= 0:
        raise ValueError("eta must be positive")
    return EwaState(np.zeros(n_models), eta)


def ewa_update(state: EwaState, pi: int, y, inst: FiniteInstance) -> EwaState:
    """Ingest one observation; returns the new state.

    The mixture loss uses the pre-update posterior, matching the prediction
    protocol underlying the log(#models) regret guarantee.
    """
    ll = gaussian_loglik(inst, pi, y)
    prior = state.log_weights - logsumexp(state.log_weights)
    mixture_loss = -float(logsumexp(prior + ll))
    return EwaState(state.log_weights + state.eta * ll, state.eta,
                    state.cum_mixture_loss + mixture_loss)


def ewa_estimate(state: EwaState, mode: str = "sample", rng: RngStream | None = None):
    """Point estimate from the posterior.

    ``sample`` draws a model index (the default for non-convex finite
    classes), ``map`` takes the argmax with lowest-index ties, ``mixture``
    returns the full posterior for diagnostics.
    """
    post = state.posterior()
    if mode == "sample":
        if rng is None:
            raise ValueError("sample mode needs an rng")
        return rng.choice(post)
    if mode == "map":
        return int(np.argmax(post))
    if mode == "mixture":
        return SimplexVector(post)
    raise ValueError(f"unknown estimate mode {mode!r}")


@dataclass
class RidgeState:
    """Sufficient statistics of projected regularized least squares."""

    V: np.ndarray
    b: np.ndarray
    V0: np.ndarray
    projection_radius: float
    logdet_V0: float


def make_ridge_state(dim: int, eta: float = 1.0,
                     projection_radius: float = math.inf) -> RidgeState:
    if eta <= 0:
        raise ValueError("prior scale eta must be positive")
    v0 = eta * np.eye(dim)
    return RidgeState(v0.copy(), np.zeros(dim), v0, projection_radius,
                      dim * math.log(eta))


def ridge_update(state: RidgeState, pi: int, y, inst: LinearInstance) -> RidgeState:
    m = inst.obs_maps[pi]
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.size != m.shape[0]:
        raise ValueError(f"observation has dimension {y.size}, expected {m.shape[0]}")
    return RidgeState(state.V + m.T @ m, state.b + m.T @ y, state.V0,
                      state.projection_radius, state.logdet_V0)


def _project_to_ball(v: np.ndarray, x_hat: np.ndarray, radius: float) -> np.ndarray:
    """Minimize ||x - x_hat||_V^2 over the Euclidean ball of the given radius.

    Solves the secular equation x(theta) = (V + theta I)^-1 V x_hat with
    theta >= 0 found by bisection so that ||x(theta)|| = radius.
    """
    evals, q = np.linalg.eigh(v)
    z = q.T @ x_hat

    def radial(theta):
        return float(np.linalg.norm(evals * z / (evals + theta)))

    lo, hi = 0.0, 1.0
    for _ in range(200):
        if radial(hi) <= radius:
            break
        hi *= 2.0
    theta = hi
    for _ in range(200):
        theta = 0.5 * (lo + hi)
        r = radial(theta)
        if abs(r - radius) <= 1e-8:
            break
        if r > radius:
            lo = theta
        else:
            hi = theta
    return q @ (evals * z / (evals + theta))


def ridge_estimate(state: RidgeState) -> np.ndarray:
    """Parameter estimate V^-1 b, projected onto the radius ball in V-norm."""
    x_hat = np.linalg.solve(state.V, state.b)
    radius = state.projection_radius
    if not math.isfinite(radius) or np.linalg.norm(x_hat) <= radius:
        return x_hat
    return _project_to_ball(state.V, x_hat, radius)


def logdet_ratio(state: RidgeState) -> float:
    """log det(V) - log det(V0), the elliptic-potential quantity."""
    sign, logdet = np.linalg.slogdet(state.V)
    if sign <= 0:
        raise ValueError("design matrix lost positive definiteness")
    return float(logdet - state.logdet_V0)


@dataclass
class EstLedger:
    """Running record of per-round estimation-error increments."""

    per_round: list = field(default_factory=list)
    total: float = 0.0

    def add(self, increment: float) -> None:
        if increment < -1e-12:
            raise ValueError("estimation increments must be nonnegative")
        increment = max(float(increment), 0.0)
        self.per_round.append(increment)
        self.total += increment

    def recompute(self) -> float:
        return float(np.sum(self.per_round)) if self.per_round else 0.0


def finite_info_provider(inst: FiniteInstance):
    """Per-decision divergences I_{f_hat}(pi, f_star) for model indices."""

    def provider(f_hat: int, f_star: int) -> np.ndarray:
        diff = inst.obs_mean[f_star] - inst.obs_mean[f_hat]
        return np.sum(diff * diff, axis=1) / (2.0 * inst.obs_variance)

    return provider


def linear_info_provider(inst: LinearInstance):
    """Per-decision divergences ||M_pi (f_star - f_hat)||^2 / (2 sigma^2)."""
    var = inst.noise_sd ** 2

    def provider(f_hat: np.ndarray, f_star: np.ndarray) -> np.ndarray:
        diff = np.asarray(f_star, dtype=float) - np.asarray(f_hat, dtype=float)
        vals = np.array([float(np.sum((m @ diff) ** 2)) for m in inst.obs_maps])
        if var > 0:
            return vals / (2.0 * var)
        return np.where(vals > 0, math.inf, 0.0)

    return provider


def est_increment(mu, f_hat, f_star, info_provider) -> float:
    """Expected divergence of the played distribution against the truth."""
    info = np.asarray(info_provider(f_hat, f_star), dtype=float)
    return float(as_weights(mu) @ info)
