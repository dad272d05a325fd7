"""Per-round decision rules: anytime and fixed-multiplier saddle-point
policies plus confidence-bound and posterior-sampling baselines.

Each policy follows the same protocol: ``reset`` binds it to an instance and
an RngStream, ``propose`` returns the round's sampling distribution together
with diagnostics (the model estimate used, the confidence radius, multiplier
and solver value), and ``observe`` ingests the observation and advances the
round counter. Distinct runs never share a policy object.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import dec_finite, dec_linear, estimation
from .estimation import EstLedger, EwaState, RidgeState
from .instances import FiniteInstance, LinearInstance, gap_matrix, info_matrix, \
    shifted_gap_matrix
from .rng import RngStream


def epsilon_schedule(kind: str, t: int, params: dict) -> float:
    """Confidence-radius schedule; returns epsilon_t squared.

    ``finite`` uses log(#models)/t, ``linear`` uses dim/t, ``fixed-horizon``
    uses a constant beta/horizon.
    """
    if t < 1:
        raise ValueError("rounds are 1-based")
    if kind == "finite":
        return math.log(params["n_models"]) / t
    if kind == "linear":
        return params["dim"] / t
    if kind == "fixed-horizon":
        return params["beta"] / params["horizon"]
    raise ValueError(f"unknown schedule kind {kind!r}")


def fixed_horizon_lambda(n: int) -> float:
    """Fixed-multiplier tuning sqrt(n / (4 log n)) for a known horizon."""
    if n < 2:
        raise ValueError("horizon must be at least 2")
    return math.sqrt(n / (4.0 * math.log(n)))


@dataclass
class PolicyState:
    """Loop state shared by the saddle-point policies."""

    estimator: Union[EwaState, RidgeState]
    t: int = 1
    last_mu: Optional[np.ndarray] = None
    schedule: dict = field(default_factory=dict)
    est_ledger: EstLedger = field(default_factory=EstLedger)
    rng: Optional[RngStream] = None


def anytime_e2d_step(state: PolicyState, inst, *, use_shifted_gaps: bool = True,
                     lambda_mode: str = "grid", fw_steps: int = 100,
                     lambda_grid_size: int = 50, refine: bool = True,
                     estimate_mode: str = "sample"):
    """One round of the anytime policy: estimate, solve, return (mu, diag).

    Finite instances pair an exponential-weights estimate with the
    average-constrained solver; linear instances pair ridge regression with
    the Frank-Wolfe solver, warm-started at the previous round's distribution.
    ``lambda_mode`` "grid" runs one Frank-Wolfe pass per multiplier grid
    point; "joint-grid" searches the grid inside a single Frank-Wolfe run
    (cheaper, but the shared trajectory can under-credit large multipliers);
    "closed-form" sets the multiplier to t/4, matching the dim/t radius
    schedule.
    """
    t = state.t
    if isinstance(inst, FiniteInstance):
        f_hat = estimation.ewa_estimate(state.estimator, estimate_mode, state.rng)
        eps_sq = epsilon_schedule("finite", t, {"n_models": inst.n_models})
        # a singleton class gives log(1)/t = 0; the solver needs a positive radius
        eps = math.sqrt(max(eps_sq, 1e-12))
        gaps = shifted_gap_matrix(inst, f_hat) if use_shifted_gaps else gap_matrix(inst)
        sol = dec_finite.dec_ac(gaps, info_matrix(inst, f_hat), eps,
                                lambda_grid_size, refine=refine)
    elif isinstance(inst, LinearInstance):
        f_hat = estimation.ridge_estimate(state.estimator)
        eps_sq = epsilon_schedule("linear", t, {"dim": inst.dim})
        eps = math.sqrt(eps_sq)
        if lambda_mode == "grid":
            sol = dec_linear.solve_linear_dec(
                inst, f_hat, eps, fw_steps, lambda_grid_size,
                warm_start=state.last_mu)
        elif lambda_mode == "joint-grid":
            sol = dec_linear.solve_linear_dec_joint(
                inst, f_hat, eps, fw_steps, lambda_grid_size,
                warm_start=state.last_mu)
        elif lambda_mode == "closed-form":
            lam = t / 4.0
            mu0 = state.last_mu if state.last_mu is not None \
                else np.full(inst.n_decisions, 1.0 / inst.n_decisions)
            mu, value = dec_linear.frank_wolfe_min(inst, f_hat, lam, eps,
                                                   fw_steps, mu0)
            sol = dec_finite.DecSolution(value, mu, lam)
        else:
            raise ValueError(f"unknown lambda mode {lambda_mode!r}")
    else:
        raise TypeError(f"unsupported instance type {type(inst).__name__}")
    state.last_mu = sol.mu.weights
    diag = {"f_hat": f_hat, "epsilon_sq": eps_sq, "lambda": sol.lambda_star,
            "dec_value": sol.value}
    return sol.mu.weights, diag


def fixed_e2d_step(state: PolicyState, inst, lam: float, *,
                   use_shifted_gaps: bool = True, fw_steps: int = 100,
                   estimate_mode: str = "sample"):
    """One round at a fixed multiplier: only the inner problem is solved."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if isinstance(inst, FiniteInstance):
        f_hat = estimation.ewa_estimate(state.estimator, estimate_mode, state.rng)
        gaps = shifted_gap_matrix(inst, f_hat) if use_shifted_gaps else gap_matrix(inst)
        value, mu = dec_finite.dec_offset(gaps, info_matrix(inst, f_hat), lam)
    elif isinstance(inst, LinearInstance):
        f_hat = estimation.ridge_estimate(state.estimator)
        mu0 = state.last_mu if state.last_mu is not None \
            else np.full(inst.n_decisions, 1.0 / inst.n_decisions)
        mu, value = dec_linear.frank_wolfe_min(inst, f_hat, lam, 0.0, fw_steps, mu0)
    else:
        raise TypeError(f"unsupported instance type {type(inst).__name__}")
    state.last_mu = mu.weights
    diag = {"f_hat": f_hat, "epsilon_sq": math.nan, "lambda": lam,
            "dec_value": value}
    return mu.weights, diag


def ucb_step(state: PolicyState, inst: LinearInstance, *, eta: float = 1.0,
             map_norm: Optional[float] = None) -> int:
    """Confidence-ellipsoid decision from the shared ridge state.

    Width beta_t = sigma sqrt(2 log t + d log(1 + t L^2/(eta d)))
    + sqrt(eta) * param_bound; ties resolve to the lowest index.
    """
    x_hat = estimation.ridge_estimate(state.estimator)
    t = state.t
    d = inst.dim
    big_l = inst.max_map_norm() if map_norm is None else map_norm
    beta = inst.noise_sd * math.sqrt(
        2.0 * math.log(t) + d * math.log(1.0 + t * big_l ** 2 / (eta * d))
    ) + math.sqrt(eta) * inst.param_bound
    widths = np.sqrt(np.einsum(
        "pd,dp->p", inst.features,
        np.linalg.solve(state.estimator.V, inst.features.T)))
    return int(np.argmax(inst.features @ x_hat + beta * widths))


def ts_step(state: PolicyState, inst: LinearInstance, rng: RngStream) -> int:
    """Posterior-sampling decision: draw from N(x_hat, sigma^2 V_t^-1)."""
    x_hat = estimation.ridge_estimate(state.estimator)
    evals, q = np.linalg.eigh(state.estimator.V)
    z = rng.normals(inst.dim)
    draw = x_hat + inst.noise_sd * (q @ (z / np.sqrt(evals)))
    return int(np.argmax(inst.features @ draw))


class _RidgeMixin:
    """Shared ridge bookkeeping for the linear-instance policies."""

    def _make_ridge(self, inst: LinearInstance, eta: float) -> RidgeState:
        return estimation.make_ridge_state(inst.dim, eta=eta,
                                           projection_radius=inst.param_bound)


class AnytimeE2D(_RidgeMixin):
    """Anytime saddle-point policy with the per-round radius schedule."""

    def __init__(self, name: str = "anytime-e2d", *, use_shifted_gaps: bool = True,
                 lambda_mode: str = "grid", fw_steps: int = 100,
                 lambda_grid_size: int = 50, refine: bool = True,
                 estimate_mode: str = "sample", eta: float = 1.0):
        self.name = name
        self.use_shifted_gaps = use_shifted_gaps
        self.lambda_mode = lambda_mode
        self.fw_steps = fw_steps
        self.lambda_grid_size = lambda_grid_size
        self.refine = refine
        self.estimate_mode = estimate_mode
        self.eta = eta
        self.state: Optional[PolicyState] = None
        self.inst = None

    def reset(self, inst, rng: RngStream, horizon: int) -> None:
        if isinstance(inst, FiniteInstance):
            estimator = estimation.make_ewa_state(inst.n_models, self.eta)
        else:
            estimator = self._make_ridge(inst, self.eta)
        self.inst = inst
        self.state = PolicyState(estimator, rng=rng)

    def propose(self):
        return anytime_e2d_step(
            self.state, self.inst, use_shifted_gaps=self.use_shifted_gaps,
            lambda_mode=self.lambda_mode, fw_steps=self.fw_steps,
            lambda_grid_size=self.lambda_grid_size, refine=self.refine,
            estimate_mode=self.estimate_mode)

    def observe(self, pi: int, y) -> None:
        if isinstance(self.inst, FiniteInstance):
            self.state.estimator = estimation.ewa_update(
                self.state.estimator, pi, y, self.inst)
        else:
            self.state.estimator = estimation.ridge_update(
                self.state.estimator, pi, y, self.inst)
        self.state.t += 1


class FixedE2D(AnytimeE2D):
    """Fixed-multiplier variant; the multiplier comes from the tuned horizon."""

    def __init__(self, name: str, lam: Optional[float] = None,
                 tuned_horizon: Optional[int] = None, **kwargs):
        super().__init__(name, **kwargs)
        if lam is None:
            if tuned_horizon is None:
                raise ValueError("need lam or tuned_horizon")
            lam = fixed_horizon_lambda(tuned_horizon)
        self.lam = float(lam)

    def propose(self):
        return fixed_e2d_step(self.state, self.inst, self.lam,
                              use_shifted_gaps=self.use_shifted_gaps,
                              fw_steps=self.fw_steps,
                              estimate_mode=self.estimate_mode)


class LinUCB(_RidgeMixin):
    """Confidence-ellipsoid baseline on the full observation vector."""

    def __init__(self, name: str = "ucb", *, eta: float = 1.0):
        self.name = name
        self.eta = eta
        self.state: Optional[PolicyState] = None
        self.inst: Optional[LinearInstance] = None
        self._map_norm = None

    def reset(self, inst, rng: RngStream, horizon: int) -> None:
        if not isinstance(inst, LinearInstance):
            raise TypeError("this baseline is defined for linear instances")
        self.inst = inst
        self._map_norm = inst.max_map_norm()
        self.state = PolicyState(self._make_ridge(inst, self.eta), rng=rng)

    def propose(self):
        pi = ucb_step(self.state, self.inst, eta=self.eta, map_norm=self._map_norm)
        mu = np.zeros(self.inst.n_decisions)
        mu[pi] = 1.0
        f_hat = estimation.ridge_estimate(self.state.estimator)
        return mu, {"f_hat": f_hat, "epsilon_sq": math.nan,
                    "lambda": math.nan, "dec_value": math.nan}

    def observe(self, pi: int, y) -> None:
        self.state.estimator = estimation.ridge_update(self.state.estimator,
                                                       pi, y, self.inst)
        self.state.t += 1


class LinTS(LinUCB):
    """Gaussian posterior-sampling baseline sharing the ridge state."""

    def __init__(self, name: str = "ts", *, eta: float = 1.0):
        super().__init__(name, eta=eta)

    def propose(self):
        pi = ts_step(self.state, self.inst, self.state.rng)
        mu = np.zeros(self.inst.n_decisions)
        mu[pi] = 1.0
        f_hat = estimation.ridge_estimate(self.state.estimator)
        return mu, {"f_hat": f_hat, "epsilon_sq": math.nan,
                    "lambda": math.nan, "dec_value": math.nan}


def make_policy(spec: dict):
    """Build a policy object from a harness policy spec dict."""
    kind = spec["kind"]
    name = spec.get("name", kind)
    params = dict(spec.get("params", {}))
    if kind == "anytime-e2d":
        return AnytimeE2D(name, **params)
    if kind == "e2d":
        return FixedE2D(name, **params)
    if kind == "ucb":
        return LinUCB(name, **params)
    if kind == "ts":
        return LinTS(name, **params)
    raise ValueError(f"unknown policy kind {kind!r}")
