"""Frank-Wolfe solvers for the convex reformulation of the linear-model DEC.

For linear models the average-constrained DEC with reference-shifted gaps
reduces to, per multiplier lam,

    min_mu max_b  <phi_b - phi_mu, f_hat> + ||phi_b||^2_{V(mu)^-1} / (4 lam)
                  + lam eps^2,

with V(mu) = sum_pi mu_pi M_pi^T M_pi. The inner objective is convex in mu;
the max over the finite decision set is handled by taking the subgradient at
the active decision, with best-iterate tracking (optionally softened by a
log-sum-exp smoothing flag). The outer multiplier search is a geometric grid,
either around each Frank-Wolfe run or inside every iteration (the variant
used by the per-round policies, which is ~grid-size times cheaper).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dec_finite import DecSolution
from .instances import LinearInstance, SimplexVector, as_weights

DEFAULT_RIDGE = 1e-9


@dataclass
class DesignState:
    """Design matrix bundle for a sampling distribution mu."""

    mu: np.ndarray
    V: np.ndarray
    V_inv: np.ndarray
    phi_mu: np.ndarray


def _map_grams(inst: LinearInstance) -> np.ndarray:
    """Stack of M_pi^T M_pi, shape (n_decisions, d, d)."""
    return np.stack([m.T @ m for m in inst.obs_maps])


def build_design_state(inst: LinearInstance, mu, ridge: float = DEFAULT_RIDGE,
                       grams: np.ndarray | None = None) -> DesignState:
    mu_w = as_weights(mu)
    if grams is None:
        grams = _map_grams(inst)
    v = np.tensordot(mu_w, grams, axes=1) + ridge * np.eye(inst.dim)
    return DesignState(mu_w, v, np.linalg.inv(v), inst.features.T @ mu_w)


def linear_dec_objective(inst: LinearInstance, f_hat, state: DesignState,
                         lam: float, epsilon: float):
    """Exact inner objective at (mu, lam); returns (value, active_b).

    Ties on the maximizing decision go to the lowest index.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    f_hat = np.asarray(f_hat, dtype=float)
    w = state.V_inv @ inst.features.T
    q = np.einsum("pd,dp->p", inst.features, w)
    scores = inst.features @ f_hat - state.phi_mu @ f_hat + q / (4.0 * lam)
    b = int(np.argmax(scores))
    return float(scores[b] + lam * epsilon * epsilon), b


def _fw_quantities(inst, features, grams, f_hat, mu, ridge):
    """Per-iterate pieces: V^{-1} features, the quadratic terms q_b and the
    linear terms r_b = <phi_b - phi_mu, f_hat>."""
    v = np.tensordot(mu, grams, axes=1) + ridge * np.eye(inst.dim)
    w = np.linalg.solve(v, features.T)
    q = np.einsum("pd,dp->p", features, w)
    lin = features @ f_hat
    r = lin - float(mu @ lin)
    return w, q, r, lin


def _subgradient(inst, w_cols, lin, lam, weights_b):
    """Gradient of the inner objective at the active decision(s).

    weights_b is a point mass for the plain subgradient or a softmax for the
    smoothed variant; component pi is -<phi_pi, f_hat> - ||M_pi V^-1 phi_b||^2
    / (4 lam), averaged over weights_b.
    """
    n_dec = inst.n_decisions
    grad = -lin.astype(float).copy()
    for b, wb in weights_b:
        col = w_cols[:, b]
        pen = np.empty(n_dec)
        for pi, m in enumerate(inst.obs_maps):
            mv = m @ col
            pen[pi] = float(mv @ mv)
        grad -= wb * pen / (4.0 * lam)
    return grad


def frank_wolfe_min(inst: LinearInstance, f_hat, lam: float, epsilon: float,
                    steps: int, mu0, *, ridge: float = DEFAULT_RIDGE,
                    smooth_tau: float | None = None,
                    grams: np.ndarray | None = None):
    """Frank-Wolfe on the inner objective at fixed lam; returns (mu, value).

    Steps use the 2/(k+2) schedule and the subgradient at the active decision;
    the returned iterate is the best one seen, so the value never exceeds the
    objective at mu0.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if steps < 1:
        raise ValueError("need at least one step")
    f_hat = np.asarray(f_hat, dtype=float)
    features = inst.features
    if grams is None:
        grams = _map_grams(inst)
    mu = as_weights(mu0).copy()
    pay = lam * epsilon * epsilon
    best_val, best_mu = np.inf, mu.copy()
    for k in range(steps + 1):
        w, q, r, lin = _fw_quantities(inst, features, grams, f_hat, mu, ridge)
        scores = r + q / (4.0 * lam)
        b = int(np.argmax(scores))
        value = float(scores[b]) + pay
        if value < best_val:
            best_val, best_mu = value, mu.copy()
        if k == steps:
            break
        if smooth_tau:
            soft = np.exp((scores - scores[b]) / smooth_tau)
            soft /= soft.sum()
            active = [(i, soft[i]) for i in np.nonzero(soft > 1e-12)[0]]
        else:
            active = [(b, 1.0)]
        grad = _subgradient(inst, w, lin, lam, active)
        s = int(np.argmin(grad))
        gamma = 2.0 / (k + 2.0)
        mu *= 1.0 - gamma
        mu[s] += gamma
    return SimplexVector(best_mu), best_val


def _lambda_grid(inst: LinearInstance, f_hat, epsilon: float, size: int) -> np.ndarray:
    """Geometric multiplier grid on (0, lam_max]; zero is excluded because the
    quadratic term diverges there. lam_max uses the computable reward-spread
    surrogate, floored at 1/eps^2."""
    lin = inst.features @ np.asarray(f_hat, dtype=float)
    spread = float(lin.max() - lin.min())
    lam_max = max(spread, 1.0) / (epsilon * epsilon)
    return np.geomspace(lam_max * 1e-3, lam_max, size)


def solve_linear_dec(inst: LinearInstance, f_hat, epsilon: float,
                     fw_steps: int = 100, lambda_grid_size: int = 50,
                     warm_start=None, *, ridge: float = DEFAULT_RIDGE,
                     smooth_tau: float | None = None) -> DecSolution:
    """Grid search over the multiplier with one Frank-Wolfe run per point.

    Each run starts from the previous multiplier's solution (the minimizer
    moves slowly in lam), the first from warm_start or uniform.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    grams = _map_grams(inst)
    cursor = as_weights(warm_start) if warm_start is not None \
        else np.full(inst.n_decisions, 1.0 / inst.n_decisions)
    best = None
    for lam in _lambda_grid(inst, f_hat, epsilon, lambda_grid_size):
        mu, value = frank_wolfe_min(inst, f_hat, lam, epsilon, fw_steps, cursor,
                                    ridge=ridge, smooth_tau=smooth_tau, grams=grams)
        cursor = mu.weights
        if best is None or value < best.value:
            best = DecSolution(value, mu, float(lam))
    return best


def solve_linear_dec_joint(inst: LinearInstance, f_hat, epsilon: float,
                           fw_steps: int = 100, lambda_grid_size: int = 50,
                           warm_start=None, *, ridge: float = DEFAULT_RIDGE) -> DecSolution:
    """Single Frank-Wolfe run with the multiplier grid searched inside every
    iteration; the step direction follows the subgradient at the per-iterate
    best (lam, b) pair. Much cheaper than solve_linear_dec per round and is
    the variant the per-round policies use.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    f_hat = np.asarray(f_hat, dtype=float)
    features = inst.features
    grams = _map_grams(inst)
    lams = _lambda_grid(inst, f_hat, epsilon, lambda_grid_size)
    pay = lams * epsilon * epsilon
    mu = as_weights(warm_start).copy() if warm_start is not None \
        else np.full(inst.n_decisions, 1.0 / inst.n_decisions)
    best_val, best_mu, best_lam = np.inf, mu.copy(), float(lams[0])
    for k in range(fw_steps + 1):
        w, q, r, lin = _fw_quantities(inst, features, grams, f_hat, mu, ridge)
        table = r[None, :] + q[None, :] / (4.0 * lams[:, None]) + pay[:, None]
        per_lam = table.max(axis=1)
        li = int(np.argmin(per_lam))
        value = float(per_lam[li])
        lam = float(lams[li])
        b = int(np.argmax(table[li]))
        if value < best_val:
            best_val, best_mu, best_lam = value, mu.copy(), lam
        if k == fw_steps:
            break
        grad = _subgradient(inst, w, lin, lam, [(b, 1.0)])
        s = int(np.argmin(grad))
        gamma = 2.0 / (k + 2.0)
        mu *= 1.0 - gamma
        mu[s] += gamma
    return DecSolution(best_val, SimplexVector(best_mu), best_lam)


def g_optimal_value(inst: LinearInstance, fw_steps: int = 100, *,
                    ridge: float = DEFAULT_RIDGE,
                    smooth_tau: float | None = None):
    """G-optimal design value: Frank-Wolfe on max_b ||phi_b||^2_{V(mu)^-1}.

    Returns (omega, mu) with omega the square root of the best objective seen.
    """
    features = inst.features
    grams = _map_grams(inst)
    n = inst.n_decisions
    mu = np.full(n, 1.0 / n)
    best_val, best_mu = np.inf, mu.copy()
    for k in range(fw_steps + 1):
        v = np.tensordot(mu, grams, axes=1) + ridge * np.eye(inst.dim)
        w = np.linalg.solve(v, features.T)
        q = np.einsum("pd,dp->p", features, w)
        b = int(np.argmax(q))
        if q[b] < best_val:
            best_val, best_mu = float(q[b]), mu.copy()
        if k == fw_steps:
            break
        if smooth_tau:
            soft = np.exp((q - q[b]) / smooth_tau)
            soft /= soft.sum()
            active = [(i, soft[i]) for i in np.nonzero(soft > 1e-12)[0]]
        else:
            active = [(b, 1.0)]
        grad = np.zeros(n)
        for bb, wb in active:
            col = w[:, bb]
            for pi, m in enumerate(inst.obs_maps):
                mv = m @ col
                grad[pi] -= wb * float(mv @ mv)
        s = int(np.argmin(grad))
        gamma = 2.0 / (k + 2.0)
        mu *= 1.0 - gamma
        mu[s] += gamma
    return float(np.sqrt(best_val)), SimplexVector(best_mu)
