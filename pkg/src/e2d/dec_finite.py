"""Saddle-point solvers for decision-estimation coefficients of finite classes.

All solvers consume a gap matrix and an information matrix of shape
(n_decisions, n_models), see :mod:`e2d.instances` for the orientation. The
offset coefficient at a fixed multiplier reduces to a matrix-game linear
program; the average-constrained coefficient is its minimum over a multiplier
grid plus the constraint payment, with an optional local ternary refinement
around the best grid point.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, minimize

from .instances import SimplexVector, as_weights


class SolverError(RuntimeError):
    """Numerical failure inside an LP or convex subproblem."""


@dataclass
class DecSolution:
    """Value and minimizing sampling distribution of a DEC program.

    ``adversary`` is the max-player's distribution recovered from LP duals at
    the selected multiplier; it is diagnostic and may be None.
    """

    value: float
    mu: SimplexVector
    lambda_star: float
    adversary: SimplexVector | None = None


def _minimax_lp(payoff: np.ndarray):
    """Solve min_mu max_g mu @ payoff[:, g] over the decision simplex.

    Returns (value, mu, nu) where nu are the dual weights on the model
    constraints (the adversary), or None if duals are unusable.
    """
    n_dec, n_mod = payoff.shape
    c = np.zeros(n_dec + 1)
    c[0] = 1.0
    a_ub = np.hstack([-np.ones((n_mod, 1)), payoff.T])
    b_ub = np.zeros(n_mod)
    a_eq = np.zeros((1, n_dec + 1))
    a_eq[0, 1:] = 1.0
    bounds = [(None, None)] + [(0.0, 1.0)] * n_dec
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
                  bounds=bounds, method="highs")
    if res.status != 0:
        raise SolverError(f"inner LP failed: {res.message}")
    mu = np.clip(res.x[1:], 0.0, None)
    mu /= mu.sum()
    nu = None
    marg = getattr(res.ineqlin, "marginals", None)
    if marg is not None:
        nu_raw = np.clip(-np.asarray(marg), 0.0, None)
        if nu_raw.sum() > 1e-9:
            nu = nu_raw / nu_raw.sum()
    return float(res.fun), mu, nu


def dec_offset(gaps: np.ndarray, info: np.ndarray, lam: float):
    """Offset DEC: min_mu max_g mu (gaps - lam * info) e_g.

    Returns (value, mu). The multiplier trades regret against information:
    large lam forces the adversary towards models indistinguishable from the
    reference.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if gaps.shape != info.shape:
        raise ValueError("gap and information matrices must share a shape")
    value, mu, _ = _minimax_lp(gaps - lam * info)
    return value, SimplexVector(mu)


def _lambda_ceiling(gaps: np.ndarray, epsilon: float) -> float:
    """Upper end of the multiplier range: max positive gap / eps^2.

    Falls back to 1/eps^2 when no entry is positive (degenerate instances).
    """
    top = float(gaps.max(initial=0.0))
    if top <= 0.0:
        top = 1.0
    return top / (epsilon * epsilon)


def _grid_min_with_refine(objective, lam_grid: np.ndarray, refine_iters: int):
    """Minimize objective(lam) over a grid, then ternary-search the best cell.

    objective returns (value, payload); ties on the grid go to the smallest
    lambda. Returns (value, lam, payload).
    """
    evals = [objective(lam) for lam in lam_grid]
    values = np.array([e[0] for e in evals])
    k = int(np.argmin(values))
    best = (float(values[k]), float(lam_grid[k]), evals[k][1])
    if refine_iters > 0 and lam_grid.size > 1:
        lo = float(lam_grid[max(k - 1, 0)])
        hi = float(lam_grid[min(k + 1, lam_grid.size - 1)])
        for _ in range(refine_iters):
            m1 = lo + (hi - lo) / 3.0
            m2 = hi - (hi - lo) / 3.0
            v1, p1 = objective(m1)
            v2, p2 = objective(m2)
            if v1 < best[0]:
                best = (v1, m1, p1)
            if v2 < best[0]:
                best = (v2, m2, p2)
            if v1 <= v2:
                hi = m2
            else:
                lo = m1
    return best


def dec_ac(gaps: np.ndarray, info: np.ndarray, epsilon: float,
           lambda_grid_size: int = 50, *, refine: bool = True,
           refine_iters: int = 12) -> DecSolution:
    """Average-constrained DEC via its Lagrangian form.

    Minimizes dec_offset(lam) + lam * eps^2 over a multiplier grid on
    [0, max_gap/eps^2]; with ``refine`` the best grid cell is polished by
    ternary search, which matters near kinks of the piecewise-linear envelope.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if lambda_grid_size < 2:
        raise ValueError("lambda grid needs at least 2 points")
    eps_sq = epsilon * epsilon

    def objective(lam):
        value, mu, nu = _minimax_lp(gaps - lam * info)
        return value + lam * eps_sq, (mu, nu)

    lam_grid = np.linspace(0.0, _lambda_ceiling(gaps, epsilon), lambda_grid_size)
    value, lam, (mu, nu) = _grid_min_with_refine(
        objective, lam_grid, refine_iters if refine else 0)
    adversary = SimplexVector(nu) if nu is not None else None
    return DecSolution(value, SimplexVector(mu), lam, adversary)


def dec_ac_shifted(gaps_f: np.ndarray, info: np.ndarray, epsilon: float,
                   lambda_grid_size: int = 50, *, refine: bool = True,
                   refine_iters: int = 12) -> DecSolution:
    """Average-constrained DEC with reference-shifted gaps.

    Identical program with the shifted gap matrix, whose entries may be
    negative; the multiplier ceiling uses the positive part only.
    """
    return dec_ac(gaps_f, info, epsilon, lambda_grid_size,
                  refine=refine, refine_iters=refine_iters)


def dec_constrained_oracle(gaps: np.ndarray, info: np.ndarray, epsilon: float,
                           mu_grid_step: float = 0.02) -> float:
    """Brute-force constrained DEC where the adversary plays single models.

    Enumerates a simplex grid of sampling distributions and, for each, the
    best single model within the divergence budget. Test oracle only; the
    grid blows up beyond a handful of decisions.
    """
    n_dec, _ = gaps.shape
    if n_dec > 4:
        warnings.warn("constrained oracle grid is too coarse beyond 4 decisions",
                      RuntimeWarning, stacklevel=2)
    grid = simplex_grid(n_dec, mu_grid_step)
    feasible = grid @ info <= epsilon * epsilon + 1e-12
    vals = grid @ gaps
    vals[~feasible] = -np.inf
    return float(vals.max(axis=1).min())


def simplex_grid(dims: int, step: float) -> np.ndarray:
    """All probability vectors with entries that are multiples of step."""
    parts = round(1.0 / step)
    if abs(parts * step - 1.0) > 1e-9:
        raise ValueError("step must divide 1 evenly")
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + [remaining])
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, slots - 1)

    rec([], parts, dims)
    return np.array(out, dtype=float) / parts


def pac_dec(delta_f: np.ndarray, info: np.ndarray, epsilon: float,
            lambda_grid_size: int = 50, *, refine: bool = True,
            refine_iters: int = 12) -> float:
    """PAC variant: the objective is the optimal-value gap vector delta_f.

    Solves min over a multiplier grid of min_mu max_g
    {delta_f(g) - lam * (mu I e_g - eps^2)}.
    """
    return _pac_dec_solution(delta_f, info, epsilon, lambda_grid_size,
                             refine=refine, refine_iters=refine_iters).value


def _pac_dec_solution(delta_f: np.ndarray, info: np.ndarray, epsilon: float,
                      lambda_grid_size: int = 50, *, refine: bool = True,
                      refine_iters: int = 12) -> DecSolution:
    delta_f = np.asarray(delta_f, dtype=float)
    if delta_f.ndim != 1 or delta_f.size != info.shape[1]:
        raise ValueError("delta_f must have one entry per model")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    eps_sq = epsilon * epsilon
    n_dec, n_mod = info.shape

    def objective(lam):
        # min_mu max_g [delta_f(g) + lam eps^2 - lam * mu I e_g]; constant in
        # mu except the information term, so the same minimax LP applies.
        value, mu, nu = _minimax_lp(-lam * info + delta_f[None, :])
        return value + lam * eps_sq, (mu, nu)

    top = float(delta_f.max(initial=0.0))
    lam_max = (top if top > 0 else 1.0) / eps_sq
    lam_grid = np.linspace(0.0, lam_max, lambda_grid_size)
    value, lam, (mu, nu) = _grid_min_with_refine(
        objective, lam_grid, refine_iters if refine else 0)
    adversary = SimplexVector(nu) if nu is not None else None
    return DecSolution(value, SimplexVector(mu), lam, adversary)


def _min_ratio_exact_sq(a: np.ndarray, b: np.ndarray) -> float:
    """Exact min over the simplex of (mu a)^2 / (mu b) for elementwise a > 0.

    The ratio is homogeneous of degree one in mu, so minimizing it equals
    maximizing (x b)(x 1) over the slice {x >= 0, x a = 1}, whose optimum lies
    on an edge between two vertices e_i / a_i. Each edge reduces to a scalar
    quadratic maximized in closed form.
    """
    bb = b / a
    cc = 1.0 / a
    best = 0.0
    n = a.size
    for i in range(n):
        for j in range(i, n):
            # product ((1-u) bb_j + u bb_i)((1-u) cc_j + u cc_i) on u in [0,1]
            db, dc = bb[i] - bb[j], cc[i] - cc[j]
            cands = [0.0, 1.0]
            quad = 2.0 * db * dc
            if quad != 0.0:
                u_star = -(bb[j] * dc + cc[j] * db) / quad
                if 0.0 < u_star < 1.0:
                    cands.append(u_star)
            for u in cands:
                p = (bb[j] + u * db) * (cc[j] + u * dc)
                if p > best:
                    best = p
    return 1.0 / best if best > 0.0 else math.inf


def _min_ratio(a: np.ndarray, b: np.ndarray, alpha: float = 2.0) -> float:
    """min over the simplex of (mu a)^alpha / (mu b), with conventions.

    Returns 0 when mu a can be made nonpositive, +inf when b is identically
    zero but a stays positive. alpha = 2 is solved exactly; other exponents
    fall back to a multi-start local solve, which is acceptable because
    callers use them to certify diagnostic upper bounds.
    """
    n = a.size
    if float(a.min()) <= 0.0:
        return 0.0
    if float(b.max()) <= 0.0:
        return math.inf
    if alpha == 2.0:
        return _min_ratio_exact_sq(a, b)

    def value(mu):
        den = float(mu @ b)
        if den <= 1e-300:
            return math.inf
        return float(mu @ a) ** alpha / den

    def fun_grad(mu):
        num = float(mu @ a)
        den = float(mu @ b)
        if den <= 1e-14:
            return 1e30 + num, a * 0.0
        f = num ** alpha / den
        grad = alpha * num ** (alpha - 1.0) * a / den - (num ** alpha) * b / den ** 2
        return f, grad

    starts = [np.full(n, 1.0 / n)]
    with np.errstate(divide="ignore"):
        vertex_vals = np.where(b > 0, a ** alpha / np.where(b > 0, b, 1.0), np.inf)
    i = int(np.argmin(vertex_vals))
    if np.isfinite(vertex_vals[i]):
        e = np.full(n, 1e-9)
        e[i] = 1.0
        starts.append(e / e.sum())
    if n <= 6:
        grid = simplex_grid(n, 0.1)
        gv = np.array([value(m) for m in grid])
        k = int(np.argmin(gv))
        starts.append(np.clip(grid[k], 1e-12, None) / np.clip(grid[k], 1e-12, None).sum())
    best = min(value(s) for s in starts)
    cons = ({"type": "eq", "fun": lambda m: m.sum() - 1.0, "jac": lambda m: np.ones(n)},)
    bounds = [(0.0, 1.0)] * n
    for s in starts:
        res = minimize(fun_grad, s, jac=True, bounds=bounds, constraints=cons,
                       method="SLSQP", options={"maxiter": 200, "ftol": 1e-12})
        if res.x is not None:
            x = np.clip(res.x, 0.0, None)
            if x.sum() > 0:
                best = min(best, value(x / x.sum()))
    return best


def info_ratio(gaps_f: np.ndarray, info: np.ndarray, nu) -> float:
    """Information ratio min_mu (mu gaps_f nu)^2 / (mu info nu) for fixed nu.

    Convention at a degenerate information vector: 0 when the expected gap can
    be made nonpositive, +inf otherwise.
    """
    nu_w = as_weights(nu)
    a = gaps_f @ nu_w
    b = info @ nu_w
    if float(b.max()) <= 0.0 and float(a.min()) > 0.0:
        warnings.warn("information vector is identically zero for this adversary",
                      RuntimeWarning, stacklevel=2)
    return _min_ratio(a, b, alpha=2.0)


def max_info_ratio(gaps_f: np.ndarray, info: np.ndarray,
                   nu_grid_step: float = 0.02, alpha: float = 2.0) -> float:
    """Worst-case generalized information ratio over a grid of adversaries.

    The grid covers distributions over models (all vertices included). Values
    follow the conventions of :func:`info_ratio`.
    """
    n_mod = info.shape[1]
    grid = simplex_grid(n_mod, nu_grid_step)
    a_all = grid @ gaps_f.T
    amin = a_all.min(axis=1)
    best = 0.0
    for j in np.nonzero(amin > 0.0)[0]:
        r = _min_ratio(a_all[j], info @ grid[j], alpha=alpha)
        if r > best:
            best = r
            if math.isinf(best):
                break
    return best


def generalized_dec_bound(gaps_f: np.ndarray, info: np.ndarray, epsilon: float,
                          alpha: float, *, nu_grid_step: float = 0.02,
                          lambda_grid_size: int = 50) -> float:
    """Diagnostic DEC upper bound from the generalized information ratio.

    Evaluates min over a multiplier grid (plus the analytic stationary point)
    of ``lam^(1/(1-alpha)) alpha^(alpha/(1-alpha)) (alpha-1) Psi^(1/(alpha-1))
    + lam eps^2``. At alpha = 2 this is the usual eps * sqrt(Psi) bound.
    """
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    psi = max_info_ratio(gaps_f, info, nu_grid_step, alpha=alpha)
    if psi == 0.0:
        return 0.0
    if math.isinf(psi):
        return math.inf
    eps_sq = epsilon * epsilon
    beta = 1.0 / (alpha - 1.0)
    coef = alpha ** (alpha / (1.0 - alpha)) * (alpha - 1.0) * psi ** beta
    lam_star = (coef * beta / eps_sq) ** (1.0 / (beta + 1.0))
    lams = np.geomspace(lam_star * 1e-2, lam_star * 1e2, lambda_grid_size)
    lams = np.append(lams, lam_star)
    vals = coef * lams ** (-beta) + lams * eps_sq
    return float(vals.min())
