"""Environment simulators: observation sampling, instant regret, generators.

Instances are immutable and every run owns its RngStream, so replaying a seed
reproduces a trajectory bit for bit.
"""
from __future__ import annotations

import numpy as np

from .instances import FiniteInstance, LinearInstance, best_values
from .rng import RngStream


def sample_observation(inst, f_star, pi: int, rng: RngStream) -> np.ndarray:
    """Draw one observation at decision pi under the true model f_star.

    Finite instances take a model index and return a vector over observation
    dimensions; linear instances take a parameter vector and return the
    (m_pi)-dimensional Gaussian observation.
    """
    if isinstance(inst, FiniteInstance):
        mean = inst.obs_mean[int(f_star), pi]
        sd = np.sqrt(inst.obs_variance)
        return mean + sd * rng.normals(mean.size)
    if isinstance(inst, LinearInstance):
        mean = inst.obs_maps[pi] @ np.asarray(f_star, dtype=float)
        if inst.noise_sd == 0.0:
            return mean
        return mean + inst.noise_sd * rng.normals(mean.size)
    raise TypeError(f"unsupported instance type {type(inst).__name__}")


def instant_regret(inst, f_star, pi: int) -> float:
    """Suboptimality of decision pi under the true model; always >= 0."""
    if isinstance(inst, FiniteInstance):
        f = int(f_star)
        return float(best_values(inst)[f] - inst.rewards[f, pi])
    if isinstance(inst, LinearInstance):
        rewards = inst.rewards_for(f_star)
        return float(rewards.max() - rewards[pi])
    raise TypeError(f"unsupported instance type {type(inst).__name__}")


def _unit_rows(rng: RngStream, n: int, d: int) -> np.ndarray:
    rows = rng.normals(n * d).reshape(n, d)
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def make_revealing_semibandit(d: int, n_decisions: int, rng: RngStream, *,
                              noise_sd: float = 1.0, param_bound: float = 2.0,
                              max_tries: int = 100):
    """Semi-bandit whose decision 0 observes every feature direction at once.

    Features and the true parameter are drawn on the unit sphere. Decision 0
    is the revealing action: its observation map stacks all feature rows; the
    rest observe their own reward direction only. The true parameter is
    resampled until the revealing action is suboptimal. Returns
    (instance, f_star).
    """
    if n_decisions < 2:
        raise ValueError("need at least two decisions")
    if d < 1:
        raise ValueError("dimension must be positive")
    feats = _unit_rows(rng, n_decisions, d)
    maps = (feats.copy(),) + tuple(feats[i][None, :] for i in range(1, n_decisions))
    map_norm = max(np.linalg.norm(m, 2) for m in maps)
    inst = LinearInstance(d, feats, maps, noise_sd, param_bound,
                          2.0 * param_bound * map_norm)
    for _ in range(max_tries):
        f_star = _unit_rows(rng, 1, d)[0]
        if int(np.argmax(feats @ f_star)) != 0:
            return inst, f_star
    raise RuntimeError("could not draw a parameter keeping the revealing "
                       f"action suboptimal in {max_tries} tries")


def make_linear_bandit(d: int, n_decisions: int, rng: RngStream, *,
                       noise_sd: float = 1.0, param_bound: float = 2.0):
    """Plain linear bandit: each decision observes its own reward direction."""
    if n_decisions < 1 or d < 1:
        raise ValueError("need at least one decision and a positive dimension")
    feats = _unit_rows(rng, n_decisions, d)
    maps = tuple(f[None, :] for f in feats)
    inst = LinearInstance(d, feats, maps, noise_sd, param_bound, 2.0 * param_bound)
    f_star = _unit_rows(rng, 1, d)[0]
    return inst, f_star


def make_mab_instance(n_arms: int, n_models: int, rng: RngStream, *,
                      obs_variance: float = 0.5):
    """Finite multi-armed bandit class with observation means equal to the
    rewards; the default variance 1/2 makes the reward data-processing
    inequality hold with equality."""
    if n_arms < 1 or n_models < 1:
        raise ValueError("need at least one arm and one model")
    rewards = rng.uniforms(n_models * n_arms).reshape(n_models, n_arms)
    inst = FiniteInstance.from_tables(rewards, rewards, obs_variance)
    f_star = rng.integers(0, n_models)
    return inst, f_star
