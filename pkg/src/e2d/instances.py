"""Domain types and gap/information matrix constructors.

Orientation convention: gap and information matrices are dense arrays of shape
(n_decisions, n_models), indexed [pi, g]. A sampling distribution mu over
decisions acts as a row vector and a model distribution nu as a column vector,
so bilinear forms read ``mu @ A @ nu``.

All types are immutable after construction (arrays are frozen), which makes
them safe to share read-only across parallel experiment runs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SIMPLEX_TOL = 1e-9
PSD_TOL = 1e-9


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SimplexVector:
    """Probability vector over an indexed set (decisions or models)."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("simplex vector must be a non-empty 1-d array")
        if not np.all(np.isfinite(w)):
            raise ValueError("simplex vector has non-finite entries")
        if w.min() < -SIMPLEX_TOL:
            raise ValueError(f"simplex vector has negative weight {w.min():.3e}")
        if abs(w.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"simplex weights sum to {w.sum():.12f}, not 1")
        w = np.clip(w, 0.0, None)
        object.__setattr__(self, "weights", _frozen_array(w))

    def __len__(self) -> int:
        return self.weights.size

    @classmethod
    def uniform(cls, n: int) -> "SimplexVector":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point(cls, n: int, index: int) -> "SimplexVector":
        w = np.zeros(n)
        w[index] = 1.0
        return cls(w)

    @classmethod
    def from_weights(cls, values, normalize: bool = False) -> "SimplexVector":
        w = np.asarray(values, dtype=float)
        if normalize:
            total = w.sum()
            if total <= 0:
                raise ValueError("cannot normalize non-positive weights")
            w = np.clip(w, 0.0, None) / np.clip(w, 0.0, None).sum()
        return cls(w)


def as_weights(mu) -> np.ndarray:
    """Accept a SimplexVector or a raw array and return a validated array."""
    if isinstance(mu, SimplexVector):
        return mu.weights
    return SimplexVector(np.asarray(mu, dtype=float)).weights


@dataclass(frozen=True, eq=False)
class FiniteInstance:
    """Enumerated decision/model class with Gaussian observations.

    ``rewards`` and ``obs_mean`` are indexed [model, decision]; ``obs_mean``
    may carry a trailing observation-dimension axis, in which case divergences
    sum over dimensions. The observation law at (pi, g) is an isotropic
    Gaussian centred at ``obs_mean[g, pi]`` with variance ``obs_variance``.
    """

    decisions: tuple
    models: tuple
    rewards: np.ndarray
    obs_mean: np.ndarray
    obs_variance: float

    def __post_init__(self):
        rewards = np.array(self.rewards, dtype=float)
        obs_mean = np.array(self.obs_mean, dtype=float)
        decisions = tuple(self.decisions)
        models = tuple(self.models)
        if rewards.ndim != 2:
            raise ValueError("rewards must be a 2-d (models x decisions) array")
        n_models, n_decisions = rewards.shape
        if n_models < 1 or n_decisions < 1:
            raise ValueError("need at least one decision and one model")
        if len(decisions) != n_decisions or len(models) != n_models:
            raise ValueError("label counts do not match reward table shape")
        if obs_mean.ndim == 2:
            obs_mean = obs_mean[:, :, None]
        if obs_mean.ndim != 3 or obs_mean.shape[:2] != (n_models, n_decisions):
            raise ValueError("obs_mean shape incompatible with rewards")
        if not (np.all(np.isfinite(rewards)) and np.all(np.isfinite(obs_mean))):
            raise ValueError("instance tables contain non-finite values")
        if not self.obs_variance > 0:
            raise ValueError("obs_variance must be positive")
        object.__setattr__(self, "decisions", decisions)
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "rewards", _frozen_array(rewards))
        object.__setattr__(self, "obs_mean", _frozen_array(obs_mean))
        object.__setattr__(self, "obs_variance", float(self.obs_variance))

    @property
    def n_decisions(self) -> int:
        return self.rewards.shape[1]

    @property
    def n_models(self) -> int:
        return self.rewards.shape[0]

    @property
    def obs_dim(self) -> int:
        return self.obs_mean.shape[2]

    @classmethod
    def from_tables(cls, rewards, obs_mean=None, obs_variance: float = 1.0,
                    decisions=None, models=None) -> "FiniteInstance":
        """Build an instance with auto-generated labels; obs_mean defaults to rewards."""
        rewards = np.asarray(rewards, dtype=float)
        if obs_mean is None:
            obs_mean = rewards
        n_models, n_decisions = rewards.shape
        if decisions is None:
            decisions = tuple(f"pi{i}" for i in range(n_decisions))
        if models is None:
            models = tuple(f"g{i}" for i in range(n_models))
        return cls(decisions, models, rewards, obs_mean, obs_variance)

    def to_dict(self) -> dict:
        obs = self.obs_mean
        obs_out = obs[:, :, 0] if obs.shape[2] == 1 else obs
        return {
            "decisions": list(self.decisions),
            "models": list(self.models),
            "rewards": self.rewards.tolist(),
            "obs_mean": obs_out.tolist(),
            "obs_variance": self.obs_variance,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FiniteInstance":
        return cls(tuple(doc["decisions"]), tuple(doc["models"]),
                   doc["rewards"], doc["obs_mean"], doc["obs_variance"])


@dataclass(frozen=True, eq=False)
class LinearInstance:
    """Linearly parametrized model class with per-decision observation maps.

    Rewards are ``<features[pi], f>`` and the observation at pi under model f
    is Gaussian with mean ``obs_maps[pi] @ f`` and covariance ``noise_sd^2 I``.
    Every decision must satisfy reward observability: phi phi^T <= M^T M.
    """

    dim: int
    features: np.ndarray
    obs_maps: tuple
    noise_sd: float
    param_bound: float
    diameter_B: float

    def __post_init__(self):
        features = np.array(self.features, dtype=float)
        if features.ndim != 2 or features.shape[0] < 1:
            raise ValueError("features must be a non-empty (decisions x dim) array")
        if features.shape[1] != self.dim:
            raise ValueError("feature dimension does not match dim")
        maps = tuple(_frozen_array(m) for m in self.obs_maps)
        if len(maps) != features.shape[0]:
            raise ValueError("need one observation map per decision")
        for i, m in enumerate(maps):
            if m.ndim != 2 or m.shape[1] != self.dim:
                raise ValueError(f"obs_maps[{i}] is not (m_pi x dim)")
            phi = features[i]
            slack = m.T @ m - np.outer(phi, phi)
            if np.linalg.eigvalsh(slack).min() < -PSD_TOL:
                raise ValueError(f"decision {i} violates reward observability")
        if not self.noise_sd >= 0:
            raise ValueError("noise_sd must be nonnegative")
        if not (self.param_bound > 0 and self.diameter_B > 0):
            raise ValueError("param_bound and diameter_B must be positive")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "features", _frozen_array(features))
        object.__setattr__(self, "obs_maps", maps)
        object.__setattr__(self, "noise_sd", float(self.noise_sd))
        object.__setattr__(self, "param_bound", float(self.param_bound))
        object.__setattr__(self, "diameter_B", float(self.diameter_B))

    @property
    def n_decisions(self) -> int:
        return self.features.shape[0]

    def rewards_for(self, param: np.ndarray) -> np.ndarray:
        return self.features @ np.asarray(param, dtype=float)

    def max_map_norm(self) -> float:
        """Largest operator norm over the observation maps."""
        return max(np.linalg.norm(m, 2) for m in self.obs_maps)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "features": self.features.tolist(),
            "obs_maps": [m.tolist() for m in self.obs_maps],
            "noise_sd": self.noise_sd,
            "param_bound": self.param_bound,
            "diameter_B": self.diameter_B,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LinearInstance":
        return cls(doc["dim"], doc["features"], tuple(np.asarray(m, dtype=float) for m in doc["obs_maps"]),
                   doc["noise_sd"], doc["param_bound"], doc["diameter_B"])


def load_instance(path_or_doc) -> FiniteInstance | LinearInstance:
    """Load an instance from a JSON file path or an already-parsed dict.

    Accepts either a bare instance document or a bundle with an "instance" key
    (as emitted by ``gen-instance``).
    """
    if isinstance(path_or_doc, (str, Path)):
        doc = json.loads(Path(path_or_doc).read_text())
    else:
        doc = path_or_doc
    if "instance" in doc:
        doc = doc["instance"]
    if "rewards" in doc:
        return FiniteInstance.from_dict(doc)
    if "features" in doc:
        return LinearInstance.from_dict(doc)
    raise ValueError("document is neither a finite nor a linear instance")


def best_decisions(inst: FiniteInstance) -> np.ndarray:
    """Optimal decision index per model; ties broken by lowest index."""
    return np.argmax(inst.rewards, axis=1)


def best_values(inst: FiniteInstance) -> np.ndarray:
    return np.max(inst.rewards, axis=1)


def gap_matrix(inst: FiniteInstance) -> np.ndarray:
    """Suboptimality gaps: entry [pi, g] is max_pi' r_g(pi') - r_g(pi)."""
    return (best_values(inst)[None, :] - inst.rewards.T).clip(min=0.0)


def shifted_gap_matrix(inst: FiniteInstance, f: int) -> np.ndarray:
    """Reference-shifted gaps: entry [pi, g] is max_pi' r_g(pi') - r_f(pi).

    Unlike the plain gap matrix, entries may be negative.
    """
    if not 0 <= f < inst.n_models:
        raise IndexError(f"model index {f} out of range")
    return best_values(inst)[None, :] - inst.rewards[f][:, None]


def delta_vector(inst: FiniteInstance, f: int) -> np.ndarray:
    """Optimal-value gaps delta_f(g) = r_g(pi*_g) - r_f(pi*_f)."""
    if not 0 <= f < inst.n_models:
        raise IndexError(f"model index {f} out of range")
    bv = best_values(inst)
    return bv - bv[f]


def info_matrix(inst: FiniteInstance, f: int) -> np.ndarray:
    """KL divergence of observation laws: entry [pi, g] is KL(g at pi || f at pi).

    Gaussians with shared variance give (m_g - m_f)^2 / (2 sigma^2), summed
    over observation dimensions; the reference column f is identically zero.
    """
    if not 0 <= f < inst.n_models:
        raise IndexError(f"model index {f} out of range")
    diff = inst.obs_mean - inst.obs_mean[f][None, :, :]
    return np.sum(diff * diff, axis=2).T / (2.0 * inst.obs_variance)


def check_reward_data_processing(inst: FiniteInstance) -> bool:
    """True iff (r_f(pi) - r_g(pi))^2 <= I_f(pi, g) pointwise for all pi, f, g.

    The pointwise condition implies the averaged data-processing inequality
    for every sampling distribution by Jensen.
    """
    dr = inst.rewards[:, None, :] - inst.rewards[None, :, :]
    dm = inst.obs_mean[:, None, :, :] - inst.obs_mean[None, :, :, :]
    info = np.sum(dm * dm, axis=3) / (2.0 * inst.obs_variance)
    return bool(np.all(dr * dr <= info + 1e-12))
