"""Experiment orchestration: config ingestion, multi-seed execution, trace
persistence, and the two bundled experiment presets.

Per-run seeds are a stable mix of (base seed, policy name, run index), so
adding a policy to a config never perturbs the other policies' streams, and
parallel execution produces byte-identical output to serial execution.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .environments import (
    instant_regret,
    make_linear_bandit,
    make_mab_instance,
    make_revealing_semibandit,
    sample_observation,
)
from .estimation import est_increment, finite_info_provider, linear_info_provider
from .instances import FiniteInstance, LinearInstance, load_instance
from .policies import make_policy
from .rng import RngStream, derive_seed

TRACE_COLUMNS = ("run_id", "policy", "t", "decision", "instant_regret",
                 "cum_regret", "epsilon_sq", "lambda", "dec_value",
                 "est_increment", "seed")


@dataclass
class PolicySpec:
    name: str
    kind: str
    params: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    instance: FiniteInstance | LinearInstance
    f_star: object
    policies: list
    horizon: int
    n_runs: int
    base_seed: int
    output_path: str | None = None
    fw_steps: int = 100
    lambda_grid: int = 50

    def __post_init__(self):
        if self.horizon < 1 or self.n_runs < 1:
            raise ValueError("horizon and n_runs must be positive")
        names = [p.name for p in self.policies]
        if len(set(names)) != len(names):
            raise ValueError("policy names must be unique")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        inst_doc = doc["instance"]
        if isinstance(inst_doc, dict) and "path" in inst_doc:
            bundle = json.loads(Path(inst_doc["path"]).read_text())
        else:
            bundle = inst_doc
        instance = load_instance(bundle)
        f_star = doc.get("f_star")
        if f_star is None and isinstance(bundle, dict):
            f_star = bundle.get("f_star")
        if f_star is None:
            raise ValueError("config needs f_star (index or parameter vector)")
        if isinstance(instance, LinearInstance):
            f_star = np.asarray(f_star, dtype=float)
        else:
            f_star = int(f_star)
        policies = [PolicySpec(p["name"], p["kind"], dict(p.get("params", {})))
                    for p in doc["policies"]]
        return cls(instance, f_star, policies, int(doc["horizon"]),
                   int(doc["n_runs"]), int(doc["base_seed"]),
                   doc.get("output_path"), int(doc.get("fw_steps", 100)),
                   int(doc.get("lambda_grid", 50)))

    def to_dict(self) -> dict:
        f_star = self.f_star
        if isinstance(f_star, np.ndarray):
            f_star = f_star.tolist()
        return {
            "instance": self.instance.to_dict(),
            "f_star": f_star,
            "policies": [asdict(p) for p in self.policies],
            "horizon": self.horizon,
            "n_runs": self.n_runs,
            "base_seed": self.base_seed,
            "output_path": self.output_path,
            "fw_steps": self.fw_steps,
            "lambda_grid": self.lambda_grid,
        }


@dataclass
class TraceRow:
    run_id: int
    policy: str
    t: int
    decision: int
    instant_regret: float
    cum_regret: float
    epsilon_sq: float
    lam: float
    dec_value: float
    est_increment: float
    seed: int


def _policy_spec_with_defaults(config: ExperimentConfig, spec: PolicySpec) -> dict:
    params = dict(spec.params)
    if spec.kind in ("anytime-e2d", "e2d"):
        params.setdefault("fw_steps", config.fw_steps)
        params.setdefault("lambda_grid_size", config.lambda_grid)
    return {"name": spec.name, "kind": spec.kind, "params": params}


def run_single(config: ExperimentConfig, spec: PolicySpec, run_idx: int):
    """Execute one (policy, run) cell; returns its trace rows.

    A failure mid-run aborts the run with one error row (decision -1) so the
    other cells still complete.
    """
    inst = config.instance
    seed = derive_seed(config.base_seed, spec.name, str(run_idx))
    root = RngStream(seed)
    rows = []
    cum = 0.0
    try:
        policy = make_policy(_policy_spec_with_defaults(config, spec))
        policy.reset(inst, root.spawn("policy"), config.horizon)
        sample_rng = root.spawn("sample")
        env_rng = root.spawn("env")
        provider = finite_info_provider(inst) if isinstance(inst, FiniteInstance) \
            else linear_info_provider(inst)
        for t in range(1, config.horizon + 1):
            mu, diag = policy.propose()
            pi = sample_rng.choice(mu)
            regret = instant_regret(inst, config.f_star, pi)
            cum += regret
            inc = est_increment(mu, diag["f_hat"], config.f_star, provider)
            y = sample_observation(inst, config.f_star, pi, env_rng)
            policy.observe(pi, y)
            rows.append(TraceRow(run_idx, spec.name, t, pi, regret, cum,
                                 diag["epsilon_sq"], diag["lambda"],
                                 diag["dec_value"], inc, seed))
    except Exception:  # noqa: BLE001 - recorded as an aborted-run row
        rows.append(TraceRow(run_idx, spec.name, len(rows) + 1, -1, math.nan,
                             math.nan, math.nan, math.nan, math.nan,
                             math.nan, seed))
    return rows


def _run_cell(args):
    config_doc, spec_doc, run_idx = args
    config = ExperimentConfig.from_dict(config_doc)
    spec = PolicySpec(**spec_doc)
    return run_single(config, spec, run_idx)


def run_experiment(config: ExperimentConfig, jobs: int = 1):
    """Run every (policy, run) cell; returns (rows, summary).

    The summary carries mean and standard error of the final cumulative
    regret per policy, plus any aborted cells.
    """
    cells = [(spec, run) for spec in config.policies
             for run in range(config.n_runs)]
    if jobs > 1:
        config_doc = config.to_dict()
        tasks = [(config_doc, asdict(spec), run) for spec, run in cells]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, tasks, chunksize=1))
    else:
        results = [run_single(config, spec, run) for spec, run in cells]
    rows = [row for cell_rows in results for row in cell_rows]
    rows.sort(key=lambda r: (r.policy, r.run_id, r.t))
    summary = summarize(rows, config.horizon)
    return rows, summary


def summarize(rows, horizon: int) -> dict:
    """Final-regret statistics per policy from trace rows."""
    finals: dict = {}
    errors = []
    for row in rows:
        if row.decision < 0:
            errors.append({"policy": row.policy, "run_id": row.run_id, "t": row.t})
            continue
        if row.t == horizon:
            finals.setdefault(row.policy, []).append(row.cum_regret)
    out = {"policies": {}, "errors": errors}
    for policy, values in sorted(finals.items()):
        arr = np.asarray(values)
        stderr = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
        out["policies"][policy] = {
            "mean_final_regret": float(arr.mean()),
            "stderr": stderr,
            "n_runs": int(arr.size),
        }
    return out


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_traces(rows, path) -> None:
    """Write rows as CSV, sorted by (policy, run_id, t), 9 significant digits."""
    ordered = sorted(rows, key=lambda r: (r.policy, r.run_id, r.t))
    lines = [",".join(TRACE_COLUMNS)]
    for r in ordered:
        lines.append(",".join([
            str(r.run_id), r.policy, str(r.t), str(r.decision),
            _fmt(r.instant_regret), _fmt(r.cum_regret), _fmt(r.epsilon_sq),
            _fmt(r.lam), _fmt(r.dec_value), _fmt(r.est_increment), str(r.seed),
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_traces(path):
    """Parse a trace CSV back into TraceRow objects."""
    lines = Path(path).read_text().strip().split("\n")
    if lines[0] != ",".join(TRACE_COLUMNS):
        raise ValueError("unexpected trace header")
    rows = []
    for line in lines[1:]:
        if not line:
            continue
        parts = line.split(",")
        rows.append(TraceRow(int(parts[0]), parts[1], int(parts[2]),
                             int(parts[3]), *(float(v) for v in parts[4:10]),
                             int(parts[10])))
    return rows


def experiment_1_config(full_scale: bool = False, output_path: str | None = None,
                        instance_seed: int = 20240, base_seed: int = 1) -> ExperimentConfig:
    """Low-dimensional revealing semi-bandit with horizon-tuned baselines.

    The anytime policy runs against fixed-multiplier variants tuned for
    horizons 200..2000, plus the confidence-bound and posterior-sampling
    baselines; the instance is fixed by instance_seed across all runs.
    """
    inst, f_star = make_revealing_semibandit(3, 10, RngStream(instance_seed))
    policies = [PolicySpec("anytime-e2d", "anytime-e2d")]
    for n in (200, 500, 1000, 2000):
        policies.append(PolicySpec(f"e2d-n{n}", "e2d", {"tuned_horizon": n}))
    policies += [PolicySpec("ucb", "ucb"), PolicySpec("ts", "ts")]
    # desk-scale solver effort; pass fw_steps=100, lambda_grid=50 to restore
    # the full per-round search
    return ExperimentConfig(inst, f_star, policies, horizon=2000,
                            n_runs=100 if full_scale else 20,
                            base_seed=base_seed, output_path=output_path,
                            fw_steps=60, lambda_grid=30)


def experiment_2_config(full_scale: bool = False, output_path: str | None = None,
                        instance_seed: int = 20241, base_seed: int = 2) -> ExperimentConfig:
    """High-dimensional short-horizon regime (horizon well below dim^4)."""
    inst, f_star = make_revealing_semibandit(30, 10, RngStream(instance_seed))
    policies = [
        PolicySpec("anytime-e2d", "anytime-e2d"),
        PolicySpec("e2d", "e2d", {"tuned_horizon": 1000}),
        PolicySpec("ucb", "ucb"),
        PolicySpec("ts", "ts"),
    ]
    return ExperimentConfig(inst, f_star, policies, horizon=1000,
                            n_runs=100 if full_scale else 10,
                            base_seed=base_seed, output_path=output_path,
                            fw_steps=60, lambda_grid=30)


PRESETS = {"exp1": experiment_1_config, "exp2": experiment_2_config}
