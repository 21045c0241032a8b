"""Episode execution, shared-seed policy comparison, and parameter sweeps.

All comparisons use common random numbers: within one evaluation, episode e
of every policy runs on the world trajectory generated by seed base + e,
which is identical across policies because world dynamics never consume
action-dependent randomness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import agents, policies
from .config import ConfigError, ScenarioConfig
from .env import CachingEnv, equal_split_action_space


@dataclass
class EpisodeResult:
    rewards: np.ndarray          # per slot
    areas_m2: np.ndarray         # per slot
    trace: list[dict]            # per-slot trace rows

    @property
    def mean_area(self) -> float:
        return float(np.mean(self.areas_m2))

    @property
    def cumulative_area(self) -> np.ndarray:
        return np.cumsum(self.areas_m2)


def run_episode(env: CachingEnv, policy, seed: int) -> EpisodeResult:
    """Run one full horizon with the policy; returns metrics and trace rows."""
    recovery_mode = getattr(policy, "recovery_mode", None)
    env.reset(seed)
    rewards, areas, trace = [], [], []
    done = False
    while not done:
        action = policy.select_action(env)
        _, reward, metrics, done = env.step(action, recovery_mode=recovery_mode)
        rewards.append(reward)
        areas.append(metrics.area_m2)
        row = {"slot": metrics.slot, "action_index": metrics.action_index,
               "reward": reward, "area_m2": metrics.area_m2}
        for i in range(env.config.su_count):
            row[f"p_file_{i}"] = float(metrics.p_file[i])
        for i in range(env.config.su_count):
            row[f"eligible_{i}"] = int(metrics.eligible_counts[i])
            row[f"selected_{i}"] = int(metrics.selected_counts[i])
            row[f"infeasible_{i}"] = int(metrics.infeasible[i])
        trace.append(row)
    return EpisodeResult(rewards=np.asarray(rewards), areas_m2=np.asarray(areas),
                         trace=trace)


PolicyFactory = Callable[[ScenarioConfig, np.random.Generator], object]


def policy_registry(checkpoints: dict[str, str] | None = None
                    ) -> dict[str, PolicyFactory]:
    """Factories for every named policy; learned ones need checkpoint paths."""
    checkpoints = checkpoints or {}

    def learned(name: str) -> PolicyFactory:
        path = checkpoints.get(name)
        if path is None:
            raise ConfigError([(f"policies.{name}", "needs a checkpoint path")])
        q, _ = agents.load_checkpoint(path)
        return lambda config, rng: policies.GreedyQPolicy(q)

    registry: dict[str, PolicyFactory] = {
        "random": lambda config, rng: policies.RandomPolicy(rng),
        "oracle": lambda config, rng: policies.OraclePolicy(),
        "nct": lambda config, rng: policies.NctPolicy(config),
        "pso": lambda config, rng: policies.PsoPolicy(config, config.pso, rng),
    }
    if "sacrl" in checkpoints:
        registry["sacrl"] = learned("sacrl")
    if "scrl" in checkpoints:
        registry["scrl"] = learned("scrl")
    return registry


def make_env(config: ScenarioConfig, policy_name: str) -> CachingEnv:
    """Environment with the action space the policy was trained/designed for."""
    if policy_name == "scrl":
        return CachingEnv(config, action_space=equal_split_action_space(config))
    return CachingEnv(config)


@dataclass
class PolicyEvaluation:
    policy: str
    episode_mean_areas: np.ndarray     # one entry per episode
    cumulative_by_slot: np.ndarray     # mean over episodes of cumulative area
    first_episode_trace: list[dict] | None = None

    @property
    def mean_area(self) -> float:
        return float(np.mean(self.episode_mean_areas))

    @property
    def std_area(self) -> float:
        return float(np.std(self.episode_mean_areas, ddof=1)) \
            if self.episode_mean_areas.size > 1 else 0.0

    @property
    def stderr_area(self) -> float:
        n = self.episode_mean_areas.size
        return self.std_area / np.sqrt(n) if n > 1 else 0.0


def evaluate_policies(config: ScenarioConfig, policy_names: list[str],
                      episodes: int, base_seed: int,
                      checkpoints: dict[str, str] | None = None
                      ) -> dict[str, PolicyEvaluation]:
    """Run every policy over the same seeds and collect per-episode means."""
    registry = policy_registry(checkpoints)
    results: dict[str, PolicyEvaluation] = {}
    for p_idx, name in enumerate(policy_names):
        if name not in registry:
            raise ConfigError([(f"policies[{p_idx}]", f"unknown policy {name!r}")])
        env = make_env(config, name)
        means, cumulatives = [], []
        first_trace = None
        for episode in range(episodes):
            rng = np.random.default_rng([base_seed, p_idx, episode])
            policy = registry[name](config, rng)
            result = run_episode(env, policy, seed=base_seed + episode)
            means.append(result.mean_area)
            cumulatives.append(result.cumulative_area)
            if episode == 0:
                first_trace = result.trace
        results[name] = PolicyEvaluation(
            policy=name,
            episode_mean_areas=np.asarray(means),
            cumulative_by_slot=np.mean(np.stack(cumulatives), axis=0),
            first_episode_trace=first_trace)
    return results


def pairwise_ratios(results: dict[str, PolicyEvaluation]) -> dict[str, float]:
    """mean(a)/mean(b) for every ordered policy pair with a nonzero divisor."""
    ratios = {}
    for a, ra in results.items():
        for b, rb in results.items():
            if a != b and rb.mean_area > 0:
                ratios[f"{a}_vs_{b}"] = ra.mean_area / rb.mean_area
    return ratios


# -- sweeps ---------------------------------------------------------------------


def set_config_value(config: ScenarioConfig, path: str, value: float
                     ) -> ScenarioConfig:
    """Return a copy with one numeric field replaced.

    Dotted paths reach into the nested blocks (for example
    ``dqn.learning_rate``). A scalar assigned to ``content_bits_per_cell``
    pins both ends of the range to that value.
    """
    doc = config.to_dict()
    parts = path.split(".")
    node = doc
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            raise ConfigError([(path, "does not resolve to a config field")])
        node = node[part]
    leaf = parts[-1]
    if leaf not in node:
        raise ConfigError([(path, "does not resolve to a config field")])
    if leaf == "content_bits_per_cell" and np.isscalar(value):
        node[leaf] = [float(value), float(value)]
    elif isinstance(node[leaf], (int, float)) or node[leaf] is None:
        node[leaf] = type(value)(value) if not isinstance(value, bool) else value
    else:
        raise ConfigError([(path, f"is not a numeric field (found {node[leaf]!r})")])
    return ScenarioConfig.from_dict(doc)


@dataclass
class SweepRow:
    parameter: str
    value: float
    policy: str
    mean_area: float
    std_area: float
    stderr_area: float
    episodes: int


def sweep(config: ScenarioConfig, parameter: str, values: list[float],
          policy_names: list[str], episodes: int, base_seed: int,
          checkpoints: dict[str, str] | None = None
          ) -> tuple[list[SweepRow], dict[tuple[str, float], PolicyEvaluation]]:
    """One shared-seed evaluation per (value, policy).

    The base config must already be resolved so the calibrated constants
    stay frozen while the swept parameter moves (otherwise, for example, a
    transmit-power sweep would be silently re-normalized away).
    """
    config.require_resolved()
    rows: list[SweepRow] = []
    detail: dict[tuple[str, float], PolicyEvaluation] = {}
    for value in values:
        cfg_v = set_config_value(config, parameter, float(value))
        results = evaluate_policies(cfg_v, policy_names, episodes, base_seed,
                                    checkpoints)
        for name, res in results.items():
            rows.append(SweepRow(parameter=parameter, value=float(value),
                                 policy=name, mean_area=res.mean_area,
                                 std_area=res.std_area,
                                 stderr_area=res.stderr_area,
                                 episodes=episodes))
            detail[(name, float(value))] = res
    return rows, detail


def summary_dict(results: dict[str, PolicyEvaluation]) -> dict:
    out = {"policies": {}, "ratios": pairwise_ratios(results)}
    for name, res in results.items():
        out["policies"][name] = {
            "mean_area_m2": res.mean_area,
            "std_area_m2": res.std_area,
            "stderr_area_m2": res.stderr_area,
            "episodes": int(res.episode_mean_areas.size),
            "episode_mean_areas": [float(v) for v in res.episode_mean_areas],
        }
    return out


def linear_fit_r2(series: np.ndarray) -> float:
    """R^2 of a straight-line fit of a series against its index."""
    x = np.arange(series.size, dtype=float)
    slope, intercept = np.polyfit(x, series, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((series - predicted) ** 2))
    ss_tot = float(np.sum((series - np.mean(series)) ** 2))
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
