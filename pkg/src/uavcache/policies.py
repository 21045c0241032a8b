"""Decision policies: greedy Q, random, per-slot exhaustive, single-relay, PSO.

Every policy exposes ``select_action(env) -> Action`` and may inspect the
frozen current slot through ``env.evaluate_action`` (world dynamics are
action-independent, so per-slot search is legitimate look-ahead-free
optimization, not cheating).
"""

from __future__ import annotations

import numpy as np

from .agents import QNetwork
from .config import PsoConfig, ScenarioConfig
from .env import Action, ActionSpace, CachingEnv, full_action_space, uncoded_action_space


class GreedyQPolicy:
    """Greedy readout of a trained Q-network over the environment's space."""

    def __init__(self, q: QNetwork):
        self.q = q

    def select_action(self, env: CachingEnv) -> Action:
        values = self.q.q_values(env.state())
        return env.action_space[int(np.argmax(values))]


class RandomPolicy:
    """Uniform over the feasible action list."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def select_action(self, env: CachingEnv) -> Action:
        return env.action_space[int(self.rng.integers(len(env.action_space)))]


class OraclePolicy:
    """Per-slot exhaustive search; the exact optimum under exogenous dynamics."""

    def select_action(self, env: CachingEnv) -> Action:
        action, _ = env.exhaustive_slot_oracle()
        return action


class NctPolicy:
    """Single-relay transmission without coding redundancy.

    k is pinned to 1 and only the best-STP eligible drone transmits the
    whole file on the full allocated bandwidth; scheduling and bandwidth are
    chosen by exhaustive search over the reduced space each slot.
    """

    recovery_mode = "selected-k"

    def __init__(self, config: ScenarioConfig):
        self.space = uncoded_action_space(config)

    def select_action(self, env: CachingEnv) -> Action:
        action, _ = env.exhaustive_slot_oracle(action_space=self.space,
                                               recovery_mode="selected-k")
        return action


class PsoPolicy:
    """Per-slot particle swarm over a continuous relaxation of the action.

    Each drone contributes three coordinates (scheduling in [0, 1], a
    bandwidth-level index, a k-level index); positions are rounded to the
    nearest levels for every fitness evaluation and bandwidth-infeasible
    roundings are repaired by dropping levels.
    """

    def __init__(self, config: ScenarioConfig, params: PsoConfig,
                 rng: np.random.Generator):
        self.config = config
        self.params = params
        self.rng = rng
        self.space = full_action_space(config)

    def select_action(self, env: CachingEnv) -> Action:
        return pso_search(env, self.space, self.config, self.params, self.rng)


def decode_particle(position: np.ndarray, config: ScenarioConfig,
                    space: ActionSpace) -> Action:
    """Round a particle to the nearest feasible action, repairing the budget.

    Repair drops the highest scheduled bandwidth level one notch at a time
    (ties toward the lower drone index); if every scheduled drone is already
    at the lowest level the highest-index one is unscheduled.
    """
    levels = config.bandwidth_levels_hz
    klevels = config.k_levels
    n = config.su_count
    pos = position.reshape(n, 3)
    x = (pos[:, 0] >= 0.5).astype(int)
    b_idx = np.clip(np.rint(pos[:, 1]), 0, len(levels) - 1).astype(int)
    k_idx = np.clip(np.rint(pos[:, 2]), 0, len(klevels) - 1).astype(int)

    def used() -> float:
        return sum(levels[b_idx[i]] for i in range(n) if x[i])

    while used() > config.total_bandwidth_hz:
        reducible = [i for i in range(n) if x[i] and b_idx[i] > 0]
        if reducible:
            worst = max(reducible, key=lambda i: (levels[b_idx[i]], -i))
            b_idx[worst] -= 1
        else:
            scheduled = [i for i in range(n) if x[i]]
            x[scheduled[-1]] = 0

    xs, bs, ks = [], [], []
    for i in range(n):
        if x[i]:
            xs.append(1)
            bs.append(levels[b_idx[i]])
            ks.append(klevels[k_idx[i]])
        else:
            xs.append(0)
            bs.append(levels[0])
            ks.append(klevels[0])
    return space[space.index_of(xs, bs, ks)]


def pso_search(env: CachingEnv, space: ActionSpace, config: ScenarioConfig,
               params: PsoConfig, rng: np.random.Generator) -> Action:
    """Global-best PSO on the frozen slot; returns the best action found."""
    n_dims = 3 * config.su_count
    lo = np.zeros(n_dims)
    hi = np.tile([1.0, len(config.bandwidth_levels_hz) - 1.0,
                  len(config.k_levels) - 1.0], config.su_count)
    span = np.maximum(hi - lo, 1e-9)

    positions = rng.uniform(lo, hi, size=(params.particles, n_dims))
    velocities = rng.uniform(-span, span, size=positions.shape) * 0.5

    def fitness(pos: np.ndarray) -> tuple[float, Action]:
        action = decode_particle(pos, config, space)
        return env.evaluate_action(action).reward, action

    scores_actions = [fitness(p) for p in positions]
    pbest_pos = positions.copy()
    pbest_score = np.array([s for s, _ in scores_actions])
    gbest_i = int(np.argmax(pbest_score))
    gbest_score, gbest_action = scores_actions[gbest_i]

    for _ in range(params.iterations):
        r1 = rng.uniform(size=positions.shape)
        r2 = rng.uniform(size=positions.shape)
        velocities = (params.inertia * velocities
                      + params.cognitive * r1 * (pbest_pos - positions)
                      + params.social * r2 * (pbest_pos[gbest_i] - positions))
        np.clip(velocities, -span, span, out=velocities)
        positions = np.clip(positions + velocities, lo, hi)
        for j, pos in enumerate(positions):
            score, action = fitness(pos)
            if score > pbest_score[j]:
                pbest_score[j] = score
                pbest_pos[j] = pos
            if score > gbest_score:
                gbest_score, gbest_action = score, action
                gbest_i = j
    return gbest_action
