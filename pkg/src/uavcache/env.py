"""Slot-based decision environment tying world, channel, and coding together.

Each slot the agent picks, per sensing drone, a scheduling flag, a bandwidth
level, and a coding parameter. The environment places fragments on the
nearest caching drones, screens them by mean SNR, computes per-link success
probabilities, folds them into per-cell recovery probabilities, and pays a
reward proportional to the effective recovery area. World dynamics (mobility
and fresh map captures) do not depend on the action, so a per-slot
exhaustive search is the exact optimal policy; it is exposed here as the
reference oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import channel, coding, world
from .config import ScenarioConfig


class ContractViolationError(ValueError):
    pass


@dataclass(frozen=True)
class Action:
    """One joint decision: per-drone scheduling, bandwidth (Hz), and k.

    Unscheduled drones are canonicalized to the lowest bandwidth level and
    lowest k so that each off-state has exactly one representation.
    """

    index: int
    x: tuple[int, ...]
    bandwidth_hz: tuple[float, ...]
    k: tuple[int, ...]

    def key(self) -> tuple:
        return (self.x, self.bandwidth_hz, self.k)


class ActionSpace:
    """Ordered list of feasible actions with index lookup."""

    def __init__(self, name: str, actions: list[Action]):
        self.name = name
        self.actions = actions
        self._by_key = {a.key(): a.index for a in actions}

    def __len__(self) -> int:
        return len(self.actions)

    def __getitem__(self, index: int) -> Action:
        return self.actions[index]

    def index_of(self, x, bandwidth_hz, k) -> int:
        return self._by_key[(tuple(x), tuple(bandwidth_hz), tuple(k))]


def _canonical(x: int, b_hz: float, k: int, config: ScenarioConfig
               ) -> tuple[int, float, int]:
    if x == 0:
        return 0, config.bandwidth_levels_hz[0], config.k_levels[0]
    return 1, b_hz, k


def full_action_space(config: ScenarioConfig) -> ActionSpace:
    """The joint per-drone product of scheduling, bandwidth level, and k.

    Ordered lexicographically over drone index, then scheduling flag (off
    first), bandwidth level, and k level; combinations whose scheduled
    bandwidths exceed the total budget are excluded.
    """
    levels = config.bandwidth_levels_hz
    klevels = config.k_levels
    per_su = [(0, levels[0], klevels[0])]
    per_su += [(1, b, k) for b in levels for k in klevels]
    actions: list[Action] = []
    for combo in itertools.product(per_su, repeat=config.su_count):
        xs, bs, ks = zip(*combo)
        if sum(x * b for x, b in zip(xs, bs)) > config.total_bandwidth_hz:
            continue
        actions.append(Action(index=len(actions), x=xs, bandwidth_hz=bs, k=ks))
    if not actions:
        raise world.ConfigurationError("no feasible action satisfies the bandwidth budget")
    return ActionSpace("joint-level", actions)


def equal_split_action_space(config: ScenarioConfig) -> ActionSpace:
    """Reduced space where every scheduled drone gets an equal bandwidth share."""
    klevels = config.k_levels
    actions: list[Action] = []
    for xs in itertools.product((0, 1), repeat=config.su_count):
        scheduled = [i for i, x in enumerate(xs) if x]
        share = config.total_bandwidth_hz / len(scheduled) if scheduled else None
        k_choices = itertools.product(klevels, repeat=len(scheduled))
        for ks_on in k_choices:
            bs, ks, on_pos = [], [], 0
            for x in xs:
                if x:
                    bs.append(share)
                    ks.append(ks_on[on_pos])
                    on_pos += 1
                else:
                    bs.append(config.bandwidth_levels_hz[0])
                    ks.append(klevels[0])
            actions.append(Action(index=len(actions), x=xs,
                                  bandwidth_hz=tuple(bs), k=tuple(ks)))
    return ActionSpace("equal-split", actions)


def uncoded_action_space(config: ScenarioConfig) -> ActionSpace:
    """Scheduling and bandwidth levels only, k pinned to 1 (single-relay)."""
    levels = config.bandwidth_levels_hz
    per_su = [(0, levels[0], 1)] + [(1, b, 1) for b in levels]
    actions: list[Action] = []
    for combo in itertools.product(per_su, repeat=config.su_count):
        xs, bs, ks = zip(*combo)
        if sum(x * b for x, b in zip(xs, bs)) > config.total_bandwidth_hz:
            continue
        actions.append(Action(index=len(actions), x=xs, bandwidth_hz=bs, k=ks))
    return ActionSpace("uncoded", actions)


def validate_action(action: Action, config: ScenarioConfig) -> None:
    """Re-check the scheduling, bandwidth-budget, and coding constraints."""
    problems = []
    if any(x not in (0, 1) for x in action.x):
        problems.append("scheduling flags must be binary")
    if any(b <= 0 for b in action.bandwidth_hz):
        problems.append("bandwidths must be positive")
    if any(k < 1 or k > config.fragment_holders for k in action.k):
        problems.append(f"k must lie in [1, {config.fragment_holders}]")
    used = sum(x * b for x, b in zip(action.x, action.bandwidth_hz))
    if used > config.total_bandwidth_hz * (1 + 1e-12):
        problems.append(f"scheduled bandwidth {used:.0f} Hz exceeds budget "
                        f"{config.total_bandwidth_hz:.0f} Hz")
    if problems:
        raise ContractViolationError("; ".join(problems))


@dataclass
class SlotMetrics:
    """Everything observable about one evaluated slot."""

    slot: int
    action_index: int
    reward: float
    area_m2: float
    area_normalized: float
    p_file: np.ndarray = field(repr=False)          # per-SU recovery probability
    pr_cells: np.ndarray = field(repr=False)        # per-cell recovery probability
    eligible_counts: np.ndarray = field(repr=False)
    selected_counts: np.ndarray = field(repr=False)
    infeasible: np.ndarray = field(repr=False)      # scheduled but unservable
    scheduled: np.ndarray = field(repr=False)


class CachingEnv:
    """One scenario instance advanced slot by slot.

    All randomness flows through the per-instance generator created at
    :meth:`reset`; action evaluation itself is deterministic, which makes
    shared-seed comparisons across policies exact.
    """

    def __init__(self, config: ScenarioConfig, action_space: ActionSpace | None = None):
        config.require_resolved()
        self.config = config
        self.grid = world.build_grid(config)
        self.action_space = action_space if action_space is not None else full_action_space(config)
        self.qspec = channel.spec_from_config(config)
        self.reward_scale = config.resolved_reward_scale()
        self.file_scale = config.resolved_file_size_scale()
        self.n_fragments = min(config.fragment_holders, config.cu_count)
        self._rng: np.random.Generator | None = None

    @property
    def state_dim(self) -> int:
        return 2 * self.config.su_count

    # -- lifecycle -----------------------------------------------------------

    def reset(self, seed: int) -> np.ndarray:
        """Regenerate the world from the seed and return the initial state."""
        self._rng = np.random.default_rng(seed)
        self.sus, self.cus, self.gv = world.make_nodes(self.config, self._rng)
        self.slot = 1
        self._p = np.zeros(self.config.su_count)
        self._last_k = np.full(self.config.su_count, self.config.k_levels[0], dtype=int)
        self._capture_slot()
        return self.state()

    def state(self) -> np.ndarray:
        sizes = np.array([f.size_bits for f in self.files])
        fragments = sizes / self._last_k
        return np.concatenate([self._p, fragments / self.file_scale])

    def step(self, action: Action | int, recovery_mode: str | None = None,
             cell_mode: str | None = None
             ) -> tuple[np.ndarray, float, SlotMetrics, bool]:
        """Apply the action to the current slot, then advance the world."""
        if self._rng is None:
            raise RuntimeError("environment must be reset before stepping")
        action = self._resolve_action(action)
        validate_action(action, self.config)
        metrics = self.evaluate_action(action, recovery_mode, cell_mode)
        self._p = metrics.p_file.copy()
        self._last_k = np.array(action.k, dtype=int)
        done = self.slot >= self.config.horizon_slots
        self._advance()
        return self.state(), metrics.reward, metrics, done

    def _resolve_action(self, action: Action | int) -> Action:
        if isinstance(action, (int, np.integer)):
            if not 0 <= action < len(self.action_space):
                raise ContractViolationError(
                    f"action index {action} outside the {len(self.action_space)}-action space")
            return self.action_space[int(action)]
        return action

    def _advance(self) -> None:
        world.step_mobility(self.sus + self.cus, self.config.area_extent_m,
                            self._rng, self.config.slot_duration_s)
        self.slot += 1
        self._capture_slot()

    def _capture_slot(self) -> None:
        """Rebuild the action-independent per-slot quantities."""
        cfg = self.config
        self.files = [world.make_map_file(cfg, self.grid, su, self.slot, self._rng)
                      for su in self.sus]
        cover = np.zeros((cfg.su_count, self.grid.cell_count), dtype=bool)
        for i, f in enumerate(self.files):
            cover[i, f.coverage] = True
        self.cover = cover
        self.links = {cu.id: channel.link_stats(cu.position, self.gv.position, cfg)
                      for cu in self.cus}
        self.holders = []
        self.eligible = []
        for i, su in enumerate(self.sus):
            dists = sorted((float(np.linalg.norm(cu.position - su.position)), cu.id)
                           for cu in self.cus)
            holder_ids = [cu_id for _, cu_id in dists[:self.n_fragments]]
            self.holders.append(holder_ids)
            self.eligible.append([cu for cu in holder_ids
                                  if self.links[cu].mean_snr >= cfg.snr_threshold_lin])
        self._stp_cache: dict[tuple[int, float], dict[int, float]] = {}

    # -- slot evaluation -------------------------------------------------------

    def _stp_table(self, su_index: int, bandwidth_hz: float) -> dict[int, float]:
        """Per-eligible-CU fragment success probabilities, cached per slot.

        The per-link probability does not depend on k (fragment size and
        per-CU bandwidth shrink together), so one table per bandwidth serves
        every coding level.
        """
        key = (su_index, bandwidth_hz)
        if key not in self._stp_cache:
            cfg = self.config
            z = self.files[su_index].size_bits
            cu_ids = self.eligible[su_index]
            etas = channel.stp_multi(z, 1, bandwidth_hz, cfg.tau_s,
                                     [self.links[cu] for cu in cu_ids],
                                     cfg.tx_power_w, self.qspec)
            self._stp_cache[key] = dict(zip(cu_ids, map(float, etas)))
        return self._stp_cache[key]

    def build_plans(self, action: Action) -> list[coding.CodingPlan]:
        """Per-drone coding plans for this slot under the given action."""
        cfg = self.config
        plans = []
        for i, su in enumerate(self.sus):
            f = self.files[i]
            scheduled = bool(action.x[i]) and f.size_bits > 0
            if not scheduled:
                plans.append(coding.CodingPlan(
                    su_id=su.id, scheduled=False, bandwidth_hz=action.bandwidth_hz[i],
                    k=action.k[i], n=self.n_fragments, fragment_bits=0.0,
                    feasible=not (action.x[i] and f.size_bits == 0)))
                continue
            plan = coding.assign_fragments(f, action.k[i], self.n_fragments,
                                           self.cus, su, action.bandwidth_hz[i])
            plan.eligible = list(self.eligible[i])
            plan.stp_by_cu = self._stp_table(i, action.bandwidth_hz[i])
            plan.selected, plan.feasible = coding.select_cooperators(
                plan.eligible, plan.stp_by_cu, plan.k)
            if plan.feasible:
                assert len(plan.selected) == plan.k
            plans.append(plan)
        return plans

    def evaluate_action(self, action: Action | int,
                        recovery_mode: str | None = None,
                        cell_mode: str | None = None) -> SlotMetrics:
        """Score an action on the frozen current slot (no state advance)."""
        action = self._resolve_action(action)
        cfg = self.config
        recovery_mode = recovery_mode or cfg.recovery_mode
        cell_mode = cell_mode or cfg.cell_recovery_mode
        plans = self.build_plans(action)

        p_file = np.array([coding.plan_recovery_probability(p, recovery_mode)
                           for p in plans])
        scheduled = np.array([p.scheduled for p in plans], dtype=float)
        sel_products = np.array([
            float(np.prod([p.stp_by_cu[cu] for cu in p.selected])) if p.scheduled else 1.0
            for p in plans])
        pr_cells = coding.grid_recovery_probability(
            self.cover, scheduled, p_file, mode=cell_mode,
            selected_stp_products=sel_products)
        area, normalized = coding.effective_recovery_area(pr_cells, self.grid.cell_area)
        return SlotMetrics(
            slot=self.slot, action_index=action.index,
            reward=self.reward_scale * area, area_m2=area, area_normalized=normalized,
            p_file=p_file, pr_cells=pr_cells,
            eligible_counts=np.array([len(p.eligible) for p in plans]),
            selected_counts=np.array([len(p.selected) for p in plans]),
            infeasible=np.array([not p.feasible for p in plans]),
            scheduled=scheduled.astype(bool))

    def exhaustive_slot_oracle(self, action_space: ActionSpace | None = None,
                               recovery_mode: str | None = None,
                               cell_mode: str | None = None
                               ) -> tuple[Action, float]:
        """Best action on the frozen slot by evaluating the whole space.

        Exact because world dynamics are action-independent. Ties resolve to
        the smaller action index.
        """
        space = action_space if action_space is not None else self.action_space
        if len(space) > 10_000:
            raise ContractViolationError(
                f"exhaustive search over {len(space)} actions refused (cap 10000)")
        best_action, best_reward = space[0], -np.inf
        for a in space.actions:
            reward = self.evaluate_action(a, recovery_mode, cell_mode).reward
            if reward > best_reward:
                best_action, best_reward = a, reward
        return best_action, best_reward
