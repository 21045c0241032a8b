import numpy as np
import pytest

import uavcache as uc
from uavcache import calibrate, coding
from uavcache.env import (
    Action,
    CachingEnv,
    ContractViolationError,
    equal_split_action_space,
    full_action_space,
    uncoded_action_space,
    validate_action,
)


class TestActionSpaces:
    def test_default_count_is_forty(self, default_cfg):
        space = full_action_space(default_cfg)
        assert len(space) == 40
        # 1 both-off + 12 one-on + 27 both-on (9 bandwidth pairs excluded)
        offs = sum(1 for a in space.actions if sum(a.x) == 0)
        ones = sum(1 for a in space.actions if sum(a.x) == 1)
        twos = sum(1 for a in space.actions if sum(a.x) == 2)
        assert (offs, ones, twos) == (1, 12, 27)

    def test_single_drone(self, default_cfg):
        cfg = default_cfg.replace(su_count=1)
        assert len(full_action_space(cfg)) == 7

    def test_unconstrained_budget(self, default_cfg):
        cfg = default_cfg.replace(total_bandwidth_hz=1e9)
        assert len(full_action_space(cfg)) == (1 + 2 * 3) ** 2

    def test_budget_excludes_heavy_pairs(self, default_cfg):
        for action in full_action_space(default_cfg).actions:
            used = sum(x * b for x, b in zip(action.x, action.bandwidth_hz))
            assert used <= default_cfg.total_bandwidth_hz

    def test_off_actions_canonicalized(self, default_cfg):
        for action in full_action_space(default_cfg).actions:
            for i, x in enumerate(action.x):
                if x == 0:
                    assert action.bandwidth_hz[i] == 2e6
                    assert action.k[i] == 1

    def test_ordering_deterministic(self, default_cfg):
        a = [act.key() for act in full_action_space(default_cfg).actions]
        b = [act.key() for act in full_action_space(default_cfg).actions]
        assert a == b
        assert a[0] == ((0, 0), (2e6, 2e6), (1, 1))

    def test_equal_split_space(self, default_cfg):
        space = equal_split_action_space(default_cfg)
        assert len(space) == 16
        for action in space.actions:
            scheduled = sum(action.x)
            if scheduled:
                for x, b in zip(action.x, action.bandwidth_hz):
                    if x:
                        assert b == pytest.approx(1e7 / scheduled)
                validate_action(action, default_cfg)
        both_on = [a for a in space.actions if sum(a.x) == 2]
        assert all(b == pytest.approx(5e6) for a in both_on for b in a.bandwidth_hz)

    def test_uncoded_space(self, default_cfg):
        space = uncoded_action_space(default_cfg)
        assert len(space) == 8
        assert all(k == 1 for a in space.actions for k in a.k)

    def test_index_lookup(self, default_cfg):
        space = full_action_space(default_cfg)
        for action in space.actions:
            assert space.index_of(action.x, action.bandwidth_hz, action.k) == action.index


class TestValidator:
    def test_budget_violation(self, default_cfg):
        bad = Action(index=0, x=(1, 1), bandwidth_hz=(6e6, 6e6), k=(1, 1))
        with pytest.raises(ContractViolationError, match="budget"):
            validate_action(bad, default_cfg)

    def test_bad_k(self, default_cfg):
        bad = Action(index=0, x=(1, 0), bandwidth_hz=(2e6, 2e6), k=(9, 1))
        with pytest.raises(ContractViolationError, match="k"):
            validate_action(bad, default_cfg)

    def test_bad_index_rejected_by_env(self, small_cfg):
        env = CachingEnv(small_cfg)
        env.reset(0)
        with pytest.raises(ContractViolationError, match="index"):
            env.step(40)


class TestResetAndState:
    def test_same_seed_same_state(self, small_cfg):
        env = CachingEnv(small_cfg)
        s1 = env.reset(11)
        s2 = CachingEnv(small_cfg).reset(11)
        assert np.array_equal(s1, s2)

    def test_initial_recovery_probabilities_zero(self, small_cfg):
        state = CachingEnv(small_cfg).reset(3)
        assert np.array_equal(state[:2], [0.0, 0.0])

    def test_state_normalized(self, small_cfg):
        env = CachingEnv(small_cfg)
        for seed in range(5):
            s = env.reset(seed)
            assert np.all((s >= 0.0) & (s <= 1.0))

    def test_seeds_give_distinct_worlds(self, small_cfg):
        env = CachingEnv(small_cfg)
        distinct = 0
        for pair in range(100):
            env.reset(2 * pair)
            p1 = env.sus[0].position.copy()
            env.reset(2 * pair + 1)
            if not np.array_equal(p1, env.sus[0].position):
                distinct += 1
        assert distinct == 100

    def test_stepping_before_reset(self, small_cfg):
        with pytest.raises(RuntimeError):
            CachingEnv(small_cfg).step(0)


class TestStep:
    def test_all_off_zero_reward(self, small_cfg):
        env = CachingEnv(small_cfg)
        env.reset(0)
        _, reward, metrics, _ = env.step(0)
        assert reward == 0.0
        assert metrics.area_m2 == 0.0
        assert np.array_equal(metrics.p_file, [0.0, 0.0])

    def test_frozen_world_identical_rewards(self, default_cfg):
        # no mobility and a pinned per-cell content leave nothing varying
        cfg = default_cfg.replace(uav_speed_mps=0.0,
                                  content_bits_per_cell=[60e3, 60e3],
                                  horizon_slots=6)
        env = CachingEnv(cfg)
        env.reset(4)
        rewards = [env.step(29)[1] for _ in range(6)]
        assert all(r == rewards[0] for r in rewards)

    def test_reward_matches_recomputation(self, small_cfg):
        env = CachingEnv(small_cfg)
        env.reset(9)
        action = env.action_space[29]
        plans = env.build_plans(action)
        p_file = np.array([coding.plan_recovery_probability(p, small_cfg.recovery_mode)
                           for p in plans])
        pr = coding.grid_recovery_probability(
            env.cover, [p.scheduled for p in plans], p_file)
        area, _ = coding.effective_recovery_area(pr, env.grid.cell_area)
        expected = small_cfg.resolved_reward_scale() * area
        _, reward, metrics, _ = env.step(action)
        assert reward == pytest.approx(expected, rel=1e-12)
        assert metrics.reward == pytest.approx(metrics.area_m2 * small_cfg.resolved_reward_scale())

    def test_state_p_component_equals_metrics(self, small_cfg):
        env = CachingEnv(small_cfg)
        env.reset(9)
        next_state, _, metrics, _ = env.step(29)
        assert np.array_equal(next_state[:2], metrics.p_file)

    def test_reward_bounds(self, small_cfg):
        env = CachingEnv(small_cfg)
        env.reset(5)
        done = False
        while not done:
            _, reward, _, done = env.step(29)
            assert 0.0 <= reward <= 1.0

    def test_done_after_horizon(self, small_cfg):
        env = CachingEnv(small_cfg)
        env.reset(0)
        flags = [env.step(0)[3] for _ in range(small_cfg.horizon_slots)]
        assert flags[:-1] == [False] * (small_cfg.horizon_slots - 1)
        assert flags[-1] is True

    def test_determinism_across_runs(self, small_cfg):
        def trajectory():
            env = CachingEnv(small_cfg)
            env.reset(77)
            out = []
            for a in (0, 29, 39, 12, 7, 29, 1, 0):
                out.append(env.step(a)[1])
            return out

        assert trajectory() == trajectory()

    def test_world_trajectory_independent_of_actions(self, small_cfg):
        envs = [CachingEnv(small_cfg) for _ in range(2)]
        for env in envs:
            env.reset(21)
        actions = [(0, 29), (39, 0), (12, 7), (29, 29)]
        for a_pair in actions:
            for env, a in zip(envs, a_pair):
                env.step(a)
            pos0 = np.stack([n.position for n in envs[0].sus + envs[0].cus])
            pos1 = np.stack([n.position for n in envs[1].sus + envs[1].cus])
            assert np.array_equal(pos0, pos1)
            sizes0 = [f.size_bits for f in envs[0].files]
            sizes1 = [f.size_bits for f in envs[1].files]
            assert sizes0 == sizes1


class TestEvaluateAction:
    def test_constraint_7b_selected_count(self, small_cfg):
        env = CachingEnv(small_cfg)
        env.reset(9)
        action = env.action_space[39]  # both on, k = 3
        plans = env.build_plans(action)
        for plan in plans:
            if plan.scheduled and plan.feasible:
                assert len(plan.selected) == plan.k
            assert set(plan.selected) <= set(plan.eligible)

    def test_eligibility_honors_threshold(self, small_cfg):
        env = CachingEnv(small_cfg)
        env.reset(9)
        plans = env.build_plans(env.action_space[29])
        for plan in plans:
            for cu in plan.eligible:
                assert env.links[cu].mean_snr >= small_cfg.snr_threshold_lin

    def test_mode_overrides(self, small_cfg):
        env = CachingEnv(small_cfg)
        env.reset(9)
        the_action = env.action_space[29]
        all_el = env.evaluate_action(the_action, recovery_mode="all-eligible")
        sel_k = env.evaluate_action(the_action, recovery_mode="selected-k")
        assert np.all(all_el.p_file >= sel_k.p_file - 1e-12)

    def test_literal_mode_never_exceeds_simplified(self, small_cfg):
        env = CachingEnv(small_cfg)
        env.reset(9)
        simplified = env.evaluate_action(29, cell_mode="simplified")
        literal = env.evaluate_action(29, cell_mode="literal-eq6")
        assert np.all(simplified.pr_cells >= literal.pr_cells - 1e-12)

    def test_no_rng_consumption(self, small_cfg):
        env = CachingEnv(small_cfg)
        env.reset(9)
        before = env._rng.bit_generator.state
        env.evaluate_action(29)
        env.exhaustive_slot_oracle()
        assert env._rng.bit_generator.state == before


class TestOracle:
    def test_single_action_space(self, small_cfg):
        env = CachingEnv(small_cfg)
        env.reset(9)
        from uavcache.env import ActionSpace
        solo = ActionSpace("solo", [env.action_space[29]])
        action, reward = env.exhaustive_slot_oracle(action_space=solo)
        assert action.index == 29
        assert reward == pytest.approx(env.evaluate_action(29).reward)

    def test_beats_random_actions(self, small_cfg, rng):
        env = CachingEnv(small_cfg)
        env.reset(9)
        _, best = env.exhaustive_slot_oracle()
        for _ in range(100):
            idx = int(rng.integers(len(env.action_space)))
            assert env.evaluate_action(idx).reward <= best + 1e-15

    def test_space_size_cap(self, small_cfg):
        env = CachingEnv(small_cfg)
        env.reset(9)
        from uavcache.env import ActionSpace
        huge = ActionSpace("huge", env.action_space.actions * 300)
        with pytest.raises(ContractViolationError, match="cap"):
            env.exhaustive_slot_oracle(action_space=huge)


class TestScheduledButEmptyFootprint:
    def test_empty_footprint_unschedulable(self, default_cfg):
        # a tiny apothem between cell centers gives an empty footprint:
        # the drone is unservable that slot and flagged infeasible
        cfg = default_cfg.replace(apothem_m=1.0, horizon_slots=4)
        env = CachingEnv(cfg)
        env.reset(0)
        saw_empty = 0
        for _ in range(3):
            empty = [f.size_bits == 0 for f in env.files]
            _, _, metrics, _ = env.step(29)  # both drones scheduled
            for i, was_empty in enumerate(empty):
                if was_empty:
                    saw_empty += 1
                    assert not metrics.scheduled[i]
                    assert metrics.p_file[i] == 0.0
                    assert metrics.infeasible[i]
        assert saw_empty > 0  # the 1 m apothem produces empty footprints
