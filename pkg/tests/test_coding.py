import itertools

import numpy as np
import pytest

import uavcache as uc
from uavcache import coding
from uavcache.coding import (
    CodingPlan,
    InfeasiblePlanError,
    assign_fragments,
    effective_recovery_area,
    eligible_cooperators,
    file_recovery_probability,
    file_recovery_probability_bruteforce,
    grid_recovery_probability,
    plan_recovery_probability,
    select_cooperators,
)
from uavcache.world import MapFile, NodeKind, NodeState


def cu_at(cu_id, xyz):
    return NodeState(id=cu_id, kind=NodeKind.COOP_UAV,
                     position=np.asarray(xyz, dtype=float))


def sample_file(size=9e5):
    return MapFile(owner_su=0, size_bits=size, coverage=np.arange(9), slot=1)


SU = NodeState(id=0, kind=NodeKind.SENSING_UAV,
               position=np.array([0.0, 0.0, 100.0]), apothem=50.0,
               polygon_sides=4)


class TestAssignFragments:
    def test_whole_pool(self, rng):
        pool = [cu_at(i, rng.uniform(0, 1000, size=3)) for i in range(5)]
        plan = assign_fragments(sample_file(), 2, 5, pool, SU, 2e6)
        assert sorted(plan.holders) == [0, 1, 2, 3, 4]
        assert plan.fragment_bits == pytest.approx(4.5e5)

    def test_nearest_by_distance(self, rng):
        pool = [cu_at(i, rng.uniform(0, 1000, size=3)) for i in range(16)]
        plan = assign_fragments(sample_file(), 3, 8, pool, SU, 2e6)
        # sort oracle
        ranked = sorted(pool, key=lambda cu: (float(np.linalg.norm(cu.position - SU.position)), cu.id))
        assert plan.holders == [cu.id for cu in ranked[:8]]

    def test_k_exceeds_n(self):
        pool = [cu_at(i, [i, 0, 100]) for i in range(4)]
        with pytest.raises(InfeasiblePlanError):
            assign_fragments(sample_file(), 5, 4, pool, SU, 2e6)

    def test_pool_too_small(self):
        pool = [cu_at(i, [i, 0, 100]) for i in range(4)]
        with pytest.raises(InfeasiblePlanError):
            assign_fragments(sample_file(), 2, 8, pool, SU, 2e6)


class TestEligibility:
    def plan_with_holders(self, holders):
        return CodingPlan(su_id=0, scheduled=True, bandwidth_hz=2e6, k=2, n=8,
                          fragment_bits=1e5, holders=holders)

    def test_all_below_threshold(self):
        plan = self.plan_with_holders([1, 2, 3])
        snr = {1: 10.0, 2: 20.0, 3: 30.0}
        assert eligible_cooperators(plan, snr, 100.0) == []

    def test_zero_threshold_keeps_all(self):
        plan = self.plan_with_holders([1, 2, 3])
        snr = {1: 10.0, 2: 20.0, 3: 30.0}
        assert eligible_cooperators(plan, snr, 0.0) == [1, 2, 3]

    def test_mixed_snrs_against_27db(self):
        plan = self.plan_with_holders([1, 2, 3])
        snr = {1: 10**3.0, 2: 10**2.6, 3: 10**2.8}  # 30, 26, 28 dB
        assert eligible_cooperators(plan, snr, 10**2.7) == [1, 3]


class TestSelection:
    def test_exact_fit(self):
        chosen, feasible = select_cooperators([4, 7], {4: 0.3, 7: 0.9}, 2)
        assert feasible and chosen == [4, 7]

    def test_top_k_by_stp(self):
        etas = {1: 0.9, 2: 0.5, 3: 0.7}
        chosen, feasible = select_cooperators([1, 2, 3], etas, 2)
        assert feasible and chosen == [1, 3]

    def test_tie_breaks_to_smaller_id(self):
        etas = {5: 0.4, 2: 0.4, 9: 0.4}
        chosen, feasible = select_cooperators([5, 2, 9], etas, 1)
        assert feasible and chosen == [2]

    def test_short_set_marks_infeasible(self):
        chosen, feasible = select_cooperators([3], {3: 0.8}, 2)
        assert not feasible and chosen == [3]


class TestFileRecovery:
    def test_single_link(self):
        assert file_recovery_probability([0.7], 1) == pytest.approx(0.7)

    def test_certain_links(self):
        assert file_recovery_probability([1.0, 1.0, 1.0], 2) == pytest.approx(1.0)

    def test_two_of_three(self):
        # enumerate all 2^3 outcomes with >= 2 successes: 0.85
        assert file_recovery_probability([0.9, 0.8, 0.5], 2) == pytest.approx(0.85, abs=1e-12)

    def test_too_few_links(self):
        assert file_recovery_probability([0.9], 2) == 0.0
        assert file_recovery_probability([], 1) == 0.0

    def test_invalid_inputs(self):
        with pytest.raises(InfeasiblePlanError):
            file_recovery_probability([0.5], 0)
        with pytest.raises(InfeasiblePlanError):
            file_recovery_probability([1.5], 1)

    def test_matches_bruteforce(self, rng):
        for _ in range(300):
            n = int(rng.integers(1, 13))
            stps = rng.uniform(size=n)
            k = int(rng.integers(1, n + 2))
            fast = file_recovery_probability(stps, k)
            slow = file_recovery_probability_bruteforce(stps, k)
            assert abs(fast - slow) <= 1e-12

    def test_nonincreasing_in_k(self, rng):
        stps = rng.uniform(size=8)
        values = [file_recovery_probability(stps, k) for k in range(1, 9)]
        assert all(a >= b - 1e-15 for a, b in zip(values, values[1:]))

    def test_extra_link_never_hurts(self, rng):
        for _ in range(50):
            stps = list(rng.uniform(size=5))
            k = int(rng.integers(1, 6))
            base = file_recovery_probability(stps, k)
            more = file_recovery_probability(stps + [float(rng.uniform())], k)
            assert more >= base - 1e-15


class TestPlanRecovery:
    def make_plan(self, etas, k, feasible=True, selected=None):
        holders = sorted(etas)
        return CodingPlan(su_id=0, scheduled=True, bandwidth_hz=2e6, k=k, n=8,
                          fragment_bits=1e5, holders=holders,
                          eligible=holders, selected=selected or holders[:k],
                          stp_by_cu=etas, feasible=feasible)

    def test_all_eligible_mode(self):
        plan = self.make_plan({1: 0.9, 2: 0.8, 3: 0.5}, k=2)
        assert plan_recovery_probability(plan, "all-eligible") == pytest.approx(0.85)

    def test_selected_k_mode_is_product(self):
        plan = self.make_plan({1: 0.9, 2: 0.8, 3: 0.5}, k=2, selected=[1, 2])
        assert plan_recovery_probability(plan, "selected-k") == pytest.approx(0.72)

    def test_selected_k_single_relay(self):
        plan = self.make_plan({1: 0.4}, k=1, selected=[1])
        assert plan_recovery_probability(plan, "selected-k") == pytest.approx(0.4)

    def test_infeasible_selected_is_zero(self):
        plan = self.make_plan({1: 0.9}, k=2, feasible=False, selected=[1])
        assert plan_recovery_probability(plan, "selected-k") == 0.0

    def test_unscheduled_is_zero(self):
        plan = CodingPlan(su_id=0, scheduled=False, bandwidth_hz=2e6, k=1, n=8,
                          fragment_bits=0.0)
        assert plan_recovery_probability(plan, "all-eligible") == 0.0

    def test_unknown_mode(self):
        plan = self.make_plan({1: 0.9}, k=1)
        with pytest.raises(ValueError):
            plan_recovery_probability(plan, "bogus")

    def test_transmit_flags(self):
        plan = self.make_plan({1: 0.9, 2: 0.8, 3: 0.5}, k=2, selected=[1, 2])
        assert plan.transmit_flags == {1: 1, 2: 1, 3: 0}


class TestGridRecovery:
    def test_uncovered_cell_is_zero(self):
        cover = np.zeros((2, 4), dtype=bool)
        pr = grid_recovery_probability(cover, [1, 1], [0.9, 0.9])
        assert pr == pytest.approx([0.0, 0.0, 0.0, 0.0])

    def test_two_sensor_overlap(self):
        cover = np.array([[True], [True]])
        pr = grid_recovery_probability(cover, [1, 1], [0.6, 0.5])
        assert pr[0] == pytest.approx(0.8)

    def test_monte_carlo_cross_check(self, rng):
        cover = np.array([[True], [True]])
        p = np.array([0.6, 0.5])
        hits = (rng.uniform(size=(200_000, 2)) < p).any(axis=1)
        assert grid_recovery_probability(cover, [1, 1], p)[0] == pytest.approx(
            float(np.mean(hits)), abs=5e-3)

    def test_unscheduled_sensor_ignored(self):
        cover = np.array([[True], [True]])
        pr = grid_recovery_probability(cover, [1, 0], [0.6, 0.5])
        assert pr[0] == pytest.approx(0.6)

    def test_literal_mode_needs_products(self):
        cover = np.array([[True]])
        with pytest.raises(ValueError):
            grid_recovery_probability(cover, [1], [0.9], mode="literal-eq6")

    def test_literal_mode_single_perfect_sensor(self):
        cover = np.array([[True]])
        pr = grid_recovery_probability(cover, [1], [1.0], mode="literal-eq6",
                                       selected_stp_products=np.array([1.0]))
        assert pr[0] == pytest.approx(1.0)

    def test_simplified_dominates_literal(self, rng):
        cover = rng.uniform(size=(3, 10)) < 0.5
        p = rng.uniform(size=3)
        products = rng.uniform(size=3)
        simplified = grid_recovery_probability(cover, [1, 1, 1], p)
        literal = grid_recovery_probability(cover, [1, 1, 1], p, mode="literal-eq6",
                                            selected_stp_products=products)
        assert np.all(simplified >= literal - 1e-15)
        assert np.all((literal >= 0) & (literal <= 1))


class TestEffectiveArea:
    def test_full_recovery(self):
        area, norm = effective_recovery_area(np.ones(400), 2500.0)
        assert area == pytest.approx(400 * 2500.0)
        assert norm == pytest.approx(1.0)

    def test_no_recovery(self):
        area, norm = effective_recovery_area(np.zeros(10), 2500.0)
        assert area == 0.0 and norm == 0.0

    def test_hand_sum(self):
        area, norm = effective_recovery_area(np.array([0.8, 0.2]), 2500.0)
        assert area == pytest.approx(2500.0)
        assert norm == pytest.approx(0.5)

    def test_bounds_enforced(self):
        with pytest.raises(ValueError):
            effective_recovery_area(np.array([1.2]), 2500.0)
