"""k-of-n coded-caching reliability and the effective-recovery-area metric.

A file is erasure-coded into n fragments held by distinct caching drones;
any k fragments reconstruct it. Given per-link success probabilities, the
file recovery probability is the tail of a Poisson-binomial distribution,
computed by an O(n^2) convolution; explicit subset enumeration is kept as
the independent cross-check. Cell recovery combines the per-sensor file
probabilities into the area-weighted objective.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .world import MapFile, NodeState


class InfeasiblePlanError(ValueError):
    pass


@dataclass
class CodingPlan:
    """Scheduling, fragment placement, and link outcomes for one sensor's file.

    ``eligible`` and ``selected`` are drone ids; ``stp_by_cu`` maps holder id
    to its per-fragment success probability. ``transmit_flags`` marks the
    drones actually sent (the selected set), per the selection constraint.
    """

    su_id: int
    scheduled: bool
    bandwidth_hz: float
    k: int
    n: int
    fragment_bits: float
    holders: list[int] = field(default_factory=list)
    eligible: list[int] = field(default_factory=list)
    selected: list[int] = field(default_factory=list)
    stp_by_cu: dict[int, float] = field(default_factory=dict)
    feasible: bool = True

    @property
    def transmit_flags(self) -> dict[int, int]:
        chosen = set(self.selected)
        return {cu: int(cu in chosen) for cu in self.holders}


def assign_fragments(file: MapFile, k: int, n: int, cu_pool: list[NodeState],
                     su: NodeState, bandwidth_hz: float) -> CodingPlan:
    """Place the n coded fragments on the caching drones nearest the sensor.

    Ties in distance break toward the smaller drone id; each holder stores
    one distinct fragment.
    """
    if n > len(cu_pool):
        raise InfeasiblePlanError(
            f"need {n} fragment holders but only {len(cu_pool)} caching drones exist")
    if k > n or k < 1:
        raise InfeasiblePlanError(f"coding parameters require 1 <= k <= n, got k={k}, n={n}")
    dists = [(float(np.linalg.norm(cu.position - su.position)), cu.id) for cu in cu_pool]
    holders = [cu_id for _, cu_id in sorted(dists)[:n]]
    return CodingPlan(su_id=file.owner_su, scheduled=True, bandwidth_hz=bandwidth_hz,
                      k=k, n=n, fragment_bits=file.size_bits / k, holders=holders)


def eligible_cooperators(plan: CodingPlan, mean_snr_by_cu: dict[int, float],
                         snr_threshold_lin: float) -> list[int]:
    """Fragment holders whose mean SNR clears the threshold (may be empty)."""
    return [cu for cu in plan.holders if mean_snr_by_cu[cu] >= snr_threshold_lin]


def select_cooperators(eligible: list[int], stp_by_cu: dict[int, float],
                       k: int) -> tuple[list[int], bool]:
    """The k eligible drones with the largest success probability.

    Ties break toward the smaller id. Returns ``(selection, feasible)``;
    with fewer than k eligible drones the whole eligible set is returned
    and the plan is marked infeasible for this slot.
    """
    ranked = sorted(eligible, key=lambda cu: (-stp_by_cu[cu], cu))
    if len(eligible) < k:
        return ranked, False
    return sorted(ranked[:k]), True


def file_recovery_probability(stps, k: int) -> float:
    """Probability that at least k of the transmitting links succeed.

    Independent links with the given success probabilities; the count of
    successes is Poisson-binomial, whose upper tail is accumulated by the
    standard success-count convolution.
    """
    stps = np.asarray(stps, dtype=float)
    if k < 1:
        raise InfeasiblePlanError(f"k must be >= 1, got {k}")
    if np.any((stps < 0) | (stps > 1)):
        raise InfeasiblePlanError("success probabilities must lie in [0, 1]")
    if stps.size < k:
        return 0.0
    # counts[j] = P(j successes among links seen so far)
    counts = np.zeros(stps.size + 1)
    counts[0] = 1.0
    for i, eta in enumerate(stps):
        counts[1:i + 2] = counts[1:i + 2] * (1.0 - eta) + counts[:i + 1] * eta
        counts[0] *= 1.0 - eta
    return float(np.clip(counts[k:].sum(), 0.0, 1.0))


def file_recovery_probability_bruteforce(stps, k: int) -> float:
    """Subset-enumeration evaluation of the k-of-n recovery probability.

    Sums, over every subset of links of size >= k, the probability that
    exactly that subset succeeds. Exponential in the link count; retained
    as the independent oracle for the convolution path.
    """
    stps = list(map(float, stps))
    n = len(stps)
    if n < k:
        return 0.0
    total = 0.0
    for m in range(k, n + 1):
        for subset in itertools.combinations(range(n), m):
            chosen = set(subset)
            p = 1.0
            for i, eta in enumerate(stps):
                p *= eta if i in chosen else (1.0 - eta)
            total += p
    return total


def plan_recovery_probability(plan: CodingPlan, mode: str) -> float:
    """File recovery probability of a plan under the configured semantics.

    Mode "all-eligible": every eligible holder transmits its fragment and
    recovery needs at least k successes. Mode "selected-k": only the k
    selected drones transmit and all of them must succeed.
    """
    if not plan.scheduled:
        return 0.0
    if mode == "all-eligible":
        transmitting = plan.eligible
    elif mode == "selected-k":
        transmitting = plan.selected if plan.feasible else []
    else:
        raise ValueError(f"unknown recovery mode {mode!r}")
    stps = [plan.stp_by_cu[cu] for cu in transmitting]
    return file_recovery_probability(stps, plan.k)


def grid_recovery_probability(cover_flags: np.ndarray, scheduled: np.ndarray,
                              p_file: np.ndarray, mode: str = "simplified",
                              selected_stp_products: np.ndarray | None = None
                              ) -> np.ndarray:
    """Per-cell probability that at least one covering sensor's file recovers.

    ``cover_flags`` is a (sensors, cells) boolean matrix. Mode "simplified"
    uses the per-file probabilities directly; mode "literal-eq6" additionally
    multiplies each file probability by the product of its selected links'
    success probabilities (kept for fidelity with the source formulation,
    which double-counts link successes).
    """
    cover_flags = np.asarray(cover_flags, dtype=bool)
    weight = np.asarray(scheduled, dtype=float) * np.asarray(p_file, dtype=float)
    if mode == "literal-eq6":
        if selected_stp_products is None:
            raise ValueError("literal-eq6 mode needs the selected-link products")
        weight = weight * np.asarray(selected_stp_products, dtype=float)
    elif mode != "simplified":
        raise ValueError(f"unknown cell recovery mode {mode!r}")
    miss = 1.0 - cover_flags * weight[:, None]
    return 1.0 - np.prod(miss, axis=0)


def effective_recovery_area(pr_cells: np.ndarray, cell_area: float
                            ) -> tuple[float, float]:
    """Area-weighted sum of cell recovery probabilities.

    Returns ``(area_m2, normalized)`` where the normalized value is the mean
    cell recovery probability.
    """
    pr_cells = np.asarray(pr_cells, dtype=float)
    if np.any((pr_cells < 0) | (pr_cells > 1)):
        raise ValueError("cell recovery probabilities must lie in [0, 1]")
    total = float(pr_cells.sum())
    return total * cell_area, total / pr_cells.size
