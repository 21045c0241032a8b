"""Independent cross-check suites for the analytic probability paths.

Each suite compares a production computation against a method that shares
none of its code: subset enumeration for the recovery-probability
convolution, plain sampling for the quadrature STP, and empirical CDFs for
the channel-power series. Reports are machine readable.
"""

from __future__ import annotations

import numpy as np

from . import channel, coding
from .config import ScenarioConfig

SUITE_NAMES = ("eq9", "stp", "cdf")


def suite_recovery(rng: np.random.Generator, instances: int = 1000,
                   max_links: int = 12, tolerance: float = 1e-12) -> dict:
    """Convolution vs subset enumeration on random recovery instances."""
    deviations = []
    for _ in range(instances):
        n = int(rng.integers(1, max_links + 1))
        stps = rng.uniform(size=n)
        k = int(rng.integers(1, n + 2))  # occasionally k > n: both sides must say 0
        fast = coding.file_recovery_probability(stps, k)
        slow = coding.file_recovery_probability_bruteforce(stps, k)
        deviations.append(abs(fast - slow))
    worst = float(np.max(deviations))
    return {"suite": "eq9", "instances": instances,
            "max_abs_deviation": worst, "tolerance": tolerance,
            "passed": bool(worst <= tolerance)}


def random_link(config: ScenarioConfig, rng: np.random.Generator) -> channel.LinkStats:
    """A link at a random in-area drone position (mostly eligible distances)."""
    horizontal = rng.uniform(20.0, 250.0)
    cu = np.array([horizontal, 0.0, config.uav_altitude_m])
    return channel.link_stats(cu, np.zeros(3), config)


def suite_stp(config: ScenarioConfig, rng: np.random.Generator,
              draws: int = 100, samples: int = 1_000_000,
              tolerance: float = 3e-3) -> dict:
    """Quadrature STP vs the sampling estimator over random parameter draws."""
    config.require_resolved()
    spec = channel.spec_from_config(config)
    deviations, bracketed = [], 0
    for _ in range(draws):
        link = random_link(config, rng)
        file_bits = rng.uniform(1e5, 2e6)
        bandwidth = float(rng.choice(config.bandwidth_levels_hz))
        tau = config.tau_s * rng.uniform(0.5, 2.0)
        k = int(rng.choice(config.k_levels))
        exact = channel.stp(file_bits, k, bandwidth, tau, link,
                            config.tx_power_w, spec)
        estimate, stderr = channel.stp_monte_carlo(
            file_bits, k, bandwidth, tau, link, config.tx_power_w, samples, rng)
        deviations.append(abs(exact - estimate))
        if abs(exact - estimate) <= 3.0 * max(stderr, 1e-12):
            bracketed += 1
    worst = float(np.max(deviations))
    return {"suite": "stp", "draws": draws, "samples": samples,
            "max_abs_deviation": worst, "tolerance": tolerance,
            "within_3_stderr": bracketed, "passed": bool(worst <= tolerance)}


def empirical_cdf_sup_distance(samples: np.ndarray, cdf_values_sorted: np.ndarray
                               ) -> float:
    """Kolmogorov-Smirnov sup distance of a fitted CDF against samples."""
    n = samples.size
    steps_hi = np.arange(1, n + 1) / n
    steps_lo = np.arange(0, n) / n
    return float(np.max(np.maximum(np.abs(cdf_values_sorted - steps_hi),
                                   np.abs(cdf_values_sorted - steps_lo))))


def suite_cdf(config: ScenarioConfig, rng: np.random.Generator,
              rician_factors=(1.0, 3.0, 10.0), samples: int = 1_000_000,
              tolerance: float = 3e-3) -> dict:
    """Channel-power CDF series vs the empirical CDF of sampled powers."""
    spec = channel.spec_from_config(config)
    checks = []
    for chi in rician_factors:
        mean_gain = 1.0
        link = channel.LinkStats(distance=1.0, mean_gain=mean_gain,
                                 mean_snr=mean_gain, rician_factor=chi,
                                 zeta=(chi + 1.0) / mean_gain)
        draws = np.sort(channel.sample_channel_power(link, rng, samples))
        analytic = channel.rician_power_cdf(draws, chi, link.zeta, spec)
        sup = empirical_cdf_sup_distance(draws, analytic)
        checks.append({"rician_factor": chi, "sup_distance": sup})
    worst = float(max(c["sup_distance"] for c in checks))
    return {"suite": "cdf", "samples": samples, "checks": checks,
            "max_abs_deviation": worst, "tolerance": tolerance,
            "passed": bool(worst <= tolerance)}


def run_suite(name: str, config: ScenarioConfig, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    if name == "eq9":
        return suite_recovery(rng)
    if name == "stp":
        return suite_stp(config, rng)
    if name == "cdf":
        return suite_cdf(config, rng)
    raise ValueError(f"unknown oracle suite {name!r}; expected one of {SUITE_NAMES}")
