"""Fill in the two free channel constants from calibration targets.

The reference channel gain ``beta0`` follows in closed form from requiring a
configurable SNR margin over the eligibility threshold at a reference
distance; without it, the fixed table values would leave no drone able to
clear the threshold. The mean contact time ``tau_s`` is found by root
search so that a reference fragment load on the median eligible link
succeeds with a target probability, which puts the content-size sweeps in
their sensitive region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from . import channel
from .config import ScenarioConfig


class CalibrationError(RuntimeError):
    pass


# Reference fragment load for the contact-time calibration: the mid-range
# per-cell content over a nominal nine-cell footprint, sent on the lowest
# bandwidth level.
REFERENCE_CELLS = 9


def calibrated_beta0(config: ScenarioConfig) -> float:
    """Closed-form reference gain: margin over the threshold at the reference distance.

    Solves tx_power * beta0 * d_ref^-alpha / noise_power = gamma0 * margin.
    """
    target_snr = 10.0 ** ((config.snr_threshold_db + config.cal_margin_db) / 10.0)
    return (target_snr * config.noise_power_w
            * config.cal_ref_distance_m ** config.pathloss_exponent
            / config.tx_power_w)


def eligibility_radius(config: ScenarioConfig, beta0: float) -> float:
    """Largest 3-D distance whose mean SNR still clears the threshold."""
    return (config.tx_power_w * beta0
            / (config.snr_threshold_lin * config.noise_power_w)
            ) ** (1.0 / config.pathloss_exponent)


def median_eligible_distance(config: ScenarioConfig, beta0: float) -> float:
    """Median link distance of a drone uniform over the eligible region.

    Eligible drones live inside a horizontal disc around the ground vehicle;
    for a uniform position the horizontal range has density proportional to
    the radius, so the median sits at r_max / sqrt(2).
    """
    d_max = eligibility_radius(config, beta0)
    alt = config.uav_altitude_m
    if d_max <= alt:
        raise CalibrationError(
            f"eligibility radius {d_max:.1f} m does not reach the flight "
            f"altitude {alt:.1f} m; no drone can ever be eligible")
    r_max = math.sqrt(d_max**2 - alt**2)
    r_max = min(r_max, math.hypot(config.area_extent_m[0] / 2.0,
                                  config.area_extent_m[1] / 2.0))
    r_median = r_max / math.sqrt(2.0)
    return math.hypot(r_median, alt)


def reference_load_bits(config: ScenarioConfig) -> float:
    lo, hi = config.content_bits_per_cell
    return (lo + hi) / 2.0 * REFERENCE_CELLS


@dataclass
class CalibrationResult:
    beta0: float
    tau_s: float
    stp_at_tau: float
    median_eligible_distance_m: float
    reference_load_bits: float
    mean_snr_at_ref_db: float


def calibrated_tau(config: ScenarioConfig, beta0: float) -> tuple[float, float]:
    """Mean contact time hitting the target STP on the reference load.

    Root-finds stp(tau) = target by bisection (Brent) on a bracket grown by
    doubling; stp is monotone nondecreasing in tau.
    """
    probe = config.replace(beta0=beta0, tau_s=1.0)
    d_med = median_eligible_distance(config, beta0)
    gv = [0.0, 0.0, 0.0]
    cu = [math.sqrt(d_med**2 - config.uav_altitude_m**2), 0.0, config.uav_altitude_m]
    link = channel.link_stats(cu, gv, probe)
    spec = channel.spec_from_config(config)
    load = reference_load_bits(config)
    bandwidth = config.bandwidth_levels_hz[0]
    target = config.cal_target_stp

    def gap(tau: float) -> float:
        return channel.stp(load, 1, bandwidth, tau, link, config.tx_power_w, spec) - target

    tau_lo, tau_hi = 1e-9, 1e-3
    while gap(tau_hi) < 0.0:
        tau_hi *= 2.0
        if tau_hi > 1e6:
            raise CalibrationError(
                f"no mean contact time below 1e6 s reaches the target STP "
                f"{target}: stp({tau_lo:.1e}) = {gap(tau_lo) + target:.4f}, "
                f"stp({tau_hi:.1e}) = {gap(tau_hi) + target:.4f}")
    tau = float(brentq(gap, tau_lo, tau_hi, xtol=1e-12, rtol=1e-12))
    return tau, gap(tau) + target


def calibration_report(config: ScenarioConfig) -> CalibrationResult:
    """Compute (or echo) both calibrated constants with their diagnostics."""
    beta0 = config.beta0 if config.beta0 is not None else calibrated_beta0(config)
    if config.tau_s is not None:
        probe = config.replace(beta0=beta0)
        d_med = median_eligible_distance(config, beta0)
        gv = [0.0, 0.0, 0.0]
        cu = [math.sqrt(max(d_med**2 - config.uav_altitude_m**2, 0.0)), 0.0,
              config.uav_altitude_m]
        link = channel.link_stats(cu, gv, probe)
        stp_value = channel.stp(reference_load_bits(config), 1,
                                config.bandwidth_levels_hz[0], config.tau_s,
                                link, config.tx_power_w,
                                channel.spec_from_config(config))
        tau = config.tau_s
    else:
        tau, stp_value = calibrated_tau(config, beta0)
    mean_snr_ref = (config.tx_power_w * beta0
                    * config.cal_ref_distance_m ** (-config.pathloss_exponent)
                    / config.noise_power_w)
    return CalibrationResult(
        beta0=beta0, tau_s=tau, stp_at_tau=stp_value,
        median_eligible_distance_m=median_eligible_distance(config, beta0),
        reference_load_bits=reference_load_bits(config),
        mean_snr_at_ref_db=10.0 * math.log10(mean_snr_ref))


def resolve(config: ScenarioConfig) -> ScenarioConfig:
    """Return a config with beta0 and tau_s filled in (idempotent)."""
    if config.is_resolved:
        return config
    beta0 = config.beta0 if config.beta0 is not None else calibrated_beta0(config)
    tau = config.tau_s
    if tau is None:
        tau, _ = calibrated_tau(config, beta0)
    return config.replace(beta0=beta0, tau_s=tau)
