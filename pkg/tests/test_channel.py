import math

import numpy as np
import pytest

import uavcache as uc
from uavcache import channel
from uavcache.channel import (
    DomainError,
    LinkStats,
    QuadratureSpec,
    link_stats,
    rate_cdf,
    rician_power_cdf,
    sample_channel_power,
    stp,
    stp_monte_carlo,
    stp_multi,
)

SPEC = QuadratureSpec()


def unit_mean_link(chi=3.0, mean_gain=1.0):
    return LinkStats(distance=1.0, mean_gain=mean_gain, mean_snr=mean_gain,
                     rician_factor=chi, zeta=(chi + 1.0) / mean_gain)


class TestLinkStats:
    def test_overhead_link(self, default_cfg):
        link = link_stats([500.0, 500.0, 100.0], [500.0, 500.0, 0.0], default_cfg)
        assert link.distance == pytest.approx(100.0)
        expected_gain = default_cfg.beta0 * 100.0**-4 / default_cfg.noise_power_w
        assert link.mean_gain == pytest.approx(expected_gain)
        assert link.mean_snr == pytest.approx(default_cfg.tx_power_w * expected_gain)
        assert link.zeta == pytest.approx(4.0 / expected_gain)

    def test_pathloss_power_law(self, default_cfg):
        near = link_stats([0, 0, 100.0], [0, 0, 0], default_cfg)
        far = link_stats([0, 0, 200.0], [0, 0, 0], default_cfg)
        assert near.mean_gain / far.mean_gain == pytest.approx(16.0)

    def test_calibration_identity_at_reference_distance(self, default_cfg):
        # calibrated beta0 puts the mean SNR margin_db above the threshold at d_ref
        link = link_stats([200.0, 0.0, 0.0], [0.0, 0.0, 0.0], default_cfg)
        assert 10 * math.log10(link.mean_snr) == pytest.approx(30.0, abs=1e-9)

    def test_colocated_error(self, default_cfg):
        with pytest.raises(DomainError):
            link_stats([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], default_cfg)


class TestRicianPowerCdf:
    def test_zero_is_zero(self):
        assert rician_power_cdf(0.0, chi=3.0, zeta=4.0) == 0.0

    def test_large_argument_saturates(self):
        # zeta*x = 50 at chi = 3 leaves less than the series tolerance of mass
        assert rician_power_cdf(12.5, chi=3.0, zeta=4.0) == pytest.approx(1.0, abs=1e-6)

    def test_infinite_argument(self):
        assert rician_power_cdf(np.inf, chi=3.0, zeta=4.0) == 1.0

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            rician_power_cdf(-0.1, chi=3.0, zeta=4.0)

    def test_monotone_and_bounded(self, rng):
        xs = np.sort(rng.uniform(0, 10, size=200))
        values = rician_power_cdf(xs, chi=3.0, zeta=4.0)
        assert np.all(np.diff(values) >= -1e-15)
        assert np.all((values >= 0) & (values <= 1))

    def test_against_sampled_channel_power(self, rng):
        # chi = 3, zeta = 4 corresponds to mean power 1; compare at x = 1
        link = unit_mean_link(chi=3.0)
        samples = sample_channel_power(link, rng, 1_000_000)
        empirical = float(np.mean(samples <= 1.0))
        assert rician_power_cdf(1.0, 3.0, 4.0) == pytest.approx(empirical, abs=3e-3)

    @pytest.mark.parametrize("chi", [1.0, 3.0, 10.0])
    def test_sampled_mean_power_is_one(self, chi, rng):
        samples = sample_channel_power(unit_mean_link(chi=chi), rng, 200_000)
        assert float(np.mean(samples)) == pytest.approx(1.0, abs=5e-3)


class TestRateCdf:
    def test_zero_rate(self):
        assert rate_cdf(0.0, unit_mean_link(), 0.15) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            rate_cdf(-1.0, unit_mean_link(), 0.15)

    def test_monotone_at_random_pairs(self, rng):
        link = unit_mean_link()
        for _ in range(100):
            a, b = np.sort(rng.uniform(0, 12, size=2))
            assert rate_cdf(a, link, 0.15) <= rate_cdf(b, link, 0.15) + 1e-15

    def test_threshold_mapping(self):
        # r = 1, p = 0.15 -> F_mu((2-1)/0.15)
        link = unit_mean_link(chi=3.0)
        assert rate_cdf(1.0, link, 0.15) == pytest.approx(
            rician_power_cdf((2.0**1 - 1.0) / 0.15, 3.0, link.zeta))

    def test_against_sampled_rates(self, rng):
        link = unit_mean_link(chi=3.0)
        mu = sample_channel_power(link, rng, 1_000_000)
        rates = np.log2(1.0 + 0.15 * mu)
        empirical = float(np.mean(rates <= 1.0))
        assert rate_cdf(1.0, link, 0.15) == pytest.approx(empirical, abs=3e-3)


class TestStp:
    def test_zero_file_is_certain(self, default_cfg):
        link = link_stats([100, 0, 100.0], [0, 0, 0], default_cfg)
        assert stp(0.0, 2, 2e6, default_cfg.tau_s, link, 0.15) == 1.0

    def test_vanishing_bandwidth(self, default_cfg):
        link = link_stats([100, 0, 100.0], [0, 0, 0], default_cfg)
        assert stp(1e5, 1, 0.1, default_cfg.tau_s, link, 0.15) < 1e-3

    def test_k_invariance(self, default_cfg):
        link = link_stats([150, 0, 100.0], [0, 0, 0], default_cfg)
        values = [stp(7e5, k, 2e6, default_cfg.tau_s, link, 0.15) for k in (1, 2, 3)]
        assert abs(values[0] - values[1]) <= 1e-9
        assert abs(values[0] - values[2]) <= 1e-9

    def test_matches_monte_carlo(self, default_cfg, rng):
        link = link_stats([180.0, 40.0, 100.0], [0, 0, 0], default_cfg)
        exact = stp(78e3 * 9, 2, 2e6, default_cfg.tau_s, link, 0.15)
        estimate, stderr = stp_monte_carlo(78e3 * 9, 2, 2e6, default_cfg.tau_s,
                                           link, 0.15, 1_000_000, rng)
        assert exact == pytest.approx(estimate, abs=3e-3)

    def test_monotone_in_load_bandwidth_contact(self, default_cfg):
        link = link_stats([150, 0, 100.0], [0, 0, 0], default_cfg)
        tau = default_cfg.tau_s
        loads = [1e5, 3e5, 1e6, 3e6, 1e7]
        etas = [stp(z, 1, 2e6, tau, link, 0.15) for z in loads]
        assert all(a >= b - 1e-9 for a, b in zip(etas, etas[1:]))
        bands = [5e5, 1e6, 2e6, 6e6, 1.2e7]
        etas = [stp(1e6, 1, b, tau, link, 0.15) for b in bands]
        assert all(b >= a - 1e-9 for a, b in zip(etas, etas[1:]))
        taus = [tau / 4, tau / 2, tau, 2 * tau, 4 * tau]
        etas = [stp(1e6, 1, 2e6, t, link, 0.15) for t in taus]
        assert all(b >= a - 1e-9 for a, b in zip(etas, etas[1:]))

    def test_multi_matches_scalar(self, default_cfg):
        # the shared batch grid anchors at the strongest link, so the
        # agreement tolerance is the quadrature accuracy, not exactness
        links = [link_stats([d, 0, 100.0], [0, 0, 0], default_cfg)
                 for d in (80, 140, 200, 260)]
        batch = stp_multi(7e5, 1, 2e6, default_cfg.tau_s, links, 0.15)
        singles = [stp(7e5, 1, 2e6, default_cfg.tau_s, l, 0.15) for l in links]
        assert batch == pytest.approx(singles, abs=1e-6)

    def test_domain_errors(self, default_cfg):
        link = link_stats([100, 0, 100.0], [0, 0, 0], default_cfg)
        with pytest.raises(DomainError):
            stp(-1.0, 1, 2e6, 0.1, link, 0.15)
        with pytest.raises(DomainError):
            stp(1e5, 0, 2e6, 0.1, link, 0.15)
        with pytest.raises(DomainError):
            stp(1e5, 1, 0.0, 0.1, link, 0.15)
        with pytest.raises(DomainError):
            stp(1e5, 1, 2e6, 0.0, link, 0.15)


class TestStpMonteCarlo:
    def test_zero_file_exact(self, default_cfg, rng):
        link = link_stats([100, 0, 100.0], [0, 0, 0], default_cfg)
        assert stp_monte_carlo(0.0, 1, 2e6, 0.1, link, 0.15, 10_000, rng) == (1.0, 0.0)

    def test_sample_count_floor(self, default_cfg, rng):
        link = link_stats([100, 0, 100.0], [0, 0, 0], default_cfg)
        with pytest.raises(DomainError):
            stp_monte_carlo(1e5, 1, 2e6, 0.1, link, 0.15, 100, rng)

    def test_stderr_scaling(self, default_cfg, rng):
        link = link_stats([170, 0, 100.0], [0, 0, 0], default_cfg)
        args = (7e5, 1, 2e6, default_cfg.tau_s, link, 0.15)
        _, se_small = stp_monte_carlo(*args, 10_000, rng)
        _, se_large = stp_monte_carlo(*args, 1_000_000, rng)
        assert se_small / se_large == pytest.approx(10.0, rel=0.35)

    def test_brackets_quadrature(self, default_cfg, rng):
        # the 3-sigma interval around the estimate should cover the exact
        # value in >= 99 of 100 random cases
        hits = 0
        for _ in range(100):
            d = rng.uniform(110, 260)
            link = link_stats([math.sqrt(d**2 - 100**2), 0, 100.0],
                              [0, 0, 0], default_cfg)
            z = rng.uniform(1e5, 2e6)
            b = float(rng.choice(default_cfg.bandwidth_levels_hz))
            tau = default_cfg.tau_s * rng.uniform(0.5, 2.0)
            exact = stp(z, 1, b, tau, link, 0.15)
            estimate, stderr = stp_monte_carlo(z, 1, b, tau, link, 0.15,
                                               1_000_000, rng)
            if abs(exact - estimate) <= 3.0 * max(stderr, 1e-12):
                hits += 1
        assert hits >= 99


class TestQuadratureSpec:
    def test_invalid(self):
        with pytest.raises(DomainError):
            QuadratureSpec(node_count=4)
        with pytest.raises(DomainError):
            QuadratureSpec(series_tol=0.0)

    def test_config_plumbing(self, default_cfg):
        spec = channel.spec_from_config(default_cfg)
        assert spec.node_count == default_cfg.quadrature_nodes
        assert spec.series_tol == default_cfg.series_tol
