"""Air-to-ground link mathematics under Rician fading.

Covers the large-scale link budget, the channel-power CDF (a Marcum-Q-type
double series), the induced CDF of the achievable spectral efficiency, and
the successful-transmission probability (STP) of a coded fragment within an
exponentially distributed contact time. The STP expectation is taken by
composite Gauss-Legendre quadrature in log contact time, which resolves the
success transition (a fixed-relative-width sigmoid) uniformly across loads;
a sampling estimator is provided as an independent cross-check for every
analytic path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import ScenarioConfig

# exp(-x) underflows to exactly 0.0 below this; the CDF series is then 1
# to double precision for any sane term cap.
_EXP_UNDERFLOW = 700.0


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class LinkStats:
    """Per CU-to-GV link: geometry plus large-scale channel statistics.

    ``mean_gain`` is the mean of the normalized channel power mu = |h|^2 /
    noise_power, so ``mean_snr = tx_power * mean_gain`` and ``zeta`` is the
    rate parameter (rician_factor + 1) / mean_gain of the power CDF.
    """

    distance: float
    mean_gain: float
    mean_snr: float
    rician_factor: float
    zeta: float


@dataclass(frozen=True)
class QuadratureSpec:
    """Numerical controls for the CDF series and the STP integral.

    ``node_count`` is the resolution budget of the STP rule: each log-time
    panel of width ~0.5 gets node_count / 8 Gauss points (8 at the default
    64), placing several points across any success transition.
    """

    node_count: int = 64
    series_tol: float = 1e-12
    series_max_terms: int = 64

    def __post_init__(self) -> None:
        if self.node_count < 8:
            raise DomainError(f"node_count must be >= 8, got {self.node_count}")
        if self.series_tol <= 0:
            raise DomainError(f"series_tol must be positive, got {self.series_tol}")

    @property
    def panel_order(self) -> int:
        return max(4, self.node_count // 8)


def spec_from_config(config: ScenarioConfig) -> QuadratureSpec:
    return QuadratureSpec(node_count=config.quadrature_nodes,
                          series_tol=config.series_tol,
                          series_max_terms=config.series_max_terms)


@lru_cache(maxsize=8)
def _legendre_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


# The e^(-t) weight makes contact times beyond this numerically irrelevant.
_T_MAX = 46.0
# Grid extension below the nominal transition, in log time: reaching the
# required rate e^4 times early needs a channel power beyond any Rician tail.
_LOG_MARGIN = 4.0
# Panel width in log time; the success transition spans ~1/log2(1+snr) of a
# log-time unit and strong line-of-sight (chi ~ 10) sharpens it further.
_PANEL_WIDTH = 0.25


def link_stats(cu_position: np.ndarray, gv_position: np.ndarray,
               config: ScenarioConfig) -> LinkStats:
    """Large-scale statistics of the link between a caching drone and the GV."""
    config.require_resolved()
    d = float(np.linalg.norm(np.asarray(cu_position, float) - np.asarray(gv_position, float)))
    if d == 0.0:
        raise DomainError("co-located nodes: link distance is zero")
    mean_gain = config.beta0 * d ** (-config.pathloss_exponent) / config.noise_power_w
    chi = config.rician_factor
    return LinkStats(distance=d, mean_gain=mean_gain,
                     mean_snr=config.tx_power_w * mean_gain,
                     rician_factor=chi, zeta=(chi + 1.0) / mean_gain)


def _marcum_series(zx: np.ndarray, chi: float, spec: QuadratureSpec) -> np.ndarray:
    """CDF series evaluated at rate-parameter-scaled powers zx (any shape).

    Accumulates e^(-chi) * sum_m chi^m/m! * [Poisson(zx) cdf at m] by
    recurrence; the outer series stops once past its mode (m >= chi) with
    the next term's bound below ``series_tol``, or at ``series_max_terms``.
    zx = 0 is 0 exactly and entries whose e^(-zx) underflows (including
    infinite zx) are 1 exactly; both avoid the truncation residual.
    """
    live = (zx < _EXP_UNDERFLOW) & (zx > 0.0)
    zx_live = zx[live]

    outer_pmf = math.exp(-chi)
    inner_pmf = np.exp(-zx_live)
    inner_cdf = inner_pmf.copy()
    total = outer_pmf * inner_cdf
    for m in range(1, spec.series_max_terms):
        outer_pmf *= chi / m
        if m >= chi and outer_pmf < spec.series_tol:
            break
        inner_pmf *= zx_live / m
        inner_cdf += inner_pmf
        total += outer_pmf * inner_cdf

    result = np.ones_like(zx)
    result[zx == 0.0] = 0.0
    result[live] = np.clip(1.0 - total, 0.0, 1.0)
    return result


def rician_power_cdf(x, chi: float, zeta: float,
                     spec: QuadratureSpec = QuadratureSpec()):
    """CDF of the normalized Rician channel power at x (scalar or array).

    Evaluates 1 - e^(-chi) * sum_{m} chi^m/m! * e^(-zeta x) sum_{l<=m}
    (zeta x)^l / l!, clamped to [0, 1].
    """
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise DomainError("channel power must be nonnegative")
    scalar = x_arr.ndim == 0
    result = _marcum_series(zeta * np.atleast_1d(x_arr), chi, spec)
    return float(result[0]) if scalar else result


def rate_cdf(r, link: LinkStats, tx_power_w: float,
             spec: QuadratureSpec = QuadratureSpec()):
    """CDF of the achievable spectral efficiency log2(1 + snr) at r."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise DomainError("spectral efficiency must be nonnegative")
    with np.errstate(over="ignore"):
        threshold = np.expm1(r_arr * math.log(2.0)) / tx_power_w
    return rician_power_cdf(threshold, link.rician_factor, link.zeta, spec)


def _log_time_grid(y_lo: float, y_hi: float, order: int
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights for integrating over ln(t)."""
    panels = max(1, math.ceil((y_hi - y_lo) / _PANEL_WIDTH))
    edges = np.linspace(y_lo, y_hi, panels + 1)
    ref_nodes, ref_weights = _legendre_rule(order)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    y = (mid[:, None] + half[:, None] * ref_nodes).ravel()
    w = (half[:, None] * ref_weights).ravel()
    return y, w


def stp_multi(file_bits: float, k: int, bandwidth_hz: float, tau_s: float,
              links: list[LinkStats], tx_power_w: float,
              spec: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """Fragment success probability on each link (shared file and bandwidth).

    A file of ``file_bits`` is split into k fragments of file_bits/k bits,
    each sent on a bandwidth_hz/k subchannel, so the required spectral
    efficiency at normalized contact time t is file_bits/(tau * bandwidth *
    t) regardless of k. The expectation over the unit-mean exponential
    contact time is integrated in y = ln(t) on a composite Gauss-Legendre
    grid anchored at the earliest plausible success time: below it the
    required rate exceeds any reachable channel realization, above t ~ 46
    the exponential weight has underflowed.
    """
    if file_bits < 0:
        raise DomainError(f"file size must be nonnegative, got {file_bits}")
    if k < 1:
        raise DomainError(f"coding parameter k must be >= 1, got {k}")
    if bandwidth_hz <= 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth_hz}")
    if tau_s <= 0:
        raise DomainError(f"mean contact time must be positive, got {tau_s}")
    if not links:
        return np.zeros(0)
    if file_bits == 0:
        return np.ones(len(links))
    chi = links[0].rician_factor
    if any(l.rician_factor != chi for l in links):
        raise DomainError("links in one batch must share the Rician factor")

    fragment_bits = file_bits / k
    per_cu_bandwidth = bandwidth_hz / k
    required_at_unit_time = fragment_bits / (tau_s * per_cu_bandwidth)
    best_mean_rate = max(math.log2(1.0 + tx_power_w * l.mean_gain) for l in links)
    if best_mean_rate <= 0.0:
        return np.zeros(len(links))

    y_hi = math.log(_T_MAX)
    y_lo = max(math.log(required_at_unit_time / best_mean_rate) - _LOG_MARGIN,
               math.log(1e-8))
    if y_lo >= y_hi:
        return np.zeros(len(links))

    y, w = _log_time_grid(y_lo, y_hi, spec.panel_order)
    t = np.exp(y)
    base_weight = w * np.exp(-t) * t
    required_rate = required_at_unit_time / t
    with np.errstate(over="ignore"):
        threshold = np.expm1(required_rate * math.log(2.0)) / tx_power_w
    zetas = np.array([l.zeta for l in links])
    failure = _marcum_series(threshold[:, None] * zetas[None, :], chi, spec)
    eta = base_weight @ (1.0 - failure)
    return np.clip(eta, 0.0, 1.0)


def stp(file_bits: float, k: int, bandwidth_hz: float, tau_s: float,
        link: LinkStats, tx_power_w: float,
        spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Probability a coded fragment completes within the random contact time."""
    return float(stp_multi(file_bits, k, bandwidth_hz, tau_s, [link],
                           tx_power_w, spec)[0])


def sample_channel_power(link: LinkStats, rng: np.random.Generator,
                         size: int) -> np.ndarray:
    """Draw normalized channel powers mu = mean_gain * |g|^2 for this link.

    The small-scale coefficient g has a deterministic line-of-sight part
    sqrt(chi/(chi+1)) and circular Gaussian scatter with per-component
    variance 1/(2(chi+1)), giving E|g|^2 = 1.
    """
    chi = link.rician_factor
    los = math.sqrt(chi / (chi + 1.0))
    sigma = math.sqrt(1.0 / (2.0 * (chi + 1.0)))
    re = los + sigma * rng.standard_normal(size)
    im = sigma * rng.standard_normal(size)
    return link.mean_gain * (re**2 + im**2)


def stp_monte_carlo(file_bits: float, k: int, bandwidth_hz: float, tau_s: float,
                    link: LinkStats, tx_power_w: float,
                    sample_count: int, rng: np.random.Generator
                    ) -> tuple[float, float]:
    """Sampling estimate of :func:`stp` with its standard error.

    Draws contact times T ~ Exp(mean tau) and fading realizations, counting
    a success when T * (bandwidth/k) * log2(1 + snr) covers the fragment.
    """
    if sample_count < 10_000:
        raise DomainError(f"sample_count must be >= 1e4, got {sample_count}")
    if file_bits == 0:
        return 1.0, 0.0
    contact = rng.exponential(scale=tau_s, size=sample_count)
    mu = sample_channel_power(link, rng, sample_count)
    rate_bits = (bandwidth_hz / k) * np.log2(1.0 + tx_power_w * mu)
    success = contact * rate_bits >= file_bits / k
    estimate = float(np.mean(success))
    stderr = math.sqrt(estimate * (1.0 - estimate) / sample_count)
    return estimate, stderr
