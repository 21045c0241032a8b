"""Scenario configuration: schema, defaults, validation, and JSON round-trip.

All dB/dBm inputs are converted to linear once at load time; downstream code
only ever sees the linear values (``snr_threshold_lin``, ``noise_power_w``).
``beta0`` and ``tau_s`` may be left null in the input, in which case
:func:`uavcache.calibrate.resolve` fills them from the calibration targets.
"""

from __future__ import annotations

import copy
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    """Raised when a configuration document fails validation.

    Carries one ``(field_path, message)`` pair per problem in ``problems``.
    """

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        lines = "; ".join(f"{path}: {msg}" for path, msg in problems)
        super().__init__(f"invalid configuration: {lines}")


@dataclass
class DqnConfig:
    """Hyperparameters for the Q-learning agents.

    The discount and target-sync defaults are set where plain SGD training
    is stable here: faster syncs with a high discount let the bootstrap
    max-bias inflate the value scale until the action ranking drowns.
    """

    hidden_sizes: list[int] = field(default_factory=lambda: [128, 128])
    learning_rate: float = 0.001
    discount: float = 0.5
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_fraction: float = 0.8
    batch_size: int = 32
    memory_size: int = 2000
    target_sync_steps: int = 200
    episodes: int = 500
    grad_clip_norm: float = 1.0
    divergence_loss_limit: float = 1e6


@dataclass
class PsoConfig:
    """Swarm-search parameters for the per-slot PSO baseline."""

    particles: int = 30
    iterations: int = 50
    inertia: float = 0.7
    cognitive: float = 1.5
    social: float = 1.5


@dataclass
class ScenarioConfig:
    """All physical, coding, and learning parameters of one scenario.

    Field names double as JSON keys; :meth:`to_dict` emits exactly the
    loadable schema so a resolved snapshot reproduces the run byte-for-byte.
    """

    # Geometry / world
    area_extent_m: list[float] = field(default_factory=lambda: [1000.0, 1000.0])
    cell_side_m: float = 50.0
    su_count: int = 2
    cu_count: int = 16
    uav_altitude_m: float = 100.0
    apothem_m: float = 200.0
    polygon_sides: int = 4
    uav_speed_mps: float = 10.0
    slot_duration_s: float = 1.0

    # Radio / channel
    total_bandwidth_hz: float = 10e6
    bandwidth_levels_hz: list[float] = field(default_factory=lambda: [2e6, 6e6])
    snr_threshold_db: float = 27.0
    tx_power_w: float = 0.15
    noise_power_dbm: float = -90.0
    rician_factor: float = 3.0
    pathloss_exponent: float = 4.0
    beta0: float | None = None
    cal_ref_distance_m: float = 200.0
    cal_margin_db: float = 3.0
    tau_s: float | None = None
    cal_target_stp: float = 0.6

    # Coding / content
    k_levels: list[int] = field(default_factory=lambda: [1, 2, 3])
    fragment_holders: int = 8
    content_bits_per_cell: list[float] = field(default_factory=lambda: [73e3, 83e3])
    recovery_mode: str = "all-eligible"
    cell_recovery_mode: str = "simplified"

    # Episode / reward
    horizon_slots: int = 60
    reward_scale: float | None = None
    file_size_scale_bits: float | None = None

    # Numerics
    quadrature_nodes: int = 64
    series_tol: float = 1e-12
    series_max_terms: int = 64

    seed: int = 0
    dqn: DqnConfig = field(default_factory=DqnConfig)
    pso: PsoConfig = field(default_factory=PsoConfig)

    # Linear-unit views, computed once at construction.
    snr_threshold_lin: float = field(init=False, repr=False)
    noise_power_w: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.snr_threshold_lin = 10.0 ** (self.snr_threshold_db / 10.0)
        self.noise_power_w = 1e-3 * 10.0 ** (self.noise_power_dbm / 10.0)

    # -- derived quantities -------------------------------------------------

    @property
    def cell_area_m2(self) -> float:
        return self.cell_side_m**2

    @property
    def cell_count(self) -> int:
        nx = round(self.area_extent_m[0] / self.cell_side_m)
        ny = round(self.area_extent_m[1] / self.cell_side_m)
        return nx * ny

    def resolved_reward_scale(self) -> float:
        """Reward multiplier; defaults to 1/(C*A) so rewards live in [0, 1]."""
        if self.reward_scale is not None:
            return self.reward_scale
        return 1.0 / (self.cell_count * self.cell_area_m2)

    def resolved_file_size_scale(self) -> float:
        """Normalizer for the learner's file-size state component."""
        if self.file_size_scale_bits is not None:
            return self.file_size_scale_bits
        return self.content_bits_per_cell[1] * self.cell_count

    @property
    def is_resolved(self) -> bool:
        """True once beta0 and tau_s have concrete values."""
        return self.beta0 is not None and self.tau_s is not None

    def require_resolved(self) -> None:
        if not self.is_resolved:
            raise ConfigError(
                [("beta0" if self.beta0 is None else "tau_s",
                  "not calibrated; call uavcache.calibrate.resolve() first")]
            )

    # -- (de)serialization --------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        """Schema fields only (no derived linear values)."""
        out: dict[str, Any] = {}
        for f in dataclasses.fields(self):
            if not f.init:
                continue
            value = getattr(self, f.name)
            if isinstance(value, (DqnConfig, PsoConfig)):
                out[f.name] = dataclasses.asdict(value)
            else:
                out[f.name] = copy.deepcopy(value)
        return out

    def replace(self, **changes: Any) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, doc: dict[str, Any], strict: bool = True) -> "ScenarioConfig":
        problems: list[tuple[str, str]] = []
        known = {f.name for f in dataclasses.fields(cls) if f.init}
        if strict:
            for key in doc:
                if key not in known:
                    problems.append((key, "unknown field"))
        kwargs: dict[str, Any] = {}
        for key, value in doc.items():
            if key not in known:
                continue
            if key == "dqn":
                kwargs[key] = _sub_config(DqnConfig, value, "dqn", strict, problems)
            elif key == "pso":
                kwargs[key] = _sub_config(PsoConfig, value, "pso", strict, problems)
            else:
                kwargs[key] = copy.deepcopy(value)
        if problems:
            raise ConfigError(problems)
        cfg = cls(**kwargs)
        validate(cfg)
        return cfg


def _sub_config(cls, value, prefix: str, strict: bool, problems: list) -> Any:
    if not isinstance(value, dict):
        problems.append((prefix, "must be an object"))
        return cls()
    known = {f.name for f in dataclasses.fields(cls)}
    if strict:
        for key in value:
            if key not in known:
                problems.append((f"{prefix}.{key}", "unknown field"))
    kwargs = {k: v for k, v in value.items() if k in known}
    return cls(**kwargs)


def validate(cfg: ScenarioConfig) -> None:
    """Check every invariant the schema promises; aggregate all failures."""
    problems: list[tuple[str, str]] = []

    def positive(path: str, value) -> None:
        if value is not None and not value > 0:
            problems.append((path, f"must be positive, got {value!r}"))

    if len(cfg.area_extent_m) != 2 or any(v <= 0 for v in cfg.area_extent_m):
        problems.append(("area_extent_m", "must be two positive extents"))
    for name in ("cell_side_m", "uav_altitude_m", "apothem_m", "slot_duration_s",
                 "total_bandwidth_hz", "tx_power_w", "rician_factor",
                 "pathloss_exponent", "cal_ref_distance_m", "series_tol",
                 "beta0", "tau_s", "cal_target_stp", "reward_scale",
                 "file_size_scale_bits"):
        positive(name, getattr(cfg, name))
    if cfg.uav_speed_mps < 0:
        problems.append(("uav_speed_mps", "must be nonnegative"))
    for name in ("su_count", "cu_count", "fragment_holders", "horizon_slots",
                 "series_max_terms"):
        if getattr(cfg, name) < 1:
            problems.append((name, "must be at least 1"))
    if cfg.polygon_sides < 3:
        problems.append(("polygon_sides", "must be at least 3"))
    if cfg.quadrature_nodes < 8:
        problems.append(("quadrature_nodes", "must be at least 8"))
    if not cfg.bandwidth_levels_hz or any(b <= 0 for b in cfg.bandwidth_levels_hz):
        problems.append(("bandwidth_levels_hz", "must be a nonempty list of positive values"))
    if not cfg.k_levels or any(k < 1 for k in cfg.k_levels):
        problems.append(("k_levels", "must be a nonempty list of integers >= 1"))
    if cfg.k_levels and max(cfg.k_levels) > cfg.fragment_holders:
        problems.append(("k_levels", f"max level {max(cfg.k_levels)} exceeds "
                         f"fragment_holders {cfg.fragment_holders}"))
    if cfg.fragment_holders > cfg.cu_count:
        problems.append(("fragment_holders", f"{cfg.fragment_holders} exceeds cu_count {cfg.cu_count}"))
    lo, hi = (cfg.content_bits_per_cell + [0, 0])[:2]
    if len(cfg.content_bits_per_cell) != 2 or lo < 0 or lo > hi:
        problems.append(("content_bits_per_cell", f"must be [lo, hi] with 0 <= lo <= hi, got {cfg.content_bits_per_cell!r}"))
    if cfg.recovery_mode not in ("all-eligible", "selected-k"):
        problems.append(("recovery_mode", f"unknown mode {cfg.recovery_mode!r}"))
    if cfg.cell_recovery_mode not in ("simplified", "literal-eq6"):
        problems.append(("cell_recovery_mode", f"unknown mode {cfg.cell_recovery_mode!r}"))
    for i, side in enumerate(("x", "y")):
        extent = cfg.area_extent_m[i] if len(cfg.area_extent_m) == 2 else 0.0
        n = extent / cfg.cell_side_m if cfg.cell_side_m > 0 else 0.0
        if cfg.cell_side_m > 0 and abs(n - round(n)) > 1e-9:
            problems.append(("cell_side_m",
                             f"extent_{side} {extent} is not an integer multiple of cell_side_m {cfg.cell_side_m}"))

    d = cfg.dqn
    positive("dqn.learning_rate", d.learning_rate)
    if not 0.0 < d.discount < 1.0:
        problems.append(("dqn.discount", f"must be in (0, 1), got {d.discount}"))
    for name in ("epsilon_start", "epsilon_end"):
        v = getattr(d, name)
        if not 0.0 <= v <= 1.0:
            problems.append((f"dqn.{name}", f"must be in [0, 1], got {v}"))
    if not 0.0 < d.epsilon_decay_fraction <= 1.0:
        problems.append(("dqn.epsilon_decay_fraction", "must be in (0, 1]"))
    for name in ("batch_size", "memory_size", "target_sync_steps", "episodes"):
        if getattr(d, name) < 1:
            problems.append((f"dqn.{name}", "must be at least 1"))
    if not d.hidden_sizes or any(h < 1 for h in d.hidden_sizes):
        problems.append(("dqn.hidden_sizes", "must be a nonempty list of positive ints"))
    positive("dqn.grad_clip_norm", d.grad_clip_norm)

    p = cfg.pso
    for name in ("particles", "iterations"):
        if getattr(p, name) < 0 or (name == "particles" and p.particles < 1):
            problems.append((f"pso.{name}", "swarm size must be >= 1, iterations >= 0"))
    for name in ("inertia", "cognitive", "social"):
        if getattr(p, name) < 0:
            problems.append((f"pso.{name}", "must be nonnegative"))

    if problems:
        raise ConfigError(problems)


def default_config() -> ScenarioConfig:
    """The documented default profile (fixed table values plus gap defaults)."""
    return ScenarioConfig.from_dict({})


def load_config(path: str | Path) -> ScenarioConfig:
    """Load and validate a JSON configuration document."""
    path = Path(path)
    if not path.exists():
        raise ConfigError([(str(path), "configuration file not found")])
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError([(str(path), f"not valid JSON: {exc}")]) from exc
    if not isinstance(doc, dict):
        raise ConfigError([(str(path), "top-level document must be an object")])
    return ScenarioConfig.from_dict(doc)


def save_config(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(canonical_json(cfg.to_dict()) + "\n")


def canonical_json(doc: dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2)


def config_hash(cfg: ScenarioConfig) -> str:
    """Stable sha256 of the schema fields; embedded in every emitted CSV."""
    payload = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()
