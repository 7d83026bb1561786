"""Experiment configuration: dataclass blocks, JSON loading, dotted overrides.

Defaults follow the dual-band setup used throughout: a 3.5 GHz / 150 MHz
sub-6 system with an 8x4 fully digital array feeding statistics to a
28 GHz / 850 MHz hybrid system with 64x32 antennas and 16x8 RF chains.
"""

import dataclasses
import json
import math
from dataclasses import dataclass, field

from .channel import ChannelConfig

SPEED_OF_LIGHT = 299792458.0


@dataclass(frozen=True)
class SystemConfig:
    """Antenna, RF-chain, OFDM and power parameters for both bands."""

    sub6_carrier_hz: float = 3.5e9
    sub6_bandwidth_hz: float = 150e6
    sub6_n_rx: int = 8
    sub6_n_tx: int = 4
    sub6_subcarriers: int = 32
    sub6_power_dbm: float = 30.0
    sub6_power_ref_bandwidth_hz: float = 25e6
    mm_carrier_hz: float = 28e9
    mm_bandwidth_hz: float = 850e6
    mm_n_rx: int = 64
    mm_n_tx: int = 32
    mm_rf_rx: int = 16
    mm_rf_tx: int = 8
    mm_subcarriers: int = 128
    mm_power_dbm: float = 43.0
    num_streams: int = 4
    cp_fraction: float = 0.25
    spacing: float = 0.5
    pathloss_exponent: float = 3.0
    noise_density_dbm_hz: float = -174.0
    phase_bits: int = 2

    def __post_init__(self):
        for name in ("sub6_n_rx", "sub6_n_tx", "sub6_subcarriers", "mm_n_rx",
                     "mm_n_tx", "mm_rf_rx", "mm_rf_tx", "mm_subcarriers",
                     "num_streams", "phase_bits"):
            if getattr(self, name) < 1:
                raise ValueError(f"system.{name} must be >= 1")
        for name in ("sub6_carrier_hz", "sub6_bandwidth_hz", "mm_carrier_hz",
                     "mm_bandwidth_hz", "sub6_power_ref_bandwidth_hz", "spacing"):
            if getattr(self, name) <= 0:
                raise ValueError(f"system.{name} must be > 0")
        if not 0.0 < self.cp_fraction <= 1.0:
            raise ValueError("system.cp_fraction must be in (0, 1]")
        if self.num_streams > self.mm_rf_tx or self.num_streams > self.mm_rf_rx:
            raise ValueError("system.num_streams cannot exceed the RF chains")
        if self.mm_rf_rx > self.mm_n_rx or self.mm_rf_tx > self.mm_n_tx:
            raise ValueError("RF chains cannot exceed antennas")

    # taps cover the cyclic prefix plus the current symbol
    @property
    def sub6_num_taps(self):
        return int(self.sub6_subcarriers * self.cp_fraction) + 1

    @property
    def mm_num_taps(self):
        return int(self.mm_subcarriers * self.cp_fraction) + 1

    @property
    def sub6_sample_interval(self):
        return 1.0 / self.sub6_bandwidth_hz

    @property
    def mm_sample_interval(self):
        return 1.0 / self.mm_bandwidth_hz

    @property
    def sub6_total_power_dbm(self):
        return self.sub6_power_dbm + 10.0 * math.log10(
            self.sub6_bandwidth_hz / self.sub6_power_ref_bandwidth_hz)


@dataclass(frozen=True)
class SweepConfig(ChannelConfig):
    """Channel block: generator knobs plus geometry sweeps."""

    distance_m: float = 90.0
    distance_sweep_m: tuple = (30.0, 45.0, 60.0, 75.0, 90.0, 105.0, 120.0)
    base_angle_deg: float = 5.0
    separation_sweep_deg: tuple = (5.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0)

    def __post_init__(self):
        super().__post_init__()
        if self.distance_m <= 0 or any(d <= 0 for d in self.distance_sweep_m):
            raise ValueError("channel.distance values must be > 0")
        if any(s < 0 for s in self.separation_sweep_deg):
            raise ValueError("channel.separation_sweep_deg must be >= 0")


@dataclass(frozen=True)
class EstimationConfig:
    """Estimator knobs shared by translation and compressed estimation."""

    snapshots: int = 30
    oversampling: int = 2
    j_rho: float = 0.9
    j_w_factor: float = 0.1
    as_threshold_deg: float = 15.0
    pas: str = "truncated_gaussian"
    kappa: float = 1.0
    pilot_subcarrier: int = -1          # -1 -> center subcarrier
    snapshot_sweep: tuple = (5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 60)

    def __post_init__(self):
        if self.snapshots < 1:
            raise ValueError("estimation.snapshots must be >= 1")
        if self.oversampling < 1:
            raise ValueError("estimation.oversampling must be >= 1")
        if not 0.0 < self.j_rho <= 1.0:
            raise ValueError("estimation.j_rho must be in (0, 1]")
        if self.j_w_factor < 0:
            raise ValueError("estimation.j_w_factor must be >= 0")
        if self.as_threshold_deg <= 0:
            raise ValueError("estimation.as_threshold_deg must be > 0")
        if self.kappa <= 0:
            raise ValueError("estimation.kappa must be > 0")
        if any(int(t) < 1 for t in self.snapshot_sweep):
            raise ValueError("estimation.snapshot_sweep entries must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    """Monte-Carlo bookkeeping."""

    trials: int = 100
    master_seed: int = 12345
    output_path: str = "results.csv"
    inner_trials: int = 4000
    stat_blocks: int = 2048
    snr_sweep_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0)
    fig8_antennas: tuple = (16, 64)

    def __post_init__(self):
        if self.trials < 1 or self.inner_trials < 1:
            raise ValueError("run.trials and run.inner_trials must be >= 1")
        if self.stat_blocks < 1:
            raise ValueError("run.stat_blocks must be >= 1")
        if any(int(n) < 4 for n in self.fig8_antennas):
            raise ValueError("run.fig8_antennas entries must be >= 4")


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    channel: SweepConfig = field(default_factory=SweepConfig)
    estimation: EstimationConfig = field(default_factory=EstimationConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def pilot_index(self, num_subcarriers):
        p = self.estimation.pilot_subcarrier
        if p < 0:
            return num_subcarriers // 2
        if p >= num_subcarriers:
            raise ValueError("estimation.pilot_subcarrier outside the band")
        return p


def friis_pathloss_db(carrier_hz, distance_m, exponent):
    """Free-space reference loss at 1 m plus distance decay."""
    ref = 20.0 * math.log10(4.0 * math.pi * carrier_hz / SPEED_OF_LIGHT)
    return ref + 10.0 * exponent * math.log10(distance_m)


def band_snr_db(power_dbm, bandwidth_hz, carrier_hz, distance_m, exponent,
                noise_density_dbm_hz=-174.0):
    """Per-subcarrier receive SNR; bandwidth-proportional thermal noise."""
    noise_dbm = noise_density_dbm_hz + 10.0 * math.log10(bandwidth_hz)
    return power_dbm - friis_pathloss_db(carrier_hz, distance_m, exponent) - noise_dbm


def sub6_snr_linear(cfg, distance_m):
    db = band_snr_db(cfg.system.sub6_total_power_dbm, cfg.system.sub6_bandwidth_hz,
                     cfg.system.sub6_carrier_hz, distance_m,
                     cfg.system.pathloss_exponent, cfg.system.noise_density_dbm_hz)
    return 10.0 ** (db / 10.0)


def mm_snr_linear(cfg, distance_m):
    db = band_snr_db(cfg.system.mm_power_dbm, cfg.system.mm_bandwidth_hz,
                     cfg.system.mm_carrier_hz, distance_m,
                     cfg.system.pathloss_exponent, cfg.system.noise_density_dbm_hz)
    return 10.0 ** (db / 10.0)


_BLOCKS = {"system": SystemConfig, "channel": SweepConfig,
           "estimation": EstimationConfig, "run": RunConfig}


def config_from_dict(data):
    """Build an ExperimentConfig from nested dicts, with field-path errors."""
    kwargs = {}
    for name, cls in _BLOCKS.items():
        block = dict(data.get(name, {}))
        valid = {f.name for f in dataclasses.fields(cls)}
        for key in block:
            if key not in valid:
                raise ValueError(f"{name}.{key}: unknown field")
        for key, val in block.items():
            if isinstance(val, list):
                block[key] = tuple(val)
        try:
            kwargs[name] = cls(**block)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{name}: {exc}") from exc
    extra = set(data) - set(_BLOCKS)
    if extra:
        raise ValueError(f"unknown config block(s): {sorted(extra)}")
    return ExperimentConfig(**kwargs)


def config_to_dict(cfg):
    return dataclasses.asdict(cfg)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


def apply_overrides(cfg, assignments):
    """Apply dotted-path overrides like system.mm_n_rx=32 to a config."""
    data = config_to_dict(cfg)
    for item in assignments:
        if "=" not in item:
            raise ValueError(f"override '{item}' is not of the form path=value")
        path, raw = item.split("=", 1)
        parts = path.strip().split(".")
        if len(parts) != 2 or parts[0] not in _BLOCKS:
            raise ValueError(f"override path '{path}' must be block.field")
        block, fname = parts
        valid = {f.name for f in dataclasses.fields(_BLOCKS[block])}
        if fname not in valid:
            raise ValueError(f"{block}.{fname}: unknown field")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw                  # bare strings stay strings
        data[block][fname] = value
    return config_from_dict(data)
