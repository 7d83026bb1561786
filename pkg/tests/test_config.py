"""Config block defaults, override parsing, and the link budget."""

import json
import math

import pytest

from oobcov import (ExperimentConfig, EstimationConfig, RunConfig, SweepConfig,
                    SystemConfig, apply_overrides, band_snr_db, config_from_dict,
                    config_to_dict, friis_pathloss_db, load_config,
                    mm_snr_linear, sub6_snr_linear)
from oobcov.experiments import budget_constants


def test_default_system_block():
    sys = ExperimentConfig().system
    assert sys.sub6_carrier_hz == 3.5e9
    assert sys.mm_carrier_hz == 28e9
    assert sys.sub6_bandwidth_hz == 150e6
    assert sys.mm_bandwidth_hz == 850e6
    assert (sys.sub6_n_rx, sys.sub6_n_tx) == (8, 4)
    assert (sys.mm_n_rx, sys.mm_n_tx) == (64, 32)
    assert (sys.mm_rf_rx, sys.mm_rf_tx) == (16, 8)
    assert (sys.sub6_subcarriers, sys.mm_subcarriers) == (32, 128)
    assert sys.num_streams == 4
    assert sys.cp_fraction == 0.25
    assert sys.spacing == 0.5
    assert sys.phase_bits == 2
    assert sys.pathloss_exponent == 3.0
    assert sys.noise_density_dbm_hz == -174.0


def test_default_channel_estimation_run_blocks():
    cfg = ExperimentConfig()
    assert cfg.channel.distance_m == 90.0
    assert cfg.channel.distance_sweep_m == (30.0, 45.0, 60.0, 75.0, 90.0, 105.0, 120.0)
    assert cfg.channel.base_angle_deg == 5.0
    assert cfg.channel.separation_sweep_deg == (5.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0)
    assert cfg.channel.mean_aoas_deg == (5.0, 45.0)
    assert cfg.channel.num_rays == 100
    assert cfg.estimation.snapshots == 30
    assert cfg.estimation.oversampling == 2
    assert cfg.estimation.j_rho == 0.9
    assert cfg.estimation.j_w_factor == 0.1
    assert cfg.estimation.pas == "truncated_gaussian"
    assert cfg.estimation.pilot_subcarrier == -1
    assert cfg.estimation.snapshot_sweep == (5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 60)
    assert cfg.run.trials == 100
    assert cfg.run.master_seed == 12345
    assert cfg.run.stat_blocks == 2048
    assert cfg.run.snr_sweep_db == (0.0, 5.0, 10.0, 15.0, 20.0)
    assert cfg.run.fig8_antennas == (16, 64)


def test_derived_system_properties():
    sys = ExperimentConfig().system
    # cyclic prefix plus the current symbol
    assert sys.sub6_num_taps == 9
    assert sys.mm_num_taps == 33
    assert sys.sub6_sample_interval == 1.0 / 150e6
    assert sys.mm_sample_interval == 1.0 / 850e6
    # 30 dBm over 25 MHz scaled up to the full 150 MHz band
    assert sys.sub6_total_power_dbm == pytest.approx(37.78151250383644, abs=1e-9)


def test_pilot_index():
    cfg = ExperimentConfig()
    assert cfg.pilot_index(32) == 16
    cfg2 = apply_overrides(cfg, ["estimation.pilot_subcarrier=3"])
    assert cfg2.pilot_index(32) == 3
    with pytest.raises(ValueError, match="pilot_subcarrier outside the band"):
        apply_overrides(cfg, ["estimation.pilot_subcarrier=40"]).pilot_index(32)


def test_friis_pathloss_formula():
    got = friis_pathloss_db(28e9, 90.0, 3.0)
    ref = 20.0 * math.log10(4.0 * math.pi * 28e9 / 299792458.0)
    assert got == pytest.approx(ref + 30.0 * math.log10(90.0), abs=1e-12)
    # doubling the distance adds 10*exponent*log10(2)
    delta = friis_pathloss_db(28e9, 180.0, 3.0) - got
    assert delta == pytest.approx(9.030899869919436, abs=1e-9)


def test_band_snr_frozen_values():
    cfg = ExperimentConfig()
    assert 10 * math.log10(sub6_snr_linear(cfg, 90.0)) == pytest.approx(
        28.064180521211, abs=1e-6)
    assert 10 * math.log10(mm_snr_linear(cfg, 90.0)) == pytest.approx(
        7.687591610949568, abs=1e-6)
    assert 10 * math.log10(mm_snr_linear(cfg, 70.0)) == pytest.approx(
        10.961925693701602, abs=1e-6)
    assert 10 * math.log10(mm_snr_linear(cfg, 120.0)) == pytest.approx(
        3.9394295127005705, abs=1e-6)


def test_band_snr_db_composition():
    # power - pathloss - (density + 10 log10 B), checked piecewise
    got = band_snr_db(43.0, 850e6, 28e9, 70.0, 3.0)
    loss = friis_pathloss_db(28e9, 70.0, 3.0)
    noise = -174.0 + 10.0 * math.log10(850e6)
    assert got == pytest.approx(43.0 - loss - noise, abs=1e-12)


def test_budget_constants_frozen():
    consts = budget_constants(ExperimentConfig())
    assert consts["sub6_total_power_dbm"] == pytest.approx(37.78151250383644, abs=1e-9)
    assert consts["sub6_noise_power_dbm"] == pytest.approx(-92.23908740944319, abs=1e-9)
    assert consts["mm_noise_power_dbm"] == pytest.approx(-84.70581074285707, abs=1e-9)
    assert consts["sub6_reference_loss_db_1m"] == pytest.approx(43.32914410888889, abs=1e-9)
    assert consts["mm_reference_loss_db_1m"] == pytest.approx(61.39094384872776, abs=1e-9)
    assert consts["reference_distance_m"] == 90.0


def test_round_trip_through_dict():
    cfg = ExperimentConfig()
    again = config_from_dict(config_to_dict(cfg))
    assert config_to_dict(again) == config_to_dict(cfg)
    assert again.system == cfg.system
    assert again.channel == cfg.channel


def test_config_from_dict_errors():
    with pytest.raises(ValueError, match=r"system\.flux: unknown field"):
        config_from_dict({"system": {"flux": 1}})
    with pytest.raises(ValueError, match=r"unknown config block\(s\): \['optics'\]"):
        config_from_dict({"optics": {}})
    # block errors carry the block name prefix
    with pytest.raises(ValueError, match=r"system: system\.mm_n_rx must be >= 1"):
        config_from_dict({"system": {"mm_n_rx": 0}})
    with pytest.raises(ValueError, match="run: run.trials"):
        config_from_dict({"run": {"trials": 0}})


def test_config_from_dict_lists_become_tuples():
    cfg = config_from_dict({"channel": {"separation_sweep_deg": [5.0, 8.0]}})
    assert cfg.channel.separation_sweep_deg == (5.0, 8.0)


def test_apply_overrides_parsing():
    cfg = ExperimentConfig()
    out = apply_overrides(cfg, ["run.trials=7",
                                "channel.distance_m=70",
                                "channel.mode=realistic",
                                "estimation.snapshot_sweep=[5, 512]"])
    assert out.run.trials == 7
    assert out.channel.distance_m == 70
    assert out.channel.mode == "realistic"
    assert out.estimation.snapshot_sweep == (5, 512)
    # quoted JSON strings and bare strings land the same way
    assert apply_overrides(cfg, ['estimation.pas="uniform"']).estimation.pas == "uniform"
    # the original config is untouched
    assert cfg.run.trials == 100


def test_apply_overrides_errors():
    cfg = ExperimentConfig()
    with pytest.raises(ValueError, match="is not of the form path=value"):
        apply_overrides(cfg, ["run.trials"])
    with pytest.raises(ValueError, match="must be block.field"):
        apply_overrides(cfg, ["trials=5"])
    with pytest.raises(ValueError, match="must be block.field"):
        apply_overrides(cfg, ["run.trials.extra=5"])
    with pytest.raises(ValueError, match=r"run\.fluxx: unknown field"):
        apply_overrides(cfg, ["run.fluxx=1"])
    with pytest.raises(ValueError, match="estimation.j_rho must be in"):
        apply_overrides(cfg, ["estimation.j_rho=0"])


def test_load_config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"system": {"mm_n_rx": 16, "mm_rf_rx": 4},
                                "run": {"trials": 3}}), encoding="utf-8")
    cfg = load_config(path)
    assert cfg.system.mm_n_rx == 16
    assert cfg.run.trials == 3
    # untouched blocks keep their defaults
    assert cfg.estimation == EstimationConfig()


def test_block_validation_direct():
    with pytest.raises(ValueError, match="cp_fraction must be in"):
        SystemConfig(cp_fraction=0.0)
    with pytest.raises(ValueError, match="num_streams cannot exceed"):
        SystemConfig(num_streams=10)
    with pytest.raises(ValueError, match="distance values must be > 0"):
        SweepConfig(distance_m=0.0)
    with pytest.raises(ValueError, match="separation_sweep_deg must be >= 0"):
        SweepConfig(separation_sweep_deg=(5.0, -1.0))
    with pytest.raises(ValueError, match="stat_blocks must be >= 1"):
        RunConfig(stat_blocks=0)
    with pytest.raises(ValueError, match="fig8_antennas entries must be >= 4"):
        RunConfig(fig8_antennas=(16, 2))
    with pytest.raises(ValueError, match="snapshot_sweep entries must be >= 1"):
        EstimationConfig(snapshot_sweep=(5, 0))
