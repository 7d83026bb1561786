"""Seeded Monte-Carlo experiment runner.

Each experiment sweeps one variable, runs independently seeded trials per
sweep point, and emits mean/stderr rows. Per-trial seeds are derived by
hashing (master seed, experiment, sweep point, trial index), so trials are
order-independent, thread-safe, and bit-reproducible. Physical receive SNRs
come from the link budget in config.py; channels are generated with unit
average gain and scaled by sqrt(SNR) against unit-variance noise.
"""

import concurrent.futures
import hashlib
import json
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .arrays import UlaGeometry
from .channel import (build_delay_taps, delay_to_freq, freq_response_at,
                      gen_cluster_sets, raised_cosine_pulse, redraw_gains)
from .compressed import (adaptive_logit_scale, build_dictionary,
                         collect_snapshots, dcomp, dictionary_for_grid,
                         logit_weight, lw_dcomp, omni_precoder_pair,
                         prob_proxy, random_phase_matrix)
from .config import (SPEED_OF_LIGHT, band_snr_db, config_to_dict,
                     friis_pathloss_db, mm_snr_linear, sub6_snr_linear)
from .covariance import CovarianceMatrix, Side, synthesize_multicluster, theoretical_covariance
from .metrics import (Perturbation, RateConfig, SinglePathModel,
                      effective_rate, efficiency, gaussian_perturbation,
                      monte_carlo_snr, snr_loss_bounds)
from .precoding import PhaseCodebook, design_hybrid
from .translation import translate

EXPERIMENTS = (
    "fig4_cluster_count",
    "fig5_eta_separation",
    "fig6_eta_distance",
    "fig7_rate_distance",
    "fig7b_rate_snapshots",
    "fig8_snr_bound",
)

CSV_HEADER = "experiment,sweep_name,sweep_value,metric,mean,stderr,trials,seed"

_ROLLOFF = 1.0


@dataclass(frozen=True)
class ResultRow:
    """One aggregated metric at one sweep point."""

    experiment: str
    sweep_name: str
    sweep_value: float
    metric: str
    mean: float
    stderr: float
    trials: int
    seed: int

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.stderr < 0:
            raise ValueError("stderr must be >= 0")


def trial_seed(master_seed, experiment, sweep_name, sweep_value, trial):
    """Stable 64-bit seed for one trial, independent of execution order."""
    text = f"{master_seed}|{experiment}|{sweep_name}={sweep_value!r}|{trial}"
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _thread_count():
    raw = os.environ.get("OOBCOV_THREADS", "1")
    try:
        return max(int(raw), 1)
    except ValueError as exc:
        raise ValueError("OOBCOV_THREADS must be an integer") from exc


def _map_trials(fn, count, threads):
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, range(count)))
    return [fn(t) for t in range(count)]


def _geometries(sys):
    return (UlaGeometry(sys.sub6_n_rx, sys.spacing),
            UlaGeometry(sys.sub6_n_tx, sys.spacing),
            UlaGeometry(sys.mm_n_rx, sys.spacing),
            UlaGeometry(sys.mm_n_tx, sys.spacing))


def _two_frame_noise(rng, shape):
    # two OFDM frames of CN(0, I) antenna noise, summed
    draw = rng.standard_normal(shape + (2,)) + 1j * rng.standard_normal(shape + (2,))
    return (draw[..., 0] + draw[..., 1]) / math.sqrt(2.0)


def _sub6_cov_pair(cfg, sub6_set, snr, rng, want_tx):
    """Empirical sub-6 covariances from two-frame omni sounding.

    Receive side: y_t[k] = sqrt(SNR) H_t[k] (f1 + f2) + n1 + n2 on the full
    digital array, with the sample covariance averaged over every subcarrier
    of each snapshot. Transmit side mirrors the roles on H^H. Sample
    covariances are rescaled by N_other/(4 SNR) so the expectation matches
    the unit-gain spatial covariance plus an identity noise floor (absorbed
    later by the fitted noise term).
    """
    sys = cfg.system
    rx, tx, _, _ = _geometries(sys)
    pulse = raised_cosine_pulse(_ROLLOFF, sys.sub6_sample_interval)
    k_count = sys.sub6_subcarriers
    t_count = cfg.estimation.snapshots
    amp = math.sqrt(snr)
    f_sum = sum(omni_precoder_pair(sys.sub6_n_tx))
    w_sum = sum(omni_precoder_pair(sys.sub6_n_rx))
    acc_rx = np.zeros((sys.sub6_n_rx, sys.sub6_n_rx), dtype=complex)
    acc_tx = np.zeros((sys.sub6_n_tx, sys.sub6_n_tx), dtype=complex)
    for _ in range(t_count):
        sets = redraw_gains(sub6_set, rng)
        taps = build_delay_taps(sets, rx, tx, sys.sub6_num_taps,
                                sys.sub6_sample_interval, pulse)
        h = delay_to_freq(taps, k_count).subcarriers
        y = amp * (h @ f_sum) + _two_frame_noise(rng, (k_count, sys.sub6_n_rx))
        acc_rx += y.T @ y.conj()
        if want_tx:
            z = amp * (h.conj().transpose(0, 2, 1) @ w_sum)
            z += _two_frame_noise(rng, (k_count, sys.sub6_n_tx))
            acc_tx += z.T @ z.conj()
    r_rx = CovarianceMatrix(
        mat=acc_rx * (sys.sub6_n_tx / (4.0 * snr * t_count * k_count)), side=Side.RX)
    if not want_tx:
        return r_rx, None
    r_tx = CovarianceMatrix(
        mat=acc_tx * (sys.sub6_n_rx / (4.0 * snr * t_count * k_count)), side=Side.TX)
    return r_rx, r_tx


def _mm_channels(cfg, mm_set, snr, rng, count):
    """Per-snapshot pilot-subcarrier channels, scaled to the receive SNR."""
    sys = cfg.system
    _, _, rx, tx = _geometries(sys)
    pulse = raised_cosine_pulse(_ROLLOFF, sys.mm_sample_interval)
    pilot = cfg.pilot_index(sys.mm_subcarriers)
    amp = math.sqrt(snr)
    out = []
    for _ in range(count):
        sets = redraw_gains(mm_set, rng)
        out.append(amp * freq_response_at(sets, rx, tx, sys.mm_num_taps,
                                          sys.mm_sample_interval, pulse,
                                          sys.mm_subcarriers, pilot))
    return out


def _true_mm_cov(cfg, geom, side):
    """Model-implied mmWave covariance of the congruent channel."""
    chan = cfg.channel
    angles = np.deg2rad(np.asarray(chan.mean_aoas_deg, dtype=float))
    if side is Side.TX and len(chan.mean_aods_deg):
        angles = np.deg2rad(np.asarray(chan.mean_aods_deg, dtype=float))
    if len(chan.cluster_powers):
        powers = np.asarray(chan.cluster_powers, dtype=float)
        powers = powers / powers.sum()
    else:
        powers = np.full(len(angles), 1.0 / len(angles))
    spread = math.radians(chan.angle_spread_deg)
    pas = cfg.estimation.pas
    comps = [(float(p), theoretical_covariance(pas, float(a), spread, geom, side=side))
             for p, a in zip(powers, angles)]
    return synthesize_multicluster(comps)


def _scaled_cov(cov, scale):
    return CovarianceMatrix(mat=cov.mat * scale, side=cov.side)


def _hybrid_or_fallback(r_est, n_ant, n_rf, n_streams, codebook):
    # no detected support leaves a zero estimate; design uninformed beams then
    if float(np.trace(r_est.mat).real) <= 0.0:
        r_est = CovarianceMatrix(mat=np.eye(n_ant, dtype=complex), side=r_est.side)
    return design_hybrid(r_est, n_rf, n_streams, codebook=codebook, num_subcarriers=1)


def _translation_trial(cfg, separation_deg, rng):
    """One congruent two-cluster trial of the translation pipeline."""
    sys, est = cfg.system, cfg.estimation
    sub6_rx, _, mm_rx, _ = _geometries(sys)
    base = cfg.channel.base_angle_deg
    chan_cfg = replace(cfg.channel, mean_aoas_deg=(base, base + float(separation_deg)))
    sub6_set, _ = gen_cluster_sets(chan_cfg, rng)
    snr6 = sub6_snr_linear(cfg, cfg.channel.distance_m)
    r6_rx, _ = _sub6_cov_pair(cfg, sub6_set, snr6, rng, want_tx=False)
    result = translate(r6_rx, sub6_rx, mm_rx, est.snapshots, pas=est.pas,
                       as_threshold=math.radians(est.as_threshold_deg),
                       kappa=est.kappa)
    # fallback replacement can leave coincident estimates; count distinct ones
    distinct = {(round(e.mean_angle, 12), round(e.spread, 12)) for e in result.estimates}
    sub_cfg = replace(cfg, channel=chan_cfg)
    r_true = _true_mm_cov(sub_cfg, mm_rx, Side.RX)
    eta = efficiency(r_true, result.mmwave_cov, sys.num_streams)
    return {"est_cluster_count": float(len(distinct)), "eta_translate": eta}


def _compressed_trial(cfg, distance_m, rng):
    """One congruent trial comparing weighted and unweighted greedy recovery."""
    sys, est = cfg.system, cfg.estimation
    sub6_rx, _, mm_rx, _ = _geometries(sys)
    sub6_set, mm_set = gen_cluster_sets(cfg.channel, rng)
    snr6 = sub6_snr_linear(cfg, float(distance_m))
    snrm = mm_snr_linear(cfg, float(distance_m))
    r6_rx, _ = _sub6_cov_pair(cfg, sub6_set, snr6, rng, want_tx=False)

    dict_rx = build_dictionary(mm_rx, est.oversampling)
    sub6_dict = dictionary_for_grid(sub6_rx, dict_rx.grid_angles)
    channels = _mm_channels(cfg, mm_set, snrm, rng, est.snapshots)
    combiners = [random_phase_matrix(sys.mm_n_rx, sys.mm_rf_rx, rng)
                 for _ in range(est.snapshots)]
    snaps = collect_snapshots(channels, combiners, 1.0, rng)

    rho = prob_proxy(r6_rx, sub6_dict, est.j_rho)
    j_w = adaptive_logit_scale(snaps, dict_rx, est.j_w_factor)
    weights = logit_weight(rho, j_w)
    lw = lw_dcomp(snaps, dict_rx, weights=weights, n_tx=sys.mm_n_tx)
    dc = dcomp(snaps, dict_rx, n_tx=sys.mm_n_tx)

    r_true = _true_mm_cov(cfg, mm_rx, Side.RX)
    scale = 1.0 / snrm
    eta_lw = efficiency(r_true, _scaled_cov(lw.assembled, scale), sys.num_streams)
    eta_dc = efficiency(r_true, _scaled_cov(dc.assembled, scale), sys.num_streams)
    return {"eta_lwdcomp": eta_lw, "eta_dcomp": eta_dc, "eta_diff": eta_lw - eta_dc}


def _rate_trial(cfg, distance_m, rng, mm_snapshots, include_translation):
    """One trial of the end-to-end rate comparison at one distance."""
    sys, est = cfg.system, cfg.estimation
    sub6_rx, sub6_tx, mm_rx, mm_tx = _geometries(sys)
    codebook = PhaseCodebook(sys.phase_bits)
    sub6_set, mm_set = gen_cluster_sets(cfg.channel, rng)
    snr6 = sub6_snr_linear(cfg, float(distance_m))
    snrm = mm_snr_linear(cfg, float(distance_m))
    r6_rx, r6_tx = _sub6_cov_pair(cfg, sub6_set, snr6, rng, want_tx=True)

    dict_rx = build_dictionary(mm_rx, est.oversampling)
    dict_tx = build_dictionary(mm_tx, est.oversampling)
    sub6_dict_rx = dictionary_for_grid(sub6_rx, dict_rx.grid_angles)
    sub6_dict_tx = dictionary_for_grid(sub6_tx, dict_tx.grid_angles)

    channels_rx = _mm_channels(cfg, mm_set, snrm, rng, mm_snapshots)
    combiners = [random_phase_matrix(sys.mm_n_rx, sys.mm_rf_rx, rng)
                 for _ in range(mm_snapshots)]
    snaps_rx = collect_snapshots(channels_rx, combiners, 1.0, rng)

    channels_tx = _mm_channels(cfg, mm_set, snrm, rng, mm_snapshots)
    precoders = [random_phase_matrix(sys.mm_n_tx, sys.mm_rf_tx, rng)
                 for _ in range(mm_snapshots)]
    snaps_tx = collect_snapshots([h.conj().T for h in channels_tx],
                                 precoders, 1.0, rng)

    rho_rx = prob_proxy(r6_rx, sub6_dict_rx, est.j_rho)
    rho_tx = prob_proxy(r6_tx, sub6_dict_tx, est.j_rho)
    w_rx = logit_weight(rho_rx, adaptive_logit_scale(snaps_rx, dict_rx, est.j_w_factor))
    w_tx = logit_weight(rho_tx, adaptive_logit_scale(snaps_tx, dict_tx, est.j_w_factor))

    lw_rx = lw_dcomp(snaps_rx, dict_rx, weights=w_rx, n_tx=sys.mm_n_tx)
    dc_rx = dcomp(snaps_rx, dict_rx, n_tx=sys.mm_n_tx)
    lw_tx = lw_dcomp(snaps_tx, dict_tx, weights=w_tx, n_tx=sys.mm_n_rx, side=Side.TX)
    dc_tx = dcomp(snaps_tx, dict_tx, n_tx=sys.mm_n_rx, side=Side.TX)

    eval_set = redraw_gains(mm_set, rng)
    pulse = raised_cosine_pulse(_ROLLOFF, sys.mm_sample_interval)
    taps = build_delay_taps(eval_set, mm_rx, mm_tx, sys.mm_num_taps,
                            sys.mm_sample_interval, pulse)
    fc = delay_to_freq(taps, sys.mm_subcarriers)

    def rate_of(r_tx_est, r_rx_est, train_blocks):
        f = _hybrid_or_fallback(r_tx_est, sys.mm_n_tx, sys.mm_rf_tx,
                                sys.num_streams, codebook)
        w = _hybrid_or_fallback(r_rx_est, sys.mm_n_rx, sys.mm_rf_rx,
                                sys.num_streams, codebook)
        rc = RateConfig(total_power=float(sys.mm_subcarriers) * snrm,
                        noise_var=1.0, num_subcarriers=sys.mm_subcarriers,
                        num_streams=sys.num_streams,
                        stat_blocks=cfg.run.stat_blocks,
                        train_blocks=train_blocks)
        return effective_rate(fc, f, w, rc)

    out = {}
    if include_translation:
        kwargs = dict(pas=est.pas, as_threshold=math.radians(est.as_threshold_deg),
                      kappa=est.kappa)
        tr_rx = translate(r6_rx, sub6_rx, mm_rx, est.snapshots, **kwargs).mmwave_cov
        tr_tx = translate(r6_tx, sub6_tx, mm_tx, est.snapshots, **kwargs).mmwave_cov
        out["rate_translate"] = rate_of(tr_tx, tr_rx, 0)
    # two frames per snapshot, on each of the transmit and receive sides
    train = 4 * mm_snapshots
    out["rate_lwdcomp"] = rate_of(lw_tx.assembled, lw_rx.assembled, train)
    out["rate_dcomp"] = rate_of(dc_tx.assembled, dc_rx.assembled, train)
    return out


def _bound_trial(cfg, snr_db, rng):
    """One perturbation draw per array size: loss ratios against the bound."""
    snr = 10.0 ** (float(snr_db) / 10.0)
    out = {}
    for n_ant in cfg.run.fig8_antennas:
        n = int(n_ant)
        model = SinglePathModel(n_rx=n, n_tx=n, sigma_alpha_sq=1.0,
                                theta_rx=0.35, theta_tx=-0.2,
                                spacing=cfg.system.spacing)
        r_rx, r_tx = model.covariances()
        # one entrywise draw perturbs both sides; the arrays are square here
        delta = gaussian_perturbation(n, snr, rng)
        pert = Perturbation(delta_rx=delta, delta_tx=delta)
        upper = snr_loss_bounds(pert, model.sigma_alpha_sq, n, n)[1]
        hat = (r_rx.mat + delta, r_tx.mat + delta)
        g_dig = monte_carlo_snr((r_rx, r_tx), hat, model, "digital",
                                cfg.run.inner_trials, rng,
                                codebook=PhaseCodebook(cfg.system.phase_bits))
        g_hyb = monte_carlo_snr((r_rx, r_tx), hat, model, "hybrid",
                                cfg.run.inner_trials, rng,
                                codebook=PhaseCodebook(cfg.system.phase_bits))
        out[f"gamma_digital_n{n}"] = g_dig
        out[f"gamma_hybrid_n{n}"] = g_hyb
        out[f"gamma_upper_n{n}"] = upper
        out[f"bound_holds_digital_n{n}"] = float(g_dig <= upper)
    return out


@dataclass(frozen=True)
class _Plan:
    sweep_name: str
    values: tuple
    fn: object
    keep: tuple | None = None


def _plan(cfg, experiment):
    chan, est, run = cfg.channel, cfg.estimation, cfg.run
    if experiment == "fig4_cluster_count":
        return _Plan("separation_deg", tuple(float(v) for v in chan.separation_sweep_deg),
                     _translation_trial, keep=("est_cluster_count",))
    if experiment == "fig5_eta_separation":
        return _Plan("separation_deg", tuple(float(v) for v in chan.separation_sweep_deg),
                     _translation_trial, keep=("eta_translate",))
    if experiment == "fig6_eta_distance":
        return _Plan("distance_m", tuple(float(v) for v in chan.distance_sweep_m),
                     _compressed_trial)
    if experiment == "fig7_rate_distance":
        fn = lambda c, v, rng: _rate_trial(c, v, rng, c.estimation.snapshots, True)
        return _Plan("distance_m", tuple(float(v) for v in chan.distance_sweep_m), fn)
    if experiment == "fig7b_rate_snapshots":
        fn = lambda c, v, rng: _rate_trial(c, c.channel.distance_m, rng, int(v), False)
        return _Plan("snapshots", tuple(int(v) for v in est.snapshot_sweep), fn)
    if experiment == "fig8_snr_bound":
        return _Plan("snr_db", tuple(float(v) for v in run.snr_sweep_db), _bound_trial)
    raise ValueError(f"unknown experiment '{experiment}'")


def run_experiment(cfg, experiment):
    """Run one named sweep, yielding aggregated ResultRows per sweep point."""
    experiment = str(experiment)
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment '{experiment}'; "
                         f"choose one of {', '.join(EXPERIMENTS)}")
    plan = _plan(cfg, experiment)
    threads = _thread_count()
    trials = cfg.run.trials
    for value in plan.values:
        def one(t, _value=value):
            rng = np.random.default_rng(
                trial_seed(cfg.run.master_seed, experiment, plan.sweep_name, _value, t))
            return plan.fn(cfg, _value, rng)
        results = _map_trials(one, trials, threads)
        names = sorted(results[0]) if plan.keep is None else list(plan.keep)
        for metric in names:
            vals = np.array([res[metric] for res in results], dtype=float)
            mean = float(vals.mean())
            stderr = float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
            yield ResultRow(experiment=experiment, sweep_name=plan.sweep_name,
                            sweep_value=value, metric=metric, mean=mean,
                            stderr=stderr, trials=trials, seed=cfg.run.master_seed)


def sweep_j_rho(cfg, candidates):
    """Pick the prior-probability ceiling with the best mean efficiency.

    Candidates are evaluated on paired trials (identical channel and noise
    draws) of the weighted estimator at the configured distance. Ties go to
    the smallest candidate.
    """
    cands = [float(c) for c in candidates]
    if not cands:
        raise ValueError("need at least one candidate")
    threads = _thread_count()
    distance = cfg.channel.distance_m
    scores = {}
    for cand in cands:
        cfg_c = replace(cfg, estimation=replace(cfg.estimation, j_rho=cand))
        def one(t, _cfg=cfg_c):
            # candidate deliberately absent from the seed: draws stay paired
            rng = np.random.default_rng(
                trial_seed(cfg.run.master_seed, "sweep_jrho", "distance_m", distance, t))
            return _compressed_trial(_cfg, distance, rng)["eta_lwdcomp"]
        vals = _map_trials(one, cfg.run.trials, threads)
        scores[cand] = float(np.mean(vals))
    best = None
    for cand in sorted(cands):
        if best is None or scores[cand] > scores[best]:
            best = cand
    return best


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".10g")


def budget_constants(cfg):
    """Link-budget constants echoed next to every result file."""
    sys = cfg.system
    d = cfg.channel.distance_m
    return {
        "speed_of_light_m_s": SPEED_OF_LIGHT,
        "noise_density_dbm_hz": sys.noise_density_dbm_hz,
        "pathloss_exponent": sys.pathloss_exponent,
        "sub6_reference_loss_db_1m": friis_pathloss_db(sys.sub6_carrier_hz, 1.0,
                                                       sys.pathloss_exponent),
        "mm_reference_loss_db_1m": friis_pathloss_db(sys.mm_carrier_hz, 1.0,
                                                     sys.pathloss_exponent),
        "sub6_total_power_dbm": sys.sub6_total_power_dbm,
        "mm_power_dbm": sys.mm_power_dbm,
        "sub6_noise_power_dbm": sys.noise_density_dbm_hz
        + 10.0 * math.log10(sys.sub6_bandwidth_hz),
        "mm_noise_power_dbm": sys.noise_density_dbm_hz
        + 10.0 * math.log10(sys.mm_bandwidth_hz),
        "reference_distance_m": d,
        "sub6_snr_db_at_reference": band_snr_db(
            sys.sub6_total_power_dbm, sys.sub6_bandwidth_hz, sys.sub6_carrier_hz,
            d, sys.pathloss_exponent, sys.noise_density_dbm_hz),
        "mm_snr_db_at_reference": band_snr_db(
            sys.mm_power_dbm, sys.mm_bandwidth_hz, sys.mm_carrier_hz,
            d, sys.pathloss_exponent, sys.noise_density_dbm_hz),
    }


def write_rows(rows, path, cfg):
    """Sorted CSV plus a JSON sidecar with the resolved config and budget."""
    rows = sorted(rows, key=lambda r: (r.experiment, r.sweep_name,
                                       float(r.sweep_value), r.metric))
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([r.experiment, r.sweep_name, _fmt(r.sweep_value),
                               r.metric, _fmt(r.mean), _fmt(r.stderr),
                               str(r.trials), str(r.seed)]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    meta = {"config": config_to_dict(cfg), "link_budget": budget_constants(cfg)}
    with open(path + ".json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
