"""Wideband clustered MIMO channel model.

Clusters of rays with per-ray gains, delays and angle shifts are turned into
delay-tap matrices through a pulse-shaping filter, then into per-subcarrier
frequency responses. Two generator modes cover matched (congruent) dual-band
channels and mismatched (realistic) ones.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .arrays import steering_matrix


def raised_cosine(t, rolloff, symbol_interval):
    """Raised-cosine impulse response p(t).

    Parameters
    ----------
    t : float or array_like
        Time in seconds.
    rolloff : float
        Roll-off factor in [0, 1].
    symbol_interval : float
        Symbol interval T in seconds.

    Returns
    -------
    float or ndarray
        p(t) with p(0) = 1 and zeros at nonzero integer multiples of T.
        The removable singularity at |t| = T/(2*rolloff) is evaluated by
        its limit, (pi/4) * sinc(1/(2*rolloff)).
    """
    if not 0.0 <= rolloff <= 1.0:
        raise ValueError("rolloff must be in [0, 1]")
    if symbol_interval <= 0:
        raise ValueError("symbol_interval must be > 0")
    t = np.asarray(t, dtype=float)
    x = t / symbol_interval
    if rolloff == 0.0:
        out = np.sinc(x)
        return out if out.ndim else float(out)
    den = 1.0 - (2.0 * rolloff * x) ** 2
    singular = np.isclose(den, 0.0, atol=1e-12)
    safe_den = np.where(singular, 1.0, den)
    out = np.sinc(x) * np.cos(np.pi * rolloff * x) / safe_den
    # L'Hopital at 2*rolloff*|x| = 1
    limit = (np.pi / 4.0) * np.sinc(1.0 / (2.0 * rolloff))
    out = np.where(singular, limit, out)
    return out if out.ndim else float(out)


def raised_cosine_pulse(rolloff, symbol_interval):
    """Bind filter parameters, returning a pulse handle t -> p(t)."""
    return lambda t: raised_cosine(t, rolloff, symbol_interval)


def _wrap_angle(a):
    """Wrap to [-pi, pi)."""
    return np.mod(np.asarray(a, dtype=float) + np.pi, 2.0 * np.pi) - np.pi


@dataclass(frozen=True)
class Ray:
    """Single ray inside a cluster: complex gain plus offsets from the cluster means."""

    gain: complex
    rel_delay: float = 0.0
    aoa_shift: float = 0.0
    aod_shift: float = 0.0

    def __post_init__(self):
        if self.rel_delay < 0:
            raise ValueError("rel_delay must be >= 0")


@dataclass(frozen=True)
class Cluster:
    """Group of rays sharing mean delay, mean angles and a power fraction."""

    mean_delay: float
    mean_aoa: float
    mean_aod: float
    power: float
    rays: tuple

    def __post_init__(self):
        if self.power < 0:
            raise ValueError("cluster power must be >= 0")
        if len(self.rays) == 0:
            raise ValueError("cluster needs at least one ray")
        for a in (self.mean_aoa, self.mean_aod):
            if not (-np.pi <= a < np.pi):
                raise ValueError("mean angles must lie in [-pi, pi)")
        object.__setattr__(self, "rays", tuple(self.rays))


@dataclass(frozen=True)
class ClusterSet:
    """All clusters of one band's channel."""

    clusters: tuple
    band_tag: str = "sub6"

    def __post_init__(self):
        if self.band_tag not in ("sub6", "mmwave"):
            raise ValueError("band_tag must be 'sub6' or 'mmwave'")
        if len(self.clusters) == 0:
            raise ValueError("need at least one cluster")
        object.__setattr__(self, "clusters", tuple(self.clusters))

    @property
    def total_power(self):
        return float(sum(c.power for c in self.clusters))


@dataclass(frozen=True)
class ChannelRealization:
    """Delay-tap matrices H[d], d = 0..D-1, each N_RX x N_TX."""

    delay_taps: np.ndarray
    sample_interval: float

    def __post_init__(self):
        taps = np.asarray(self.delay_taps, dtype=complex)
        if taps.ndim != 3 or taps.shape[0] < 1:
            raise ValueError("delay_taps must be a (D, N_RX, N_TX) array with D >= 1")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be > 0")
        object.__setattr__(self, "delay_taps", taps)

    @property
    def num_taps(self):
        return self.delay_taps.shape[0]


@dataclass(frozen=True)
class FreqChannel:
    """Per-subcarrier channel matrices H[k], k = 0..K-1."""

    subcarriers: np.ndarray

    def __post_init__(self):
        sub = np.asarray(self.subcarriers, dtype=complex)
        if sub.ndim != 3 or sub.shape[0] < 1:
            raise ValueError("subcarriers must be a (K, N_RX, N_TX) array with K >= 1")
        object.__setattr__(self, "subcarriers", sub)

    @property
    def num_subcarriers(self):
        return self.subcarriers.shape[0]


@dataclass(frozen=True)
class ChannelConfig:
    """Knobs for gen_cluster_sets. Angles in degrees, delays in seconds.

    congruent mode: both bands share the listed mean angles and delays
    (matched-parameter experiments). realistic mode: the mmWave clusters are
    a subset of the sub-6 clusters with band-specific spreads and powers.
    """

    mode: str = "congruent"
    # congruent-mode knobs
    mean_aoas_deg: tuple = (5.0, 45.0)
    mean_aods_deg: tuple = ()            # empty -> reuse mean_aoas_deg
    cluster_powers: tuple = ()           # empty -> equal powers
    angle_spread_deg: float = 3.0
    num_rays: int = 100
    delay_jitter_s: float = 10e-9        # clusters after the first: delay ~ U[0, jitter)
    # realistic-mode knobs
    sub6_num_clusters: int = 10
    mm_num_clusters: int = 5
    realistic_num_rays: int = 20
    sub6_angle_spread_deg: float = 4.0
    mm_angle_spread_deg: float = 2.0
    sub6_delay_spread_s: float = 3.8e-9
    mm_delay_spread_s: float = 2.7e-9
    sub6_power_decay: float = 0.2
    mm_power_decay: float = 0.1
    mm_angle_perturb_deg: float = 0.0

    def __post_init__(self):
        if self.mode not in ("congruent", "realistic"):
            raise ValueError("mode must be 'congruent' or 'realistic'")
        if self.mode == "congruent" and len(self.mean_aoas_deg) == 0:
            raise ValueError("need at least one cluster angle")
        if self.angle_spread_deg < 0 or self.sub6_angle_spread_deg < 0 or self.mm_angle_spread_deg < 0:
            raise ValueError("angle spreads must be >= 0")
        if self.num_rays < 1 or self.realistic_num_rays < 1:
            raise ValueError("ray counts must be >= 1")
        if self.sub6_num_clusters < 1 or self.mm_num_clusters < 1:
            raise ValueError("cluster counts must be >= 1")
        if self.mm_num_clusters > self.sub6_num_clusters:
            raise ValueError("realistic mode subsamples sub-6 clusters")


def _draw_gains(rng, count, variance):
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(count) + 1j * rng.standard_normal(count))


def _make_rays(rng, count, power, spread_rad, delay_std=0.0):
    gains = _draw_gains(rng, count, power / count)
    if spread_rad > 0:
        aoa = _wrap_angle(rng.normal(0.0, spread_rad, size=count))
        aod = _wrap_angle(rng.normal(0.0, spread_rad, size=count))
    else:
        aoa = np.zeros(count)
        aod = np.zeros(count)
    if delay_std > 0:
        # folded normal keeps ray delays causal
        delays = np.abs(rng.normal(0.0, delay_std, size=count))
    else:
        delays = np.zeros(count)
    return tuple(
        Ray(gain=complex(g), rel_delay=float(d), aoa_shift=float(sa), aod_shift=float(so))
        for g, d, sa, so in zip(gains, delays, aoa, aod)
    )


def gen_cluster_sets(cfg, rng):
    """Draw one sub-6 and one mmWave cluster set from a shared geometry.

    cfg may be a ChannelConfig or anything exposing one as `.channel`.
    Deterministic given the generator state.
    """
    cfg = getattr(cfg, "channel", cfg)
    if cfg.mode == "congruent":
        return _gen_congruent(cfg, rng)
    return _gen_realistic(cfg, rng)


def _gen_congruent(cfg, rng):
    aoas = np.deg2rad(np.asarray(cfg.mean_aoas_deg, dtype=float))
    aods = np.deg2rad(np.asarray(cfg.mean_aods_deg, dtype=float)) if len(cfg.mean_aods_deg) else aoas
    if len(aods) != len(aoas):
        raise ValueError("mean_aods_deg must match mean_aoas_deg in length")
    n_cl = len(aoas)
    if len(cfg.cluster_powers):
        powers = np.asarray(cfg.cluster_powers, dtype=float)
        if len(powers) != n_cl or np.any(powers < 0) or powers.sum() <= 0:
            raise ValueError("bad cluster_powers")
        powers = powers / powers.sum()
    else:
        powers = np.full(n_cl, 1.0 / n_cl)
    delays = np.zeros(n_cl)
    if n_cl > 1 and cfg.delay_jitter_s > 0:
        delays[1:] = rng.uniform(0.0, cfg.delay_jitter_s, size=n_cl - 1)
    spread = math.radians(cfg.angle_spread_deg)

    # both bands share means/delays and the ray offsets; gains are independent
    shift_sets = []
    for _ in range(n_cl):
        if spread > 0:
            sa = _wrap_angle(rng.normal(0.0, spread, size=cfg.num_rays))
            so = _wrap_angle(rng.normal(0.0, spread, size=cfg.num_rays))
        else:
            sa = np.zeros(cfg.num_rays)
            so = np.zeros(cfg.num_rays)
        shift_sets.append((sa, so))

    def build(band):
        clusters = []
        for c in range(n_cl):
            sa, so = shift_sets[c]
            gains = _draw_gains(rng, cfg.num_rays, powers[c] / cfg.num_rays)
            rays = tuple(
                Ray(gain=complex(g), rel_delay=0.0, aoa_shift=float(a), aod_shift=float(o))
                for g, a, o in zip(gains, sa, so)
            )
            clusters.append(Cluster(
                mean_delay=float(delays[c]),
                mean_aoa=float(_wrap_angle(aoas[c])),
                mean_aod=float(_wrap_angle(aods[c])),
                power=float(powers[c]),
                rays=rays,
            ))
        return ClusterSet(clusters=tuple(clusters), band_tag=band)

    return build("sub6"), build("mmwave")


def _gen_realistic(cfg, rng):
    angle_lim = np.pi / 3.0
    c_sub = cfg.sub6_num_clusters
    aoas = rng.uniform(-angle_lim, angle_lim, size=c_sub)
    aods = rng.uniform(-angle_lim, angle_lim, size=c_sub)
    delays = rng.exponential(scale=cfg.sub6_delay_spread_s, size=c_sub)
    # power tied to delay so the decay parameter matters after normalization
    w = np.exp(-(delays / cfg.sub6_delay_spread_s) / cfg.sub6_power_decay)
    powers = w / w.sum()

    sub_clusters = []
    for c in range(c_sub):
        rays = _make_rays(
            rng, cfg.realistic_num_rays, powers[c],
            math.radians(cfg.sub6_angle_spread_deg),
            delay_std=cfg.sub6_delay_spread_s / 10.0,
        )
        sub_clusters.append(Cluster(
            mean_delay=float(delays[c]),
            mean_aoa=float(aoas[c]),
            mean_aod=float(aods[c]),
            power=float(powers[c]),
            rays=rays,
        ))

    keep = np.sort(rng.choice(c_sub, size=cfg.mm_num_clusters, replace=False))
    scale = cfg.mm_delay_spread_s / cfg.sub6_delay_spread_s
    mm_delays = delays[keep] * scale
    w = np.exp(-(mm_delays / cfg.mm_delay_spread_s) / cfg.mm_power_decay)
    mm_powers = w / w.sum()
    perturb = math.radians(cfg.mm_angle_perturb_deg)

    mm_clusters = []
    for i, c in enumerate(keep):
        aoa, aod = aoas[c], aods[c]
        if perturb > 0:
            aoa = float(np.clip(aoa + rng.normal(0.0, perturb), -angle_lim, angle_lim - 1e-12))
            aod = float(np.clip(aod + rng.normal(0.0, perturb), -angle_lim, angle_lim - 1e-12))
        rays = _make_rays(
            rng, cfg.realistic_num_rays, mm_powers[i],
            math.radians(cfg.mm_angle_spread_deg),
            delay_std=cfg.mm_delay_spread_s / 10.0,
        )
        mm_clusters.append(Cluster(
            mean_delay=float(mm_delays[i]),
            mean_aoa=float(aoa),
            mean_aod=float(aod),
            power=float(mm_powers[i]),
            rays=rays,
        ))

    return (ClusterSet(clusters=tuple(sub_clusters), band_tag="sub6"),
            ClusterSet(clusters=tuple(mm_clusters), band_tag="mmwave"))


def redraw_gains(cluster_set, rng):
    """New ClusterSet with ray gains resampled, geometry untouched.

    Per-ray variance is power/ray_count, so E sum |gain|^2 stays the cluster power.
    """
    clusters = []
    for cl in cluster_set.clusters:
        gains = _draw_gains(rng, len(cl.rays), cl.power / len(cl.rays))
        rays = tuple(replace(r, gain=complex(g)) for r, g in zip(cl.rays, gains))
        clusters.append(replace(cl, rays=rays))
    return replace(cluster_set, clusters=tuple(clusters))


def build_delay_taps(clusters, rx, tx, num_taps, sample_interval, pulse):
    """Delay-tap matrices for one cluster-set realization.

    H[d] = sqrt(N_RX*N_TX) * sum_{c,r} gain * p(d*Ts - delay) * a_RX(aoa) a_TX(aod)^H
    """
    if num_taps < 1:
        raise ValueError("num_taps must be >= 1")
    if sample_interval <= 0:
        raise ValueError("sample_interval must be > 0")
    gains, delays, aoas, aods = [], [], [], []
    for cl in clusters.clusters:
        for r in cl.rays:
            gains.append(r.gain)
            delays.append(cl.mean_delay + r.rel_delay)
            aoas.append(cl.mean_aoa + r.aoa_shift)
            aods.append(cl.mean_aod + r.aod_shift)
    gains = np.asarray(gains, dtype=complex)
    delays = np.asarray(delays, dtype=float)
    a_rx = steering_matrix(rx, aoas)
    a_tx = steering_matrix(tx, aods)
    d_grid = np.arange(num_taps)[:, None] * sample_interval
    p = pulse(d_grid - delays[None, :])          # (D, L)
    w = gains[None, :] * p                       # (D, L)
    weighted = a_rx[None, :, :] * w[:, None, :]  # (D, N_RX, L)
    taps = weighted @ a_tx.conj().T
    taps *= math.sqrt(rx.num_antennas * tx.num_antennas)
    return ChannelRealization(delay_taps=taps, sample_interval=sample_interval)


def delay_to_freq(ch, num_subcarriers):
    """Per-subcarrier response H[k] = sum_d H[d] exp(-j 2 pi k d / K)."""
    if num_subcarriers < ch.num_taps:
        raise ValueError("num_subcarriers must be >= number of taps")
    sub = np.fft.fft(ch.delay_taps, n=num_subcarriers, axis=0)
    return FreqChannel(subcarriers=sub)


def freq_response_at(clusters, rx, tx, num_taps, sample_interval, pulse,
                     num_subcarriers, subcarrier):
    """Single-subcarrier response without materializing every tap matrix.

    Swapping the DFT over taps with the sum over rays gives
    H[k] = sqrt(N_RX*N_TX) * sum_r gain_r c_r(k) a_RX a_TX^H with
    c_r(k) = sum_d p(d*Ts - delay_r) exp(-j 2 pi k d / K), identical to the
    matching row of delay_to_freq(build_delay_taps(...)) but far cheaper
    when only a pilot subcarrier is needed.
    """
    if not 0 <= subcarrier < num_subcarriers:
        raise ValueError("subcarrier index outside the band")
    if num_subcarriers < num_taps:
        raise ValueError("num_subcarriers must be >= num_taps")
    gains, delays, aoas, aods = [], [], [], []
    for cl in clusters.clusters:
        for r in cl.rays:
            gains.append(r.gain)
            delays.append(cl.mean_delay + r.rel_delay)
            aoas.append(cl.mean_aoa + r.aoa_shift)
            aods.append(cl.mean_aod + r.aod_shift)
    gains = np.asarray(gains, dtype=complex)
    delays = np.asarray(delays, dtype=float)
    d_grid = np.arange(num_taps) * sample_interval
    p = pulse(d_grid[:, None] - delays[None, :])                   # (D, L)
    twiddle = np.exp(-2j * np.pi * subcarrier * np.arange(num_taps) / num_subcarriers)
    coeffs = gains * (twiddle @ p)                                 # (L,)
    a_rx = steering_matrix(rx, aoas)
    a_tx = steering_matrix(tx, aods)
    h = (a_rx * coeffs[None, :]) @ a_tx.conj().T
    return h * math.sqrt(rx.num_antennas * tx.num_antennas)
