"""Compressed covariance estimation on hybrid arrays.

Covers the two-frame omni sounding that reduces the MIMO problem to SIMO,
the angular dictionary, the prior probabilities beamformed out of the sub-6
covariance, logit weighting, and the greedy weighted recovery loop (a
weighted variant of dynamic covariance OMP). With all weights zero the loop
is plain DCOMP.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .arrays import steering_matrix
from .covariance import CovarianceMatrix, Side


@dataclass(frozen=True)
class Dictionary:
    """Angular grid and the matching unit-norm response atoms (N x B)."""

    grid_angles: np.ndarray
    atoms: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid_angles, dtype=float)
        atoms = np.asarray(self.atoms, dtype=complex)
        if atoms.ndim != 2 or atoms.shape[1] != grid.size:
            raise ValueError("atoms must be N x B with B grid angles")
        if atoms.shape[1] < atoms.shape[0]:
            raise ValueError("dictionary must have B >= N")
        norms = np.linalg.norm(atoms, axis=0)
        if np.max(np.abs(norms - 1.0)) > 1e-9:
            raise ValueError("atoms must be unit-norm")
        object.__setattr__(self, "grid_angles", grid)
        object.__setattr__(self, "atoms", atoms)

    @property
    def size(self):
        return self.grid_angles.size


@dataclass(frozen=True)
class SnapshotSet:
    """Combined two-frame measurements y_t with their RF combiners.

    received: (T, M_RX) array. combiners: (T, N_RX, M_RX) array with
    entries of magnitude 1/sqrt(N_RX). noise_var is the pre-combining
    per-frame variance; the two-frame sum carries 2*noise_var.
    """

    received: np.ndarray
    combiners: np.ndarray
    noise_var: float

    def __post_init__(self):
        y = np.asarray(self.received, dtype=complex)
        w = np.asarray(self.combiners, dtype=complex)
        if y.ndim != 2 or w.ndim != 3 or w.shape[0] != y.shape[0] or w.shape[2] != y.shape[1]:
            raise ValueError("received must be (T, M) and combiners (T, N, M)")
        if self.noise_var < 0:
            raise ValueError("noise_var must be >= 0")
        n_rx = w.shape[1]
        if w.size and np.max(np.abs(np.abs(w) - 1.0 / math.sqrt(n_rx))) > 1e-9:
            raise ValueError("combiner entries must have magnitude 1/sqrt(N_RX)")
        object.__setattr__(self, "received", y)
        object.__setattr__(self, "combiners", w)

    @property
    def num_snapshots(self):
        return self.received.shape[0]


@dataclass(frozen=True)
class PriorWeights:
    """Clamped prior probabilities per grid atom and their additive weights."""

    probabilities: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if p.shape != w.shape or p.ndim != 1:
            raise ValueError("probabilities and weights must be matching vectors")
        if np.any(p <= 0.0) or np.any(p >= 1.0):
            raise ValueError("probabilities must lie strictly in (0, 1)")
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class CompressedEstimate:
    """Greedy recovery output: selected atoms, their gain covariance, and
    (once assembled) the full antenna-domain covariance."""

    support: tuple
    gain_cov: np.ndarray
    assembled: CovarianceMatrix | None = None
    max_support: int | None = None

    def __post_init__(self):
        s = tuple(int(i) for i in self.support)
        g = np.asarray(self.gain_cov, dtype=complex)
        if g.shape != (len(s), len(s)):
            raise ValueError("gain_cov must be |S| x |S|")
        if self.max_support is not None and len(s) > self.max_support:
            raise ValueError("support exceeds the RF-chain budget")
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "gain_cov", g)


def omni_precoder_pair(n_tx):
    """Two unit-power precoders whose sum is (2/sqrt(N_TX)) e_1 exactly."""
    if n_tx < 1:
        raise ValueError("n_tx must be >= 1")
    f1 = np.ones(n_tx) / math.sqrt(n_tx)
    f2 = -np.ones(n_tx) / math.sqrt(n_tx)
    f2[0] = 1.0 / math.sqrt(n_tx)
    return f1, f2


def random_phase_matrix(n, m, rng):
    """Random RF network: entries (1/sqrt(n)) * exp(j*phi), phi uniform."""
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(n, m))
    return np.exp(1j * phases) / math.sqrt(n)


def collect_snapshots(channel_seq, combiners, noise_var, rng):
    """Two-frame omni sounding of per-snapshot channels.

    channel_seq: sequence of T matrices H_t (N_RX x N_TX), the channel at
    the pilot subcarrier, fixed within a snapshot. combiners: sequence of T
    RF combiners (N_RX x M_RX). Each frame adds CN(0, noise_var * I) noise
    at the antennas, so the combined snapshot noise variance is doubled.
    """
    channels = [np.asarray(h, dtype=complex) for h in channel_seq]
    combiners = [np.asarray(w, dtype=complex) for w in combiners]
    if len(channels) != len(combiners) or not channels:
        raise ValueError("need one combiner per snapshot")
    n_rx, n_tx = channels[0].shape
    f1, f2 = omni_precoder_pair(n_tx)
    f_sum = f1 + f2
    ys = []
    for h, w in zip(channels, combiners):
        if h.shape != (n_rx, n_tx) or w.shape[0] != n_rx:
            raise ValueError("snapshot dimension mismatch")
        noise = math.sqrt(noise_var / 2.0) * (
            rng.standard_normal((n_rx, 2)) + 1j * rng.standard_normal((n_rx, 2)))
        ys.append(w.conj().T @ (h @ f_sum + noise[:, 0] + noise[:, 1]))
    return SnapshotSet(received=np.array(ys), combiners=np.array(combiners),
                       noise_var=float(noise_var))


def build_dictionary(geom, oversampling=2):
    """Angular dictionary on a DFT grid: sin(theta) uniform over [-1, 1)."""
    if oversampling < 1:
        raise ValueError("oversampling must be >= 1")
    b = oversampling * geom.num_antennas
    sines = -1.0 + 2.0 * np.arange(b) / b
    angles = np.arcsin(sines)
    return Dictionary(grid_angles=angles, atoms=steering_matrix(geom, angles))


def dictionary_for_grid(geom, grid_angles):
    """Dictionary on an externally fixed angle grid (e.g. the other band's)."""
    grid = np.asarray(grid_angles, dtype=float)
    return Dictionary(grid_angles=grid, atoms=steering_matrix(geom, grid))


def prob_proxy(r_sub6, sub6_dict, j_rho=0.9):
    """Prior support probabilities beamformed from the sub-6 covariance.

    Column-averages the beamformed matrix A^H R A over the grid, takes
    magnitudes, and normalizes so the peak equals j_rho.
    """
    if not 0.0 < j_rho <= 1.0:
        raise ValueError("j_rho must be in (0, 1]")
    a = sub6_dict.atoms
    m = a.conj().T @ r_sub6.mat @ a
    v = np.abs(m.mean(axis=1))
    top = v.max()
    if top == 0.0:
        return np.full(sub6_dict.size, j_rho)
    return j_rho * v / top


def logit_weight(rho, j_w):
    """Additive logit weights from prior probabilities.

    Probabilities are clamped into [1e-6, 1 - 1e-6] first; weights are
    j_w * log(rho / (1 - rho)). j_w = 0 disables the prior entirely.
    """
    if j_w < 0:
        raise ValueError("j_w must be >= 0")
    p = np.clip(np.asarray(rho, dtype=float), 1e-6, 1.0 - 1e-6)
    return PriorWeights(probabilities=p, weights=j_w * np.log(p / (1.0 - p)))


def uniform_weights(size):
    """Neutral prior: probabilities 1/2, weights 0 (plain DCOMP)."""
    return PriorWeights(probabilities=np.full(size, 0.5), weights=np.zeros(size))


def adaptive_logit_scale(snapshots, dictionary, factor=0.1):
    """Data-driven scale for the logit weights.

    Returns factor times the median first-iteration matching score over
    atoms, so the additive prior stays commensurate with the data term.
    """
    y = snapshots.received
    phis = np.matmul(np.conj(np.transpose(snapshots.combiners, (0, 2, 1))),
                     dictionary.atoms)                     # (T, M, B)
    proj = np.abs(np.einsum("tmb,tm->tb", phis.conj(), y)) ** 2
    scores = proj.sum(axis=0)
    return float(factor * np.median(scores))


def lw_dcomp(snapshots, dictionary, noise_var=None, weights=None, n_tx=None,
             side=Side.RX):
    """Greedy weighted recovery of the sparse gain covariance.

    Residuals start at y_t y_t^H and the loop runs while the summed residual
    Frobenius norm exceeds a noise floor, at most M_RX iterations. The floor
    is the mean plus one standard deviation of the pure-noise residual
    energy, 2*noise_var*(sum_t tr(W_t^H W_t) + sqrt(sum_t ||W_t^H W_t||_F^2)),
    so noise-only input selects almost no atoms; a looser floor would let
    the greedy loop run to a near-square least-squares fit that amplifies
    noise instead of stopping. Atom selection maximizes the
    summed quadratic-form magnitude plus the additive prior weight, ties
    going to the lowest index. Each selected support updates every
    snapshot's gain covariance by restricted least squares through the
    pseudo-inverse, and the output averages those over snapshots.

    When n_tx is given the antenna-domain covariance is assembled too.
    """
    t_count = snapshots.num_snapshots
    if t_count == 0:
        raise ValueError("empty snapshot set")
    if noise_var is None:
        noise_var = snapshots.noise_var
    y = snapshots.received                                 # (T, M)
    w_rf = snapshots.combiners                             # (T, N, M)
    m_rx = y.shape[1]
    b = dictionary.size
    if weights is None:
        weights = uniform_weights(b)
    add_w = weights.weights
    if add_w.shape[0] != b:
        raise ValueError("weights length must match the dictionary")

    phis = np.matmul(np.conj(np.transpose(w_rf, (0, 2, 1))), dictionary.atoms)  # (T, M, B)
    outer = y[:, :, None] * y[:, None, :].conj()           # (T, M, M)
    grams = np.matmul(np.conj(np.transpose(w_rf, (0, 2, 1))), w_rf)  # (T, M, M)
    mean_energy = float(np.sum(np.abs(w_rf) ** 2))
    energy_std = math.sqrt(float(np.sum(np.abs(grams) ** 2)))
    floor = 2.0 * noise_var * (mean_energy + energy_std)

    resid = outer.copy()
    support = []
    gain_ts = None
    for _ in range(m_rx):
        if not np.sum(np.linalg.norm(resid, axis=(1, 2))) > floor:
            break
        # data term: sum_t |phi_j^H V_t phi_j|
        quad = np.abs(np.einsum("tmb,tmn,tnb->tb", phis.conj(), resid, phis,
                                optimize=True)).sum(axis=0)
        j = int(np.argmax(quad + add_w))
        if j not in support:
            support.append(j)
        gain_ts = []
        new_resid = np.empty_like(resid)
        for t in range(t_count):
            phi_s = phis[t][:, support]                    # (M, |S|)
            pinv = np.linalg.pinv(phi_s)
            g_t = pinv @ outer[t] @ pinv.conj().T
            gain_ts.append(g_t)
            new_resid[t] = outer[t] - phi_s @ g_t @ phi_s.conj().T
        resid = new_resid

    if support:
        gain_cov = np.mean(gain_ts, axis=0)
    else:
        gain_cov = np.zeros((0, 0), dtype=complex)
    est = CompressedEstimate(support=tuple(support), gain_cov=gain_cov,
                             max_support=m_rx)
    if n_tx is not None:
        assembled = assemble_covariance(est, dictionary, w_rf.shape[1], n_tx, side=side)
        est = replace(est, assembled=assembled)
    return est


def dcomp(snapshots, dictionary, noise_var=None, n_tx=None, side=Side.RX):
    """Unweighted baseline: the same greedy loop with all weights zero."""
    return lw_dcomp(snapshots, dictionary, noise_var=noise_var,
                    weights=uniform_weights(dictionary.size), n_tx=n_tx, side=side)


def assemble_covariance(est, dictionary, n_rx, n_tx, side=Side.RX):
    """Antenna-domain covariance from the recovered gain covariance.

    R_hat = (N_TX / 4) * A_S gain_cov A_S^H, where N_TX is the antenna count
    of the omni-sounding side; symmetrized and eigenvalue-clipped to PSD.
    """
    n = dictionary.atoms.shape[0]
    if n != n_rx:
        raise ValueError("dictionary atoms must match n_rx")
    if est.support and max(est.support) >= dictionary.size:
        raise ValueError("support index outside the grid")
    if not est.support:
        return CovarianceMatrix(mat=np.zeros((n, n), dtype=complex), side=side)
    a_s = dictionary.atoms[:, list(est.support)]
    r = (n_tx / 4.0) * (a_s @ est.gain_cov @ a_s.conj().T)
    r = 0.5 * (r + r.conj().T)
    evals, evecs = np.linalg.eigh(r)
    evals = np.clip(evals, 0.0, None)
    r = (evecs * evals) @ evecs.conj().T
    return CovarianceMatrix(mat=r, side=side)


def tx_side_estimate(channel_seq, precoders, dictionary, noise_var, rng,
                     weights=None, n_rx=None):
    """Transmit-side covariance estimate via the mirrored sounding problem.

    The roles swap: the receiver sums two omni-combined frames while the
    transmitter hops through random RF precoders (N_TX x M_TX). Conjugating
    the received data turns this into the standard problem on H^H, so the
    same greedy loop applies with a TX-side dictionary. n_rx is the omni
    side's antenna count; it sets the assembly scale.
    """
    flipped = [np.asarray(h, dtype=complex).conj().T for h in channel_seq]
    snaps = collect_snapshots(flipped, precoders, noise_var, rng)
    return lw_dcomp(snaps, dictionary, noise_var=noise_var, weights=weights,
                    n_tx=n_rx, side=Side.TX)
