"""Evaluation metrics and the single-path SNR-loss analysis.

Implements the subspace efficiency metric, the effective achievable rate of
a hybrid link, and the covariance-perturbation SNR-loss machinery: the exact
loss in terms of perturbed singular-vector norms, its first-order
approximation, singular-value bounds, and a Monte-Carlo checker.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .arrays import UlaGeometry, array_response
from .covariance import CovarianceMatrix, Side, subspace_decompose
from .precoding import PhaseCodebook, design_hybrid


class DegenerateEstimate(ArithmeticError):
    """Efficiency denominator vanished: the estimate carries no energy in its own subspace."""


class SingularNoiseCov(ArithmeticError):
    """Post-combining noise covariance is singular; the rate is undefined."""


@dataclass(frozen=True)
class RateConfig:
    """Link and overhead parameters for the effective-rate evaluation."""

    total_power: float
    noise_var: float
    num_subcarriers: int
    num_streams: int
    stat_blocks: int = 2048
    train_blocks: int = 0

    def __post_init__(self):
        if self.total_power <= 0 or self.noise_var <= 0:
            raise ValueError("total_power and noise_var must be > 0")
        if self.num_subcarriers < 1 or self.num_streams < 1:
            raise ValueError("num_subcarriers and num_streams must be >= 1")
        if not 0 <= self.train_blocks <= self.stat_blocks:
            raise ValueError("need 0 <= train_blocks <= stat_blocks")


@dataclass(frozen=True)
class Perturbation:
    """Additive Hermitian errors on the RX and TX covariances."""

    delta_rx: np.ndarray
    delta_tx: np.ndarray

    def __post_init__(self):
        for name in ("delta_rx", "delta_tx"):
            d = np.asarray(getattr(self, name), dtype=complex)
            if d.ndim != 2 or d.shape[0] != d.shape[1]:
                raise ValueError(f"{name} must be square")
            scale = max(np.max(np.abs(d)), 1.0)
            if np.max(np.abs(d - d.conj().T)) > 1e-10 * scale:
                raise ValueError(f"{name} must be Hermitian")
            object.__setattr__(self, name, d)


def efficiency_raw(r_true, r_est, n_streams):
    """Unclipped subspace efficiency ratio.

    tr(U^H R_est U) / tr(U_est^H R_true U_est) with U (U_est) the top
    n_streams eigenvectors of the true (estimated) covariance.
    """
    u_true = subspace_decompose(r_true, n_streams).signal_basis
    u_est = subspace_decompose(r_est, n_streams).signal_basis
    num = float(np.trace(u_true.conj().T @ r_est.mat @ u_true).real)
    den = float(np.trace(u_est.conj().T @ r_true.mat @ u_est).real)
    if den == 0.0:
        raise DegenerateEstimate("estimated subspace captures no true-covariance energy")
    return num / den


def efficiency(r_true, r_est, n_streams):
    """Subspace efficiency clipped into [0, 1]."""
    return float(np.clip(efficiency_raw(r_true, r_est, n_streams), 0.0, 1.0))


def effective_rate(fc, precoder, combiner, cfg):
    """Effective achievable rate (bits/s/Hz) of a hybrid link.

    Training overhead scales the spectral efficiency by
    (1 - train_blocks/stat_blocks); the per-subcarrier log-det uses the
    post-combining noise covariance noise_var * W^H W through a Cholesky
    factorization.
    """
    prefactor = 1.0 - cfg.train_blocks / cfg.stat_blocks
    if prefactor == 0.0:
        return 0.0
    h = fc.subcarriers
    k_count = h.shape[0]
    if k_count != cfg.num_subcarriers:
        raise ValueError("channel and config disagree on subcarrier count")
    n_s = cfg.num_streams
    gain = cfg.total_power / (cfg.num_subcarriers * n_s)
    acc = 0.0
    for k in range(k_count):
        w = combiner.combined(k % combiner.num_subcarriers)
        f = precoder.combined(k % precoder.num_subcarriers)
        g = w.conj().T @ h[k] @ f
        rn = cfg.noise_var * (w.conj().T @ w)
        try:
            chol = np.linalg.cholesky(rn)
        except np.linalg.LinAlgError as exc:
            raise SingularNoiseCov("noise covariance after combining is singular") from exc
        half = solve_triangular(chol, g, lower=True)
        m = np.eye(n_s) + gain * (half @ half.conj().T)
        sign, logdet = np.linalg.slogdet(m)
        if sign.real <= 0:
            raise SingularNoiseCov("log-det argument lost positive definiteness")
        acc += logdet / math.log(2.0)
    return prefactor * acc / k_count


def snr_loss(u_rx_hat_norm_sq, u_tx_hat_norm_sq):
    """Exact SNR loss from the squared norms of the perturbed singular vectors."""
    if u_rx_hat_norm_sq < 1.0 - 1e-9 or u_tx_hat_norm_sq < 1.0 - 1e-9:
        raise ValueError("perturbed-vector squared norms cannot drop below 1")
    return float(u_rx_hat_norm_sq * u_tx_hat_norm_sq)


def snr_loss_approx(pert, u_rx, u_tx, sigma_alpha_sq, n_rx, n_tx):
    """First-order SNR loss from the perturbations hitting the signal vectors."""
    u_rx = np.asarray(u_rx).reshape(-1)
    u_tx = np.asarray(u_tx).reshape(-1)
    rx_term = np.linalg.norm(pert.delta_rx @ u_rx) ** 2 / (n_rx ** 2 * sigma_alpha_sq ** 2)
    tx_term = np.linalg.norm(pert.delta_tx @ u_tx) ** 2 / (n_tx ** 2 * sigma_alpha_sq ** 2)
    return float((1.0 + rx_term) * (1.0 + tx_term))


def snr_loss_bounds(pert, sigma_alpha_sq, n_rx, n_tx):
    """(lower, upper) SNR-loss bounds from extreme singular values."""
    s_rx = np.linalg.svd(pert.delta_rx, compute_uv=False)
    s_tx = np.linalg.svd(pert.delta_tx, compute_uv=False)
    def bound(s_rx_val, s_tx_val):
        return float((1.0 + s_rx_val ** 2 / (n_rx ** 2 * sigma_alpha_sq ** 2))
                     * (1.0 + s_tx_val ** 2 / (n_tx ** 2 * sigma_alpha_sq ** 2)))
    lo = bound(s_rx.min() if s_rx.size else 0.0, s_tx.min() if s_tx.size else 0.0)
    hi = bound(s_rx.max() if s_rx.size else 0.0, s_tx.max() if s_tx.size else 0.0)
    return lo, hi


@dataclass(frozen=True)
class SinglePathModel:
    """Single-path narrowband channel for the SNR-loss experiments."""

    n_rx: int
    n_tx: int
    sigma_alpha_sq: float = 1.0
    theta_rx: float = 0.0
    theta_tx: float = 0.0
    spacing: float = 0.5

    def responses(self):
        a_rx = array_response(UlaGeometry(self.n_rx, self.spacing), self.theta_rx)
        a_tx = array_response(UlaGeometry(self.n_tx, self.spacing), self.theta_tx)
        return a_rx, a_tx

    def covariances(self):
        """True covariances: N * sigma_alpha^2 * a a^H on each side."""
        a_rx, a_tx = self.responses()
        r_rx = self.n_rx * self.sigma_alpha_sq * np.outer(a_rx, a_rx.conj())
        r_tx = self.n_tx * self.sigma_alpha_sq * np.outer(a_tx, a_tx.conj())
        return (CovarianceMatrix(mat=r_rx, side=Side.RX),
                CovarianceMatrix(mat=r_tx, side=Side.TX))

    def draw(self, rng):
        """One channel realization sqrt(N_RX N_TX) * alpha * a_rx a_tx^H."""
        a_rx, a_tx = self.responses()
        alpha = math.sqrt(self.sigma_alpha_sq / 2.0) * (
            rng.standard_normal() + 1j * rng.standard_normal())
        return math.sqrt(self.n_rx * self.n_tx) * alpha * np.outer(a_rx, a_tx.conj())


def first_order_perturbed_vector(r_true, delta, sigma_alpha_sq):
    """Perturbed dominant singular vector u + U_n U_n^H Delta u / (sigma_alpha^2 N).

    Not renormalized; its norm is what enters the exact loss expression.
    """
    n = r_true.dim
    dec = subspace_decompose(r_true, 1)
    u = dec.signal_basis[:, 0]
    un = dec.noise_basis
    delta_u = un @ (un.conj().T @ (delta @ u)) / (sigma_alpha_sq * n)
    return u + delta_u


def orthogonal_perturbation(r_true, magnitude, rng):
    """Hermitian perturbation whose action on the dominant vector stays orthogonal to it.

    Delta = z u^H + u z^H with z drawn in the noise subspace and scaled to
    the requested norm, so Delta u = z exactly and the first-order loss
    expression is exact.
    """
    dec = subspace_decompose(r_true, 1)
    u = dec.signal_basis[:, 0]
    un = dec.noise_basis
    if un.shape[1] == 0:
        raise ValueError("need a nontrivial noise subspace")
    coeffs = rng.standard_normal(un.shape[1]) + 1j * rng.standard_normal(un.shape[1])
    z = un @ coeffs
    z = z * (magnitude / np.linalg.norm(z))
    return np.outer(z, u.conj()) + np.outer(u, z.conj())


def gaussian_perturbation(n, snr_k, rng):
    """Hermitian random perturbation with off-diagonal entry variance 1/snr_k."""
    scale = math.sqrt(1.0 / (2.0 * snr_k))
    g = scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return (g + g.conj().T) / math.sqrt(2.0)


def _clip_psd(mat, side):
    sym = 0.5 * (mat + mat.conj().T)
    evals, evecs = np.linalg.eigh(sym)
    evals = np.clip(evals, 0.0, None)
    return CovarianceMatrix(mat=(evecs * evals) @ evecs.conj().T, side=side)


def _as_matrix(r):
    """CovarianceMatrix or plain Hermitian array; estimates may be indefinite."""
    return r.mat if isinstance(r, CovarianceMatrix) else np.asarray(r, dtype=complex)


def monte_carlo_snr(r_true_pair, r_hat_pair, model, mode, trials, rng,
                    codebook=PhaseCodebook(2), symbol_power=1.0, noise_var=1.0):
    """Empirical SNR-loss ratio of perturbed against true covariance designs.

    digital mode follows the first-order singular-vector construction: the
    perturbed beamformers are u + U_n U_n^H Delta u / (sigma_alpha^2 N),
    normalized for transmission. hybrid mode designs quantized hybrid
    beamformers from each covariance (perturbation PSD-clipped first; plain
    arrays are accepted for the perturbed pair). Trials share the channel,
    symbol and noise draws between the baseline and the perturbed link, and
    the returned value is SNR_true / SNR_perturbed.
    """
    r_rx, r_tx = r_true_pair
    rx_hat_mat = _as_matrix(r_hat_pair[0])
    tx_hat_mat = _as_matrix(r_hat_pair[1])
    if mode not in ("digital", "hybrid"):
        raise ValueError("mode must be 'digital' or 'hybrid'")
    if mode == "digital":
        w_base = subspace_decompose(r_rx, 1).signal_basis[:, 0]
        f_base = subspace_decompose(r_tx, 1).signal_basis[:, 0]
        w_hat = first_order_perturbed_vector(
            r_rx, rx_hat_mat - r_rx.mat, model.sigma_alpha_sq)
        f_hat = first_order_perturbed_vector(
            r_tx, tx_hat_mat - r_tx.mat, model.sigma_alpha_sq)
        w_pert = w_hat / np.linalg.norm(w_hat)
        f_pert = f_hat / np.linalg.norm(f_hat)
    else:
        def one_side(r):
            hp = design_hybrid(r, max(1, int(round(math.sqrt(r.dim)))), 1,
                               codebook=codebook, num_subcarriers=1)
            v = hp.combined(0)[:, 0]
            return v / np.linalg.norm(v)
        w_base = one_side(r_rx)
        f_base = one_side(r_tx)
        w_pert = one_side(_clip_psd(rx_hat_mat, Side.RX))
        f_pert = one_side(_clip_psd(tx_hat_mat, Side.TX))

    # rank-1 channel: w^H H f = sqrt(N_RX N_TX) alpha (w^H a_RX)(a_TX^H f),
    # so the per-trial loop reduces to scalar gains against shared draws
    a_rx, a_tx = model.responses()
    amp = math.sqrt(model.n_rx * model.n_tx)
    alpha = math.sqrt(model.sigma_alpha_sq / 2.0) * (
        rng.standard_normal(trials) + 1j * rng.standard_normal(trials))
    s = math.sqrt(symbol_power / 2.0) * (
        rng.standard_normal(trials) + 1j * rng.standard_normal(trials))
    noise = math.sqrt(noise_var / 2.0) * (
        rng.standard_normal((trials, model.n_rx))
        + 1j * rng.standard_normal((trials, model.n_rx)))
    drive = np.abs(amp * alpha * s) ** 2
    sig_base = np.sum(drive) * abs(np.vdot(w_base, a_rx) * np.vdot(a_tx, f_base)) ** 2
    sig_pert = np.sum(drive) * abs(np.vdot(w_pert, a_rx) * np.vdot(a_tx, f_pert)) ** 2
    noise_base = np.sum(np.abs(noise @ w_base.conj()) ** 2)
    noise_pert = np.sum(np.abs(noise @ w_pert.conj()) ** 2)
    snr_base = sig_base / noise_base
    snr_pert = sig_pert / noise_pert
    return float(snr_base / snr_pert)
