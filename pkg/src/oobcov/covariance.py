"""Spatial covariance construction, estimation and subspace decomposition."""

import enum
from dataclasses import dataclass

import numpy as np


class Side(str, enum.Enum):
    RX = "rx"
    TX = "tx"


class PasKind(str, enum.Enum):
    """Closed-form power azimuth spectrum families."""

    TRUNCATED_LAPLACIAN = "truncated_laplacian"
    TRUNCATED_GAUSSIAN = "truncated_gaussian"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class CovarianceMatrix:
    """Hermitian PSD spatial covariance tagged with the array side."""

    mat: np.ndarray
    side: Side = Side.RX

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("covariance must be square")
        herm_gap = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if herm_gap > 1e-10 * max(1.0, np.max(np.abs(m))):
            raise ValueError("matrix is not Hermitian within tolerance")
        m = 0.5 * (m + m.conj().T)
        evals = np.linalg.eigvalsh(m)
        top = max(evals[-1], 0.0)
        if evals[0] < -1e-8 * max(top, 1e-300):
            raise ValueError("matrix is not PSD within tolerance")
        object.__setattr__(self, "mat", m)
        object.__setattr__(self, "side", Side(self.side))

    @property
    def dim(self):
        return self.mat.shape[0]


@dataclass(frozen=True)
class SubspaceDecomposition:
    """Eigen split into an m-dimensional signal part and its complement."""

    signal_basis: np.ndarray
    signal_values: np.ndarray
    noise_basis: np.ndarray

    def __post_init__(self):
        us = np.asarray(self.signal_basis, dtype=complex)
        un = np.asarray(self.noise_basis, dtype=complex)
        vals = np.asarray(self.signal_values, dtype=float)
        full = np.hstack([us, un]) if un.size else us
        gram = full.conj().T @ full
        if np.max(np.abs(gram - np.eye(full.shape[1]))) > 1e-8:
            raise ValueError("basis columns are not orthonormal")
        if np.any(np.diff(vals) > 1e-12) or np.any(vals < 0):
            raise ValueError("signal_values must be descending and nonnegative")
        object.__setattr__(self, "signal_basis", us)
        object.__setattr__(self, "signal_values", vals)
        object.__setattr__(self, "noise_basis", un)

    @property
    def signal_dim(self):
        return self.signal_basis.shape[1]


def rx_covariance(fc):
    """Receive covariance of one realization: (1/K) sum_k H[k] H[k]^H / N_TX."""
    h = fc.subcarriers
    k, _, n_tx = h.shape
    acc = np.einsum("kij,klj->il", h, h.conj())
    return CovarianceMatrix(mat=acc / (k * n_tx), side=Side.RX)


def tx_covariance(fc):
    """Transmit covariance of one realization: (1/K) sum_k H[k]^H H[k] / N_RX."""
    h = fc.subcarriers
    k, n_rx, _ = h.shape
    acc = np.einsum("kij,kil->jl", h.conj(), h)
    return CovarianceMatrix(mat=acc / (k * n_rx), side=Side.TX)


def theoretical_covariance(pas, mean_angle, spread, geom, side=Side.RX):
    """Closed-form single-cluster covariance for the given PAS family.

    Entry (i, j) depends on the antenna index difference i - j, the mean
    angle and the angle spread (radians). Diagonal entries are 1 (the
    truncated Laplacian's normalizer differs from 1 by an exponentially
    small amount at small spreads).
    """
    pas = PasKind(pas)
    if spread < 0:
        raise ValueError("spread must be >= 0")
    n = geom.num_antennas
    k = np.arange(n)[:, None] - np.arange(n)[None, :]   # i - j
    base = 2.0 * np.pi * geom.spacing * k
    phase = np.exp(1j * base * np.sin(mean_angle))
    if spread == 0.0:
        return CovarianceMatrix(mat=phase, side=side)
    u = base * np.cos(mean_angle)                       # 2 pi Delta (i-j) cos(theta)
    if pas is PasKind.TRUNCATED_LAPLACIAN:
        beta = 1.0 / (1.0 - np.exp(-np.sqrt(2.0) * np.pi / spread))
        env = beta / (1.0 + 0.5 * spread ** 2 * u ** 2)
    elif pas is PasKind.TRUNCATED_GAUSSIAN:
        env = np.exp(-((u * spread) ** 2))
    else:
        rho = np.sqrt(3.0) * spread * u                 # uniform support +- sqrt(3) spread
        env = np.sinc(rho / np.pi)
    return CovarianceMatrix(mat=env * phase, side=side)


def synthesize_multicluster(components, noise_var=None):
    """Weighted sum of per-cluster covariances, optional white-noise floor.

    components: iterable of (power, CovarianceMatrix). All must share side
    and size. noise_var, when given, adds noise_var * I.
    """
    components = list(components)
    if not components:
        raise ValueError("need at least one component")
    side = components[0][1].side
    n = components[0][1].dim
    acc = np.zeros((n, n), dtype=complex)
    for eps, comp in components:
        if eps < 0:
            raise ValueError("component powers must be >= 0")
        if comp.dim != n or comp.side != side:
            raise ValueError("components must share side and size")
        acc += eps * comp.mat
    if noise_var is not None:
        if noise_var < 0:
            raise ValueError("noise_var must be >= 0")
        acc += noise_var * np.eye(n)
    return CovarianceMatrix(mat=acc, side=side)


def _canonical_phase(vec):
    """Rotate so the first non-negligible entry is real positive."""
    mags = np.abs(vec)
    top = mags.max()
    if top == 0.0:
        return vec
    idx = int(np.argmax(mags > 1e-12 * top))
    return vec * np.exp(-1j * np.angle(vec[idx]))


def subspace_decompose(r, signal_dim):
    """Split a covariance into signal and noise eigenspaces.

    Eigenvectors are phase-canonicalized; (near-)equal eigenvalues are
    ordered by the byte representation of the canonicalized vectors so
    repeated runs agree.
    """
    mat = r.mat if isinstance(r, CovarianceMatrix) else np.asarray(r, dtype=complex)
    n = mat.shape[0]
    if not 1 <= signal_dim <= n:
        raise ValueError("signal_dim out of range")
    evals, evecs = np.linalg.eigh(0.5 * (mat + mat.conj().T))
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    evecs = np.column_stack([_canonical_phase(evecs[:, i]) for i in range(n)])
    # deterministic order inside degenerate eigenvalue groups
    tol = 1e-12 * max(abs(evals[0]), 1.0)
    order = np.arange(n)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(evals[stop] - evals[start]) <= tol:
            stop += 1
        if stop - start > 1:
            keys = [np.round(evecs[:, i], 10).tobytes() for i in range(start, stop)]
            perm = sorted(range(stop - start), key=keys.__getitem__)
            order[start:stop] = start + np.asarray(perm)
        start = stop
    evals = evals[order]
    evecs = evecs[:, order]
    signal_vals = np.clip(evals[:signal_dim], 0.0, None)
    return SubspaceDecomposition(
        signal_basis=evecs[:, :signal_dim],
        signal_values=signal_vals,
        noise_basis=evecs[:, signal_dim:],
    )
