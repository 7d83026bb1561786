"""Digital and hybrid precoder/combiner design from covariance estimates.

Hybrid designs factor the dominant covariance eigenvectors through an RF
matrix of quantized phase shifters and a baseband matrix, greedily picking
quantized steering atoms and refitting baseband by least squares.
"""

import math
from dataclasses import dataclass

import numpy as np

from .arrays import UlaGeometry, steering_matrix
from .covariance import subspace_decompose


@dataclass(frozen=True)
class PhaseCodebook:
    """Uniform phase-shifter quantization: 2^bits phases over [0, 2*pi)."""

    bits: int = 2

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be >= 1")

    @property
    def phases(self):
        size = 2 ** self.bits
        return 2.0 * np.pi * np.arange(size) / size

    def snap_index(self, phase):
        """Index of the nearest codebook phase."""
        size = 2 ** self.bits
        step = 2.0 * np.pi / size
        return np.mod(np.round(np.asarray(phase) / step).astype(int), size)


@dataclass(frozen=True)
class HybridPrecoder:
    """RF phase-shifter matrix plus per-subcarrier baseband matrices.

    rf is N x M with entries exactly (1/sqrt(N)) * exp(j * codebook phase);
    bb is (K, M, N_s). The combined precoder meets the total power
    constraint sum_k ||rf @ bb[k]||_F^2 = K * N_s.
    """

    rf: np.ndarray
    bb: np.ndarray
    codebook: PhaseCodebook = PhaseCodebook(2)

    def __post_init__(self):
        rf = np.asarray(self.rf, dtype=complex)
        bb = np.asarray(self.bb, dtype=complex)
        if rf.ndim != 2 or bb.ndim != 3 or bb.shape[1] != rf.shape[1]:
            raise ValueError("rf must be N x M and bb (K, M, N_s)")
        n = rf.shape[0]
        if np.max(np.abs(np.abs(rf) - 1.0 / math.sqrt(n))) > 1e-12:
            raise ValueError("rf entries must have magnitude 1/sqrt(N)")
        step = 2.0 * np.pi / 2 ** self.codebook.bits
        offgrid = np.abs(np.angle(rf * math.sqrt(n)) / step)
        offgrid = np.abs(offgrid - np.round(offgrid))
        if np.max(offgrid) > 1e-9:
            raise ValueError("rf phases must lie on the codebook grid")
        k = bb.shape[0]
        n_s = bb.shape[2]
        power = sum(np.linalg.norm(rf @ bb[i]) ** 2 for i in range(k))
        if abs(power - k * n_s) > 1e-8 * max(k * n_s, 1.0):
            raise ValueError("combined precoder violates the power constraint")
        object.__setattr__(self, "rf", rf)
        object.__setattr__(self, "bb", bb)

    @property
    def num_subcarriers(self):
        return self.bb.shape[0]

    def combined(self, k):
        """Effective precoder rf @ bb[k] at subcarrier k."""
        return self.rf @ self.bb[k]


def design_digital(r, n_streams):
    """Top-eigenvector precoder: N x N_s orthonormal, phase-canonicalized."""
    n = r.dim
    if not 1 <= n_streams <= n:
        raise ValueError("n_streams out of range")
    return subspace_decompose(r, n_streams).signal_basis


def quantized_steering_atoms(n, codebook, oversampling=2, spacing=0.5):
    """Steering vectors on a DFT grid with phases snapped to the codebook.

    Entries are constructed from the codebook phases themselves, so grid
    membership is exact.
    """
    geom = UlaGeometry(n, spacing)
    b = oversampling * n
    sines = -1.0 + 2.0 * np.arange(b) / b
    ideal = steering_matrix(geom, np.arcsin(sines)) * math.sqrt(n)
    idx = codebook.snap_index(np.angle(ideal))
    return np.exp(1j * codebook.phases[idx]) / math.sqrt(n)


def design_hybrid(r, n_rf, n_streams, codebook=PhaseCodebook(2), num_subcarriers=1,
                  oversampling=2, spacing=0.5):
    """Hybrid factorization of the covariance's dominant subspace.

    Greedy orthogonal matching pursuit over quantized steering atoms against
    the target U = design_digital(r, n_streams), least-squares baseband after
    each pick, frequency-flat baseband replicated across subcarriers and
    scaled to meet the power constraint exactly.
    """
    n = r.dim
    if not 1 <= n_streams <= n_rf <= n:
        raise ValueError("need 1 <= n_streams <= n_rf <= num_antennas")
    target = design_digital(r, n_streams)
    atoms = quantized_steering_atoms(n, codebook, oversampling=oversampling,
                                     spacing=spacing)
    picked = []
    resid = target
    available = list(range(atoms.shape[1]))
    for _ in range(n_rf):
        corr = np.linalg.norm(atoms[:, available].conj().T @ resid, axis=1)
        best = available[int(np.argmax(corr))]
        picked.append(best)
        available.remove(best)
        rf = atoms[:, picked]
        bb, *_ = np.linalg.lstsq(rf, target, rcond=None)
        resid = target - rf @ bb
    rf = atoms[:, picked]
    bb, *_ = np.linalg.lstsq(rf, target, rcond=None)
    norm = np.linalg.norm(rf @ bb)
    if norm < 1e-12:
        raise ValueError("target subspace is orthogonal to the RF dictionary")
    bb = bb * (math.sqrt(n_streams) / norm)
    bb_all = np.broadcast_to(bb, (num_subcarriers,) + bb.shape).copy()
    return HybridPrecoder(rf=rf, bb=bb_all, codebook=codebook)
