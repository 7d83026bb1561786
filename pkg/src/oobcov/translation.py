"""Parametric covariance translation from a sub-6 GHz array to a mmWave array.

Pipeline: model-order detection on the sub-6 covariance eigenvalues, per-cluster
mean-angle / angle-spread estimation, robustification against spread-estimator
failures, nonnegative least-squares for cluster powers and the noise floor, and
finally re-synthesis of the covariance on the mmWave geometry.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls as _lawson_hanson

from .covariance import (CovarianceMatrix, PasKind, subspace_decompose,
                         synthesize_multicluster, theoretical_covariance)


class InsufficientRoots(RuntimeError):
    """Root-MUSIC could not map enough polynomial roots to angles."""


@dataclass(frozen=True)
class ClusterEstimate:
    """Estimated mean angle (rad), angle spread (rad) and power of one cluster."""

    mean_angle: float
    spread: float
    power: float

    def __post_init__(self):
        if self.spread < 0 or self.power < 0:
            raise ValueError("spread and power must be >= 0")


@dataclass(frozen=True)
class TranslationResult:
    """Cluster estimates, the fitted noise variance, and the synthesized covariance."""

    estimates: tuple
    noise_var: float
    mmwave_cov: CovarianceMatrix

    def __post_init__(self):
        if self.noise_var < 0:
            raise ValueError("noise_var must be >= 0")
        object.__setattr__(self, "estimates", tuple(self.estimates))


def mdl_order(eigenvalues, num_snapshots):
    """Point-source count by the minimum-description-length rule.

    eigenvalues must be sorted descending. Returns the m in {0..N-1}
    minimizing -T*(N-m)*log(gm/am of the N-m smallest) + 0.5*m*(2N-m)*log(T).
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1 or lam.size < 2:
        raise ValueError("need at least two eigenvalues")
    if np.any(np.diff(lam) > 1e-12 * max(abs(lam[0]), 1.0)):
        raise ValueError("eigenvalues must be sorted descending")
    if num_snapshots < 1:
        raise ValueError("num_snapshots must be >= 1")
    n = lam.size
    top = max(lam[0], 0.0)
    if top <= 0.0:
        return 0
    # floor keeps log finite for rank-deficient inputs
    lam = np.maximum(lam, top * 1e-15)
    log_t = math.log(num_snapshots)
    best_m, best_cost = 0, np.inf
    for m in range(n):
        tail = lam[m:]
        gm = np.mean(np.log(tail))
        am = math.log(np.mean(tail))
        cost = -num_snapshots * (n - m) * (gm - am) + 0.5 * m * (2 * n - m) * log_t
        if cost < best_cost:
            best_m, best_cost = m, cost
    return best_m


def cluster_count(point_sources):
    """Clusters from point sources: max(floor(ps/2), 1)."""
    if point_sources < 0:
        raise ValueError("point_sources must be >= 0")
    return max(point_sources // 2, 1)


def root_music(r, num_sources, geom):
    """Root-MUSIC angles (radians, ascending) from a covariance.

    Builds the noise-subspace polynomial, keeps roots inside the closed unit
    disk, picks the num_sources distinct ones closest to the unit circle, and
    maps each root phase w to an angle via sin(theta) = w / (2*pi*spacing).
    """
    n = geom.num_antennas
    if not 1 <= num_sources < n:
        raise ValueError("need 1 <= num_sources < num_antennas")
    dec = subspace_decompose(r, num_sources)
    c = dec.noise_basis @ dec.noise_basis.conj().T
    # coefficient of z^p is the (p-N+1)-th diagonal sum, highest power first
    coeffs = np.array([np.trace(c, offset=k) for k in range(n - 1, -n, -1)])
    roots = np.roots(coeffs)
    roots = roots[np.abs(roots) <= 1.0 + 1e-9]
    roots = roots[np.argsort(np.abs(np.abs(roots) - 1.0))]
    omega_max = 2.0 * np.pi * geom.spacing
    angles, used_omegas = [], []
    for z in roots:
        omega = float(np.angle(z))
        if abs(omega) > omega_max * (1.0 + 1e-12):
            continue
        if any(abs(omega - w) < 1e-6 for w in used_omegas):
            continue
        used_omegas.append(omega)
        angles.append(math.asin(np.clip(omega / omega_max, -1.0, 1.0)))
        if len(angles) == num_sources:
            break
    if len(angles) < num_sources:
        raise InsufficientRoots(
            f"found {len(angles)} mappable roots, needed {num_sources}")
    return sorted(angles)


def spread_root_music(r, num_clusters, geom, kappa=1.0):
    """Per-cluster (mean angle, angle spread) via the two-point surrogate.

    Runs root-MUSIC for 2*num_clusters point sources, pairs adjacent sorted
    angles, and maps each pair to midpoint and kappa * half-separation.
    """
    if 2 * num_clusters >= geom.num_antennas:
        raise ValueError("need 2*num_clusters < num_antennas")
    angles = root_music(r, 2 * num_clusters, geom)
    out = []
    for i in range(0, len(angles), 2):
        a, b = angles[i], angles[i + 1]
        out.append((0.5 * (a + b), kappa * 0.5 * abs(b - a)))
    return sorted(out, key=lambda p: p[0])


def robustify(raw, r, as_threshold, geom):
    """Replace spread estimates above the threshold with an AoA-only estimate.

    Tripping entries become (single-source root-MUSIC angle, 0); everything
    else is kept, order preserved. Idempotent.
    """
    if as_threshold <= 0:
        raise ValueError("as_threshold must be > 0")
    if not any(spread > as_threshold for _, spread in raw):
        return list(raw)
    fallback = root_music(r, 1, geom)[0]
    return [(angle, spread) if spread <= as_threshold else (fallback, 0.0)
            for angle, spread in raw]


def nnls_powers(r_sub6, components):
    """Nonnegative powers for the cluster components plus a noise-floor weight.

    Columns are the real/imaginary stacked vectorizations of each component
    covariance and of the identity; solved with Lawson-Hanson.
    """
    components = list(components)
    if not components:
        raise ValueError("need at least one component")
    n = r_sub6.dim
    cols = [c.mat for c in components] + [np.eye(n)]
    for c in components:
        if c.dim != n:
            raise ValueError("component size mismatch")
    a = np.stack([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in cols], axis=1)
    b = np.concatenate([r_sub6.mat.real.ravel(), r_sub6.mat.imag.ravel()])
    x, _ = _lawson_hanson(a, b, atol=1e-10)
    return x[:-1], float(x[-1])


def translate(r_sub6, sub6_geom, mmwave_geom, num_snapshots, pas=PasKind.TRUNCATED_GAUSSIAN,
              as_threshold=math.radians(15.0), kappa=1.0):
    """Full covariance translation from the sub-6 array to the mmWave array.

    Detects the cluster count on r_sub6, estimates per-cluster angle and
    spread, fits powers and the noise floor at the sub-6 geometry, then
    synthesizes the mmWave covariance without the noise term.
    """
    pas = PasKind(pas)
    evals = np.linalg.eigvalsh(r_sub6.mat)[::-1]
    point_sources = mdl_order(evals, num_snapshots)
    n_hat = cluster_count(point_sources)
    max_clusters = max((sub6_geom.num_antennas - 1) // 2, 1)
    n_hat = min(n_hat, max_clusters)
    if point_sources <= 1:
        raw = [(root_music(r_sub6, 1, sub6_geom)[0], 0.0)]
    else:
        try:
            raw = spread_root_music(r_sub6, n_hat, sub6_geom, kappa=kappa)
        except InsufficientRoots:
            raw = [(root_music(r_sub6, 1, sub6_geom)[0], 0.0)]
    raw = robustify(raw, r_sub6, as_threshold, sub6_geom)
    sub6_comps = [theoretical_covariance(pas, ang, sp, sub6_geom, side=r_sub6.side)
                  for ang, sp in raw]
    powers, noise_var = nnls_powers(r_sub6, sub6_comps)
    estimates = tuple(ClusterEstimate(mean_angle=ang, spread=sp, power=float(p))
                      for (ang, sp), p in zip(raw, powers))
    mm_comps = [(float(p), theoretical_covariance(pas, ang, sp, mmwave_geom, side=r_sub6.side))
                for (ang, sp), p in zip(raw, powers)]
    mmwave_cov = synthesize_multicluster(mm_comps)
    return TranslationResult(estimates=estimates, noise_var=noise_var, mmwave_cov=mmwave_cov)
