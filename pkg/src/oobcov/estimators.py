"""Estimator-style wrappers around the two covariance pipelines.

Both classes follow the scikit-learn contract (constructor stores
hyperparameters untouched, fit(X) sets trailing-underscore attributes and
returns self) so they compose with clone/get_params-based tooling.
"""

import math

import numpy as np
from sklearn.base import BaseEstimator

from .arrays import UlaGeometry
from .compressed import (SnapshotSet, adaptive_logit_scale, build_dictionary,
                         dictionary_for_grid, logit_weight, lw_dcomp,
                         prob_proxy)
from .covariance import CovarianceMatrix, Side
from .translation import translate


def _sample_covariance(x):
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("X must be (num_snapshots, num_antennas)")
    return x.T @ x.conj() / x.shape[0]


class CovarianceTranslator(BaseEstimator):
    """Parametric covariance translation from sub-6 snapshots to a target array.

    Parameters
    ----------
    mm_antennas : int
        Antenna count of the target (mmWave) ULA.
    spacing : float
        Element spacing in wavelengths for both arrays.
    pas : str
        Power azimuth spectrum family used for the per-cluster fits.
    as_threshold_deg : float
        Angle-spread sanity threshold; estimates above it collapse to a
        single angle-only cluster.
    kappa : float
        Spread scaling between paired point-source surrogates.

    Attributes
    ----------
    covariance_ : ndarray
        Translated covariance on the target array.
    estimates_ : tuple
        Per-cluster (angle, spread, power) estimates.
    noise_var_ : float
        Fitted white-noise level of the input covariance.
    """

    def __init__(self, mm_antennas=64, spacing=0.5, pas="truncated_gaussian",
                 as_threshold_deg=15.0, kappa=1.0):
        self.mm_antennas = mm_antennas
        self.spacing = spacing
        self.pas = pas
        self.as_threshold_deg = as_threshold_deg
        self.kappa = kappa

    def fit(self, X, y=None):
        """X: (num_snapshots, sub6_antennas) complex snapshot matrix."""
        r = _sample_covariance(X)
        sub6 = UlaGeometry(r.shape[0], self.spacing)
        mm = UlaGeometry(self.mm_antennas, self.spacing)
        result = translate(CovarianceMatrix(mat=r, side=Side.RX), sub6, mm,
                           num_snapshots=np.asarray(X).shape[0], pas=self.pas,
                           as_threshold=math.radians(self.as_threshold_deg),
                           kappa=self.kappa)
        self.covariance_ = result.mmwave_cov.mat
        self.estimates_ = result.estimates
        self.noise_var_ = result.noise_var
        return self


class WeightedCovarianceOMP(BaseEstimator):
    """Greedy weighted sparse covariance recovery from compressed snapshots.

    Parameters
    ----------
    n_tx : int or None
        Antenna count of the omni-sounding side; sets the assembly scale.
        None skips antenna-domain assembly.
    oversampling : int
        Dictionary grid density relative to the antenna count.
    j_rho, j_w_factor : float
        Prior ceiling and adaptive logit-scale factor; the prior is active
        only when fit receives a prior covariance.
    spacing : float
        Element spacing in wavelengths.

    Attributes
    ----------
    support_ : tuple
        Selected dictionary atom indices.
    gain_cov_ : ndarray
        Recovered gain covariance on the support.
    covariance_ : ndarray or None
        Assembled antenna-domain covariance when n_tx is set.
    """

    def __init__(self, n_tx=None, oversampling=2, j_rho=0.9, j_w_factor=0.1,
                 spacing=0.5):
        self.n_tx = n_tx
        self.oversampling = oversampling
        self.j_rho = j_rho
        self.j_w_factor = j_w_factor
        self.spacing = spacing

    def fit(self, X, y=None, combiners=None, noise_var=1.0, prior_cov=None):
        """X: (T, M) combined snapshots; combiners: (T, N, M) RF networks.

        prior_cov, when given, is the out-of-band covariance (array or
        CovarianceMatrix) evaluated on a matching ULA to weight the atoms.
        """
        if combiners is None:
            raise ValueError("combiners are required: pass fit(X, combiners=...)")
        snaps = SnapshotSet(received=np.asarray(X, dtype=complex),
                            combiners=np.asarray(combiners, dtype=complex),
                            noise_var=noise_var)
        geom = UlaGeometry(snaps.combiners.shape[1], self.spacing)
        dictionary = build_dictionary(geom, self.oversampling)
        weights = None
        if prior_cov is not None:
            mat = prior_cov.mat if isinstance(prior_cov, CovarianceMatrix) \
                else np.asarray(prior_cov, dtype=complex)
            prior = CovarianceMatrix(mat=mat)
            prior_geom = UlaGeometry(prior.dim, self.spacing)
            prior_dict = dictionary_for_grid(prior_geom, dictionary.grid_angles)
            rho = prob_proxy(prior, prior_dict, self.j_rho)
            j_w = adaptive_logit_scale(snaps, dictionary, self.j_w_factor)
            weights = logit_weight(rho, j_w)
        est = lw_dcomp(snaps, dictionary, weights=weights, n_tx=self.n_tx)
        self.support_ = est.support
        self.gain_cov_ = est.gain_cov
        self.covariance_ = est.assembled.mat if est.assembled is not None else None
        return self
