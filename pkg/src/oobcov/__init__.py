"""Out-of-band-aided spatial covariance estimation for hybrid mmWave arrays.

The package covers the full dual-band pipeline: clustered wideband channel
generation, spatial covariance models, parametric covariance translation
from a sub-6 GHz array to a mmWave array, weighted compressed covariance
estimation on hybrid front ends, hybrid precoding, evaluation metrics, and
a seeded Monte-Carlo experiment harness with a CLI.
"""

from .arrays import UlaGeometry, array_response, steering_matrix
from .channel import (ChannelConfig, ChannelRealization, Cluster, ClusterSet,
                      FreqChannel, Ray, build_delay_taps, delay_to_freq,
                      freq_response_at, gen_cluster_sets, raised_cosine,
                      raised_cosine_pulse, redraw_gains)
from .compressed import (CompressedEstimate, Dictionary, PriorWeights,
                         SnapshotSet, adaptive_logit_scale,
                         assemble_covariance, build_dictionary,
                         collect_snapshots, dcomp, dictionary_for_grid,
                         logit_weight, lw_dcomp, omni_precoder_pair,
                         prob_proxy, random_phase_matrix, tx_side_estimate,
                         uniform_weights)
from .config import (ExperimentConfig, EstimationConfig, RunConfig,
                     SweepConfig, SystemConfig, apply_overrides, band_snr_db,
                     config_from_dict, config_to_dict, friis_pathloss_db,
                     load_config, mm_snr_linear, sub6_snr_linear)
from .covariance import (CovarianceMatrix, PasKind, Side,
                         SubspaceDecomposition, rx_covariance,
                         subspace_decompose, synthesize_multicluster,
                         theoretical_covariance, tx_covariance)
from .estimators import CovarianceTranslator, WeightedCovarianceOMP
from .experiments import (EXPERIMENTS, ResultRow, run_experiment,
                          sweep_j_rho, trial_seed, write_rows)
from .metrics import (DegenerateEstimate, Perturbation, RateConfig,
                      SinglePathModel, SingularNoiseCov, effective_rate,
                      efficiency, efficiency_raw, first_order_perturbed_vector,
                      gaussian_perturbation, monte_carlo_snr,
                      orthogonal_perturbation, snr_loss, snr_loss_approx,
                      snr_loss_bounds)
from .precoding import (HybridPrecoder, PhaseCodebook, design_digital,
                        design_hybrid, quantized_steering_atoms)
from .translation import (ClusterEstimate, InsufficientRoots,
                          TranslationResult, cluster_count, mdl_order,
                          nnls_powers, robustify, root_music,
                          spread_root_music, translate)

__version__ = "0.1.0"

__all__ = [
    "UlaGeometry", "array_response", "steering_matrix",
    "ChannelConfig", "ChannelRealization", "Cluster", "ClusterSet",
    "FreqChannel", "Ray", "build_delay_taps", "delay_to_freq",
    "freq_response_at", "gen_cluster_sets", "raised_cosine",
    "raised_cosine_pulse", "redraw_gains",
    "CompressedEstimate", "Dictionary", "PriorWeights", "SnapshotSet",
    "adaptive_logit_scale", "assemble_covariance", "build_dictionary",
    "collect_snapshots", "dcomp", "dictionary_for_grid", "logit_weight",
    "lw_dcomp", "omni_precoder_pair", "prob_proxy", "random_phase_matrix",
    "tx_side_estimate", "uniform_weights",
    "ExperimentConfig", "EstimationConfig", "RunConfig", "SweepConfig",
    "SystemConfig", "apply_overrides", "band_snr_db", "config_from_dict",
    "config_to_dict", "friis_pathloss_db", "load_config", "mm_snr_linear",
    "sub6_snr_linear",
    "CovarianceMatrix", "PasKind", "Side", "SubspaceDecomposition",
    "rx_covariance", "subspace_decompose", "synthesize_multicluster",
    "theoretical_covariance", "tx_covariance",
    "CovarianceTranslator", "WeightedCovarianceOMP",
    "EXPERIMENTS", "ResultRow", "run_experiment", "sweep_j_rho",
    "trial_seed", "write_rows",
    "DegenerateEstimate", "Perturbation", "RateConfig", "SinglePathModel",
    "SingularNoiseCov", "effective_rate", "efficiency", "efficiency_raw",
    "first_order_perturbed_vector", "gaussian_perturbation",
    "monte_carlo_snr", "orthogonal_perturbation", "snr_loss",
    "snr_loss_approx", "snr_loss_bounds",
    "HybridPrecoder", "PhaseCodebook", "design_digital", "design_hybrid",
    "quantized_steering_atoms",
    "ClusterEstimate", "InsufficientRoots", "TranslationResult",
    "cluster_count", "mdl_order", "nnls_powers", "robustify", "root_music",
    "spread_root_music", "translate",
]
