"""Face identification from Gabor magnitude features and a cyclic HMM."""

from .classifier import ClassifierState, ClassModel, classify, dist, fit
from .config import RunConfig, config_from_dict, load_config, save_config
from .errors import DataError, GaborHmmError, NumericError
from .evaluate import ConfusionCounts, EvalReport, MetricSet, compute_metrics
from .features import ObservationSequence, block_feature, extract_observations, global_mean
from .gabor import GaborParams, convolve, fuse, make_bank, make_kernel
from .hmm import (CyclicHMM, PathVector, TrainResult, baum_welch, cyclic_mask,
                  forward_log_likelihood, init_model, viterbi)
from .manifest import Manifest, ManifestEntry, build_eval_manifest, load_manifest
from .pipeline import (TrainedSystem, evaluate_system, feature_image,
                       image_observations, run_protocol, train_system)
from .sampling import SamplingPlan, plan_sampling, scan_order

__version__ = "0.1.0"

__all__ = [
    "ClassModel", "ClassifierState", "ConfusionCounts", "CyclicHMM", "DataError",
    "EvalReport", "GaborHmmError", "GaborParams", "Manifest", "ManifestEntry",
    "MetricSet", "NumericError", "ObservationSequence", "PathVector", "RunConfig",
    "SamplingPlan", "TrainResult", "TrainedSystem", "baum_welch", "block_feature",
    "build_eval_manifest", "classify", "compute_metrics", "config_from_dict",
    "convolve", "cyclic_mask", "dist", "evaluate_system", "extract_observations",
    "feature_image", "fit", "forward_log_likelihood", "fuse", "global_mean",
    "image_observations", "init_model", "load_config", "load_manifest",
    "make_bank", "make_kernel", "plan_sampling", "run_protocol", "save_config",
    "scan_order", "train_system", "viterbi",
]
