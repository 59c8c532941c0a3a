"""Conformal prediction sets that are invariant to counterfactual changes of a
protected attribute, with the baselines, metrics, synthetic causal models and
experiment harness needed to benchmark them."""

from .baselines import cfr_features, cfu_features, estimate_pa, pcf_predict
from .conformal import (
    Calibration,
    calibrate,
    cf_cp,
    posthoc_union,
    predict_set_classification,
    predict_set_regression,
    quantile_rank,
    split_cp,
    sublevel_set,
)
from .dataset import Dataset, View, attach_counterfactuals, load_csv, save_csv, split
from .errors import (
    CFCPError,
    ConfigError,
    CsvParseError,
    DivergenceError,
    InvalidParameterError,
    UnsupportedOperationError,
)
from .harness import (
    METHODS,
    ExperimentConfig,
    ResultRow,
    SweepRow,
    emit_results,
    emit_sweep,
    noise_sweep,
    run_experiment,
)
from .metrics import accuracy, avg_size, coverage, csd, mse, total_effect
from .models import FeatureMap, LinearModel, LogisticModel, Predictor, augment, fit_logistic, fit_ols
from .rng import Rng, gaussian, make_rng
from .scm import (
    SynthClassification,
    SynthRegression,
    counterfactual_features,
    counterfactual_matrices,
    gen_classification,
    gen_regression,
)
from .scores import AGGREGATORS, ScoreKind, aggregate, calibration_score, score, score_matrix, symmetrize
from .sets import IntervalSet, interval_intersection, interval_union, jaccard_distance

__version__ = "0.1.0"

__all__ = [
    "accuracy",
    "aggregate",
    "AGGREGATORS",
    "attach_counterfactuals",
    "augment",
    "avg_size",
    "calibrate",
    "Calibration",
    "calibration_score",
    "cf_cp",
    "CFCPError",
    "cfr_features",
    "cfu_features",
    "ConfigError",
    "counterfactual_features",
    "counterfactual_matrices",
    "coverage",
    "csd",
    "CsvParseError",
    "Dataset",
    "DivergenceError",
    "emit_results",
    "emit_sweep",
    "estimate_pa",
    "ExperimentConfig",
    "FeatureMap",
    "fit_logistic",
    "fit_ols",
    "gaussian",
    "gen_classification",
    "gen_regression",
    "interval_intersection",
    "interval_union",
    "IntervalSet",
    "InvalidParameterError",
    "jaccard_distance",
    "LinearModel",
    "load_csv",
    "LogisticModel",
    "make_rng",
    "METHODS",
    "mse",
    "noise_sweep",
    "pcf_predict",
    "posthoc_union",
    "predict_set_classification",
    "predict_set_regression",
    "Predictor",
    "quantile_rank",
    "ResultRow",
    "Rng",
    "run_experiment",
    "save_csv",
    "score",
    "score_matrix",
    "ScoreKind",
    "split",
    "split_cp",
    "sublevel_set",
    "SweepRow",
    "symmetrize",
    "SynthClassification",
    "SynthRegression",
    "total_effect",
    "UnsupportedOperationError",
    "View",
]
