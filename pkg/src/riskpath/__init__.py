"""Stroke risk-factor selection on survey data.

Ingest SAS transport or CSV extracts, recode them with a YAML codebook,
rebalance the training data and compare stepwise, lasso, elastic-net and
group-lasso selections by held-out AUC.
"""
__version__ = "0.1.0"

from .codebook import Dataset, apply_codebook, load_codebook, split_train_test
from .errors import RiskpathError
from .evaluation import auc_fraction, confusion_at_cutoff, evaluate, roc_auc
from .glm import PenaltySpec, fit_logistic, fit_path, fit_penalized, lambda_max, predict_proba
from .resampling import SamplerSpec, resample
from .selection import cv_select_lambda, group_lasso_selections, stepwise_select
from .xpt import load_csv, read_xpt

__all__ = [
    "Dataset", "PenaltySpec", "RiskpathError", "SamplerSpec", "apply_codebook",
    "auc_fraction", "confusion_at_cutoff", "cv_select_lambda", "evaluate", "fit_logistic",
    "fit_path", "fit_penalized", "group_lasso_selections", "lambda_max", "load_codebook",
    "load_csv", "predict_proba", "read_xpt", "resample", "roc_auc", "split_train_test",
    "stepwise_select",
]
