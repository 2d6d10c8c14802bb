"""Python bindings for the c3r library."""

import json

from . import _c3r
from ._c3r import ConfigError, ContractError, DimensionError, Error, NumericError
from ._c3r import distance_correlation, log_confidence_term

__all__ = [
    "ConfigError",
    "ContractError",
    "DimensionError",
    "Error",
    "NumericError",
    "distance_correlation",
    "generate",
    "log_confidence_term",
    "risk_report",
    "score",
    "train_and_evaluate",
]


def score(table):
    """PS, PN, PNS and assumption checks for a causal table dict."""
    return json.loads(_c3r.score_json(json.dumps(table)))


def generate(**synth):
    """Synthetic dataset as {"train": {...}, "eval": {...}} with fused x arrays."""
    return _c3r.generate(json.dumps(synth))


def risk_report(scores_c, scores_cbar, labels):
    return json.loads(_c3r.risk_report_json(list(scores_c), list(scores_cbar), list(labels)))


def train_and_evaluate(synth=None, train=None, baseline=False, noise_var=10.0, noise_frac=0.5, trials=5, seed=0):
    report = _c3r.train_and_evaluate_json(
        json.dumps(synth or {}), json.dumps(train or {}), baseline, noise_var, noise_frac, trials, seed
    )
    return json.loads(report)
