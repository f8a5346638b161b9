"""Scoring: coefficient of determination, Pearson correlation, RMSE.

All three mask missing targets (NaN) before scoring and require at least
two observed pairs.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConstantTargetError, DegenerateInputError


def _masked_pair(y, yhat):
    y = np.asarray(y, dtype=float).ravel()
    yhat = np.asarray(yhat, dtype=float).ravel()
    if y.shape != yhat.shape:
        raise DegenerateInputError(
            f"length mismatch: {y.shape[0]} targets vs {yhat.shape[0]} predictions"
        )
    keep = ~(np.isnan(y) | np.isnan(yhat))
    y, yhat = y[keep], yhat[keep]
    if y.size < 2:
        raise DegenerateInputError(
            f"need at least 2 observed values after masking, got {y.size}"
        )
    return y, yhat


def metric_r2(y, yhat) -> float:
    y, yhat = _masked_pair(y, yhat)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise ConstantTargetError("R^2 undefined for a constant target")
    ss_res = float(((y - yhat) ** 2).sum())
    return 1.0 - ss_res / ss_tot

def metric_corr(y, yhat) -> float:
    """Pearson r; NaN when the predictions are constant (association
    undefined), error when the target is."""
    y, yhat = _masked_pair(y, yhat)
    yc = y - y.mean()
    pc = yhat - yhat.mean()
    sy2 = float(yc @ yc)
    sp2 = float(pc @ pc)
    if sy2 == 0.0:
        raise ConstantTargetError("correlation undefined for a constant target")
    if sp2 == 0.0:
        return math.nan
    # one square root, not two: keeps self-correlation at exactly 1.0
    return float(yc @ pc) / math.sqrt(sy2 * sp2)


def metric_rmse(y, yhat) -> float:
    y, yhat = _masked_pair(y, yhat)
    return float(np.sqrt(((y - yhat) ** 2).mean()))


def score_all(y, yhat) -> dict:
    return {
        "r2": metric_r2(y, yhat),
        "corr": metric_corr(y, yhat),
        "rmse": metric_rmse(y, yhat),
    }
