"""Pearson correlation matrix and variance inflation factors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError

VIF_CAP = 1e6


@dataclass(frozen=True)
class VifResult:
    values: np.ndarray
    flagged: np.ndarray  # True where the VIF hit the cap (near-perfect collinearity)


def _check(features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise DomainError("features must be a 2-D matrix")
    if x.shape[0] < 3:
        raise DomainError(f"need at least 3 rows for collinearity diagnostics, got {x.shape[0]}")
    return x


def correlation_matrix(features) -> np.ndarray:
    """Pearson correlations; rows/columns of constant features are NaN."""
    x = _check(features)
    xc = x - x.mean(axis=0)
    ss = np.sqrt((xc * xc).sum(axis=0))
    const = ss == 0
    ss_safe = np.where(const, 1.0, ss)
    u = xc / ss_safe
    r = u.T @ u
    r = 0.5 * (r + r.T)
    np.fill_diagonal(r, 1.0)
    r[const, :] = np.nan
    r[:, const] = np.nan
    return r


def vif(features) -> VifResult:
    """VIF_i = 1 / (1 - R_i^2) from regressing column i on the others.

    Uses the identity VIF_i = (R^-1)_ii, evaluated through an eigendecomposition
    of the correlation matrix so exact collinearity shows up as a vanishing
    eigenvalue instead of a failed inverse. Values above ``VIF_CAP`` are capped
    and flagged; constant columns get NaN.
    """
    r = correlation_matrix(features)
    p = r.shape[0]
    values = np.full(p, np.nan)
    flagged = np.zeros(p, dtype=bool)
    ok = ~np.isnan(np.diag(r))
    if ok.sum() == 1:
        values[ok] = 1.0
        return VifResult(values, flagged)
    if not ok.any():
        return VifResult(values, flagged)
    evals, evecs = np.linalg.eigh(r[np.ix_(ok, ok)])
    evals = np.maximum(evals, 1e-15)
    raw = (evecs * evecs / evals).sum(axis=1)
    capped = raw > VIF_CAP
    values[ok] = np.where(capped, VIF_CAP, np.maximum(raw, 1.0))
    flagged[ok] = capped
    return VifResult(values, flagged)
