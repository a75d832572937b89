"""Distribution diagnostics for replication batches against analytic normal laws."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Any, Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import ndtr

__all__ = [
    "KsReport",
    "normal_cdf",
    "ks_to_standard_normal",
    "ks_to_fitted_normal",
    "ks_threshold",
    "coverage",
    "variance_ratio",
]

FloatArray = NDArray[np.float64]


@dataclass(frozen=True, slots=True)
class KsReport:
    statistic: float
    sample_size: int
    comparator: Literal["standard_normal", "fitted_normal"]
    pass_threshold: float

    @property
    def passed(self) -> bool:
        return self.statistic <= self.pass_threshold

    def to_dict(self) -> dict[str, Any]:
        return asdict(self) | {"passed": self.passed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def normal_cdf(x: ArrayLike) -> FloatArray:
    """Standard normal CDF through the complementary error function."""
    return ndtr(np.asarray(x, dtype=np.float64))


def ks_threshold(sample_size: int, be_term: float = 0.0) -> float:
    """Berry-Esseen allowance plus the 1.63/sqrt(R) KS sampling band."""
    return be_term + 1.63 / math.sqrt(sample_size)


def _prepare(sample: ArrayLike) -> FloatArray:
    x = np.asarray(sample, dtype=np.float64).ravel()
    if np.any(np.isnan(x)):
        raise ValueError("sample contains NaN")
    if x.size < 20:
        raise ValueError("KS comparison needs at least 20 values")
    return np.sort(x)


def _sup_distance(sorted_x: FloatArray) -> float:
    r = sorted_x.size
    cdf = normal_cdf(sorted_x)
    i = np.arange(1, r + 1, dtype=np.float64)
    return float(max(np.max(i / r - cdf), np.max(cdf - (i - 1.0) / r)))


def ks_to_standard_normal(standardized: ArrayLike, be_term: float = 0.0) -> KsReport:
    """Sup distance between the empirical CDF and Phi."""
    x = _prepare(standardized)
    return KsReport(_sup_distance(x), int(x.size), "standard_normal", ks_threshold(x.size, be_term))


def ks_to_fitted_normal(sample: ArrayLike, be_term: float = 0.0) -> KsReport:
    """Sup distance after standardizing by the sample's own mean and sd (a shape-only check)."""
    x = _prepare(sample)
    sd = float(np.std(x, ddof=1))
    if sd == 0.0:
        return KsReport(1.0, int(x.size), "fitted_normal", ks_threshold(x.size, be_term))
    return KsReport(
        _sup_distance((x - float(np.mean(x))) / sd), int(x.size), "fitted_normal", ks_threshold(x.size, be_term)
    )


def coverage(raw: ArrayLike, intervals: tuple[float, float] | Sequence[tuple[float, float]] | ArrayLike) -> float:
    """Share of ``raw`` values inside their intervals (one shared interval or one per value)."""
    x = np.asarray(raw, dtype=np.float64).ravel()
    bounds = np.asarray(intervals, dtype=np.float64)
    if bounds.shape == (2,):
        lo, hi = bounds
    elif bounds.ndim == 2 and bounds.shape == (x.size, 2):
        lo, hi = bounds[:, 0], bounds[:, 1]
    else:
        raise ValueError(f"intervals of shape {bounds.shape} do not align with {x.size} values")
    if x.size == 0:
        raise ValueError("coverage of an empty sample is undefined")
    return float(np.mean((x >= lo) & (x <= hi)))


def variance_ratio(raw: ArrayLike, analytic_sd: float) -> float:
    """Sample variance (ddof=1) over the analytic variance."""
    x = np.asarray(raw, dtype=np.float64).ravel()
    if x.size < 2:
        raise ValueError("variance ratio needs at least 2 values")
    if not analytic_sd > 0.0:
        raise ValueError("analytic sd must be positive")
    return float(np.var(x, ddof=1)) / analytic_sd**2
