"""Marginal, reference-panel ridge and ridge score estimators, predictions, and accuracy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import cho_factor, cho_solve

__all__ = [
    "Dataset",
    "EffectVector",
    "Estimate",
    "fit_marginal",
    "fit_reference_ridge",
    "fit_ridge",
    "predict",
    "accuracy",
    "cosine_accuracy",
]

FloatArray = NDArray[np.float64]
EntryDist = Literal["gaussian", "rademacher", "genotype"]
EstimatorKind = Literal["marginal", "reference_ridge", "ridge"]


@dataclass(frozen=True, slots=True)
class Dataset:
    """A design matrix, optionally with a response (reference panels have none)."""

    design: FloatArray
    response: FloatArray | None = None
    entry_dist: EntryDist = "gaussian"
    maf: float | None = None

    def __post_init__(self) -> None:
        if self.design.ndim != 2:
            raise ValueError("design must be a 2-d array")
        if self.response is not None and self.response.shape != (self.design.shape[0],):
            raise ValueError(
                f"response length {self.response.shape} does not match {self.design.shape[0]} rows"
            )

    @property
    def n(self) -> int:
        return int(self.design.shape[0])

    @property
    def p(self) -> int:
        return int(self.design.shape[1])

    def with_response(self, response: FloatArray) -> Dataset:
        return Dataset(self.design, np.asarray(response, dtype=np.float64), self.entry_dist, self.maf)


@dataclass(frozen=True, slots=True)
class EffectVector:
    """True effects, zero off the causal mask."""

    beta: FloatArray
    causal_mask: NDArray[np.bool_]

    def __post_init__(self) -> None:
        if self.beta.shape != self.causal_mask.shape:
            raise ValueError("beta and causal_mask must have the same length")
        if np.any(self.beta[~self.causal_mask] != 0.0):
            raise ValueError("beta must be zero off the causal mask")


@dataclass(frozen=True, slots=True)
class Estimate:
    beta_hat: FloatArray
    kind: EstimatorKind
    lam: float | None = None

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.beta_hat)):
            raise ValueError("estimate has non-finite entries")


def _require_response(data: Dataset, role: str) -> FloatArray:
    if data.response is None:
        raise ValueError(f"{role} dataset has no response")
    return data.response


def _check_lambda(lam: float) -> None:
    if not lam > 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")


def fit_marginal(train: Dataset) -> Estimate:
    """X^T y / n."""
    y = _require_response(train, "training")
    if train.n < 1:
        raise ValueError("training set is empty")
    return Estimate(train.design.T @ y / train.n, "marginal")


def _spd_solve(gram: FloatArray, shift: float, rhs: FloatArray) -> FloatArray:
    a = gram.copy()
    a[np.diag_indices_from(a)] += shift
    return cho_solve(cho_factor(a, lower=True, check_finite=False), rhs, check_finite=False)


def fit_reference_ridge(xty: FloatArray, n: int, panel: Dataset, lam: float) -> Estimate:
    """(W^T W + n_w lam I)^{-1} X^T y from summary statistics and a reference panel.

    ``n`` is carried with the summary statistic for bookkeeping; the solve does not use it.
    """
    _check_lambda(lam)
    xty = np.asarray(xty, dtype=np.float64)
    if xty.shape != (panel.p,):
        raise ValueError("summary statistic length does not match panel width")
    if n < 1:
        raise ValueError("n must be positive")
    w = panel.design
    return Estimate(_spd_solve(w.T @ w, panel.n * lam, xty), "reference_ridge", lam)


def fit_ridge(train: Dataset, lam: float) -> Estimate:
    """(X^T X + n lam I)^{-1} X^T y."""
    _check_lambda(lam)
    y = _require_response(train, "training")
    x = train.design
    return Estimate(_spd_solve(x.T @ x, train.n * lam, x.T @ y), "ridge", lam)


def predict(est: Estimate, z: FloatArray) -> float:
    z = np.asarray(z, dtype=np.float64)
    if z.shape != est.beta_hat.shape:
        raise ValueError(f"z has shape {z.shape}, expected {est.beta_hat.shape}")
    return float(z @ est.beta_hat)


def cosine_accuracy(y: FloatArray, y_hat: FloatArray) -> tuple[float, bool]:
    """Cosine between observed and predicted responses, and a flag set when y_hat is zero."""
    ny = float(np.linalg.norm(y))
    if ny == 0.0:
        raise ValueError("test response has zero norm")
    nh = float(np.linalg.norm(y_hat))
    if nh == 0.0:
        return 0.0, True
    return float(np.clip((y @ y_hat) / (ny * nh), -1.0, 1.0)), False


def accuracy(est: Estimate, test: Dataset) -> float:
    """Out-of-sample accuracy A; zero when every prediction is zero."""
    y = _require_response(test, "test")
    return cosine_accuracy(y, test.design @ est.beta_hat)[0]
