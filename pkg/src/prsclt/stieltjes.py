"""Companion Stieltjes transform at -lambda: fixed point, derivative, tilting factor."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike

from .errors import ConvergenceError
from .spectral import CovarianceModel, mask_overlap

__all__ = ["StieltjesPoint", "solve_fixed_point", "closed_form_identity", "perturbation_factor"]

_DAMPING = 0.5
_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True, slots=True)
class StieltjesPoint:
    """m(-lambda), its derivative in -lambda, and r = m^2 / m'."""

    lam: float
    aspect_ratio: float
    m_value: float
    m_prime: float
    tilting: float
    residual: float = 0.0


def _check_lambda(lam: float) -> None:
    if not (lam > 0.0 and math.isfinite(lam)):
        raise ValueError(f"lambda must be a positive finite number, got {lam}")


def _from_value(lam: float, phi: float, m: float, s: np.ndarray, residual: float) -> StieltjesPoint:
    # 1/m' = 1/m^2 - (phi/p) sum s^2/(1+m s)^2, so r = m^2/m' = 1 - m^2 (phi/p) sum(...)
    tilt = 1.0 - phi * float(np.mean((m * s / (1.0 + m * s)) ** 2)) if s.size else 1.0
    return StieltjesPoint(lam, phi, m, m * m / tilt, tilt, residual)


def _polish(m: float, residual: float, rhs: Callable[[float], float], phi: float, s: np.ndarray) -> tuple[float, float]:
    """A few Newton steps from an already-converged iterate, kept only if they help."""
    for _ in range(3):
        slope = 1.0 / (m * m) - phi * float(np.mean((s / (1.0 + m * s)) ** 2))
        cand = m + (1.0 / m - rhs(m)) / slope
        if not cand > 0.0:
            break
        cand_res = abs(1.0 / cand - rhs(cand))
        if cand_res > residual:
            break
        m, residual = cand, cand_res
    return m, residual


def solve_fixed_point(
    eigenvalues: ArrayLike,
    aspect_ratio: float,
    lam: float,
    tol: float = 1e-12,
    max_iter: int = 10_000,
) -> StieltjesPoint:
    """Solve 1/m = lam + (phi/p) sum_k s_k / (1 + m s_k) by damped iteration.

    Convergence is declared when the absolute residual is at most ``tol``. For very large
    ``lam`` the residual cannot drop below rounding in 1/m; the solver then also accepts a
    stalled iterate whose residual sits at that floor.
    """
    _check_lambda(lam)
    if not aspect_ratio >= 0.0:
        raise ValueError("aspect ratio must be non-negative")
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    s = np.asarray(eigenvalues, dtype=np.float64).ravel()
    if np.any(s < 0.0) or not np.all(np.isfinite(s)):
        raise ValueError("eigenvalues must be finite and non-negative")
    phi = float(aspect_ratio)

    def rhs(m: float) -> float:
        return lam + phi * float(np.mean(s / (1.0 + m * s))) if s.size else lam

    if phi == 0.0 or s.size == 0 or not np.any(s):
        m = 1.0 / lam
        return _from_value(lam, phi, m, s, abs(1.0 / m - rhs(m)))

    m = 1.0 / (lam + phi * float(np.mean(s)))
    residual = abs(1.0 / m - rhs(m))
    for _ in range(max_iter):
        if residual <= tol:
            m, residual = _polish(m, residual, rhs, phi, s)
            return _from_value(lam, phi, m, s, residual)
        nxt = (1.0 - _DAMPING) * m + _DAMPING / rhs(m)
        stalled = abs(nxt - m) <= 4.0 * _EPS * m
        m = nxt
        residual = abs(1.0 / m - rhs(m))
        if stalled and residual <= 64.0 * _EPS * (1.0 / m):
            return _from_value(lam, phi, m, s, residual)
    if residual <= tol:
        return _from_value(lam, phi, m, s, residual)
    raise ConvergenceError("Stieltjes fixed point did not converge", residual, max_iter)


def closed_form_identity(aspect_ratio: float, lam: float) -> StieltjesPoint:
    """Closed-form point for an identity covariance."""
    _check_lambda(lam)
    phi = float(aspect_ratio)
    if phi < 0.0:
        raise ValueError("aspect ratio must be non-negative")
    b = lam + phi - 1.0
    root = math.sqrt(b * b + 4.0 * lam)
    # two algebraically equal forms; pick the one free of cancellation
    m = (root - b) / (2.0 * lam) if b <= 0.0 else 2.0 / (root + b)
    tilt = 1.0 - 4.0 * phi / (root + lam + phi + 1.0) ** 2
    return StieltjesPoint(lam, phi, m, m * m / tilt, tilt, 0.0)


def perturbation_factor(cov: CovarianceModel, point: StieltjesPoint) -> float:
    """(1/p) sum_i phi m' s_i^3 / (1 + s_i m)^2 <u_i, I_m u_i>."""
    s = cov.eigenvalues
    m = point.m_value
    weights = point.aspect_ratio * point.m_prime * s**3 / (1.0 + s * m) ** 2
    return float(np.sum(weights * mask_overlap(cov)) / cov.dim)
