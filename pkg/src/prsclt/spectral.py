"""Covariance models, their eigendecomposition, and the trace summaries built on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray

from .errors import ValidationError

__all__ = [
    "CovarianceModel",
    "CovSpec",
    "SpectrumSummary",
    "ResolventSummary",
    "build_covariance",
    "spectrum_summary",
    "resolvent_summary",
    "resolvent_diagonal",
    "mask_overlap",
]

FloatArray = NDArray[np.float64]
BoolArray = NDArray[np.bool_]

_SYM_TOL = 1e-12
_PSD_TOL = 1e-10
_RECON_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    """Symmetric PSD matrix with its descending eigenpairs and a causal mask.

    Build through :meth:`from_matrix` or :func:`build_covariance`; both validate.
    """

    matrix: FloatArray
    eigenvalues: FloatArray
    eigenvectors: FloatArray
    causal_mask: BoolArray
    diagonal: bool = field(default=False)

    @classmethod
    def from_matrix(cls, matrix: Any, mask: Any) -> CovarianceModel:
        sigma = np.asarray(matrix, dtype=np.float64)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] == 0:
            raise ValidationError(f"shape check failed: expected non-empty square matrix, got {sigma.shape}")
        if not np.all(np.isfinite(sigma)):
            raise ValidationError("finiteness check failed: matrix has NaN or inf entries")
        p = sigma.shape[0]
        mask_arr = np.asarray(mask)
        if mask_arr.shape != (p,):
            raise ValidationError(f"mask check failed: expected length {p}, got shape {mask_arr.shape}")
        if mask_arr.dtype != np.bool_:
            if not np.all(np.isin(mask_arr, (0, 1))):
                raise ValidationError("mask check failed: entries must be 0/1")
            mask_arr = mask_arr.astype(bool)

        scale = float(np.max(np.abs(sigma)))
        asym = float(np.max(np.abs(sigma - sigma.T)))
        if asym > _SYM_TOL * max(scale, np.finfo(float).tiny):
            raise ValidationError(f"symmetry check failed: max |S - S^T| = {asym:.3e}")
        sigma = 0.5 * (sigma + sigma.T)

        off = sigma - np.diag(np.diag(sigma))
        is_diag = not np.any(off)
        if is_diag:
            vals = np.diag(sigma).copy()
            vecs = np.eye(p)
        else:
            vals, vecs = np.linalg.eigh(sigma)
        order = np.argsort(-vals, kind="stable")
        vals = vals[order]
        vecs = vecs[:, order]

        top = max(float(vals[0]), 0.0)
        if vals[-1] < -_PSD_TOL * top or (top == 0.0 and vals[-1] < 0.0):
            raise ValidationError(f"PSD check failed: smallest eigenvalue {vals[-1]:.3e} (largest {top:.3e})")
        vals = np.where(vals < 0.0, 0.0, vals)

        if not is_diag:
            recon = (vecs * vals) @ vecs.T
            norm = float(np.linalg.norm(sigma))
            if norm > 0.0 and float(np.linalg.norm(sigma - recon)) / norm > _RECON_TOL:
                raise ValidationError("reconstruction check failed: eigenpairs do not rebuild the matrix")

        return cls(_frozen(sigma), _frozen(vals), _frozen(vecs), _frozen(mask_arr), is_diag)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def m(self) -> int:
        return int(np.count_nonzero(self.causal_mask))

    @property
    def is_identity(self) -> bool:
        return self.diagonal and bool(np.all(self.eigenvalues == 1.0))

    @cached_property
    def sqrt(self) -> FloatArray:
        """Symmetric square root U diag(sqrt(sigma)) U^T."""
        if self.diagonal:
            return _frozen(np.diag(np.sqrt(np.diag(self.matrix))))
        root = (self.eigenvectors * np.sqrt(self.eigenvalues)) @ self.eigenvectors.T
        return _frozen(0.5 * (root + root.T))

    @cached_property
    def _square(self) -> FloatArray:
        return _frozen(self.matrix @ self.matrix)

    @cached_property
    def _cube(self) -> FloatArray:
        return _frozen(self._square @ self.matrix)

    def power(self, j: int) -> FloatArray:
        """Explicit matrix power for j in {0, 1, 2, 3}."""
        if j == 0:
            return np.eye(self.dim)
        if j == 1:
            return self.matrix
        if j == 2:
            return self._square
        if j == 3:
            return self._cube
        raise ValueError("power supports j <= 3")

    def spectral_matrix(self, values: FloatArray) -> FloatArray:
        """U diag(values) U^T for a vector of per-eigenvalue weights."""
        values = np.asarray(values, dtype=np.float64)
        if self.diagonal:
            out = np.zeros((self.dim, self.dim))
            out[self._diag_perm, self._diag_perm] = values
            return out
        return (self.eigenvectors * values) @ self.eigenvectors.T

    def spectral_apply(self, values: FloatArray, vec: FloatArray) -> FloatArray:
        """U diag(values) U^T vec without forming the matrix."""
        return self.eigenvectors @ (np.asarray(values) * (self.eigenvectors.T @ vec))

    @cached_property
    def _diag_perm(self) -> NDArray[np.intp]:
        return np.argmax(self.eigenvectors, axis=0)

    def inverse_apply(self, vec: FloatArray) -> FloatArray:
        """Sigma^{-1} vec; raises when Sigma is singular."""
        if self.eigenvalues[-1] <= 1e-12 * self.eigenvalues[0]:
            raise ValidationError("matrix is singular; its inverse is required here")
        return self.spectral_apply(1.0 / self.eigenvalues, vec)


@dataclass(frozen=True, slots=True)
class CovSpec:
    """Serializable recipe for :func:`build_covariance`."""

    kind: str
    p: int | None
    m: int | None = None
    rho: float = 0.0
    block_size: int | None = None
    path: str | None = None
    mask: str = "first"
    mask_seed: int = 0
    mask_path: str | None = None

    def build(self) -> CovarianceModel:
        return build_covariance(
            self.kind,
            self.p,
            m=self.m,
            rho=self.rho,
            block_size=self.block_size,
            path=self.path,
            mask=self.mask,
            mask_seed=self.mask_seed,
            mask_path=self.mask_path,
        )

    def to_dict(self) -> dict[str, Any]:
        return {k: getattr(self, k) for k in self.__slots__}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CovSpec:
        unknown = set(data) - set(cls.__slots__)
        if unknown:
            raise ValueError(f"unknown covariance fields: {sorted(unknown)}")
        if "kind" not in data:
            raise ValueError("covariance.kind is required")
        return cls(**data)


def _ar1(p: int, rho: float) -> FloatArray:
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :]).astype(np.float64)


def _read_matrix(path: str | Path) -> FloatArray:
    try:
        data = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2, encoding="utf-8")
    except (OSError, ValueError) as exc:
        raise ValidationError(f"could not read matrix file {path}: {exc}") from exc
    return data


def _read_mask(path: str | Path) -> BoolArray:
    try:
        data = np.loadtxt(path, dtype=np.float64, ndmin=1, encoding="utf-8")
    except (OSError, ValueError) as exc:
        raise ValidationError(f"could not read mask file {path}: {exc}") from exc
    if not np.all(np.isin(data, (0.0, 1.0))):
        raise ValidationError("mask file entries must be 0 or 1")
    return data.astype(bool)


def build_covariance(
    kind: str,
    p: int | None,
    *,
    m: int | None = None,
    rho: float = 0.0,
    block_size: int | None = None,
    path: str | Path | None = None,
    mask: str = "first",
    mask_seed: int = 0,
    mask_path: str | Path | None = None,
) -> CovarianceModel:
    """Construct a validated covariance model.

    ``kind`` is one of ``identity``, ``ar1``, ``block_ar1`` or ``from_file``; ``mask`` is
    ``first`` (the first m coordinates) or ``random`` (m coordinates drawn with ``mask_seed``).
    """
    if kind == "from_file":
        if path is None:
            raise ValueError("from_file requires a path")
        sigma = _read_matrix(path)
        if p is not None and sigma.shape[0] != p:
            raise ValueError(f"file has dimension {sigma.shape[0]}, expected p={p}")
        p = sigma.shape[0]
    else:
        if p is None or int(p) < 1:
            raise ValueError("p must be a positive integer")
        p = int(p)
        if kind in ("ar1", "block_ar1") and not abs(rho) < 1.0:
            raise ValueError("|rho| must be < 1")
        if kind == "identity":
            sigma = np.eye(p)
        elif kind == "ar1":
            sigma = _ar1(p, rho)
        elif kind == "block_ar1":
            if block_size is None or block_size < 1:
                raise ValueError("block_ar1 requires block_size >= 1")
            sigma = np.zeros((p, p))
            for start in range(0, p, block_size):
                stop = min(start + block_size, p)
                sigma[start:stop, start:stop] = _ar1(stop - start, rho)
        else:
            raise ValueError(f"unknown covariance kind {kind!r}")

    if mask_path is not None:
        causal = _read_mask(mask_path)
        if causal.shape != (p,):
            raise ValueError(f"mask file has {causal.size} entries, expected {p}")
        if m is not None and int(causal.sum()) != m:
            raise ValueError(f"mask file has {int(causal.sum())} causal entries, expected m={m}")
    else:
        if m is None:
            raise ValueError("m is required unless a mask file is given")
        if not 0 <= m <= p:
            raise ValueError(f"m must satisfy 0 <= m <= p, got m={m}, p={p}")
        causal = np.zeros(p, dtype=bool)
        if mask == "first":
            causal[:m] = True
        elif mask == "random":
            rng = np.random.default_rng(mask_seed)
            causal[rng.choice(p, size=m, replace=False)] = True
        else:
            raise ValueError(f"unknown mask rule {mask!r}")
    return CovarianceModel.from_matrix(sigma, causal)


@dataclass(frozen=True, slots=True)
class SpectrumSummary:
    """omega_i = Tr(S^i)/p and gamma_j = Tr(S^j I_m)/p for i, j = 1..3."""

    omega: tuple[float, float, float]
    gamma: tuple[float, float, float]
    m_over_p: float


def spectrum_summary(cov: CovarianceModel) -> SpectrumSummary:
    p = cov.dim
    s = cov.eigenvalues
    omega = tuple(float(np.sum(s**i) / p) for i in (1, 2, 3))
    mask = cov.causal_mask
    if cov.diagonal:
        d = np.diag(cov.matrix)
        gamma = tuple(float(np.sum(d[mask] ** j) / p) for j in (1, 2, 3))
    else:
        gamma = tuple(float(np.sum(np.diag(cov.power(j))[mask]) / p) for j in (1, 2, 3))
    return SpectrumSummary(omega, gamma, cov.m / p)  # type: ignore[arg-type]


@dataclass(frozen=True, slots=True)
class ResolventSummary:
    """Trace ratios of powers of (I + m S)^{-1} and the constants derived from them."""

    pi: tuple[float, float]
    xi: tuple[float, float]
    rho: tuple[float, float, float]
    ell: tuple[float, float]
    eth: tuple[float, float]
    g_factor: float
    h_factor: float


def resolvent_diagonal(cov: CovarianceModel, m_value: float, power: int) -> FloatArray:
    """Diagonal of (I + m S)^{-power} computed from the eigenpairs."""
    return _spectral_diagonal(cov, (1.0 + m_value * cov.eigenvalues) ** (-power))


def _spectral_diagonal(cov: CovarianceModel, w: FloatArray) -> FloatArray:
    if cov.diagonal:
        out = np.empty(cov.dim)
        out[cov._diag_perm] = w
        return out
    return (cov.eigenvectors**2) @ w


def resolvent_summary(
    cov: CovarianceModel,
    m_value: float,
    m_prime: float,
    aspect_ratio: float,
    lam: float,
) -> ResolventSummary:
    """Evaluate pi, xi, rho, ell, eth, g and h at a Stieltjes value ``m_value``.

    ``ell``/``eth`` share their formulas with ``pi``/``xi``; they are reported under both
    names because the ridge laws evaluate them at the training-sample Stieltjes value.
    """
    if not m_value > 0.0:
        raise ValueError("stieltjes value must be positive")
    if not m_prime > 0.0:
        raise ValueError("stieltjes derivative must be positive")
    p = cov.dim
    s = cov.eigenvalues
    mask = cov.causal_mask
    pi1, pi2 = (float(np.sum((1.0 + m_value * s) ** (-i)) / p) for i in (1, 2))
    xi1, xi2 = (float(np.sum(resolvent_diagonal(cov, m_value, i)[mask]) / p) for i in (1, 2))
    mv = m_value
    # The rho ratios are differences of resolvent traces divided by powers of m. Expanding
    # them leaves cancellation-free spectral weights, which stay accurate as m -> 0.
    rho0 = float(np.sum(_spectral_diagonal(cov, s**2 / (1.0 + mv * s))[mask]) / p)
    rho1 = float(np.sum((s / (1.0 + mv * s)) ** 2) / p)
    rho2 = float(np.sum(_spectral_diagonal(cov, s**3 / (1.0 + mv * s) ** 2)[mask]) / p)
    g = 1.0 - (1.0 - pi1) * aspect_ratio
    h = aspect_ratio * (pi1 - (lam * m_prime / mv) * (pi1 - pi2))
    return ResolventSummary((pi1, pi2), (xi1, xi2), (rho0, rho1, rho2), (pi1, pi2), (xi1, xi2), g, h)


def mask_overlap(cov: CovarianceModel) -> FloatArray:
    """<u_i, I_m u_i> for every eigenvector u_i."""
    return np.sum(cov.eigenvectors[cov.causal_mask] ** 2, axis=0)
