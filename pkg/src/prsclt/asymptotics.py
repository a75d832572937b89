"""Limiting Gaussian laws for predicted values and out-of-sample accuracy.

Conditional laws (``*_individual``) take the realized test row ``z`` and effects ``beta``;
population laws (``*_accuracy``, :func:`quadratic_form`) take only the covariance model and
the population parameters. Functions ending in ``_identity`` evaluate the closed forms that
hold for an identity covariance and exist as an independent cross-check of the general paths.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.special import ndtri

from .errors import DegenerateLimitError
from .estimators import EffectVector
from .spectral import CovarianceModel, resolvent_summary, spectrum_summary
from .stieltjes import StieltjesPoint, closed_form_identity, perturbation_factor, solve_fixed_point

__all__ = [
    "PopulationParams",
    "GaussianLimit",
    "marginal_individual",
    "quadratic_form",
    "marginal_accuracy",
    "marginal_accuracy_identity",
    "reference_individual",
    "reference_accuracy",
    "reference_accuracy_identity",
    "ridge_individual",
    "ridge_individual_identity",
    "ridge_accuracy",
    "ridge_accuracy_identity",
    "naive_accuracy",
    "confidence_interval",
]

FloatArray = NDArray[np.float64]


@dataclass(frozen=True, slots=True)
class PopulationParams:
    """Sample sizes, heritabilities and moment parameters shared by every law.

    ``effect_kurtosis`` is p^2 E(beta^4) / sigma_beta^4 for nonzero effects. ``sigma_eps2`` and
    ``sigma_eps_z2`` override the heritability-derived noise variances when given.
    """

    n: int
    n_z: int
    p: int
    m: int
    h2: float
    h2_z: float
    n_w: int | None = None
    sigma_beta2: float = 1.0
    entry_kurtosis: float = 3.0
    effect_kurtosis: float = 3.0
    lam: float | None = None
    sigma_eps2: float | None = None
    sigma_eps_z2: float | None = None

    def __post_init__(self) -> None:
        for name in ("n", "n_z", "p"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if not 0 <= self.m <= self.p:
            raise ValueError("m must satisfy 0 <= m <= p")
        if self.n_w is not None and self.n_w < 1:
            raise ValueError("n_w must be a positive integer")
        for name in ("h2", "h2_z"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {v}")
        if not self.sigma_beta2 > 0.0:
            raise ValueError("sigma_beta2 must be positive")
        if self.entry_kurtosis < 1.0 or self.effect_kurtosis < 1.0:
            raise ValueError("kurtosis values must be at least 1")
        if self.lam is not None and not self.lam > 0.0:
            raise ValueError("lam must be positive")
        for name in ("sigma_eps2", "sigma_eps_z2"):
            v = getattr(self, name)
            if v is not None and v < 0.0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def phi_n(self) -> float:
        return self.p / self.n

    @property
    def phi_d(self) -> float:
        return self.n / self._nw()

    @property
    def phi_w(self) -> float:
        return self.p / self._nw()

    def _nw(self) -> int:
        if self.n_w is None:
            raise ValueError("n_w is required for reference-panel laws")
        return self.n_w

    @property
    def optimal_lambda(self) -> float:
        if self.h2 == 0.0:
            raise ValueError("optimal lambda is undefined at zero heritability")
        return self.phi_n * (1.0 - self.h2) / self.h2

    def noise_variance(self, gamma1: float) -> float:
        """sigma_eps^2 = sigma_beta^2 gamma_1 (1 - h^2) / h^2 unless overridden."""
        return self._noise(self.sigma_eps2, self.h2, gamma1)

    def noise_variance_z(self, gamma1: float) -> float:
        return self._noise(self.sigma_eps_z2, self.h2_z, gamma1)

    def _noise(self, override: float | None, h2: float, gamma1: float) -> float:
        if override is not None:
            return override
        if h2 == 0.0:
            return math.inf
        return self.sigma_beta2 * gamma1 * (1.0 - h2) / h2

    def replace(self, **changes: Any) -> PopulationParams:
        data = asdict(self)
        data.update(changes)
        return PopulationParams(**data)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PopulationParams:
        allowed = set(cls.__dataclass_fields__)
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown population fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class GaussianLimit:
    """Limiting normal law of a raw statistic: N(center, sd^2).

    ``scaling`` names the normalizer, ``be_rate`` the Berry-Esseen rate of the source result.
    """

    center: float
    sd: float
    scaling: str
    be_rate: str
    eta: float | None = None
    degenerate: bool = False
    diagnostics: dict[str, float] = field(default_factory=dict, compare=False)
    note: str = ""


def _limit(center: float, var: float, scale: float, scaling: str, rate: str, **kw: Any) -> GaussianLimit:
    sd = math.sqrt(var / scale) if var >= 0.0 and math.isfinite(var) else math.nan
    degenerate = not (math.isfinite(center) and math.isfinite(sd) and sd > 0.0)
    if degenerate:
        center = center if math.isfinite(center) else 0.0
        sd = 0.0
        kw.setdefault("note", "zero or undefined spread")
    return GaussianLimit(center, sd, scaling, rate, degenerate=degenerate, **kw)


def _degenerate(scaling: str, rate: str, reason: str, center: float = 0.0) -> GaussianLimit:
    return GaussianLimit(center, 0.0, scaling, rate, None, True, {}, reason)


def _accuracy_limit(center: float, eta: float, n_z: int, rate: str, **diag: float) -> GaussianLimit:
    if not (math.isfinite(center) and math.isfinite(eta) and eta > 0.0):
        return _degenerate("sqrt(eta*n_z)", rate, "non-finite")
    return GaussianLimit(center, 1.0 / math.sqrt(eta * n_z), "sqrt(eta*n_z)", rate, eta, False, dict(diag))


def _vec(x: Any, p: int, name: str) -> FloatArray:
    v = np.asarray(x, dtype=np.float64)
    if v.shape != (p,):
        raise ValueError(f"{name} has shape {v.shape}, expected ({p},)")
    return v


def _beta(beta: EffectVector | FloatArray, p: int) -> FloatArray:
    return _vec(beta.beta if isinstance(beta, EffectVector) else beta, p, "beta")


def _gamma1(cov: CovarianceModel) -> float:
    return float(np.sum(np.diag(cov.matrix)[cov.causal_mask]) / cov.dim)


def _check_dims(cov: CovarianceModel, params: PopulationParams) -> None:
    if cov.dim != params.p:
        raise ValueError(f"covariance dimension {cov.dim} does not match p={params.p}")
    if cov.m != params.m:
        raise ValueError(f"covariance mask has {cov.m} entries, params say m={params.m}")


def _resolve_point(
    cov: CovarianceModel, phi: float, lam: float, point: StieltjesPoint | None
) -> StieltjesPoint:
    if point is None:
        return solve_fixed_point(cov.eigenvalues, phi, lam)
    if not math.isclose(point.lam, lam, rel_tol=1e-12) or not math.isclose(
        point.aspect_ratio, phi, rel_tol=1e-12
    ):
        raise ValueError(
            f"Stieltjes point solved at (phi={point.aspect_ratio}, lam={point.lam}), "
            f"law needs (phi={phi}, lam={lam})"
        )
    return point


def _masked_block(mat: FloatArray, mask: NDArray[np.bool_]) -> FloatArray:
    return mat[np.ix_(mask, mask)]


def _quad_sums(mat: FloatArray, mask: NDArray[np.bool_]) -> tuple[float, float]:
    """sum_i (A I_m)_{ii}^2 and Tr((A I_m)^2) for symmetric A."""
    block = _masked_block(mat, mask)
    return float(np.sum(np.diag(block) ** 2)), float(np.sum(block * block.T))


# ---------------------------------------------------------------- marginal estimator


def marginal_individual(
    cov: CovarianceModel, z: Any, beta: EffectVector | FloatArray, params: PopulationParams
) -> GaussianLimit:
    """Law of z^T beta_M given (z, beta); center z^T S beta, sd sigma_M / sqrt(n)."""
    _check_dims(cov, params)
    p = cov.dim
    zv, bv = _vec(z, p, "z"), _beta(beta, p)
    a = cov.sqrt @ zv
    b = cov.sqrt @ bv
    center = float(a @ b)
    s2e = params.noise_variance(_gamma1(cov))
    var = (
        (params.entry_kurtosis - 3.0) * float(np.sum(a**2 * b**2))
        + float(a @ a) * (float(b @ b) + s2e)
        + 2.0 * center**2
    )
    return _limit(center, var, params.n, "sqrt(n)", "n^-1/2")


def quadratic_form(cov: CovarianceModel, params: PopulationParams) -> GaussianLimit:
    """Law of beta^T S beta over random effects; sd sigma_Q / sqrt(p)."""
    _check_dims(cov, params)
    if cov.m == 0:
        return _degenerate("sqrt(p)", "m^-1/5", "empty mask")
    p = cov.dim
    s2 = params.sigma_beta2
    center = s2 * _gamma1(cov)
    diag_sq, tr_sq = _quad_sums(cov.matrix, cov.causal_mask)
    var = p * (params.effect_kurtosis - 3.0) * s2**2 / p**2 * diag_sq + 2.0 * s2**2 * tr_sq / p
    return _limit(center, var, p, "sqrt(p)", "m^-1/5")


def _kappas(params: PopulationParams) -> dict[str, float]:
    n, nz, p, m = params.n, params.n_z, params.p, params.m
    k1 = max(m / p, p / n)
    k2 = max(k1, nz * m / (n * p))
    k3 = max(k2, nz * m / p**2)
    return {"kappa1": k1, "kappa2": k2, "kappa3": k3}


def marginal_accuracy(
    cov: CovarianceModel, params: PopulationParams, homogeneous_ld: bool = False
) -> GaussianLimit:
    """Law of A(beta_M). With ``homogeneous_ld`` every gamma_i is replaced by (m/p) omega_i."""
    _check_dims(cov, params)
    rate = "max(n_z^-1/2, n^-1/2, m^-1/5)"
    if params.h2 == 0.0 or params.h2_z == 0.0 or cov.m == 0:
        return _degenerate("sqrt(eta*n_z)", rate, "no signal")
    ss = spectrum_summary(cov)
    w1, w2, w3 = ss.omega
    g1, g2, g3 = (ss.m_over_p * w for w in ss.omega) if homogeneous_ld else ss.gamma
    n, nz, p = params.n, params.n_z, params.p
    h2, hz2, kb = params.h2, params.h2_z, params.effect_kurtosis

    inner = g1 / h2 * (p / n) * w2 + g3
    center = math.sqrt(hz2) * g2 / math.sqrt(inner * g1)
    q1 = g1 / hz2 * inner
    q2 = g1 / h2 * (nz / n) * g3 + 2.0 * g2**2 * (nz / n + 1.0)
    diag_sq, tr_sq = _quad_sums(cov.power(2), cov.causal_mask)
    q3 = nz * ((kb - 3.0) / p**2 * diag_sq + 2.0 / p**2 * tr_sq)
    eta = q1 / (q1 + q2 + q3)
    return _accuracy_limit(center, eta, nz, rate, q1=q1, q2=q2, q3=q3, **_kappas(params))


def marginal_accuracy_identity(params: PopulationParams) -> GaussianLimit:
    """Closed form of :func:`marginal_accuracy` for an identity covariance."""
    rate = "max(n_z^-1/2, n^-1/2, m^-2delta)"
    if params.h2 == 0.0 or params.h2_z == 0.0 or params.m == 0:
        return _degenerate("sqrt(eta*n_z)", rate, "no signal")
    n, nz, p, m = params.n, params.n_z, params.p, params.m
    h2, hz2 = params.h2, params.h2_z
    center = math.sqrt(hz2) / math.sqrt(p / (n * h2) + 1.0)
    num = n * h2 + p
    den = nz * hz2 + n * h2 + p + 2.0 * (nz + n) * h2 * hz2 + n * nz * (params.effect_kurtosis - 1.0) * h2 * hz2 / m
    return _accuracy_limit(center, num / den, nz, rate)


# ---------------------------------------------------------------- reference-panel ridge


def _lam(params: PopulationParams) -> float:
    if params.lam is None:
        raise ValueError("params.lam is required for ridge-type laws")
    return params.lam


def reference_individual(
    cov: CovarianceModel,
    z: Any,
    beta: EffectVector | FloatArray,
    params: PopulationParams,
    point: StieltjesPoint | None = None,
) -> GaussianLimit:
    """Law of z^T beta_W(lam) given (z, beta); the point must be solved at phi_w."""
    _check_dims(cov, params)
    lam = _lam(params)
    pt = _resolve_point(cov, params.phi_w, lam, point)
    p = cov.dim
    zv, bv = _vec(z, p, "z"), _beta(beta, p)
    s = cov.eigenvalues
    mw = pt.m_value
    zu = cov.eigenvectors.T @ zv
    bu = cov.eigenvectors.T @ bv
    lin = float(np.sum(zu * bu * s / (1.0 + mw * s)))
    quad_z = float(np.sum(zu**2 * s / (1.0 + mw * s) ** 2))
    signal = float(np.sum(bu**2 * s)) + params.noise_variance(_gamma1(cov))
    fac = params.phi_d / lam
    center = fac * lin
    var = fac**2 * (2.0 * lin**2 + quad_z * signal / pt.tilting)
    return _limit(center, var, params.n, "sqrt(n)", "n^-1/2")


def reference_accuracy(
    cov: CovarianceModel, params: PopulationParams, point: StieltjesPoint | None = None
) -> GaussianLimit:
    """Law of A(beta_W(lam)); the point must be solved at phi_w."""
    _check_dims(cov, params)
    rate = "n^-1/5"
    lam = _lam(params)
    pt = _resolve_point(cov, params.phi_w, lam, point)
    if params.h2 == 0.0 or params.h2_z == 0.0 or cov.m == 0:
        return _degenerate("sqrt(eta*n_z)", rate, "no signal")
    ss = spectrum_summary(cov)
    rs = resolvent_summary(cov, pt.m_value, pt.m_prime, pt.aspect_ratio, lam)
    g1 = ss.gamma[0]
    r0, r1, r2 = rs.rho
    r = pt.tilting
    n, nz, p = params.n, params.n_z, params.p
    h2, hz2, kb = params.h2, params.h2_z, params.effect_kurtosis

    center = math.sqrt(r) * r0 * math.sqrt(hz2) / math.sqrt(p / (n * h2) * g1**2 * r1 + g1 * r2)
    q1 = (p * r1 * g1 / h2 + n * r2) * g1 / hz2 / r
    q2 = nz * (g1 / h2) * r2 / r + 2.0 * (n + nz) * r0**2
    s = cov.eigenvalues
    big_m = cov.spectral_matrix(s**2 / (1.0 + pt.m_value * s))
    diag_sq, tr_sq = _quad_sums(big_m, cov.causal_mask)
    tr_full = float(np.sum((s**2 / (1.0 + pt.m_value * s)) ** 2))
    nfac = perturbation_factor(cov, pt)
    q3 = n * nz * ((kb - 3.0) / p**2 * diag_sq + 2.0 / p**2 * (tr_sq + nfac * tr_full))
    eta = q1 / (q1 + q2 + q3)
    return _accuracy_limit(center, eta, nz, rate, q1=q1, q2=q2, q3=q3, n_factor=nfac, tilting=r)


def reference_accuracy_identity(params: PopulationParams) -> GaussianLimit:
    """Closed form of :func:`reference_accuracy` for an identity covariance."""
    rate = "n^-1/5"
    lam = _lam(params)
    if params.h2 == 0.0 or params.h2_z == 0.0 or params.m == 0:
        return _degenerate("sqrt(eta*n_z)", rate, "no signal")
    r = closed_form_identity(params.phi_w, lam).tilting
    n, nz, p, m = params.n, params.n_z, params.p, params.m
    h2, hz2 = params.h2, params.h2_z
    center = math.sqrt(r) * math.sqrt(hz2) / math.sqrt(p / (n * h2) + 1.0)
    num = n * h2 + p
    den = (
        nz * hz2
        + n * h2
        + p
        + 2.0 * (n + nz) * h2 * hz2 * r
        + n * nz * ((params.effect_kurtosis - 3.0) * r + 2.0) * h2 * hz2 / m
    )
    return _accuracy_limit(center, num / den, nz, rate, tilting=r)


# ---------------------------------------------------------------- training-sample ridge


def _ridge_lambda(params: PopulationParams, use_optimal_lambda: bool) -> float:
    return params.optimal_lambda if use_optimal_lambda else _lam(params)


def ridge_individual(
    cov: CovarianceModel,
    z: Any,
    beta: EffectVector | FloatArray,
    params: PopulationParams,
    point_n: StieltjesPoint | None = None,
    use_optimal_lambda: bool = False,
) -> GaussianLimit:
    """Law of z^T beta_R(lam) given (z, beta) under Gaussian data; point solved at phi_n."""
    _check_dims(cov, params)
    lam = _ridge_lambda(params, use_optimal_lambda)
    pt = _resolve_point(cov, params.phi_n, lam, point_n)
    p = cov.dim
    zv, bv = _vec(z, p, "z"), _beta(beta, p)
    s = cov.eigenvalues
    if s[-1] <= 1e-12 * s[0]:
        raise ValueError("ridge individual law needs a nonsingular covariance")
    mn, mp = pt.m_value, pt.m_prime
    rs = resolvent_summary(cov, mn, mp, params.phi_n, lam)
    g, h = rs.g_factor, rs.h_factor
    l1, l2 = rs.ell
    zu = cov.eigenvectors.T @ zv
    bu = cov.eigenvectors.T @ bv
    res = 1.0 / (1.0 + mn * s)
    # S^{-1}(I - (I + m S)^{-1}) = U diag(m / (1 + m s)) U^T
    center = float(zu @ bu) - lam / g * float(np.sum(zu * bu * mn * res))
    s1 = float(np.sum(zu * bu * res))
    s2 = float(np.sum(bu**2 * res**2 * s))
    s2e = params.noise_variance(_gamma1(cov))
    zinv = float(np.sum(zu**2 / s))
    bracket = g * s2e + (lam * mp / mn) * (lam * mn * s2 - params.phi_n * (l1 - l2) * s2e)
    var = h * s1**2 / g**2 + bracket * zinv / g**2
    return _limit(center, var, params.n, "sqrt(n)", "o(1)")


def ridge_individual_identity(
    z: Any, beta: EffectVector | FloatArray, params: PopulationParams, use_optimal_lambda: bool = False
) -> GaussianLimit:
    """Closed form of :func:`ridge_individual` for an identity covariance."""
    lam = _ridge_lambda(params, use_optimal_lambda)
    phi = params.phi_n
    pt = closed_form_identity(phi, lam)
    mn, r = pt.m_value, pt.tilting
    zv, bv = _vec(z, params.p, "z"), _beta(beta, params.p)
    zb, zz, bb = float(zv @ bv), float(zv @ zv), float(bv @ bv)
    s2e = params.noise_variance(params.m / params.p)
    center = mn / (1.0 + mn) * zb
    if use_optimal_lambda:
        h2 = params.h2
        var = zz * bb / (mn * phi) + h2 / ((1.0 + mn) ** 3 * (1.0 - h2)) * (
            h2 / (phi * mn**2 * (1.0 - h2)) - 1.0 / (r * (1.0 + mn))
        ) * zb**2
    else:
        var = phi / (lam * r * (1.0 + mn) ** 2) * (
            lam / phi * zz * bb - zz * s2e - zb**2 / (1.0 + mn) ** 2
        ) + 1.0 / (lam * mn) * (zz * s2e + phi / (lam * mn * (1.0 + mn) ** 3) * zb**2)
    return _limit(center, var, params.n, "sqrt(n)", "o(1)")


def ridge_accuracy(
    cov: CovarianceModel,
    params: PopulationParams,
    point_n: StieltjesPoint | None = None,
    use_optimal_lambda: bool = False,
) -> GaussianLimit:
    """Law of A(beta_R(lam)) under Gaussian data; point solved at phi_n."""
    _check_dims(cov, params)
    rate = "o(1)"
    lam = _ridge_lambda(params, use_optimal_lambda)
    pt = _resolve_point(cov, params.phi_n, lam, point_n)
    if params.h2 == 0.0 or params.h2_z == 0.0 or cov.m == 0:
        return _degenerate("sqrt(eta*n_z)", rate, "no signal")
    ss = spectrum_summary(cov)
    mn, mp, r = pt.m_value, pt.m_prime, pt.tilting
    phi = params.phi_n
    rs = resolvent_summary(cov, mn, mp, phi, lam)
    g, h = rs.g_factor, rs.h_factor
    l1, l2 = rs.ell
    e1, e2 = rs.eth
    g1 = ss.gamma[0]
    c = ss.m_over_p
    n, nz, p = params.n, params.n_z, params.p
    sb2, hz2, kb = params.sigma_beta2, params.h2_z, params.effect_kurtosis
    k = (1.0 - params.h2) / params.h2

    tau0 = sb2 * (g1 - lam / g * (c - e1))
    zeta1 = sb2 * (g1 - (2.0 * (c - e1) - (e1 - e2) / r) / mn) + k * sb2 * g1 * phi / (lam * mn) * (
        (1.0 - l1) - (l1 - l2) / r
    )
    zeta2 = sb2 * g1 / hz2
    tau1 = zeta1 * zeta2
    tau2 = sb2 * (g1 - (c - e1) / mn)
    tau3 = nz * sb2**2 / (n * g**2) * (
        h * ((c - e1) / mn) ** 2
        + g1 * (k * g1 * g + lam * mp / mn * (lam * (e1 - e2) - k * g1 * phi * (l1 - l2)))
    )
    s = cov.eigenvalues
    big_n = g / lam * cov.matrix - np.eye(p) + cov.spectral_matrix(1.0 / (1.0 + mn * s))
    diag_sq, tr_sq = _quad_sums(big_n, cov.causal_mask)
    tau4_sq = nz * lam**2 / g**2 * ((kb - 3.0) * sb2**2 / p**2 * diag_sq + 2.0 * sb2**2 / p**2 * tr_sq)
    if not tau1 > 0.0:
        return _degenerate("sqrt(eta*n_z)", rate, "non-positive tau1")
    center = tau0 / math.sqrt(tau1)
    eta = tau1 / (tau1 + 2.0 * tau2**2 + tau3 + tau4_sq)
    return _accuracy_limit(
        center, eta, nz, rate, tau0=tau0, tau1=tau1, tau2=tau2, tau3=tau3, tau4_sq=tau4_sq, lam=lam
    )


def ridge_accuracy_identity(params: PopulationParams, use_optimal_lambda: bool = False) -> GaussianLimit:
    """Closed form of :func:`ridge_accuracy` for an identity covariance."""
    rate = "o(1)"
    if params.h2 == 0.0 or params.h2_z == 0.0 or params.m == 0:
        return _degenerate("sqrt(eta*n_z)", rate, "no signal")
    lam = _ridge_lambda(params, use_optimal_lambda)
    phi, h2, hz2 = params.phi_n, params.h2, params.h2_z
    pt = closed_form_identity(phi, lam)
    mn, r = pt.m_value, pt.tilting
    k = (1.0 - h2) / h2
    nz, n, m = params.n_z, params.n, params.m
    c2 = 2.0 * mn**2
    c4 = nz * mn**2 / m * (params.effect_kurtosis - 1.0)
    if use_optimal_lambda:
        root = math.sqrt((phi + h2) ** 2 - 4.0 * h2**2 * phi)
        center = math.sqrt(2.0) * math.sqrt(hz2) * math.sqrt(h2) / math.sqrt(root + phi + h2)
        c1 = h2**2 / ((1.0 - h2) ** 2 * hz2 * phi**2 * mn * (1.0 + mn))
        c3 = nz / n * (
            h2**2 / ((1.0 + mn) * phi * (1.0 - h2) ** 2)
            * (1.0 / mn**2 - phi * (1.0 - h2) / ((1.0 + mn) * r * h2))
            + h2 * (1.0 + mn) ** 2 / (phi * mn)
        )
    else:
        inner = mn**2 + (1.0 - r) / r + (mn + (r - 1.0) / r) * phi * k / lam
        center = mn * math.sqrt(hz2) / math.sqrt(inner)
        c1 = inner / (lam**2 * hz2)
        c3 = nz / n * (
            phi / (lam**2 * (1.0 + mn)) * (1.0 / mn**2 - lam / ((1.0 + mn) * r))
            + (1.0 - h2) * (1.0 + mn) ** 2 / (lam * mn)
            + h2 / r
            - phi * (1.0 - h2) / (lam * r)
        )
    eta = c1 / (c1 + c2 + c3 + c4)
    return _accuracy_limit(center, eta, nz, rate, lam=lam)


# ---------------------------------------------------------------- naive law and intervals


def naive_accuracy(
    z_beta: Any, y_hat: Any, beta: EffectVector | FloatArray, cov: CovarianceModel, params: PopulationParams
) -> GaussianLimit:
    """Law of A that treats the fitted effects as fixed (ignores training variability)."""
    rate = "n_z^-1/2"
    zb = np.asarray(z_beta, dtype=np.float64)
    yh = np.asarray(y_hat, dtype=np.float64)
    if zb.shape != yh.shape or zb.ndim != 1:
        raise ValueError("z_beta and y_hat must be vectors of equal length")
    nz = zb.size
    if params.h2_z in (0.0, 1.0):
        return _degenerate("sqrt(eta*n_z)", rate, "heritability at boundary")
    _beta(beta, cov.dim)
    # (1/h_z^2 - 1)||S^{1/2} beta||^2 is read as the cohort noise variance
    s2ez = params.noise_variance_z(_gamma1(cov))
    nh = float(np.linalg.norm(yh))
    zz = float(zb @ zb)
    if nh == 0.0 or s2ez <= 0.0:
        return _degenerate("sqrt(eta*n_z)", rate, "zero prediction or noise")
    center = float(zb @ yh) / (math.sqrt(zz + nz * s2ez) * nh)
    eta = (zz / nz) / s2ez + 1.0
    return _accuracy_limit(center, eta, nz, rate)


def confidence_interval(limit: GaussianLimit, level: float) -> tuple[float, float]:
    """Two-sided normal interval center +/- z_{(1+level)/2} sd."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    if limit.degenerate or not limit.sd > 0.0:
        raise DegenerateLimitError("confidence interval needs a nondegenerate limit")
    half = float(ndtri(1.0 - (1.0 - level) / 2.0)) * limit.sd
    return limit.center - half, limit.center + half
