"""Seeded synthetic data, estimator fits, and replication batches of realized statistics."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Literal

import numpy as np
from numpy.typing import NDArray

from .asymptotics import (
    GaussianLimit,
    PopulationParams,
    marginal_accuracy,
    marginal_individual,
    naive_accuracy,
    quadratic_form,
    reference_accuracy,
    reference_individual,
    ridge_accuracy,
    ridge_individual,
)
from .errors import ReplicationError
from .estimators import (
    Dataset,
    EffectVector,
    cosine_accuracy,
    fit_marginal,
    fit_reference_ridge,
    fit_ridge,
)
from .spectral import CovarianceModel, CovSpec

__all__ = [
    "SimConfig",
    "ReplicationBatch",
    "derive_seed",
    "stream",
    "gen_effects",
    "gen_dataset",
    "gen_response",
    "analytic_limit",
    "conditioning_draws",
    "run_batch",
]

FloatArray = NDArray[np.float64]
EntryDist = Literal["gaussian", "rademacher", "genotype"]
EffectDist = Literal["gaussian", "two_point"]

_ENTRY = ("gaussian", "rademacher", "genotype")
_EFFECT = ("gaussian", "two_point")
_ESTIMATORS = ("marginal", "reference_ridge", "ridge")
_TARGETS = ("individual", "accuracy", "quadratic_form")
_Z_SOURCES = ("row", "basis")

# stream tags: one independent generator per source of randomness
_X, _EPS, _Z, _EPS_Z, _W, _BETA, _ZROW = range(1, 8)
_BATCH_KEY = 0xFFFFFFFF


def derive_seed(master_seed: int, index: int) -> int:
    """64-bit seed of replication ``index`` split from ``master_seed``."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def stream(seed: int, tag: int) -> np.random.Generator:
    """Counter-based generator keyed on (seed, tag)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(tag,))))


def _rng(seed: int | np.random.Generator) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def gen_effects(
    cov: CovarianceModel,
    params: PopulationParams,
    effect_dist: EffectDist,
    seed: int | np.random.Generator,
) -> EffectVector:
    """Effects on the causal mask with variance sigma_beta^2 / p, zero elsewhere."""
    rng = _rng(seed)
    p, m = cov.dim, cov.m
    scale = math.sqrt(params.sigma_beta2 / p)
    if effect_dist == "gaussian":
        vals = rng.standard_normal(m) * scale
    elif effect_dist == "two_point":
        vals = (2.0 * rng.integers(0, 2, size=m) - 1.0) * scale
    else:
        raise ValueError(f"unknown effect distribution {effect_dist!r}")
    beta = np.zeros(p)
    beta[cov.causal_mask] = vals
    return EffectVector(beta, cov.causal_mask)


def _raw_entries(
    rng: np.random.Generator, shape: tuple[int, int], entry_dist: EntryDist, maf: float
) -> FloatArray:
    if entry_dist == "gaussian":
        return rng.standard_normal(shape)
    if entry_dist == "rademacher":
        return 2.0 * rng.integers(0, 2, size=shape).astype(np.float64) - 1.0
    if entry_dist == "genotype":
        if not 0.0 < maf < 1.0:
            raise ValueError("maf must lie in (0, 1)")
        raw = rng.binomial(2, maf, size=shape).astype(np.float64)
        return (raw - 2.0 * maf) / math.sqrt(2.0 * maf * (1.0 - maf))
    raise ValueError(f"unknown entry distribution {entry_dist!r}")


def gen_dataset(
    cov: CovarianceModel,
    n: int,
    entry_dist: EntryDist,
    seed: int | np.random.Generator,
    maf: float = 0.3,
) -> Dataset:
    """Design X = X0 S^{1/2} with standardized i.i.d. entries in X0."""
    if n < 1:
        raise ValueError("n must be positive")
    x0 = _raw_entries(_rng(seed), (n, cov.dim), entry_dist, maf)
    design = x0 if cov.is_identity else x0 @ cov.sqrt
    return Dataset(design, None, entry_dist, maf if entry_dist == "genotype" else None)


def gen_response(
    design: Dataset, beta: EffectVector, sigma_eps2: float, seed: int | np.random.Generator
) -> FloatArray:
    """y = X beta + eps with Gaussian noise of variance ``sigma_eps2``."""
    if sigma_eps2 < 0.0 or not math.isfinite(sigma_eps2):
        raise ValueError("noise variance must be finite and non-negative")
    signal = design.design @ beta.beta
    if sigma_eps2 == 0.0:
        return signal
    return signal + math.sqrt(sigma_eps2) * _rng(seed).standard_normal(design.n)


@dataclass(frozen=True, slots=True)
class SimConfig:
    """Everything that determines a replication batch, including the master seed."""

    cov: CovSpec
    params: PopulationParams
    replications: int
    master_seed: int
    estimator: str = "marginal"
    target: str = "individual"
    entry_dist: str = "gaussian"
    effect_dist: str = "gaussian"
    maf: float = 0.3
    z_source: str = "row"
    use_optimal_lambda: bool = False
    redraw_beta: bool | None = None
    redraw_panel: bool = True

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        for name, allowed in (
            ("estimator", _ESTIMATORS),
            ("target", _TARGETS),
            ("entry_dist", _ENTRY),
            ("effect_dist", _EFFECT),
            ("z_source", _Z_SOURCES),
        ):
            if getattr(self, name) not in allowed:
                raise ValueError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")
        if self.entry_dist == "genotype" and not 0.0 < self.maf < 1.0:
            raise ValueError("maf must lie in (0, 1)")
        if self.target != "quadratic_form":
            if self.params.h2 == 0.0 and self.params.sigma_eps2 is None:
                raise ValueError("simulation needs h2 > 0 or an explicit sigma_eps2")
            if self.estimator == "reference_ridge" and self.params.n_w is None:
                raise ValueError("reference_ridge needs population.n_w")
            if self.estimator != "marginal" and self.params.lam is None and not self.use_optimal_lambda:
                raise ValueError("ridge-type estimators need population.lam")
        if self.target == "accuracy" and self.params.h2_z == 0.0 and self.params.sigma_eps_z2 is None:
            raise ValueError("accuracy target needs h2_z > 0 or an explicit sigma_eps_z2")

    @property
    def beta_redrawn(self) -> bool:
        if self.redraw_beta is not None:
            return self.redraw_beta
        return self.target != "individual"

    @property
    def lam(self) -> float | None:
        if self.estimator == "marginal":
            return None
        return self.params.optimal_lambda if self.use_optimal_lambda else self.params.lam

    def with_seed(self, master_seed: int) -> SimConfig:
        return replace(self, master_seed=master_seed)

    def to_dict(self) -> dict[str, Any]:
        sim = {k: getattr(self, k) for k in self.__slots__ if k not in ("cov", "params")}
        return {"covariance": self.cov.to_dict(), "population": self.params.to_dict(), "simulation": sim}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SimConfig:
        for section in ("covariance", "population", "simulation"):
            if section not in data or not isinstance(data[section], dict):
                raise ValueError(f"config section {section!r} is missing or not an object")
        sim = dict(data["simulation"])
        unknown = set(sim) - (set(cls.__slots__) - {"cov", "params"})
        if unknown:
            raise ValueError(f"unknown simulation fields: {sorted(unknown)}")
        return cls(
            cov=CovSpec.from_dict(data["covariance"]),
            params=PopulationParams.from_dict(data["population"]),
            **sim,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> SimConfig:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ReplicationBatch:
    """Per-replication raw statistics, their standardized values, seeds and flags."""

    raw: FloatArray
    seeds: NDArray[np.uint64]
    flags: NDArray[np.bool_]
    limit: GaussianLimit | None = None
    extras: dict[str, FloatArray] = field(default_factory=dict)

    @property
    def standardized(self) -> FloatArray | None:
        if self.limit is None or self.limit.degenerate:
            return None
        return (self.raw - self.limit.center) / self.limit.sd

    def __len__(self) -> int:
        return int(self.raw.size)

    def to_csv(self, path: str | Path) -> None:
        """index, seed, raw, standardized, flags, then any extra columns; 17 significant digits."""
        std = self.standardized
        names = sorted(self.extras)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["index", "seed", "raw", "standardized", "flags", *names])
            for i in range(len(self)):
                writer.writerow(
                    [
                        i,
                        int(self.seeds[i]),
                        _fmt(self.raw[i]),
                        _fmt(std[i]) if std is not None else "nan",
                        "true" if self.flags[i] else "false",
                        *(_fmt(self.extras[k][i]) for k in names),
                    ]
                )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------- replication kernels


@dataclass(frozen=True)
class _Context:
    config: SimConfig
    cov: CovarianceModel
    sigma_eps2: float
    sigma_eps_z2: float
    beta: EffectVector | None
    z: FloatArray | None


def _colour(ctx: _Context, x0: FloatArray) -> FloatArray:
    return x0 if ctx.cov.is_identity else x0 @ ctx.cov.sqrt


def _draws(ctx: _Context, seed: int, tag: int, n: int) -> FloatArray:
    cfg = ctx.config
    return _raw_entries(stream(seed, tag), (n, ctx.cov.dim), cfg.entry_dist, cfg.maf)  # type: ignore[arg-type]


def _noise(seed: int, tag: int, var: float, n: int) -> FloatArray:
    if var == 0.0:
        return np.zeros(n)
    return math.sqrt(var) * stream(seed, tag).standard_normal(n)


def _effects(ctx: _Context, seed: int) -> EffectVector:
    if ctx.beta is not None:
        return ctx.beta
    cfg = ctx.config
    return gen_effects(ctx.cov, cfg.params, cfg.effect_dist, stream(seed, _BETA))  # type: ignore[arg-type]


def _panel(ctx: _Context, seed: int) -> Dataset:
    cfg = ctx.config
    key = seed if cfg.redraw_panel else _panel_seed(cfg)
    n_w = cfg.params.n_w
    assert n_w is not None
    return Dataset(_colour(ctx, _draws(ctx, key, _W, n_w)), None, cfg.entry_dist)  # type: ignore[arg-type]


def _panel_seed(cfg: SimConfig) -> int:
    return int(np.random.SeedSequence(cfg.master_seed, spawn_key=(_BATCH_KEY, _W)).generate_state(1, np.uint64)[0])


def _fit_from_training(ctx: _Context, seed: int, beta: EffectVector) -> FloatArray:
    """Fit the configured estimator on a fresh training set."""
    cfg = ctx.config
    n = cfg.params.n
    x = _colour(ctx, _draws(ctx, seed, _X, n))
    y = x @ beta.beta + _noise(seed, _EPS, ctx.sigma_eps2, n)
    train = Dataset(x, y, cfg.entry_dist)  # type: ignore[arg-type]
    if cfg.estimator == "marginal":
        return fit_marginal(train).beta_hat
    lam = cfg.lam
    assert lam is not None
    if cfg.estimator == "ridge":
        return fit_ridge(train, lam).beta_hat
    return fit_reference_ridge(x.T @ y, n, _panel(ctx, seed), lam).beta_hat


def _rep_individual(ctx: _Context, seed: int) -> tuple[float, bool, dict[str, float]]:
    cfg = ctx.config
    beta = _effects(ctx, seed)
    z = ctx.z
    assert z is not None
    if cfg.estimator == "marginal" and not cfg.beta_redrawn:
        # z^T X^T y / n with X = X0 S^{1/2}, evaluated without forming X
        n = cfg.params.n
        x0 = _draws(ctx, seed, _X, n)
        root = ctx.cov.sqrt
        xz = x0 @ (z if ctx.cov.is_identity else root @ z)
        xb = x0 @ (beta.beta if ctx.cov.is_identity else root @ beta.beta)
        y = xb + _noise(seed, _EPS, ctx.sigma_eps2, n)
        return float(xz @ y) / n, False, {}
    return float(z @ _fit_from_training(ctx, seed, beta)), False, {}


def _rep_accuracy(ctx: _Context, seed: int) -> tuple[float, bool, dict[str, float]]:
    cfg = ctx.config
    beta = _effects(ctx, seed)
    beta_hat = _fit_from_training(ctx, seed, beta)
    nz = cfg.params.n_z
    zmat = _colour(ctx, _draws(ctx, seed, _Z, nz))
    z_beta = zmat @ beta.beta
    y_z = z_beta + _noise(seed, _EPS_Z, ctx.sigma_eps_z2, nz)
    y_hat = zmat @ beta_hat
    acc, flag = cosine_accuracy(y_z, y_hat)
    naive = naive_accuracy(z_beta, y_hat, beta, ctx.cov, cfg.params)
    return acc, flag, {"naive_center": naive.center, "naive_sd": naive.sd}


def _rep_quadratic(ctx: _Context, seed: int) -> tuple[float, bool, dict[str, float]]:
    b = _effects(ctx, seed).beta
    return float(b @ ctx.cov.matrix @ b), False, {}


_KERNELS = {"individual": _rep_individual, "accuracy": _rep_accuracy, "quadratic_form": _rep_quadratic}


def _replicate(ctx: _Context, index: int) -> tuple[int, float, bool, dict[str, float]]:
    seed = derive_seed(ctx.config.master_seed, index)
    try:
        raw, flag, extra = _KERNELS[ctx.config.target](ctx, seed)
    except Exception as exc:  # surfaced with the failing index and seed
        raise ReplicationError(index, seed, exc) from exc
    return seed, raw, flag, extra


_WORKER_CTX: _Context | None = None


def _init_worker(ctx: _Context) -> None:
    global _WORKER_CTX
    _WORKER_CTX = ctx


def _worker(index: int) -> tuple[int, float, bool, dict[str, float]]:
    assert _WORKER_CTX is not None
    return _replicate(_WORKER_CTX, index)


def _batch_stream(cfg: SimConfig, tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(cfg.master_seed, spawn_key=(_BATCH_KEY, tag))))


def conditioning_draws(cfg: SimConfig, cov: CovarianceModel) -> tuple[EffectVector, FloatArray]:
    """The batch-level (beta, z) pair that individual-level batches hold fixed.

    ``z`` is a coloured test row (``z_source="row"``) or the first causal basis vector.
    """
    beta = gen_effects(cov, cfg.params, cfg.effect_dist, _batch_stream(cfg, _BETA))  # type: ignore[arg-type]
    if cfg.z_source == "row":
        z0 = _raw_entries(_batch_stream(cfg, _ZROW), (1, cov.dim), cfg.entry_dist, cfg.maf)[0]  # type: ignore[arg-type]
        z = z0 if cov.is_identity else cov.sqrt @ z0
    else:
        z = np.zeros(cov.dim)
        z[int(np.flatnonzero(cov.causal_mask)[0]) if cov.m else 0] = 1.0
    return beta, z


def _context(cfg: SimConfig, cov: CovarianceModel) -> _Context:
    g1 = float(np.sum(np.diag(cov.matrix)[cov.causal_mask]) / cov.dim)
    s2e = cfg.params.noise_variance(g1) if cfg.target != "quadratic_form" else 0.0
    s2ez = cfg.params.noise_variance_z(g1) if cfg.target == "accuracy" else 0.0
    beta, z = conditioning_draws(cfg, cov)
    return _Context(
        cfg, cov, s2e, s2ez, None if cfg.beta_redrawn else beta, z if cfg.target == "individual" else None
    )


def analytic_limit(
    cfg: SimConfig, cov: CovarianceModel, beta: EffectVector | None = None, z: FloatArray | None = None
) -> GaussianLimit | None:
    """The limit law matching ``cfg``'s target and estimator, or None when none applies."""
    params = cfg.params
    if cfg.estimator != "marginal":
        params = params.replace(lam=cfg.lam)
    kind, target = cfg.estimator, cfg.target
    if target == "quadratic_form":
        return quadratic_form(cov, params)
    if target == "accuracy":
        if kind == "marginal":
            return marginal_accuracy(cov, params)
        if kind == "reference_ridge":
            return reference_accuracy(cov, params)
        return ridge_accuracy(cov, params)
    if beta is None or z is None:
        return None
    if kind == "marginal":
        return marginal_individual(cov, z, beta, params)
    if kind == "reference_ridge":
        return reference_individual(cov, z, beta, params)
    return ridge_individual(cov, z, beta, params)


def run_batch(
    config: SimConfig, workers: int = 1, cov: CovarianceModel | None = None
) -> ReplicationBatch:
    """Run every replication of ``config``; results are ordered by replication index.

    Output depends only on ``config`` (including its master seed), never on ``workers``.
    """
    model = cov if cov is not None else config.cov.build()
    if model.dim != config.params.p or model.m != config.params.m:
        raise ValueError("covariance model does not match population p and m")
    ctx = _context(config, model)
    indices = range(config.replications)
    if workers <= 1 or config.replications == 1:
        results = [_replicate(ctx, i) for i in indices]
    else:
        chunk = max(1, config.replications // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(ctx,)) as pool:
            results = list(pool.map(_worker, indices, chunksize=chunk))

    seeds = np.array([r[0] for r in results], dtype=np.uint64)
    raw = np.array([r[1] for r in results], dtype=np.float64)
    flags = np.array([r[2] for r in results], dtype=bool)
    extra_keys = sorted({k for r in results for k in r[3]})
    extras = {k: np.array([r[3].get(k, math.nan) for r in results]) for k in extra_keys}
    conditional_ok = config.target != "individual" or not config.beta_redrawn
    limit = analytic_limit(config, model, ctx.beta, ctx.z) if conditional_ok else None
    return ReplicationBatch(raw, seeds, flags, limit, extras)

