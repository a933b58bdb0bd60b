"""Sampling and estimation backbone for the Gaussian-model checks.

RNG streams are counter-based (Philox): the draws of block b of a run are a
pure function of (seed, b), so estimates are bit-identical regardless of how
many workers process the blocks.  Reductions run in block order.  The worker
count can be capped with the TPL_THREADS environment variable.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import DomainError

BLOCK = 4096
_MASK64 = (1 << 64) - 1

KURTOSIS_WARN = 20.0


@dataclass(frozen=True)
class SampleSpec:
    """Monte Carlo budget: sample count, 64-bit seed, worker count and the
    optional antithetic (x, -x) pairing for symmetric integrands."""

    n: int
    seed: int
    workers: int = 1
    antithetic: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"sample count must be >= 1, got {self.n}")
        if self.workers < 1:
            raise DomainError(f"worker count must be >= 1, got {self.workers}")
        if self.antithetic and self.n % 2 != 0:
            raise DomainError("antithetic sampling needs an even sample count")


@dataclass(frozen=True)
class Estimate:
    """Point estimate with a two-sided confidence interval."""

    value: float
    ci_low: float
    ci_high: float
    level: float
    n: int
    meta: dict | None = None


def normal_stream(seed: int, stream: int) -> np.random.Generator:
    """Deterministic stream: a pure function of (seed, stream index)."""
    key = (seed & _MASK64) | ((stream & _MASK64) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_standard_normal(n: int, stream: np.random.Generator) -> np.ndarray:
    """n i.i.d. standard normals from the given stream."""
    return stream.standard_normal(n)


def _worker_count(spec: SampleSpec) -> int:
    cap = os.environ.get("TPL_THREADS")
    workers = spec.workers
    if cap is not None:
        workers = min(workers, max(1, int(cap)))
    return max(1, workers)


def _block_plan(n: int) -> list[tuple[int, int]]:
    plan = []
    b = 0
    while n > 0:
        take = min(BLOCK, n)
        plan.append((b, take))
        n -= take
        b += 1
    return plan


def _map_blocks(spec: SampleSpec, job):
    """Apply ``job(block_index, count)`` to every block; results are returned
    in block order, so the reduction is independent of the worker count."""
    plan = _block_plan(spec.n)
    workers = _worker_count(spec)
    if workers == 1 or len(plan) == 1:
        return [job(b, c) for b, c in plan]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda bc: job(*bc), plan))


def draw_standard_normal(spec: SampleSpec, dim: int) -> np.ndarray:
    """All (n, dim) draws of a run, assembled in block order."""
    chunks = _map_blocks(spec, lambda b, c: normal_stream(spec.seed, b).standard_normal((c, dim)))
    return np.concatenate(chunks, axis=0)


def wilson_interval(successes: int, trials: int, level: float = 0.99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return (0.0, 1.0)
    z = norm.ppf(0.5 * (1.0 + level))
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    spread = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    return (max(0.0, center - spread), min(1.0, center + spread))


def _clt_interval(mean: float, var: float, n: int, level: float) -> tuple[float, float]:
    if n <= 1 or not np.isfinite(var):
        return (mean, mean) if var == 0.0 else (-math.inf, math.inf)
    z = norm.ppf(0.5 * (1.0 + level))
    half = z * math.sqrt(max(var, 0.0) / n)
    return (mean - half, mean + half)


def _batch_values(field, xs: np.ndarray, per_sample) -> np.ndarray:
    mats = field.eval_batch(xs)
    return per_sample(mats)


def estimate_statistic(spec: SampleSpec, field, per_sample, level: float = 0.99,
                       want_kurtosis: bool = False) -> Estimate:
    """Mean of a scalar per-sample statistic of f(X) with a CLT interval.

    With antithetic pairing on, the statistic is averaged over each (x, -x)
    pair and the CLT runs on the n/2 pair means.
    """

    def job(b: int, count: int):
        rng = normal_stream(spec.seed, b)
        if spec.antithetic:
            half = count // 2
            xs = rng.standard_normal((half, field.ambient_dim))
            vals = 0.5 * (_batch_values(field, xs, per_sample)
                          + _batch_values(field, -xs, per_sample))
        else:
            xs = rng.standard_normal((count, field.ambient_dim))
            vals = _batch_values(field, xs, per_sample)
        with np.errstate(over="ignore", invalid="ignore"):
            return (len(vals), vals.sum(), np.sum(vals ** 2),
                    np.sum(vals ** 3), np.sum(vals ** 4))

    parts = _map_blocks(spec, job)
    n_eff = sum(p[0] for p in parts)
    s1 = math.fsum(p[1] for p in parts)
    s2 = math.fsum(p[2] for p in parts)
    mean = s1 / n_eff
    var = max(s2 / n_eff - mean * mean, 0.0) if np.isfinite(s2) else math.inf
    lo, hi = _clt_interval(mean, var, n_eff, level)
    meta = None
    if want_kurtosis and np.isfinite(s2) and var > 0.0:
        s3 = math.fsum(p[3] for p in parts)
        s4 = math.fsum(p[4] for p in parts)
        m = mean
        m2 = s2 / n_eff - m * m
        m4 = (s4 - 4 * m * s3 + 6 * m * m * s2) / n_eff - 3 * m ** 4
        kurt = m4 / (m2 * m2)
        meta = {"kurtosis": float(kurt), "heavy_tail_warning": bool(kurt > KURTOSIS_WARN)}
        if kurt > KURTOSIS_WARN:
            warnings.warn(
                f"empirical kurtosis {kurt:.1f} suggests the CLT interval may "
                "be unreliable for this integrand", RuntimeWarning, stacklevel=3)
    return Estimate(value=mean, ci_low=min(lo, mean), ci_high=max(hi, mean),
                    level=level, n=n_eff, meta=meta)


def estimate_trace_moment(field, q: float, spec: SampleSpec,
                          center: np.ndarray | None = None,
                          level: float = 0.99) -> Estimate:
    """Estimate E tr |f(X) - center|^(2q) with a CLT interval."""
    if q < 1:
        raise DomainError(f"moment order q must be >= 1, got {q}")

    def per_sample(mats):
        if center is not None:
            mats = mats - center
        w = np.linalg.eigvalsh(mats)
        return np.sum(np.abs(w) ** (2.0 * q), axis=1)

    return estimate_statistic(spec, field, per_sample, level)


def estimate_tail(field, center, thresholds, spec: SampleSpec,
                  level: float = 0.99) -> list[Estimate]:
    """Empirical survival P{ |f(X) - center| >= t } with Wilson intervals,
    one pass over the samples.  Thresholds must be ascending."""
    thresholds = np.asarray(thresholds, dtype=float)
    if np.any(np.diff(thresholds) < 0):
        raise DomainError("thresholds must be ascending")
    if spec.antithetic:
        raise DomainError("antithetic pairing breaks the Bernoulli model of "
                          "the Wilson interval; disable it for tail estimation")
    center = np.asarray(center, dtype=float)

    def job(b: int, count: int):
        rng = normal_stream(spec.seed, b)
        xs = rng.standard_normal((count, field.ambient_dim))
        mats = field.eval_batch(xs) - center
        dev = np.max(np.abs(np.linalg.eigvalsh(mats)), axis=1)
        return (dev[:, None] >= thresholds[None, :]).sum(axis=0)

    counts = sum(_map_blocks(spec, job))
    out = []
    for t_idx in range(thresholds.shape[0]):
        k = int(counts[t_idx])
        lo, hi = wilson_interval(k, spec.n, level)
        out.append(Estimate(value=k / spec.n, ci_low=lo, ci_high=hi,
                            level=level, n=spec.n))
    return out


def _log_trace_cosh(eigs: np.ndarray) -> np.ndarray:
    """log tr cosh over rows of eigenvalues, without intermediate overflow:
    log cosh(t) = |t| + log1p(exp(-2|t|)) - log 2, combined by log-sum-exp."""
    a = np.abs(eigs)
    logc = a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)
    m = logc.max(axis=1, keepdims=True)
    return (m + np.log(np.sum(np.exp(logc - m), axis=1, keepdims=True)))[:, 0]


def estimate_cosh_trace(field, center, theta: float, spec: SampleSpec,
                        level: float = 0.99) -> Estimate:
    """Estimate E tr cosh(theta * (f(X) - center)) with a CLT interval.

    Evaluated in log-sum-exp form, so large theta*|f| degrades to inf
    instead of raising; a heavy-tail warning is attached when the empirical
    kurtosis indicates an unreliable interval.
    """
    center = np.asarray(center, dtype=float)

    def per_sample(mats):
        w = theta * np.linalg.eigvalsh(mats - center)
        if np.max(np.abs(w), initial=0.0) < 700.0:
            return np.cosh(w).sum(axis=1)
        with np.errstate(over="ignore"):
            return np.exp(_log_trace_cosh(w))

    return estimate_statistic(spec, field, per_sample, level, want_kurtosis=True)
