"""Monte Carlo estimates of ``Q_m(u, v)`` from sampled order statistics.

Samples are drawn in fixed-size shards.  Shard ``s`` uses its own PCG64
stream spawned from ``SeedSequence(seed)``, and the shard layout depends
only on ``(samples, m)``, so an estimate is reproducible whatever the
number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .smirnov_core import BoundaryQuery

__all__ = [
    "McConfig",
    "McEstimate",
    "McAuditError",
    "sample_order_stats",
    "edf_eval",
    "q_mc",
]

# floats per shard; bounds memory at ~32 MB per in-flight shard
_SHARD_FLOATS = 1 << 22
_AUDIT_EVERY = 100


class McAuditError(RuntimeError):
    """The order-statistic and EDF forms of the event disagreed."""


@dataclass(frozen=True)
class McConfig:
    samples: int
    seed: int
    m: int

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    stderr: float
    N: int
    seed: int
    hits: int
    audited: int


def sample_order_stats(m: int, rng: np.random.Generator) -> np.ndarray:
    """Sorted sample of ``m`` independent Uniform[0, 1) draws."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return np.sort(rng.random(m))


def edf_eval(sample: np.ndarray, t):
    """Empirical distribution function ``F_m(t)`` of a sorted sample."""
    return np.searchsorted(sample, t, side="right") / len(sample)


def _shard_sizes(samples: int, m: int) -> list[int]:
    rows = max(1, _SHARD_FLOATS // m)
    full, rest = divmod(samples, rows)
    return [rows] * full + ([rest] if rest else [])


def _run_shard(args) -> tuple[int, int]:
    seq, rows, m, u, v, thresholds = args
    rng = np.random.Generator(np.random.PCG64(seq))
    xi = rng.random((rows, m))
    xi.sort(axis=1)
    ok = (xi >= thresholds).all(axis=1)
    # the EDF form on every 100th sample: F_m(t) <= (v t + u)/m at the jumps
    audit = np.arange(0, rows, _AUDIT_EVERY)
    for r in audit.tolist():
        s = xi[r]
        counts = np.searchsorted(s, s, side="right")
        edf_ok = bool(np.all(counts <= v * s + u))
        if edf_ok != bool(ok[r]):
            raise McAuditError(f"event forms disagree on sample {s!r}")
    return int(ok.sum()), len(audit)


def q_mc(q: BoundaryQuery, cfg: McConfig, workers: int = 1) -> McEstimate:
    """Fraction of ``cfg.samples`` draws with ``xi_i >= (i - u)/v`` for all ``i``."""
    if cfg.m != q.m:
        raise ValueError(f"config m = {cfg.m} does not match query m = {q.m}")
    m, u, v = q.m, float(q.u), float(q.v)
    thresholds = (np.arange(1, m + 1) - u) / v
    sizes = _shard_sizes(cfg.samples, m)
    seqs = np.random.SeedSequence(cfg.seed).spawn(len(sizes))
    jobs = [(seq, rows, m, u, v, thresholds) for seq, rows in zip(seqs, sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_shard, jobs))
    else:
        parts = [_run_shard(job) for job in jobs]
    hits = sum(h for h, _ in parts)
    audited = sum(a for _, a in parts)
    p_hat = hits / cfg.samples
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / cfg.samples)
    return McEstimate(p_hat, stderr, cfg.samples, cfg.seed, hits, audited)
