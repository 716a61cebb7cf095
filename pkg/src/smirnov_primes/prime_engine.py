"""Segmented factorization sieve and prime-factor counts.

Every ``n`` in a window ``[lo, hi)`` is factored at once: for each base
prime ``p <= sqrt(hi)`` in increasing order the multiples of ``p`` receive
``p`` as their next distinct prime factor, and the multiples of ``p**e``
bump its exponent.  What is left after dividing out the base primes is
either 1 or one prime larger than all the others.  The result is a dense
``(size, MAX_OMEGA)`` table of ordered prime factors per window.

Counts built on top of it:

* ``pi_k(x)``: ``#{n <= x : omega(n) = k}``;
* ``N_k(x; alpha, beta)``: ``omega(n) = k`` and ``loglog p_j >= alpha*j - beta``
  for every ``j``;
* ``M_k(x; alpha, beta)``: ``omega(n) = k`` and ``loglog p_j <= alpha*j + beta``;
* the two one-sided conditions on ``omega(n, t)`` for ``2 <= t <= x``.

``log_2`` in the names below means ``log log`` (natural logs).
"""

from __future__ import annotations

import hashlib
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

import mpmath
import numpy as np

__all__ = [
    "CAPACITY",
    "DEFAULT_SEGMENT",
    "MAX_OMEGA",
    "CapacityError",
    "FactorProfile",
    "CountQuery",
    "CountTable",
    "SegmentProfiles",
    "small_primes",
    "segment_profiles",
    "sieve_profiles",
    "prime_count",
    "prime_blocks",
    "pi_k_table",
    "count_constrained",
    "count_constrained_many",
    "count_corollary",
    "count_corollary_many",
    "ConstrainedTask",
    "CorollaryTask",
    "PiTask",
    "scan",
]

CAPACITY = 10**9
DEFAULT_SEGMENT = 1 << 20
# 2*3*5*7*11*13*17*19*23*29 > 10**9, so nine columns suffice; one spare.
MAX_OMEGA = 10
CACHE_VERSION = 1

_TIE_BAND = 1e-9


class CapacityError(ValueError):
    """Raised when a range exceeds the configured sieve capacity."""


def _check_capacity(x: int, capacity: int = CAPACITY) -> None:
    if x > capacity:
        raise CapacityError(f"x = {x} exceeds sieve capacity {capacity}")


@dataclass(frozen=True)
class FactorProfile:
    n: int
    primes: tuple[int, ...]
    exponents: tuple[int, ...]

    def __post_init__(self):
        if len(self.primes) != len(self.exponents):
            raise ValueError("primes and exponents differ in length")
        if any(b <= a for a, b in zip(self.primes, self.primes[1:])):
            raise ValueError("primes must be strictly increasing")
        if math.prod(p**f for p, f in zip(self.primes, self.exponents)) != self.n:
            raise ValueError(f"profile does not multiply back to {self.n}")

    @property
    def omega(self) -> int:
        return len(self.primes)


@dataclass(frozen=True)
class CountQuery:
    x: int
    alpha: float = 1.0
    beta: float = 0.0
    constraint: str = "none"  # "lower" (N_k), "upper" (M_k) or "none" (pi_k)

    def __post_init__(self):
        if self.constraint not in ("lower", "upper", "none"):
            raise ValueError(f"unknown constraint {self.constraint!r}")
        if self.x < 2:
            raise ValueError("x must be >= 2")
        if self.constraint != "none" and not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        _check_capacity(int(self.x))


@dataclass
class CountTable:
    x: int
    params: dict
    counts: dict = field(default_factory=dict)  # k -> count

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def get(self, k: int) -> int:
        return self.counts.get(k, 0)


# --------------------------------------------------------------------------
# sieving
# --------------------------------------------------------------------------


@lru_cache(maxsize=8)
def small_primes(limit: int) -> np.ndarray:
    """All primes ``<= limit`` (sieve of Eratosthenes)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    out = np.flatnonzero(is_p).astype(np.int64)
    out.setflags(write=False)
    return out


@dataclass
class SegmentProfiles:
    """Ordered prime factors for every ``n`` in ``[lo, lo + len(omega))``.

    Row ``r`` describes ``n = lo + r``: ``primes[r, :omega[r]]`` are its
    distinct primes in increasing order, ``exps`` the matching exponents;
    unused slots are zero.
    """

    lo: int
    omega: np.ndarray
    primes: np.ndarray
    exps: np.ndarray
    _used: np.ndarray | None = field(default=None, repr=False)
    _ll: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.omega)

    @property
    def kmax(self) -> int:
        return int(self.omega.max()) if len(self.omega) else 0

    def used(self) -> np.ndarray:
        """Boolean ``(size, kmax)`` mask of occupied slots."""
        if self._used is None:
            self._used = np.arange(self.kmax) < self.omega[:, None]
        return self._used

    def loglog(self) -> np.ndarray:
        """``loglog p`` per occupied slot (zero elsewhere), shape ``(size, kmax)``.

        Every prime except possibly the last of each row is at most
        ``sqrt(hi)``, so those come from a lookup table.
        """
        if self._ll is None:
            k = self.kmax
            P = self.primes[:, :k]
            limit = math.isqrt(max(self.lo + len(self) - 1, 1)) + 1
            table = np.zeros(limit + 1)
            table[2:] = np.log(np.log(np.arange(2, limit + 1, dtype=float)))
            ll = table[np.minimum(P, limit)]
            rows = np.flatnonzero(self.omega)
            last = self.omega[rows].astype(np.int64) - 1
            ll[rows, last] = np.log(np.log(P[rows, last].astype(float)))
            ll[~self.used()] = 0.0
            self._ll = ll
        return self._ll

    def profile(self, n: int) -> FactorProfile:
        r = n - self.lo
        k = int(self.omega[r])
        return FactorProfile(
            n,
            tuple(int(p) for p in self.primes[r, :k]),
            tuple(int(f) for f in self.exps[r, :k]),
        )


def segment_profiles(lo: int, hi: int) -> SegmentProfiles:
    """Factor every integer in ``[lo, hi)`` (``lo >= 1``)."""
    if lo < 1 or hi < lo:
        raise ValueError(f"bad window [{lo}, {hi})")
    size = hi - lo
    rem = np.arange(lo, hi, dtype=np.int64)
    omega = np.zeros(size, dtype=np.int64)
    primes = np.zeros(size * MAX_OMEGA, dtype=np.int64)
    exps = np.zeros(size * MAX_OMEGA, dtype=np.uint8)
    for p in small_primes(math.isqrt(max(hi - 1, 1))).tolist():
        idx = np.arange((-lo) % p, size, p)
        if not idx.size:
            continue
        slot = idx * MAX_OMEGA + omega[idx]
        primes[slot] = p
        exps[slot] = 1
        omega[idx] += 1
        rem[idx] //= p
        pe = p * p
        while pe < hi:
            idx = np.arange((-lo) % pe, size, pe)
            if idx.size:
                exps[idx * MAX_OMEGA + omega[idx] - 1] += 1
                rem[idx] //= p
            pe *= p
    idx = np.flatnonzero(rem > 1)
    slot = idx * MAX_OMEGA + omega[idx]
    primes[slot] = rem[idx]
    exps[slot] = 1
    omega[idx] += 1
    return SegmentProfiles(
        lo,
        omega.astype(np.uint8),
        primes.reshape(size, MAX_OMEGA),
        exps.reshape(size, MAX_OMEGA),
    )


def _windows(x_lo: int, x_hi: int, segment: int) -> list[tuple[int, int]]:
    return [(a, min(a + segment, x_hi + 1)) for a in range(x_lo, x_hi + 1, segment)]


def sieve_profiles(
    x_lo: int,
    x_hi: int,
    visitor: Callable[[FactorProfile], None] | None = None,
    segment: int = DEFAULT_SEGMENT,
    capacity: int = CAPACITY,
) -> Iterator[SegmentProfiles]:
    """Stream the factor tables for ``[x_lo, x_hi]`` segment by segment.

    If ``visitor`` is given it is called once per ``n``, in order, with the
    full :class:`FactorProfile`.  The segments are also yielded, so callers
    can work on the arrays directly.
    """
    if x_lo < 1 or x_hi < x_lo:
        raise ValueError(f"bad range [{x_lo}, {x_hi}]")
    _check_capacity(x_hi, capacity)
    for a, b in _windows(x_lo, x_hi, segment):
        seg = segment_profiles(a, b)
        if visitor is not None:
            for n in range(a, b):
                visitor(seg.profile(n))
        yield seg


# --------------------------------------------------------------------------
# prime counting
# --------------------------------------------------------------------------

_PRIME_TABLE_LIMIT = 10**7


def prime_count(y: float, capacity: int = CAPACITY) -> int:
    """Number of primes ``<= y``."""
    if y < 2:
        return 0
    y = int(math.floor(y))
    _check_capacity(y, capacity)
    if y <= _PRIME_TABLE_LIMIT:
        return int(np.searchsorted(small_primes(_PRIME_TABLE_LIMIT), y, side="right"))
    return _prime_count_segmented(y)


def prime_blocks(limit: int, block: int = 1 << 24) -> Iterator[np.ndarray]:
    """Yield the primes ``<= limit`` in increasing order, one block at a time."""
    base = small_primes(math.isqrt(limit))
    for a in range(0, limit + 1, block):
        b = min(a + block, limit + 1)
        mark = np.ones(b - a, dtype=bool)
        if a == 0:
            mark[: min(2, b)] = False
        for p in base.tolist():
            if p * p >= b:
                break
            start = max(p * p, -(-a // p) * p)
            mark[start - a :: p] = False
        yield np.flatnonzero(mark).astype(np.int64) + a


@lru_cache(maxsize=64)
def _prime_count_segmented(y: int) -> int:
    return sum(len(block) for block in prime_blocks(y))


# --------------------------------------------------------------------------
# per-segment tasks
# --------------------------------------------------------------------------


def _ee(x) -> mpmath.mpf:
    with mpmath.workdps(40):
        return mpmath.exp(mpmath.exp(mpmath.mpf(x)))


def _cmp_ee(p: int, e: float) -> int:
    """Sign of ``p - exp(exp(e))``, i.e. of ``loglog p - e``, in 40 digits."""
    with mpmath.workdps(40):
        d = mpmath.mpf(p) - _ee(e)
    return (d > 0) - (d < 0)


class PiTask:
    """Histogram of ``omega(n)``."""

    def key(self):
        return ("pi",)

    def shape(self):
        return (MAX_OMEGA + 1,)

    def __call__(self, seg: SegmentProfiles) -> np.ndarray:
        return np.bincount(seg.omega, minlength=MAX_OMEGA + 1).astype(np.int64)


class ConstrainedTask:
    """``N_k`` (``lower``) or ``M_k`` (``upper``) tables for several betas.

    For fixed ``alpha`` the lower system holds iff
    ``min_j (loglog p_j - alpha*j) >= -beta``; the upper one iff
    ``max_j (loglog p_j - alpha*j) <= beta``.  One reduction per segment
    therefore serves every beta.  Values within ``1e-9`` of a threshold are
    re-decided exactly.
    """

    def __init__(self, alpha: float, betas: Sequence[float], constraint: str):
        if constraint not in ("lower", "upper"):
            raise ValueError(f"unknown constraint {constraint!r}")
        self.alpha = float(alpha)
        self.betas = tuple(float(b) for b in betas)
        self.constraint = constraint

    def key(self):
        return ("constrained", self.constraint, self.alpha, self.betas)

    def shape(self):
        return (len(self.betas), MAX_OMEGA + 1)

    def _exact_ok(self, primes: Sequence[int], beta: float) -> bool:
        for j, p in enumerate(primes, start=1):
            if self.constraint == "lower":
                if _cmp_ee(p, self.alpha * j - beta) < 0:
                    return False
            elif _cmp_ee(p, self.alpha * j + beta) > 0:
                return False
        return True

    def __call__(self, seg: SegmentProfiles) -> np.ndarray:
        kmax = seg.kmax
        out = np.zeros(self.shape(), dtype=np.int64)
        if kmax == 0:
            out[:, 0] = len(seg)
            return out
        used = seg.used()
        t = seg.loglog() - self.alpha * np.arange(1, kmax + 1)
        if self.constraint == "lower":
            ext = np.where(used, t, np.inf).min(axis=1)
        else:
            ext = np.where(used, t, -np.inf).max(axis=1)
        for b, beta in enumerate(self.betas):
            if self.constraint == "lower":
                ok = ext >= -beta
                near = np.flatnonzero(np.abs(ext + beta) < _TIE_BAND)
            else:
                ok = ext <= beta
                near = np.flatnonzero(np.abs(ext - beta) < _TIE_BAND)
            for r in near.tolist():
                k = int(seg.omega[r])
                ok[r] = self._exact_ok([int(p) for p in seg.primes[r, :k]], beta)
            out[b] = np.bincount(seg.omega[ok], minlength=MAX_OMEGA + 1)
        return out


def _int_threshold(value: mpmath.mpf, up: bool) -> int:
    """``ceil`` (``up``) or ``floor`` of a positive real, capped to int64."""
    cap = np.iinfo(np.int64).max
    if value > cap:
        return cap
    return int(mpmath.ceil(value) if up else mpmath.floor(value))


class CorollaryTask:
    """Counts for the ``omega(n, t)`` conditions over ``2 <= t <= x``.

    Decided on integer thresholds, independent of :class:`ConstrainedTask`:

    ``upper``: ``omega(n, t) <= max(0, loglog t + beta)`` for all ``t``.  The
    count ``omega(n, t)`` jumps to ``j`` at ``t = p_j`` and the bound grows
    with ``t``, so the condition is ``p_j >= ceil(exp(exp(j - beta)))``.

    ``lower``: ``omega(n, t) >= loglog t - beta`` for all ``t``.  On
    ``[p_j, p_{j+1})`` the count is ``j`` and the bound approaches its
    supremum as ``t -> p_{j+1}``; the last stretch ``[p_k, x]`` ends at
    ``x``.  So ``p_j <= floor(exp(exp(j - 1 + beta)))`` for every ``j`` and
    ``omega(n) >= loglog x - beta``.
    """

    def __init__(self, x: int, betas: Sequence[float], side: str):
        if side not in ("upper", "lower"):
            raise ValueError(f"unknown side {side!r}")
        self.x = int(x)
        self.betas = tuple(float(b) for b in betas)
        self.side = side
        self._thresholds = []
        self._kmin = []
        for beta in self.betas:
            if side == "upper":
                th = [_int_threshold(_ee(j - beta), True) for j in range(1, MAX_OMEGA + 1)]
                kmin = 0
            else:
                th = [_int_threshold(_ee(j - 1 + beta), False) for j in range(1, MAX_OMEGA + 1)]
                with mpmath.workdps(40):
                    kmin = max(0, int(mpmath.ceil(mpmath.log(mpmath.log(self.x)) - beta)))
            self._thresholds.append(np.array(th, dtype=np.int64))
            self._kmin.append(kmin)

    def key(self):
        return ("corollary", self.side, self.x, self.betas)

    def shape(self):
        return (len(self.betas),)

    def __call__(self, seg: SegmentProfiles) -> np.ndarray:
        out = np.zeros(self.shape(), dtype=np.int64)
        rows = max(0, min(len(seg), self.x + 1 - seg.lo))  # n <= x only
        k = seg.kmax
        omega = seg.omega[:rows]
        P = seg.primes[:rows, :k]
        used = seg.used()[:rows]
        for b, full in enumerate(self._thresholds):
            th = full[:k]
            if self.side == "upper":
                good = (P >= th) | ~used
                ok = good.all(axis=1)
            else:
                good = (P <= th) | ~used
                ok = good.all(axis=1) & (omega >= self._kmin[b])
            out[b] = int(ok.sum())
        return out


# --------------------------------------------------------------------------
# driver
# --------------------------------------------------------------------------


def _cache_path(cache_dir: Path, task, a: int, b: int) -> Path:
    h = hashlib.sha256(repr((CACHE_VERSION, a, b, task.key())).encode()).hexdigest()[:32]
    return cache_dir / f"{h}.bin"


_MAGIC = b"SPCT"


def _cache_load(path: Path, shape) -> np.ndarray | None:
    try:
        raw = path.read_bytes()
    except OSError:
        return None
    head = struct.calcsize("<4sHI")
    if len(raw) < head:
        return None
    magic, version, count = struct.unpack_from("<4sHI", raw)
    if magic != _MAGIC or version != CACHE_VERSION or count != math.prod(shape):
        return None
    if len(raw) != head + 8 * count:
        return None
    return np.frombuffer(raw, dtype="<i8", offset=head).reshape(shape).astype(np.int64)


def _cache_store(path: Path, arr: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    data = struct.pack("<4sHI", _MAGIC, CACHE_VERSION, arr.size) + arr.astype("<i8").tobytes()
    tmp = path.with_suffix(".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)


def _run_window(args):
    a, b, tasks, cache_dir = args
    results = [None] * len(tasks)
    missing = []
    for t, task in enumerate(tasks):
        if cache_dir is not None:
            results[t] = _cache_load(_cache_path(cache_dir, task, a, b), task.shape())
        if results[t] is None:
            missing.append(t)
    if missing:
        seg = segment_profiles(a, b)
        for t in missing:
            results[t] = tasks[t](seg)
            if cache_dir is not None:
                _cache_store(_cache_path(cache_dir, tasks[t], a, b), results[t])
    return results


def scan(
    x: int,
    tasks: Sequence,
    segment: int = DEFAULT_SEGMENT,
    workers: int = 1,
    cache_dir: str | Path | None = None,
    capacity: int = CAPACITY,
) -> list[np.ndarray]:
    """Run every task over ``n = 1..x`` and sum the per-window results.

    Windows are independent; partial results are added in window order, so
    the outcome does not depend on ``segment`` or ``workers``.
    """
    x = int(x)
    _check_capacity(x, capacity)
    cache = Path(cache_dir) if cache_dir is not None else None
    jobs = [(a, b, list(tasks), cache) for a, b in _windows(1, x, segment)]
    totals = [np.zeros(t.shape(), dtype=np.int64) for t in tasks]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_window, jobs)
            for part in parts:
                for tot, p in zip(totals, part):
                    tot += p
    else:
        for job in jobs:
            for tot, p in zip(totals, _run_window(job)):
                tot += p
    return totals


def _table(x, params, row) -> CountTable:
    return CountTable(int(x), dict(params), {k: int(c) for k, c in enumerate(row) if c})


def pi_k_table(x: int, **kw) -> CountTable:
    """``counts[k] = #{2 <= n <= x : omega(n) = k}``; ``n = 1`` sits at ``k = 0``."""
    (row,) = scan(x, [PiTask()], **kw)
    row = row.copy()
    row[0] -= 1  # n = 1
    return _table(x, {"constraint": "none"}, row)


def count_constrained_many(
    x: int, alpha: float, betas: Iterable[float], constraint: str, **kw
) -> list[CountTable]:
    betas = list(betas)
    if constraint == "none":
        t = pi_k_table(x, **kw)
        return [CountTable(t.x, {"constraint": "none"}, dict(t.counts)) for _ in betas]
    (arr,) = scan(x, [ConstrainedTask(alpha, betas, constraint)], **kw)
    return [
        _table(x, {"alpha": alpha, "beta": beta, "constraint": constraint}, arr[i])
        for i, beta in enumerate(betas)
    ]


def count_constrained(q: CountQuery, **kw) -> CountTable:
    """``N_k(x; alpha, beta)`` or ``M_k(x; alpha, beta)`` for every ``k``.

    ``n = 1`` has no prime factors, satisfies either system vacuously, and
    is reported under ``k = 0``.  Under ``constraint="none"`` the table is
    ``pi_k`` (which excludes ``n = 1``).
    """
    if q.constraint == "none":
        return pi_k_table(q.x, **kw)
    return count_constrained_many(q.x, q.alpha, [q.beta], q.constraint, **kw)[0]


def count_corollary_many(x: int, betas: Iterable[float], side: str, **kw) -> list[int]:
    betas = list(betas)
    if any(b < 0 for b in betas):
        raise ValueError("beta must be >= 0")
    (arr,) = scan(x, [CorollaryTask(x, betas, side)], **kw)
    return [int(c) for c in arr]


def count_corollary(x: int, beta: float, side: str, **kw) -> int:
    """Count ``n <= x`` whose ``omega(n, t)`` stays on one side of ``loglog t``.

    ``side="upper"``: ``omega(n, t) <= max(0, loglog t + beta)`` for all
    ``2 <= t <= x``.  ``side="lower"``: ``omega(n, t) >= loglog t - beta``.
    """
    return count_corollary_many(x, [beta], side, **kw)[0]
