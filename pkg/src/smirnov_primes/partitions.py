"""Partitions of the primes into blocks of controlled reciprocal mass.

``lambda_0 = 1.9`` and ``lambda_j`` is the largest prime with
``sum(1/p for lambda_{j-1} < p <= lambda_j) <= 1``; ``G_j`` is the set of
primes in ``(lambda_{j-1}, lambda_j]``.

For ``Q >= e**10`` and ``gamma = 1/log Q`` the primes ``<= Q`` are split
into sets ``E_j`` whose prime-power mass
``sum_{p in E_j, f >= 1} p**(-f(1 - gamma))`` is at most 2.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .prime_engine import CAPACITY, CapacityError, prime_blocks, small_primes

__all__ = [
    "LAMBDA_0",
    "LambdaBlock",
    "LambdaTable",
    "EPartition",
    "PartitionAuditError",
    "build_lambda",
    "measure_K",
    "build_E",
    "audit_lambda",
    "audit_E",
    "prime_power_mass",
]

LAMBDA_0 = 1.9
_GUARD = 1e-12


class PartitionAuditError(AssertionError):
    pass


@dataclass(frozen=True)
class LambdaBlock:
    j: int
    primes: tuple[int, ...]
    reciprocal_sum: float

    @property
    def p_min(self):
        return self.primes[0]

    @property
    def p_max(self):
        return self.primes[-1]


@dataclass
class LambdaTable:
    """``lambdas[0] = 1.9``; ``lambdas[j]`` exact for ``j <= exact_J``.

    Entries past ``exact_J`` are not computed primes: ``approx_loglog``
    holds the Mertens estimate of ``loglog lambda_j`` for those.
    """

    lambdas: list
    blocks: list[LambdaBlock]
    next_prime: int  # first prime after lambda_{exact_J}
    approx_loglog: dict = field(default_factory=dict)
    measured_K: float = 0.0

    @property
    def exact_J(self) -> int:
        return len(self.blocks)

    @property
    def J_max(self) -> int:
        return self.exact_J + len(self.approx_loglog)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["j", "p_min", "p_max", "count", "reciprocal_sum"])
        for b in self.blocks:
            wr.writerow([b.j, b.p_min, b.p_max, len(b.primes), repr(b.reciprocal_sum)])
        return buf.getvalue()


def _sum_le_one(primes) -> bool:
    s = math.fsum(1.0 / p for p in primes)
    if abs(s - 1.0) > 1e-10:
        return s <= 1.0
    with mpmath.workdps(50):
        return mpmath.fsum(mpmath.mpf(1) / int(p) for p in primes) <= 1


def _close_block(plist: list, recips: np.ndarray, start: int) -> int | None:
    """Length of the maximal block starting at ``start``, or None if open."""
    cs = np.cumsum(recips[start:])
    end = int(np.searchsorted(cs, 1.0, side="right"))
    while end > 0 and not _sum_le_one(plist[start : start + end]):
        end -= 1
    while start + end < len(plist) and _sum_le_one(plist[start : start + end + 1]):
        end += 1
    if start + end >= len(plist):
        return None
    return end


def build_lambda(J: int, capacity: int = CAPACITY, approximate: bool = False) -> LambdaTable:
    """Compute ``lambda_1..lambda_J``.

    Exact mode sieves until block ``J`` closes and raises
    :class:`CapacityError` when the next block would need primes beyond
    ``capacity`` (already ``lambda_4`` is near ``10**15``).  With
    ``approximate=True`` such blocks get the Mertens estimate
    ``loglog lambda_j ~ loglog lambda_J + (j - J)``, anchored at the last
    exact block and stored apart from the exact values.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    limit = 1 << 10
    while True:
        primes = small_primes(limit)
        plist = primes.tolist()
        recips = 1.0 / primes.astype(float)
        blocks: list[LambdaBlock] = []
        start = 0
        for j in range(1, J + 1):
            end = _close_block(plist, recips, start)
            if end is None:
                break
            block = tuple(plist[start : start + end])
            blocks.append(LambdaBlock(j, block, math.fsum(1.0 / p for p in block)))
            start += end
        if len(blocks) == J:
            break
        # rough size of the open block's end: loglog grows by about 1 per block
        prev = blocks[-1].p_max if blocks else 3
        guess = math.exp(math.exp(math.log(math.log(prev)) + 1.0))
        if guess > capacity:
            if approximate and blocks:
                break
            raise CapacityError(f"lambda_{len(blocks) + 1} ~ {guess:.3g} exceeds capacity {capacity}")
        limit = int(min(capacity, max(limit * 16, 4 * guess)))

    table = LambdaTable(
        lambdas=[LAMBDA_0] + [b.p_max for b in blocks],
        blocks=blocks,
        next_prime=plist[start],
    )
    if len(blocks) < J:
        anchor = math.log(math.log(blocks[-1].p_max))
        for j in range(len(blocks) + 1, J + 1):
            table.approx_loglog[j] = anchor + (j - len(blocks))
    table.measured_K = measure_K(table)
    return table


def measure_K(t: LambdaTable) -> float:
    """``max |loglog p - j|`` over ``p in G_j`` for the exact blocks."""
    worst = 0.0
    for b in t.blocks:
        ll = np.log(np.log(np.asarray(b.primes, dtype=float)))
        worst = max(worst, float(np.max(np.abs(ll - b.j))))
    return worst


def audit_lambda(t: LambdaTable) -> None:
    """Re-verify budget, maximality, contiguity and the Mertens spacing."""
    prev = LAMBDA_0
    for i, b in enumerate(t.blocks):
        if b.j != i + 1:
            raise PartitionAuditError("block indices out of order")
        if b.p_min <= prev:
            raise PartitionAuditError(f"G_{b.j} overlaps the previous block")
        if not _sum_le_one(b.primes):
            raise PartitionAuditError(f"G_{b.j} reciprocal sum exceeds 1")
        nxt = t.blocks[i + 1].p_min if i + 1 < len(t.blocks) else t.next_prime
        if _sum_le_one(b.primes + (nxt,)):
            raise PartitionAuditError(f"lambda_{b.j} is not maximal")
        if abs(math.log(math.log(b.p_max)) - b.j) > 2:
            raise PartitionAuditError(f"|loglog lambda_{b.j} - {b.j}| > 2")
        prev = b.p_max
    if t.measured_K != measure_K(t):
        raise PartitionAuditError("stored K does not match a fresh measurement")


# --------------------------------------------------------------------------
# E_j partition
# --------------------------------------------------------------------------


def prime_power_mass(p, gamma: float):
    """``sum_{f >= 1} p**(-f(1 - gamma))`` (geometric series)."""
    r = np.power(np.asarray(p, dtype=float), -(1.0 - gamma))
    return r / (1.0 - r)


@dataclass
class EPartition:
    Q: float
    gamma: float
    sets: list[np.ndarray]
    budgets: list[float]
    measured_Kprime: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["j", "p_min", "p_max", "count", "budget_sum"])
        for j, (s, b) in enumerate(zip(self.sets, self.budgets), start=1):
            wr.writerow([j, int(s[0]), int(s[-1]), len(s), repr(b)])
        return buf.getvalue()


def _kprime(sets) -> float:
    worst = 0.0
    for j, s in enumerate(sets, start=1):
        ll = np.log(np.log(s.astype(float)))
        worst = max(worst, float(np.max(np.abs(ll - 2 * j))))
    return worst


def build_E(Q: float, capacity: int = CAPACITY) -> EPartition:
    """Greedy split of the primes ``<= Q`` into sets of mass ``<= 2``.

    Primes are taken in increasing order; the current set is closed when
    the next prime would push its mass past the budget.  Since the total
    mass up to ``y`` is ``loglog y + O(1)``, set ``j`` ends up near
    ``loglog p = 2j``; the deviation ``K'`` is measured, not assumed.
    """
    if not Q >= math.exp(10):
        raise ValueError("Q must be >= e**10")
    if Q > capacity:
        raise CapacityError(f"Q = {Q} exceeds sieve capacity {capacity}")
    gamma = 1.0 / math.log(Q)
    budget = 2.0 - _GUARD
    sets: list[list[np.ndarray]] = [[]]
    sums = [0.0]
    for block in prime_blocks(int(math.floor(Q))):
        mass = prime_power_mass(block, gamma)
        pos = 0
        while pos < len(block):
            room = budget - sums[-1]
            cs = np.cumsum(mass[pos:])
            take = int(np.searchsorted(cs, room, side="right"))
            if take == 0:
                if not sets[-1]:
                    raise ValueError(f"prime {block[pos]} alone exceeds the budget")
                sets.append([])
                sums.append(0.0)
                continue
            sets[-1].append(block[pos : pos + take])
            sums[-1] = math.fsum([sums[-1], float(cs[take - 1])])
            pos += take
    merged = [np.concatenate(parts) for parts in sets if parts]
    budgets = [math.fsum(prime_power_mass(s, gamma).tolist()) for s in merged]
    return EPartition(float(Q), gamma, merged, budgets, _kprime(merged))


def audit_E(e: EPartition) -> dict:
    """Independently re-check an :class:`EPartition`; raise on any failure.

    Returns the audited quantities.
    """
    gamma = 1.0 / math.log(e.Q)
    if abs(gamma - e.gamma) > 1e-15:
        raise PartitionAuditError("gamma does not match Q")
    # partition property against a fresh list of primes
    allp = np.concatenate(list(prime_blocks(int(math.floor(e.Q)))))
    got = np.concatenate(e.sets)
    if len(got) != len(allp) or not np.array_equal(np.sort(got), allp):
        raise PartitionAuditError("sets do not partition the primes <= Q")
    if len(np.unique(got)) != len(got):
        raise PartitionAuditError("sets overlap")
    worst_budget = 0.0
    for j, s in enumerate(e.sets, start=1):
        with mpmath.workdps(30):
            g = mpmath.mpf(1) - mpmath.mpf(gamma)
            mass = mpmath.fsum(1 / (mpmath.power(int(p), g) - 1) for p in s.tolist())
        if mass > 2:
            raise PartitionAuditError(f"E_{j} prime-power mass {mass} exceeds 2")
        worst_budget = max(worst_budget, float(mass))
    kp = _kprime(e.sets)
    if kp > e.measured_Kprime:
        raise PartitionAuditError("window deviation exceeds the stored K'")
    bound = 0.5 * math.log(math.log(e.Q)) + e.measured_Kprime
    if len(e.sets) > bound:
        raise PartitionAuditError(f"{len(e.sets)} sets exceed 1/2 loglog Q + K' = {bound}")
    return {
        "sets": len(e.sets),
        "set_bound": bound,
        "max_budget": worst_budget,
        "Kprime": kp,
        "primes": int(len(allp)),
    }
