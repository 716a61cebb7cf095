"""Closed-form approximants, envelopes and theorem hypothesis checks.

Parameter maps for the two counting problems (``L = loglog x``):

* lower system (``N_k``): ``u = beta/alpha``, ``v = L/alpha``,
  ``w = u + v - (k - 1)``;
* upper system (``M_k``): ``u = k + (beta - L)/alpha``, ``v = L/alpha``,
  ``w = beta/alpha + 1``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable

__all__ = [
    "TheoremParams",
    "HypothesisReport",
    "Tri",
    "EnvelopeDomainWarning",
    "SIEVE_LIMIT",
    "loglog",
    "map_params",
    "smirnov_limit",
    "q_approx",
    "q_envelope",
    "theorem_envelope",
    "check_hypotheses",
    "nth_prime_upper_bound",
]

#: Largest ``y`` for which the prime-count condition is checked by counting.
SIEVE_LIMIT = 10**9

DEFAULT_EPS = 0.1
DEFAULT_A = 3.0


class EnvelopeDomainWarning(UserWarning):
    """The two-sided envelope is only claimed for ``u >= 1`` and ``w >= 1``."""


def loglog(y: float) -> float:
    """``log log y``; negative for ``1 < y < e``."""
    return math.log(math.log(y))


@dataclass(frozen=True)
class TheoremParams:
    x: float
    alpha: float
    beta: float
    k: int
    mode: str  # "N" or "M"
    L: float  # loglog x

    @property
    def v(self) -> float:
        return self.L / self.alpha

    @property
    def u(self) -> float:
        if self.mode == "N":
            return self.beta / self.alpha
        return self.k + (self.beta - self.L) / self.alpha

    @property
    def w(self) -> float:
        if self.mode == "N":
            return self.u + self.v - (self.k - 1)
        return self.beta / self.alpha + 1


def map_params(x: float, alpha: float, beta: float, k: int, mode: str) -> TheoremParams:
    if mode not in ("N", "M"):
        raise ValueError(f"mode must be 'N' or 'M', got {mode!r}")
    if not x > math.e:
        raise ValueError(f"need loglog x > 0, i.e. x > e; got x = {x}")
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    return TheoremParams(float(x), float(alpha), float(beta), int(k), mode, loglog(x))


def smirnov_limit(lam: float) -> float:
    """``1 - exp(-2 lam**2)``, the limit of ``Q_m(lam*sqrt(m), m)``."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    return -math.expm1(-2.0 * lam * lam)


def q_approx(m: int, u: float, w: float) -> float:
    """Main term ``1 - exp(-2uw/m)`` of the uniform asymptotic for ``Q_m``."""
    if m < 1 or u < 0 or w < 0:
        raise ValueError("need m >= 1, u >= 0, w >= 0")
    return -math.expm1(-2.0 * u * w / m)


def q_envelope(m: int, u: float, w: float) -> float:
    """``min(1, uw/m)``; warns outside ``u >= 1, w >= 1``."""
    if u < 1 or w < 1:
        warnings.warn(
            f"envelope evaluated at u={u}, w={w}; only asserted for u, w >= 1",
            EnvelopeDomainWarning,
            stacklevel=2,
        )
    return min(1.0, u * w / m)


def theorem_envelope(p: TheoremParams) -> float:
    if p.mode == "N":
        return min(1.0, (p.u + 1) * p.w / p.k)
    return min(1.0, p.u * (p.w + 1) / p.k)


class Tri(enum.Enum):
    """Outcome of a check that may be out of computational reach."""

    TRUE = "true"
    FALSE = "false"
    ANALYTIC = "analytic"  # true by an explicit bound, not by counting
    INDETERMINATE = "indeterminate"

    def __bool__(self):
        return self in (Tri.TRUE, Tri.ANALYTIC)


@dataclass(frozen=True)
class HypothesisReport:
    mode: str
    eps: float
    A: float
    beta_nonneg: bool
    alpha_minus_beta_le_A: bool
    w_ge_1_plus_eps: bool
    exp1_lhs: float
    exp1_holds: bool
    u_ge_1: bool
    w_ge_0: bool
    enough_primes: Tri
    k_in_range: bool

    @property
    def all_hold(self) -> bool:
        """Every hypothesis of the theorem matching ``mode``."""
        if self.mode == "N":
            return (
                self.k_in_range
                and self.beta_nonneg
                and self.alpha_minus_beta_le_A
                and self.w_ge_1_plus_eps
                and self.exp1_holds
            )
        return self.k_in_range and self.u_ge_1 and self.w_ge_0 and bool(self.enough_primes)

    def flags(self) -> dict:
        return {
            "beta_nonneg": self.beta_nonneg,
            "alpha_minus_beta_le_A": self.alpha_minus_beta_le_A,
            "w_ge_1_plus_eps": self.w_ge_1_plus_eps,
            "exp1_holds": self.exp1_holds,
            "u_ge_1": self.u_ge_1,
            "w_ge_0": self.w_ge_0,
            "enough_primes": self.enough_primes.value,
            "k_in_range": self.k_in_range,
        }


_FIRST_PRIMES = (2, 3, 5, 7, 11)


def nth_prime_upper_bound(j: int) -> float:
    """``j (log j + loglog j)``, an upper bound for the ``j``-th prime, ``j >= 6``."""
    if j < 6:
        raise ValueError("bound stated for j >= 6")
    return j * (math.log(j) + math.log(math.log(j)))


def _exp1_lhs(alpha: float, w: float) -> float:
    # e^{a(w-1)} - e^{a(w-2)} = e^{a(w-2)} (e^a - 1)
    t = alpha * (w - 2)
    if t > 700:
        return math.inf
    return math.exp(t) * math.expm1(alpha)


def _enough_primes(p: TheoremParams, prime_counter: Callable[[float], int]) -> Tri:
    """At least ``j`` primes up to ``exp(exp(alpha*j + beta))`` for ``1 <= j <= k``."""
    log_limit = math.log(SIEVE_LIMIT)
    seen = set()
    for j in range(1, p.k + 1):
        e = p.alpha * j + p.beta
        log_y = math.exp(e) if e < 700 else math.inf  # log of the threshold
        if log_y <= log_limit:
            ok = prime_counter(math.exp(log_y)) >= j
            seen.add(Tri.TRUE if ok else Tri.FALSE)
        elif j <= len(_FIRST_PRIMES):
            seen.add(Tri.TRUE)  # y > 1e9 > p_j
        elif math.log(nth_prime_upper_bound(j)) <= log_y:
            seen.add(Tri.ANALYTIC)
        else:
            seen.add(Tri.INDETERMINATE)
        if Tri.FALSE in seen:
            return Tri.FALSE
    for outcome in (Tri.INDETERMINATE, Tri.ANALYTIC):
        if outcome in seen:
            return outcome
    return Tri.TRUE


def check_hypotheses(
    p: TheoremParams,
    eps: float = DEFAULT_EPS,
    A: float = DEFAULT_A,
    prime_counter: Callable[[float], int] | None = None,
) -> HypothesisReport:
    """Evaluate every hypothesis of both theorems at ``p``.

    ``prime_counter(y)`` must return the number of primes ``<= y`` for
    ``y <= SIEVE_LIMIT``; it defaults to the sieve in :mod:`prime_engine`.
    """
    if not eps > 0:
        raise ValueError("eps must be > 0")
    if not A >= 1:
        raise ValueError("A must be >= 1")
    if prime_counter is None:
        from .prime_engine import prime_count as prime_counter
    lhs = _exp1_lhs(p.alpha, p.w)
    return HypothesisReport(
        mode=p.mode,
        eps=eps,
        A=A,
        beta_nonneg=p.beta >= 0,
        alpha_minus_beta_le_A=p.alpha - p.beta <= A,
        w_ge_1_plus_eps=p.w >= 1 + eps,
        exp1_lhs=lhs,
        exp1_holds=lhs >= 1 + eps,
        u_ge_1=p.u >= 1,
        w_ge_0=p.w >= 0,
        enough_primes=_enough_primes(p, prime_counter),
        k_in_range=1 <= p.k <= A * p.L,
    )
