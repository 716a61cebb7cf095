"""Exact boundary-crossing probabilities for uniform order statistics.

``Q_m(u, v)`` is the probability that the order statistics
``xi_1 <= ... <= xi_m`` of ``m`` independent Uniform[0, 1] draws satisfy
``xi_i >= (i - u) / v`` for every ``i``.

Two unrelated algorithms are provided:

* a count dynamic program over thresholds (:func:`q_exact_general`), run in
  exact integer arithmetic for rational inputs or in floating point with a
  reported error bound;
* the Steck determinant for upper bounds on order statistics
  (:func:`steck_upper`), evaluated exactly through the Hessenberg expansion
  of the determinant and applied to the reflected thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence, Union

import numpy as np

__all__ = [
    "BoundaryQuery",
    "LowerThresholdProfile",
    "ProbabilityResult",
    "EXACT_MAX_M",
    "lower_profile",
    "upper_profile",
    "q_exact_general",
    "q_exact",
    "q_steck",
    "q_reflect_upper",
    "steck_upper",
]

Real = Union[int, Fraction, float]

#: Largest ``m`` for which the exact-rational paths are used automatically.
EXACT_MAX_M = 200

_EPS = 2.0**-52
# Tail mass below which the float DP stops expanding a binomial row.
_TAIL_TOL = 1e-20


def _is_rational(x) -> bool:
    return isinstance(x, Rational) and not isinstance(x, bool)


def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _clamp(x, lo=0, hi=1):
    return lo if x < lo else hi if x > hi else x


@dataclass(frozen=True)
class BoundaryQuery:
    """The triple ``(m, u, v)``; ``w = u + v - m`` is always derived."""

    m: int
    u: Real
    v: Real

    def __post_init__(self):
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        if not self.u >= 0:
            raise ValueError(f"u must be >= 0, got {self.u!r}")
        if not self.v > 0:
            raise ValueError(f"v must be > 0, got {self.v!r}")

    @property
    def w(self) -> Real:
        return self.u + self.v - self.m

    @property
    def rational(self) -> bool:
        return _is_rational(self.u) and _is_rational(self.v)


@dataclass(frozen=True)
class LowerThresholdProfile:
    """Nondecreasing thresholds ``a_1 <= ... <= a_m`` in ``[0, 1]``."""

    a: tuple

    def __post_init__(self):
        a = tuple(self.a)
        if not a:
            raise ValueError("profile must contain at least one threshold")
        for x in a:
            if not 0 <= x <= 1:
                raise ValueError(f"threshold {x!r} outside [0, 1]")
        for x, y in zip(a, a[1:]):
            if y < x:
                raise ValueError("thresholds must be nondecreasing")
        object.__setattr__(self, "a", a)

    @property
    def m(self) -> int:
        return len(self.a)

    @property
    def rational(self) -> bool:
        return all(_is_rational(x) for x in self.a)


@dataclass(frozen=True)
class ProbabilityResult:
    value: Union[Fraction, float]
    mode: str  # "exact-rational" or "float"
    abs_error_bound: float = 0.0

    def __post_init__(self):
        if self.mode not in ("exact-rational", "float"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "exact-rational" and self.abs_error_bound != 0:
            raise ValueError("exact results carry no error bound")
        if not 0 <= self.value <= 1:
            raise ValueError(f"probability {self.value!r} outside [0, 1]")
        if self.abs_error_bound < 0:
            raise ValueError("negative error bound")

    def __float__(self):
        return float(self.value)


def _pick_exact(exact, rational: bool, m: int) -> bool:
    if exact is None:
        return rational and m <= EXACT_MAX_M
    return bool(exact)


def lower_profile(q: BoundaryQuery, exact: bool | None = None) -> LowerThresholdProfile:
    """Return ``a_i = clamp((i - u) / v, 0, 1)`` for ``i = 1..m``."""
    if q.rational if exact is None else exact:
        u, v = _as_fraction(q.u), _as_fraction(q.v)
        return LowerThresholdProfile(tuple(_clamp((i - u) / v) for i in range(1, q.m + 1)))
    u, v = float(q.u), float(q.v)
    return LowerThresholdProfile(tuple(_clamp((i - u) / v, 0.0, 1.0) for i in range(1, q.m + 1)))


def upper_profile(q: BoundaryQuery, exact: bool | None = None) -> tuple:
    """Reflected thresholds ``b_i = clamp((u + v - m - 1 + i) / v, 0, 1)``.

    ``Q_m(u, v) = P(xi_i <= b_i for all i)``.
    """
    m = q.m
    if q.rational if exact is None else exact:
        u, v = _as_fraction(q.u), _as_fraction(q.v)
        return tuple(_clamp((u + v - m - 1 + i) / v) for i in range(1, m + 1))
    u, v = float(q.u), float(q.v)
    return tuple(_clamp((u + v - m - 1 + i) / v, 0.0, 1.0) for i in range(1, m + 1))


# --------------------------------------------------------------------------
# count dynamic program
# --------------------------------------------------------------------------


def _dp_exact(a: Sequence[Fraction]) -> Fraction:
    """Integer form of the count DP.

    With ``a_i = c_i / D`` the state value ``dp[s]`` holds ``P * D**s``, so
    every transition weight ``C(m - s', d) * (c_i - c_{i-1})**d`` is an
    integer and no fraction is reduced until the end.
    """
    m = len(a)
    if a[-1] >= 1:
        return Fraction(0)
    D = math.lcm(*(x.denominator for x in a))
    c = [x.numerator * (D // x.denominator) for x in a]

    dp = [1]
    prev = 0
    for i, ci in enumerate(c, start=1):
        delta = ci - prev
        if delta == 0:
            continue
        prev = ci
        width = i  # admissible counts s = 0..i-1
        new = [0] * width
        pw = [1] * width
        for d in range(1, width):
            pw[d] = pw[d - 1] * delta
        for sp, val in enumerate(dp):
            if not val or sp >= width:
                continue
            n = m - sp
            coef = 1  # C(n, d), built incrementally
            for d in range(width - sp):
                new[sp + d] += val * coef * pw[d]
                coef = coef * (n - d) // (d + 1)
        dp = new

    top = D - prev
    num = sum(val * top ** (m - s) for s, val in enumerate(dp) if val)
    return Fraction(num, D**m)


def _dp_float(a: Sequence[float]) -> tuple[float, float]:
    """Floating-point count DP with binomial transitions.

    ``P[s]`` is the probability that exactly ``s`` points lie at or below
    the current threshold with no violation so far.  Given ``s'`` points at
    or below ``a_{i-1}``, the others are uniform on ``(a_{i-1}, 1]`` and fall
    into ``(a_{i-1}, a_i]`` independently with probability ``q``.  All terms
    are nonnegative, so rounding error stays relative.

    Returns ``(value, abs_error_bound)``.
    """
    m = len(a)
    if a[-1] >= 1.0:
        return 0.0, 0.0
    P = np.zeros(m)
    P[0] = 1.0
    live = 1  # P[live:] is zero
    prev = 0.0
    dropped = 0.0
    rel = 0.0
    for i, ai in enumerate(a, start=1):
        if ai <= prev:
            continue
        q = (ai - prev) / (1.0 - prev)
        prev = ai
        rows = live
        n = (m - np.arange(rows)).astype(float)
        lq = math.log(q) - math.log1p(-q)
        with np.errstate(divide="ignore", invalid="ignore"):
            lp = n * math.log1p(-q)
        new = np.zeros(m)
        mode = (n[0] + 1.0) * q
        band = 0
        for d in range(i):
            span = min(rows, i - d)
            if span <= 0:
                break
            new[d : d + span] += P[:span] * np.exp(lp[:span])
            band = d + 1
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.log(np.maximum(n - d, 0.0)) - math.log(d + 1) + lq
            if d + 1 >= mode:
                ratio = np.exp(step)
                r = float(ratio.max()) if ratio.size else 0.0
                if r < 1.0:
                    tail = float(np.dot(P[:rows], np.exp(lp + step))) / (1.0 - r)
                    if tail < _TAIL_TOL:
                        dropped += tail
                        break
            lp = lp + step
        P = new
        live = min(m, i)
        rel += (band + 10) * _EPS + (8 * band + abs(n[0] * math.log1p(-q)) + 10) * _EPS
    value = float(math.fsum(P[: m]))
    value = min(max(value, 0.0), 1.0)
    return value, float(dropped + value * rel + m * _EPS)


def q_exact_general(p: LowerThresholdProfile, exact: bool | None = None) -> ProbabilityResult:
    """``P(xi_i >= a_i for all i)`` for ``m`` uniform order statistics.

    The event is "fewer than ``i`` points lie below ``a_i``" for every
    ``i``; it is evaluated by a DP over (threshold index, count below).
    Exact rational arithmetic is used when every threshold is rational and
    ``m <= EXACT_MAX_M`` (or when ``exact=True``).
    """
    if not isinstance(p, LowerThresholdProfile):
        p = LowerThresholdProfile(tuple(p))
    if _pick_exact(exact, p.rational, p.m):
        return ProbabilityResult(_dp_exact([_as_fraction(x) for x in p.a]), "exact-rational")
    value, err = _dp_float([float(x) for x in p.a])
    return ProbabilityResult(value, "float", err)


def q_exact(q: BoundaryQuery, exact: bool | None = None) -> ProbabilityResult:
    """``Q_m(u, v)`` by the count DP."""
    use_exact = _pick_exact(exact, q.rational, q.m)
    mode = "exact-rational" if use_exact else "float"
    one, zero = (Fraction(1), Fraction(0)) if use_exact else (1.0, 0.0)
    if q.u >= q.m:
        return ProbabilityResult(one, mode)
    if q.w <= 0:
        return ProbabilityResult(zero, mode)
    return q_exact_general(lower_profile(q, use_exact), use_exact)


# --------------------------------------------------------------------------
# Steck determinant
# --------------------------------------------------------------------------


def steck_upper(b: Sequence) -> Fraction:
    """Exact ``P(xi_i <= b_i for all i)`` for nondecreasing ``b`` in [0, 1].

    Steck's formula gives ``m! * det(M)`` with
    ``M[i][j] = b_i**(j-i+1) / (j-i+1)!`` for ``j >= i - 1`` and zero
    otherwise.  ``M`` is upper Hessenberg with a unit subdiagonal, so the
    determinant follows from the leading-minor recursion.  Scaling the
    ``k``-th minor by ``k! * D**k`` keeps everything in integers::

        F_k = sum_i (-1)**(k-i) * C(k, i-1) * c_i**(k-i+1) * F_{i-1}

    where ``b_i = c_i / D``; the probability is ``F_m / D**m``.
    """
    b = [_as_fraction(x) for x in b]
    m = len(b)
    for x, y in zip(b, b[1:]):
        if y < x:
            raise ValueError("upper thresholds must be nondecreasing")
    if any(not 0 <= x <= 1 for x in b):
        raise ValueError("upper thresholds must lie in [0, 1]")
    D = math.lcm(*(x.denominator for x in b))
    c = [x.numerator * (D // x.denominator) for x in b]
    F = [1]
    pw = [0] * m  # pw[i-1] = c_i ** (k - i + 1) at step k
    for k in range(1, m + 1):
        for i in range(k - 1):
            pw[i] *= c[i]
        pw[k - 1] = c[k - 1]
        total = 0
        binom = 1  # C(k, i-1) for i = 1
        for i in range(1, k + 1):
            term = binom * pw[i - 1] * F[i - 1]
            total += -term if (k - i) & 1 else term
            binom = binom * (k - i + 1) // i
        F.append(total)
    return Fraction(F[m], D**m)


def q_steck(q: BoundaryQuery, exact: bool | None = None) -> ProbabilityResult:
    """``Q_m(u, v)`` via the Steck determinant on the reflected thresholds.

    Inputs are converted to exact fractions (floats convert losslessly), so
    the only error in float mode is the final rounding.
    """
    if q.m > EXACT_MAX_M:
        raise ValueError(f"Steck determinant limited to m <= {EXACT_MAX_M}, got {q.m}")
    use_exact = _pick_exact(exact, q.rational, q.m)
    if q.u >= q.m:
        value = Fraction(1)
    elif q.w <= 0:
        value = Fraction(0)
    else:
        value = steck_upper(upper_profile(q, exact=True))
    if use_exact:
        return ProbabilityResult(value, "exact-rational")
    return ProbabilityResult(float(value), "float", _EPS)


def q_reflect_upper(q: BoundaryQuery, exact: bool | None = None) -> ProbabilityResult:
    """``Q_m(u, v)`` from the upper-threshold form.

    ``P(xi_i <= b_i for all i)`` equals ``P(eta_i >= 1 - b_{m+1-i})`` for the
    reflected sample ``eta = 1 - xi``, which the count DP evaluates.
    """
    use_exact = _pick_exact(exact, q.rational, q.m)
    b = upper_profile(q, use_exact)
    one = Fraction(1) if use_exact else 1.0
    a = LowerThresholdProfile(tuple(one - x for x in reversed(b)))
    if a.a[-1] >= 1:
        return ProbabilityResult(one - one, "exact-rational" if use_exact else "float")
    return q_exact_general(a, use_exact)
