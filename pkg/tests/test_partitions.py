import math

import mpmath
import numpy as np
import pytest

from smirnov_primes.partitions import (
    LAMBDA_0,
    PartitionAuditError,
    audit_E,
    audit_lambda,
    build_E,
    build_lambda,
    measure_K,
    prime_power_mass,
)
from smirnov_primes.prime_engine import CapacityError, small_primes


def reciprocal_oracle(lo):
    """The largest prime whose reciprocal run from lo stays <= 1, in 60 digits."""
    primes = [p for p in small_primes(10**6).tolist() if p > lo]
    with mpmath.workdps(60):
        s = mpmath.mpf(0)
        last = None
        for p in primes:
            step = mpmath.mpf(1) / p
            if s + step > 1:
                return last
            s += step
            last = p
    raise AssertionError("ran out of primes")


@pytest.fixture(scope="module")
def table():
    return build_lambda(3)


def test_lambda_values_against_exact_sums(table):
    assert table.lambdas[0] == LAMBDA_0
    assert table.lambdas[1] == 3
    assert table.lambdas[2] == reciprocal_oracle(3)
    assert table.lambdas[3] == reciprocal_oracle(table.lambdas[2])


def test_lambda_blocks_are_contiguous_and_audited(table):
    audit_lambda(table)
    flat = [p for b in table.blocks for p in b.primes]
    assert flat == small_primes(table.lambdas[-1]).tolist()


def test_measured_K(table):
    # p = 2 in G_1 gives |loglog 2 - 1| ~ 1.3665
    assert table.measured_K >= abs(math.log(math.log(2)) - 1)
    assert table.measured_K <= 2
    assert measure_K(table) == table.measured_K


def test_audit_catches_tampering(table):
    bad = build_lambda(3)
    b = bad.blocks[1]
    object.__setattr__(b, "primes", b.primes[:-1])
    with pytest.raises(PartitionAuditError):
        audit_lambda(bad)


def test_lambda_capacity():
    with pytest.raises(CapacityError):
        build_lambda(4)
    approx = build_lambda(5, approximate=True)
    assert approx.exact_J == 3 and approx.J_max == 5
    anchor = math.log(math.log(approx.lambdas[3]))
    assert approx.approx_loglog[4] == pytest.approx(anchor + 1)
    assert approx.approx_loglog[5] == pytest.approx(anchor + 2)
    assert len(approx.lambdas) == 4  # estimates never enter the exact list


def test_lambda_csv(table):
    lines = table.to_csv().splitlines()
    assert lines[0] == "j,p_min,p_max,count,reciprocal_sum"
    assert lines[1].startswith("1,2,3,2,")


def test_prime_two_mass_below_two():
    gamma = 0.1
    mass = float(prime_power_mass(2, gamma))
    assert mass == pytest.approx(sum(2 ** (-f * (1 - gamma)) for f in range(1, 200)))
    assert mass < 2


@pytest.fixture(scope="module")
def epart():
    return build_E(math.exp(10))


def test_E_partition_at_e10(epart):
    report = audit_E(epart)
    assert report["max_budget"] <= 2
    assert report["sets"] <= report["set_bound"]
    allp = small_primes(int(math.exp(10)))
    assert np.array_equal(np.concatenate(epart.sets), allp)


def test_E_windows(epart):
    for j, s in enumerate(epart.sets, start=1):
        dev = np.abs(np.log(np.log(s.astype(float))) - 2 * j)
        assert dev.max() <= epart.measured_Kprime


def test_E_rejects_small_Q():
    with pytest.raises(ValueError):
        build_E(1000.0)


def test_E_audit_catches_overlap(epart):
    broken = build_E(math.exp(10))
    broken.sets[1] = np.concatenate((broken.sets[0][-1:], broken.sets[1]))
    with pytest.raises(PartitionAuditError):
        audit_E(broken)


@pytest.mark.parametrize("logQ", [11.0, 14.0])
def test_E_larger_Q(logQ):
    e = build_E(math.exp(logQ))
    audit_E(e)
