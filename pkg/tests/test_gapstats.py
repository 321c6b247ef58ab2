import math
from fractions import Fraction

import numpy as np
import pytest

from gaplimits.errors import ArgumentError
from gaplimits.gapstats import (
    bv_error_scan,
    chain_points,
    difference_hits,
    gap_stream,
    harmonic,
    measure_bounds,
    poisson_histogram,
)


@pytest.fixture(scope="module")
def gaps(store_1e6):
    return gap_stream(store_1e6)


def test_first_records(gaps):
    r = gaps[0]
    assert (r.n, r.p_n, r.p_next, r.gap) == (1, 2, 3, 1)
    assert r.normalized == pytest.approx(1 / math.log(2))
    seven = next(x for x in gaps if x.p_n == 7)
    assert seven.gap == 4


def test_telescoping(gaps, store_1e6):
    for N in (1, 10, 1000, len(gaps)):
        assert int(gaps.gap[:N].sum()) == store_1e6.select(N + 1) - 2


def test_mean_normalized_gap(gaps):
    assert 0.9 <= float(np.mean(gaps.normalized)) <= 1.1


def test_custom_normalizer(store_1e6):
    g = gap_stream(store_1e6, normalizer=lambda p: np.log(np.log(p + 3.0)))
    assert g.normalized[0] == pytest.approx(1 / math.log(math.log(5.0)))


def test_histogram_normalization(gaps):
    h = poisson_histogram(gaps, [0, 0.5, 1, 2, 4])
    assert int(h.counts.sum()) == len(gaps)
    assert Fraction(int(h.counts.sum()), h.total) == 1
    assert math.fsum(h.predicted) == pytest.approx(1.0, abs=1e-15)
    assert 0 <= h.ks_discrepancy <= 1


def test_histogram_edge_cases():
    empty = poisson_histogram(np.array([]), [0, 1, 2])
    assert not empty.empirical.any()
    one = poisson_histogram(np.array([0.3, 5.0, 1.0]), [0])
    assert one.empirical.tolist() == [1.0] and one.predicted.tolist() == [1.0]
    # bins are (a, b]: 1.0 falls in the first bin
    h = poisson_histogram(np.array([1.0, 1.5]), [0, 1, 2])
    assert h.counts.tolist() == [1, 1, 0]
    for bad in ([0, 1, 1], [1, 2], [0, 2, 1]):
        with pytest.raises(ArgumentError):
            poisson_histogram(np.array([1.0]), bad)


def test_chain_points(gaps):
    assert np.array_equal(chain_points(gaps, 1)[:, 0], gaps.normalized)
    c2 = chain_points(gaps, 2)
    assert c2[0].tolist() == pytest.approx([1 / math.log(2), 2 / math.log(3)])
    assert len(c2) == len(gaps) - 1
    assert chain_points(np.array([1.0]), 3).shape == (0, 3)
    with pytest.raises(ArgumentError):
        chain_points(gaps, 0)


def test_difference_hits(gaps):
    zero = difference_hits(gaps, (0, 0), 0.1)[(1, 2)]
    assert np.all(gaps.normalized[zero - 1] <= 0.1)
    assert len(zero) == int(np.sum(gaps.normalized <= 0.1))
    hits = difference_hits(gaps, (0, 1), 0.01)[(1, 2)]
    assert len(hits) > 0
    assert np.all(np.abs(gaps.normalized[hits - 1] - 1) <= 0.01)
    exact = difference_hits(gaps, (0, 0.123456789), 0)[(1, 2)]
    assert len(exact) == 0
    with pytest.raises(ArgumentError):
        difference_hits(gaps, (1, 0), 0.1)


def test_measure_bounds():
    m = measure_bounds(9)
    assert m.asymptotic_density == Fraction(1, 8)
    assert harmonic(8) == Fraction(761, 280)
    assert m.effective_density == Fraction(35, 761)
    assert m.effective_density.numerator * 22 > m.effective_density.denominator
    two = measure_bounds(2)
    assert two.asymptotic_density == 1 and two.effective_density == 1
    for kappa in range(3, 30):
        mb = measure_bounds(kappa)
        assert mb.effective_density < mb.asymptotic_density
        assert mb.asymptotic_density * (kappa - 1) == 1
    with pytest.raises(ArgumentError):
        measure_bounds(1)


def test_bv_scan_small(store_1e5):
    scan = bv_error_scan(store_1e5, 1000, 0.3)
    assert [r.q for r in scan.rows] == list(range(1, 8))
    assert scan.rows[0].max_error == 0
    for r in scan.rows:
        assert r.partition_rel_error <= 1e-9


def test_bv_scan_restrictions(store_1e5):
    scan = bv_error_scan(store_1e5, 10**4, 0.5, q0=6, Z=5)
    assert all(r.q % 6 == 0 and r.q % 5 != 0 for r in scan.rows)
    with pytest.raises(ArgumentError):
        bv_error_scan(store_1e5, 10**4, 0.5, q0=4)
    with pytest.raises(ArgumentError):
        bv_error_scan(store_1e5, 10**4, 1.0)


def test_bv_scan_brute_force_row(store_1e5):
    from gaplimits.arith import psi_progression

    N = 3000
    scan = bv_error_scan(store_1e5, N, 0.4)
    psi = scan.psi
    for r in scan.rows[:6]:
        q = r.q
        phi = sum(1 for a in range(q) if math.gcd(a, q) == 1)
        errs = [abs(psi_progression(store_1e5, N, q, a) - psi / phi) for a in range(q) if math.gcd(a, q) == 1]
        assert r.max_error == pytest.approx(max(errs), rel=1e-12, abs=1e-12)
