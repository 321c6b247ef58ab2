import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaplimits.errors import ArgumentError
from gaplimits.tuples import KTuple, is_admissible, partition_equal
from gaplimits.variational.weights import (
    Piece,
    SieveWeightSpec,
    coprime_base,
    find_witness,
    sieve_weight,
    weight_support,
    weighted_sum_check,
    weighted_sum_S,
)


def test_weight_examples():
    spec = SieveWeightSpec.standard(3, 0.6, 2, Z=7)
    assert sieve_weight(spec, (4, 1, 1), 10**4) == 0
    assert sieve_weight(spec, (1, 1, 1), 10**4) == pytest.approx(1.0)
    assert sieve_weight(spec, (7, 1, 1), 10**4) == 0
    assert sieve_weight(spec, (3, 1, 1), 10**4, Z=1) < 0
    # beyond the support budget
    assert sieve_weight(spec, (10**3, 1, 1), 10**4) == 0
    with pytest.raises(ArgumentError):
        sieve_weight(spec, (0, 1, 1), 10**4)


def test_weight_formula():
    spec = SieveWeightSpec.standard(2, 0.5, 1)
    N = 10**4
    c = 0.25
    d = (3, 5)
    want = (1 - math.log(3) / math.log(N) / c) * (1 - math.log(5) / math.log(N) / c)
    assert sieve_weight(spec, d, N) == pytest.approx(want)


def test_spec_support_budget():
    with pytest.raises(ArgumentError):
        SieveWeightSpec(((Piece.power(0.3), Piece.power(0.3)),), delta=0.5)
    with pytest.raises(ArgumentError):
        SieveWeightSpec(((Piece.power(0.1),), (Piece.power(0.1), Piece.power(0.1))), delta=0.5)


def test_support_is_exactly_the_nonzero_weights():
    spec = SieveWeightSpec.standard(2, 0.6, 1)
    N = 1000
    supp = weight_support(spec, N)
    X = int(N**0.6) + 1
    for d1 in range(1, X):
        for d2 in range(1, X // d1 + 1):
            w = sieve_weight(spec, (d1, d2), N)
            assert (w != 0) == ((d1, d2) in supp)


def bracket_oracle(store, t, n, m, penalty):
    flags = {h: store.is_prime(n + h) for h in t.offsets}
    total = sum(flags.values()) - m
    for part in t.parts:
        for i, a in enumerate(part):
            for b in part[i + 1 :]:
                total -= penalty * (flags[a] and flags[b])
    return total


def test_trivial_weights_count_the_bracket(store_1e5):
    t = partition_equal(KTuple((0, 2, 6, 8)), 2)
    W, N, m = 6, 5000, 1
    b = coprime_base(t, W)
    for variant, pen in (("S", 1), ("S_prime", m + 1)):
        got = weighted_sum_S(store_1e5, t, b, W, N, m, SieveWeightSpec.trivial(4), variant).value
        want = sum(bracket_oracle(store_1e5, t, n, m, pen) for n in range(N + 1, 2 * N + 1) if n % W == b % W)
        assert got == want


def test_empty_range(store_1e5):
    t = partition_equal(KTuple((0, 2, 6)), 3)
    W = 30031  # squarefree (59 * 509), larger than 2N
    b = 2100  # above 2N, so no n in (N, 2N] lies in the class
    assert math.gcd(math.prod(b + h for h in t.offsets), W) == 1
    r = weighted_sum_S(store_1e5, t, b, W, 1000, 1, SieveWeightSpec.standard(3, 0.5))
    assert r.value == 0 and r.n_count == 0


def test_coprimality_precondition(store_1e5):
    t = partition_equal(KTuple((0, 2, 6)), 3)
    with pytest.raises(ArgumentError):
        weighted_sum_S(store_1e5, t, 0, 2, 1000, 1, SieveWeightSpec.standard(3, 0.5))
    with pytest.raises(ArgumentError):
        weighted_sum_S(store_1e5, KTuple((0, 2, 6)), 1, 2, 1000, 1, SieveWeightSpec.standard(3, 0.5))


def test_coprime_base():
    t = KTuple((0, 2, 6))
    for W in (2, 6, 30, 210, 2310):
        b = coprime_base(t, W)
        assert 0 <= b < W
        assert math.gcd(math.prod(b + h for h in t.offsets), W) == 1
    with pytest.raises(ArgumentError):
        coprime_base(t, 4)


admissible3 = st.sets(st.integers(0, 20), min_size=3, max_size=3).map(KTuple.of).filter(is_admissible)


@settings(max_examples=6, deadline=None)
@given(admissible3, st.sampled_from([2, 6]), st.sampled_from([0.5, 0.6]), st.sampled_from(["S", "S_prime"]))
def test_dual_paths_agree(store_1e5, t, W, delta, variant):
    t = partition_equal(t, 3)
    b = coprime_base(t, W)
    direct, swapped, rel = weighted_sum_check(store_1e5, t, b, W, 5000, 1, SieveWeightSpec.standard(3, delta, 2), variant)
    assert rel < 1e-9
    assert direct.support_size == swapped.support_size > 1


def test_witness_when_positive(store_1e5):
    # W larger than N isolates a single n, making S positive at a prime triple
    t = partition_equal(KTuple((0, 2, 6)), 3)
    n = next(n for n in range(10**4 + 1, 2 * 10**4) if all(store_1e5.is_prime(n + h) for h in t.offsets))
    W = 40009
    N = 10**4
    spec = SieveWeightSpec.standard(3, 0.5, 1)
    d, s, rel = weighted_sum_check(store_1e5, t, n, W, N, 1, spec)
    assert d.n_count == 1 and d.value > 0 and rel < 1e-12
    w = find_witness(store_1e5, t, n, W, N, 1)
    assert w is not None and w[0] == n
    assert sum(1 for c in w[1] if c > 0) >= 2
