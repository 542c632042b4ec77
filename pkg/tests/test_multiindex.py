import pytest

from gevreykit.multiindex import (
    Decomposition,
    composition_multinomial_sum,
    decomposition_census,
    enumerate_decompositions,
    mi_binomial,
    mi_factorial,
    mi_of_order,
    mi_order,
)

# p(n) for n = 0..20
PARTITIONS = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77, 101, 135, 176,
              231, 297, 385, 490, 627]


def test_enumerate_d1_examples():
    assert len(list(enumerate_decompositions((3,)))) == 3
    assert len(list(enumerate_decompositions((4,)))) == 5


def test_enumerate_d2_example():
    decs = list(enumerate_decompositions((1, 1)))
    assert len(decs) == 2
    shapes = {(d.parts, d.multiplicities) for d in decs}
    assert (((1, 1),), (1,)) in shapes
    assert (((0, 1), (1, 0)), (1, 1)) in shapes


def test_round_trip_and_canonical_order():
    for alpha in [(5,), (2, 3), (1, 1, 2)]:
        seen = set()
        for d in enumerate_decompositions(alpha):
            total = [0] * len(alpha)
            for p, m in zip(d.parts, d.multiplicities):
                for i, c in enumerate(p):
                    total[i] += m * c
            assert tuple(total) == alpha
            assert all(d.parts[i] < d.parts[i + 1] for i in range(len(d.parts) - 1))
            key = (d.parts, d.multiplicities)
            assert key not in seen
            seen.add(key)


def test_census_matches_partition_function_d1():
    for n in range(1, 21):
        count, bound, ok = decomposition_census((n,))
        assert count == PARTITIONS[n]
        assert ok


def test_census_examples():
    assert decomposition_census((6,)) == (11, 343, True)
    count, bound, ok = decomposition_census((2, 0))
    assert (count, bound, ok) == (2, 81, True)
    assert decomposition_census((1,)) == (1, 8, True)


def test_census_bound_small_orders():
    for d in (1, 2, 3):
        for n in range(1, 7):
            for alpha in mi_of_order(d, n):
                count, bound, ok = decomposition_census(alpha)
                assert ok, (alpha, count, bound)


def test_composition_multinomial_sum_power_identity():
    for n in range(1, 21):
        assert composition_multinomial_sum(n) == 2 ** (n - 1)


def test_composition_examples():
    assert composition_multinomial_sum(1) == 1
    assert composition_multinomial_sum(3) == 4
    assert composition_multinomial_sum(4) == 8


def test_decomposition_validation():
    with pytest.raises(ValueError):
        Decomposition(parts=((1,),), multiplicities=(0,), target=(1,))
    with pytest.raises(ValueError):
        Decomposition(parts=((2,), (1,)), multiplicities=(1, 1), target=(3,))
    with pytest.raises(ValueError):
        Decomposition(parts=((1,),), multiplicities=(2,), target=(3,))


def test_zero_alpha_rejected():
    with pytest.raises(ValueError):
        list(enumerate_decompositions((0, 0)))


def test_multiplicity_bounds():
    for d in enumerate_decompositions((2, 2)):
        assert d.total_multiplicity <= mi_order(d.target)
        assert d.num_parts <= mi_order(d.target)
        assert all(1 <= mi_order(p) <= mi_order(d.target) for p in d.parts)


def test_mi_helpers():
    assert mi_factorial((3, 2)) == 12
    assert mi_binomial((3, 2), (1, 1)) == 6
    assert mi_binomial((1, 0), (0, 1)) == 0
    assert mi_order((2, 3, 4)) == 9
