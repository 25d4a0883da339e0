import math

import pytest

from fermica.fca import Conjugation, ControlledPhase, Forking, MajoranaShift, Shift, compose
from fermica.graded_algebra import X, Y, Z, graded_commutator, identity
from fermica.support import (
    AlgebraClassificationError,
    IndexValue,
    algebra_closure,
    check_multiplicativity,
    classify_algebra,
    compute_index,
    index_details,
    support_algebra,
)
from oracles import brute_support, monomials, span_rank

INDEX_ONE = [
    Shift(0),
    Conjugation(0.3, 0),
    Conjugation(2.0, 1),
    ControlledPhase(1.0, 0.0, 0),
    ControlledPhase(math.pi / 2, 0.3, 1),
    Forking(0.0, 0),
    Forking(0.4, 1),
]


def test_support_of_product_on_one_cell():
    alg = support_algebra([X(0) * Y(1)], {0})
    assert alg.dimension == 2
    assert alg.contains(X(0))
    assert not alg.contains(Y(0))


def test_support_of_identity():
    assert support_algebra([identity()], {0, 1}).dimension == 1


def test_support_of_cell_generators_is_full():
    alg = support_algebra([X(0), Y(0)], {0})
    assert alg.dimension == 4
    assert alg.contains(Z(0))


def test_closures():
    assert algebra_closure([X(0)]).dimension == 2
    assert algebra_closure([X(0), Y(0)]).dimension == 4
    z = algebra_closure([Z(0)])
    assert z.dimension == 2 and z.contains(Z(0)) and not any(z.grades())


def test_closure_is_closed_and_unital():
    alg = algebra_closure([X(0) * Y(1) + Z(0), X(1)], {0, 1})
    assert alg.is_closed()
    assert alg.contains(identity())


def test_classify_algebra_examples():
    assert classify_algebra(algebra_closure([X(0)])).variant == "Clifford"
    assert classify_algebra(algebra_closure([X(0)])).size == 1
    full = classify_algebra(algebra_closure([X(0), Y(0)]))
    assert (full.variant, full.size, full.p, full.q) == ("FullMatrix", 2, 1, 1)
    trivial = classify_algebra(algebra_closure([], {0}))
    assert (trivial.variant, trivial.size) == ("FullMatrix", 1)


def test_classify_algebra_two_cells():
    cls = classify_algebra(algebra_closure([X(0), Y(0), X(1), Y(1)]))
    assert (cls.variant, cls.p, cls.q) == ("FullMatrix", 2, 2)
    cl = classify_algebra(algebra_closure([X(0), Y(0), X(1)]))
    assert (cl.variant, cl.size) == ("Clifford", 2)


def test_classify_algebra_rejects_non_simple():
    # span{I, Z} is commutative with an even centre: not of either form
    with pytest.raises(AlgebraClassificationError):
        classify_algebra(algebra_closure([Z(0)]))


@pytest.mark.parametrize(
    "ops,cells",
    [
        ([X(0) * Y(1)], {0, 1}),
        ([X(0) * Y(1) + Z(0) * X(2)], {0, 1}),
        (list(Forking(0.4, 1).local_images()), {-1, 0}),
        (list(ControlledPhase(1.0, 0.2, 0).local_images()), {0, 1}),
        (list(ControlledPhase(1.0, 0.2, 1).local_images()), {-1, 0, 1}),
    ],
)
def test_support_matches_brute_force(ops, cells):
    fast = support_algebra(ops, cells)
    slow = brute_support(ops, cells)
    basis = monomials(cells)
    assert fast.dimension == len(slow)
    assert span_rank(slow + fast.elements, basis) == len(slow)
    assert all(fast.contains(a) for a in slow)


@pytest.mark.parametrize("aut", INDEX_ONE, ids=repr)
def test_unit_index(aut):
    assert compute_index(aut) == IndexValue(0)


def test_shift_and_majorana_shift_indices():
    assert compute_index(Shift(1)).log2_numerator == -2
    assert compute_index(Shift(-1)).log2_numerator == 2
    assert compute_index(MajoranaShift(1)).log2_numerator == -1
    assert compute_index(MajoranaShift(-1)).log2_numerator == 1


def test_majorana_shift_left_algebra():
    d = index_details(MajoranaShift(1))
    assert d.left.dimension == 2
    assert d.left_class.variant == "Clifford"
    assert d.index.provenance == (2, 1, 2)


def test_factorization_dimension():
    for aut in (Forking(0.1, 1), ControlledPhase(0.5, 0, 0), MajoranaShift(1)):
        d = index_details(aut)
        assert d.left.dimension * d.right.dimension == 16


@pytest.mark.parametrize("site", [0, 1, 2])
def test_index_is_site_independent(site):
    for aut in (MajoranaShift(-1), Shift(1), Forking(0.2, 0)):
        assert compute_index(aut, site) == compute_index(aut, 0)


def test_index_value_arithmetic():
    a = IndexValue(1)
    assert (a * a) == IndexValue(2)
    assert a.inverse() == IndexValue(-1)
    assert (a / a) == IndexValue(0)
    assert str(IndexValue(-1)) == "2^(-1/2)"
    assert str(IndexValue(2)) == "2^(1)"
    assert IndexValue(-2).reduced() == (-1, 1)
    assert abs(IndexValue(1).value - math.sqrt(2)) < 1e-15


def test_multiplicativity_examples():
    assert check_multiplicativity(MajoranaShift(1), MajoranaShift(1))
    assert compute_index(compose(MajoranaShift(1), MajoranaShift(1))) == compute_index(Shift(1))
    assert check_multiplicativity(Shift(0), Forking(0.3, 1))


@pytest.mark.parametrize("aut", [ControlledPhase(0.7, 0.1, 0), Forking(0.3, 1), Conjugation(0.5, 1)], ids=repr)
def test_overlapping_supports_graded_commute(aut):
    # images of cells -1 and +1 meet on cell 0; their supports there must graded-commute
    left = support_algebra([aut.image_of_mode(m) for m in (-2, -1)], {0})
    right = support_algebra([aut.image_of_mode(m) for m in (2, 3)], {0})
    for u in left.elements:
        for v in right.elements:
            assert graded_commutator(u, v).max_abs() < 1e-10
