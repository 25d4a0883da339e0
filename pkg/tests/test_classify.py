import math

import pytest

from fermica.classify import (
    ClassificationError,
    classify,
    compute_edge_supports,
    extract_parameters,
    tcomm_residual,
)
from fermica.fca import (
    Conjugation,
    ControlledPhase,
    Custom,
    Forking,
    LocalRule,
    MajoranaShift,
    Shift,
    compose,
    invert,
)
from fermica.graded_algebra import X, Y


def _same_angle(a, b, period=math.pi, tol=1e-9):
    d = (a - b) % period
    return min(d, period - d) < tol


def test_identity_is_trivial_conjugation():
    c = classify(Shift(0))
    assert c.family == "local-conjugation"
    assert c.params == {"theta": 0.0, "n": 0}


@pytest.mark.parametrize("theta,n", [(0.3, 0), (2.5, 1), (0.0, 1)])
def test_conjugation_round_trip(theta, n):
    c = classify(Conjugation(theta, n))
    assert c.family == "local-conjugation"
    assert c.params["n"] == n and _same_angle(c.params["theta"], theta)


@pytest.mark.parametrize("phi,theta,n", [(1.0, 0.2, 0), (math.pi, 0.0, 1), (2.0, 1.3, 1)])
def test_controlled_phase_round_trip(phi, theta, n):
    c = classify(ControlledPhase(phi, theta, n))
    assert c.family == "controlled-phase"
    assert abs(c.params["phi"] - phi) < 1e-9
    assert c.params["n"] == n and _same_angle(c.params["theta"], theta)


@pytest.mark.parametrize("theta,n", [(0.0, 0), (0.4, 1), (2.9, 0)])
def test_forking_round_trip(theta, n):
    c = classify(Forking(theta, n))
    assert c.family == "forking"
    assert c.params["n"] == n and _same_angle(c.params["theta"], theta)
    assert c.params["gamma"] == 0.0


def test_rotated_forking_gets_gamma():
    aut = compose(Conjugation(0.35, 0), Forking(0.2, 1))
    c = classify(aut)
    assert c.family == "forking"
    assert abs(c.params["gamma"] - 0.35) < 1e-9
    rebuilt = c.to_automaton()
    for g in (X(0), Y(0)):
        assert rebuilt.apply(g).allclose(aut.apply(g), 1e-9)


def test_forking_normal_form_images():
    # some odd eta goes to a pure left generator, some odd xi to a pure right one
    aut = Forking(0.8, 1)
    c = classify(aut)
    bare = compose(aut, invert(Conjugation(c.params["theta"], c.params["n"])))
    assert bare.apply(X(0)).allclose(Y(-1), 1e-12)
    assert bare.apply(Y(0)).allclose(X(1), 1e-12)


def test_edge_supports():
    kinds = {
        "local-conjugation": Conjugation(0.2, 1),
        "controlled-phase": ControlledPhase(1.0),
        "forking": Forking(0.1),
    }
    expect = {"local-conjugation": "trivial", "controlled-phase": "even", "forking": "odd"}
    for fam, aut in kinds.items():
        e = compute_edge_supports(aut.rule)
        assert e.kinds[0] == e.kinds[2] == expect[fam]
        assert e.balanced()


@pytest.mark.parametrize(
    "aut,family,direction",
    [
        (Shift(1), "shift-composed", "+"),
        (Shift(-1), "shift-composed", "-"),
        (MajoranaShift(1), "majorana-shift-composed", "+"),
        (compose(MajoranaShift(-1), ControlledPhase(0.5, 0.1, 0)), "majorana-shift-composed", "-"),
        (compose(Shift(1), Forking(0.3, 1)), "shift-composed", "+"),
    ],
)
def test_shift_peeling(aut, family, direction):
    c = classify(aut)
    assert (c.family, c.direction) == (family, direction)
    rebuilt = c.to_automaton()
    for g in (X(0), Y(0)):
        assert rebuilt.apply(g).allclose(aut.apply(g), 1e-9)


def test_peeled_inner_family():
    c = classify(compose(MajoranaShift(1), ControlledPhase(0.5, 0.1, 0)))
    assert c.inner.family == "controlled-phase"
    assert abs(c.inner.params["phi"] - 0.5) < 1e-9


def test_invalid_rule_refused():
    with pytest.raises(ClassificationError):
        classify(LocalRule(X(0), X(1)))


def test_beyond_nearest_neighbour_refused():
    with pytest.raises(ClassificationError):
        classify(compose(Forking(0.1), Forking(0.2)))


def test_odd_edges_outside_forking_normal_form():
    # a Majorana shift conjugating a reflection pairs Y(c-1) with X(c); not of the form T~ U
    aut = compose(MajoranaShift(1), Conjugation(0.3, 1), invert(MajoranaShift(1)))
    assert compute_edge_supports(aut.rule).kinds[0] == "odd"
    with pytest.raises(ClassificationError):
        classify(aut)


def test_extract_parameters_directly():
    p = extract_parameters(ControlledPhase(0.0, 0.4, 0).rule, "controlled-phase")
    assert p["phi"] == 0.0 and _same_angle(p["theta"], 0.4)
    with pytest.raises(ValueError):
        extract_parameters(Shift(0).rule, "nonsense")


def test_tcomm_residual_small_for_valid_rules():
    for aut in (ControlledPhase(1.0, 0.3, 1), Forking(0.4, 0)):
        assert tcomm_residual(aut.rule) < 1e-12


def test_classify_accepts_custom_rules():
    c = classify(Custom(Forking(0.4, 1).rule))
    assert c.family == "forking"
    assert c.to_dict()["index"] == [0, 1]
