"""
Classifying random automata
===========================

Every nearest-neighbour automaton is a shift (ordinary or Majorana, or none)
followed by a local conjugation, a controlled phase or a forking automaton.
We build random compositions and ask the classifier to recover the pieces.
"""

import numpy as np

from fermica import (
    Conjugation,
    ControlledPhase,
    Forking,
    MajoranaShift,
    Shift,
    classify,
    compose,
    synthesize,
    conjugate,
    X,
    Y,
)

rng = np.random.default_rng(7)


def random_automaton():
    outer = [None, Shift(1), Shift(-1), MajoranaShift(1), MajoranaShift(-1)][rng.integers(5)]
    theta, n = rng.uniform(0, 2 * np.pi), int(rng.integers(2))
    kind = rng.integers(3)
    if kind == 0:
        inner = Conjugation(theta, n)
    elif kind == 1:
        inner = ControlledPhase(rng.uniform(0.1, 2 * np.pi - 0.1), theta, n)
    else:
        inner = Forking(theta, n)
    return inner if outer is None else compose(outer, inner), inner


for _ in range(8):
    aut, inner = random_automaton()
    cls = classify(aut)
    print(f"{aut!r}")
    print(f"   -> {cls.summary()}")

# index-one automata come with a circuit; check it on the two generators
aut = ControlledPhase(2.1, 0.4, 1)
c = synthesize(classify(aut))
print()
print(f"{aut!r} has a depth-{c.depth} circuit")
for g in (X(0), Y(0)):
    assert conjugate(c, g).allclose(aut.apply(g), 1e-10)
