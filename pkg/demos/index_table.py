"""
Indices of the built-in automata
================================

Every nearest-neighbour automaton on the Majorana chain carries an index of
the form 2^(k/2). Shifts move information and have index != 1; everything
that is a finite-depth circuit has index 1.
"""

import math

from fermica import (
    Conjugation,
    ControlledPhase,
    Forking,
    MajoranaShift,
    Shift,
    compose,
    compute_index,
    index_details,
)

# one representative per family
automata = [
    Shift(1),
    Shift(-1),
    MajoranaShift(1),
    MajoranaShift(-1),
    Conjugation(0.3, 1),
    ControlledPhase(1.0, 0.2, 0),
    Forking(0.4, 1),
]

for aut in automata:
    ind = compute_index(aut)
    print(f"{aut!r:45s} ind = {str(ind):10s} ({ind.value:.4f})")

# the index comes out of two support algebras; for the Majorana shift the
# left one is a Clifford algebra, which is where the half-integer exponent
# comes from
d = index_details(MajoranaShift(1))
print()
print("left support algebra of the Majorana shift:", d.left_class.variant, "of dimension", d.left.dimension)
print("right support algebra has dimension", d.right.dimension, "so dim L * dim R = 16")

# composing multiplies the indices: two Majorana shifts make one ordinary shift
twice = compose(MajoranaShift(1), MajoranaShift(1))
print()
print("ind(sigma o sigma) =", compute_index(twice), " ind(tau) =", compute_index(Shift(1)))
assert compute_index(twice) == compute_index(Shift(1))
assert math.isclose(compute_index(twice).value, compute_index(MajoranaShift(1)).value ** 2)
