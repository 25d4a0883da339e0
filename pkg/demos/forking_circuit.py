"""
Building the forking automaton from gates
=========================================

The forking automaton sends X(c) to Y(c-1) and Y(c) to X(c+1). It has index
one, so a two-layer brickwork circuit reproduces it. The second layer needs a
sign fix-up; this script shows what goes wrong without it, and then how the
ancillas of the enlarged-site version can be traded for idle physical cells.
"""

from fermica import (
    CellWindow,
    Forking,
    X,
    Y,
    Z,
    ancilla_removal_schedule,
    conjugate,
    lift_scheme,
    synthesize_forking_ms,
)

f = Forking()

# two layers of the same two-cell gate, offset by one cell
ms = synthesize_forking_ms()
circuit = ms.to_fdfc()
print("depth:", circuit.depth)
for g in (X(4), Y(4), Z(4)):
    print(f"  {g!r:8s} -> {conjugate(circuit, g)!r}")
    assert conjugate(circuit, g).allclose(f.apply(g), 1e-12)

# drop the fix-up: Y still goes to the right place, X picks up a minus sign
broken = synthesize_forking_ms(fixup=False).to_fdfc()
print()
print("without the fix-up:")
for g in (X(4), Y(4)):
    print(f"  {g!r:8s} -> {conjugate(broken, g)!r}   (expected {f.apply(g)!r})")

# angles and the extra Majorana pairing go into the gate, depth stays two
theta, n = 0.7, 1
c = synthesize_forking_ms(theta, n).to_fdfc()
assert conjugate(c, X(3)).allclose(Forking(theta, n).apply(X(3)), 1e-12)

# lift to sites of two cells (physical, ancilla), then remove the ancillas on
# a 12-cell tile: every ancilla role is played by some physical cell that is
# returned to its initial state after use
sched = ancilla_removal_schedule(lift_scheme(ms), CellWindow(0, 11))
print()
print("ancilla-free tile:", len(sched.gate_sequence()), "gates in", sched.circuit.depth, "layers")
for role in sched.roles:
    state = "restored" if sched.restored().get(role.site) else "open at the tile edge"
    print(f"  site {role.site:2d} borrows cell {role.host:2d}: gates {role.gates} {state}")
bad = [c for c in sched.interior for g in (X(c), Y(c)) if not conjugate(sched.circuit, g).allclose(f.apply(g), 1e-10)]
print("interior cells", sched.interior, "match the forking automaton:", not bad)
