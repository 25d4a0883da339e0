"""Finite-depth fermionic circuits and the explicit constructions built from them.

A gate ``W`` on a block of cells acts on operators generator by generator:
every Majorana generator ``xi`` of the block goes to ``W xi W^dagger`` and
generators outside the block are left alone; products follow by
multiplicativity.  For even ``W`` this is plain conjugation.  For odd ``W`` it
is the graded version (plain conjugation would also flip the sign of every odd
generator outside the block), which is what lets a circuit realize the
reflection hidden in the forking rule.

Layers are applied first to last, so the operator map of a circuit is
``Ad(L_D) o ... o Ad(L_1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .fca import Automaton, compose, controlled_phase_gate, invert, local_unitary, substitute
from .graded_algebra import (
    CellWindow,
    GradedOperator,
    WindowError,
    X,
    Y,
    Z,
    identity,
    jw_matrix,
    majorana,
    relabel_cells,
    translate,
)
from .support import IndexValue, compute_index

__all__ = [
    "CircuitError",
    "Gate",
    "Layer",
    "FDFC",
    "CircuitAutomaton",
    "MargolusScheme",
    "conjugate",
    "circuit_index_is_one",
    "forking_gate",
    "synthesize_forking_ms",
    "synthesize_conjugation",
    "synthesize_controlled_phase",
    "synthesize",
    "fermionic_swap",
    "lift_scheme",
    "AncillaRole",
    "AncillaSchedule",
    "ancilla_removal_schedule",
    "NotEquivalent",
    "equivalence_witness",
]


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    """Parity-homogeneous unitary acting on a finite block of cells."""

    unitary: GradedOperator
    cells: tuple
    _actions: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        cells = tuple(sorted(set(self.cells)))
        object.__setattr__(self, "cells", cells)
        if not cells:
            raise CircuitError("a gate needs at least one cell")
        if not self.unitary.support <= set(cells):
            raise CircuitError(f"unitary touches {sorted(self.unitary.support)} outside the block {list(cells)}")
        if self.unitary.grade is None:
            raise CircuitError("gate unitaries must have definite parity")
        if not (self.unitary * self.unitary.adjoint()).allclose(identity(), 1e-10):
            raise CircuitError("gate is not unitary")

    @property
    def parity(self) -> int:
        return self.unitary.grade

    @property
    def even(self) -> bool:
        return self.parity == 0

    def matrix(self, window: CellWindow | None = None) -> np.ndarray:
        return jw_matrix(self.unitary, window or CellWindow(self.cells[0], self.cells[-1]))

    def unitarity_defect(self) -> float:
        m = self.matrix()
        return float(np.abs(m @ m.conj().T - np.eye(len(m))).max())

    def action(self, mode: int) -> GradedOperator:
        """Image of the generator ``xi_mode`` (a generator of this block)."""
        img = self._actions.get(mode)
        if img is None:
            w = self.unitary
            img = self._actions[mode] = (w * majorana(mode) * w.adjoint()).chop()
        return img

    def translate(self, x: int) -> "Gate":
        return Gate(translate(self.unitary, x), tuple(c + x for c in self.cells))

    def relabel(self, mapping: dict) -> "Gate":
        return Gate(relabel_cells(self.unitary, mapping), tuple(mapping.get(c, c) for c in self.cells))


@dataclass(frozen=True)
class Layer:
    """Gates with disjoint blocks.

    Either an explicit list ``gates`` or a ``template`` whose block starts at
    cell 0, repeated at ``offset + k * period`` for every integer ``k``.
    """

    gates: tuple = ()
    template: Gate | None = None
    offset: int = 0
    period: int = 1
    _placed: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        seen: set = set()
        for g in self.gates:
            if seen & set(g.cells):
                raise CircuitError("gates of one layer must have disjoint blocks")
            seen |= set(g.cells)
        if self.template is not None:
            if self.gates:
                raise CircuitError("a layer is either explicit or periodic")
            if self.template.cells[0] != 0:
                raise CircuitError("template blocks start at cell 0")
            if self.template.cells[-1] >= self.period:
                raise CircuitError("template blocks overlap their translates")

    @property
    def periodic(self) -> bool:
        return self.template is not None

    def gates_touching(self, cells: Iterable[int]) -> list:
        cells = set(cells)
        if not self.periodic:
            return [g for g in self.gates if cells & set(g.cells)]
        if not cells:
            return []
        width = self.template.cells[-1]
        k_lo = (min(cells) - width - self.offset) // self.period
        k_hi = (max(cells) - self.offset) // self.period
        out = []
        for k in range(k_lo, k_hi + 1):
            g = self._placed.get(k)
            if g is None:
                g = self._placed[k] = self.template.translate(self.offset + k * self.period)
            if cells & set(g.cells):
                out.append(g)
        return out

    def materialize(self, window: CellWindow) -> list:
        """Gates whose block lies inside ``window``."""
        return [g for g in self.gates_touching(window.cells) if window.contains(g.cells)]

    def image_map(self, cells: Iterable[int]):
        images = {}
        for g in self.gates_touching(cells):
            for c in g.cells:
                for m in (2 * c, 2 * c + 1):
                    images[m] = g.action(m)

        def image(mode: int) -> GradedOperator:
            img = images.get(mode)
            return majorana(mode) if img is None else img

        return image

    def apply(self, op: GradedOperator) -> GradedOperator:
        return substitute(op, self.image_map(op.support))


@dataclass(frozen=True)
class FDFC:
    """Finite-depth circuit; ``layers[0]`` acts first."""

    layers: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def depth(self) -> int:
        return len(self.layers)

    def gates(self) -> list:
        return [g for layer in self.layers for g in layer.gates]

    def then(self, other: "FDFC") -> "FDFC":
        """Circuit applying ``self`` first and ``other`` afterwards."""
        return FDFC(self.layers + other.layers)

    def inverse(self) -> "FDFC":
        layers = []
        for layer in reversed(self.layers):
            if layer.periodic:
                t = layer.template
                layers.append(Layer(template=Gate(t.unitary.adjoint(), t.cells), offset=layer.offset, period=layer.period))
            else:
                layers.append(Layer(tuple(Gate(g.unitary.adjoint(), g.cells) for g in layer.gates)))
        return FDFC(tuple(layers))

    def as_automaton(self) -> "CircuitAutomaton":
        return CircuitAutomaton(self)


def light_cone(c: FDFC, cells: Iterable[int], window: CellWindow | None = None) -> set:
    reach = set(cells)
    for layer in c.layers:
        touched = layer.gates_touching(reach)
        for g in touched:
            if window is not None and not window.contains(g.cells):
                raise WindowError(f"gate on cells {list(g.cells)} leaves the window [{window.lo}, {window.hi}]")
            reach |= set(g.cells)
    return reach


def conjugate(c: FDFC, op: GradedOperator, w: CellWindow | None = None) -> GradedOperator:
    """Image of ``op`` under the circuit, layer by layer.

    With a window, every gate inside the light cone of ``op`` must fit in it.
    """
    if w is not None:
        if not w.contains(op.support):
            raise WindowError(f"operator support {sorted(op.support)} is not inside the window")
        light_cone(c, op.support, w)
    for layer in c.layers:
        op = layer.apply(op)
    return op


@dataclass(frozen=True, eq=False)
class CircuitAutomaton(Automaton):
    """Automaton induced by a circuit whose action commutes with translations."""

    circuit: FDFC

    def image_of_mode(self, mode: int) -> GradedOperator:
        return conjugate(self.circuit, majorana(mode))

    def local_images(self):
        return self.image_of_mode(0), self.image_of_mode(1)

    @property
    def neighbourhood(self):
        nb = set()
        for c in (0, 1):
            for m in (2 * c, 2 * c + 1):
                nb |= {d - c for d in self.image_of_mode(m).support}
        return tuple(sorted(nb)) or (0,)


def circuit_index_is_one(c: FDFC) -> bool:
    return compute_index(c.as_automaton()) == IndexValue(0)


# explicit constructions -------------------------------------------------------
_S2 = 1 / math.sqrt(2)


def forking_gate(fixup: bool = True) -> GradedOperator:
    """``(X (x) Z) exp(-(pi/4) Y (x) X)`` on cells 0, 1.

    The exponential is ``(I - Y(0) X(1)) / sqrt(2)``; it swaps ``Y(0)`` and
    ``X(1)`` up to the sign that ``X(0) Z(1)`` repairs.
    """
    core = _S2 * (identity() - Y(0) * X(1))
    return (X(0) * Z(1) * core).chop() if fixup else core


def _parity(cells: Sequence[int]) -> GradedOperator:
    p = identity()
    for c in cells:
        p = p * Z(c)
    return p


def _cellwise(theta: float, n: int, cells: Sequence[int]) -> GradedOperator:
    """Single gate on ``cells`` acting like ``U(theta, n)^dagger`` on each cell.

    For odd ``U`` the plain product picks up a sign on every generator of the
    block; the block parity operator removes it.
    """
    w = identity()
    for c in cells:
        w = w * local_unitary(theta, n, c).adjoint()
    if n and len(cells) % 2 == 0:
        w = w * _parity(cells)
    return w.chop()


@dataclass(frozen=True)
class MargolusScheme:
    """Two layers of nearest-neighbour gates; ``first`` acts first.

    Sites are groups of ``site_width`` consecutive cells.  ``first`` sits on
    site pairs ``{2x + first_offset, 2x + first_offset + 1}`` and ``second`` on
    the complementary pairs.
    """

    first: Gate
    second: Gate
    first_offset: int = 1
    site_width: int = 1

    def __post_init__(self):
        span = 2 * self.site_width
        for g in (self.first, self.second):
            if g.cells[0] < 0 or g.cells[-1] >= span:
                raise CircuitError(f"Margolus gates live on cells 0..{span - 1}")

    @property
    def gate_even(self) -> Gate:
        """Gate on ``{2x, 2x + 1}``."""
        return self.second if self.first_offset % 2 else self.first

    @property
    def gate_odd(self) -> Gate:
        """Gate on ``{2x + 1, 2x + 2}``."""
        return self.first if self.first_offset % 2 else self.second

    def to_fdfc(self) -> FDFC:
        w = self.site_width
        return FDFC(
            (
                Layer(template=self.first, offset=(self.first_offset % 2) * w, period=2 * w),
                Layer(template=self.second, offset=((self.first_offset + 1) % 2) * w, period=2 * w),
            )
        )

    @property
    def depth(self) -> int:
        return 2


def synthesize_forking_ms(theta: float = 0.0, n: int = 0, fixup: bool = True, gamma: float = 0.0) -> MargolusScheme:
    """Margolus scheme for ``U(gamma, 0) o Forking(theta, n)``.

    The cellwise ``U(theta, n)`` acts before the swap gates, so it is folded
    into the first layer; an optional cellwise rotation after them goes into
    the second.
    """
    m = forking_gate(fixup)
    first = Gate((m * _cellwise(theta, n, (0, 1))).chop(), (0, 1))
    second_u = m if not gamma else (_cellwise(gamma, 0, (0, 1)) * m).chop()
    return MargolusScheme(first, Gate(second_u, (0, 1)), first_offset=1)


def synthesize_conjugation(theta: float, n: int) -> FDFC:
    return FDFC((Layer(template=Gate(local_unitary(theta, n).adjoint().chop(), (0,)), period=1),))


def synthesize_controlled_phase(phi: float, theta: float = 0.0, n: int = 0) -> FDFC:
    """Cellwise ``U(theta, n)^dagger`` followed by two staggered layers of ``C_phi^dagger``."""
    cd = Gate(controlled_phase_gate(phi, 0).adjoint().chop(), (0, 1))
    return synthesize_conjugation(theta, n).then(
        FDFC((Layer(template=cd, offset=0, period=2), Layer(template=cd, offset=1, period=2)))
    )


def synthesize(classification) -> FDFC:
    """Circuit for an index-one classification."""
    p = classification.params
    fam = classification.family
    if fam == "local-conjugation":
        if not p["theta"] and not p["n"]:
            return FDFC()
        return synthesize_conjugation(p["theta"], p["n"])
    if fam == "controlled-phase":
        return synthesize_controlled_phase(p["phi"], p["theta"], p["n"])
    if fam == "forking":
        return synthesize_forking_ms(p["theta"], p["n"], gamma=p.get("gamma", 0.0)).to_fdfc()
    raise CircuitError(
        f"index {classification.index} != 1: a QCA is implementable by a circuit if and only if its index is equal to one"
    )


# ancilla removal -------------------------------------------------------------------
def fermionic_swap(a: int, b: int) -> GradedOperator:
    """Even unitary exchanging the generators of cells ``a`` and ``b`` (up to an overall sign).

    Product of the two Majorana reflections ``(X_a + X_b)/sqrt 2`` and ``(Y_a + Y_b)/sqrt 2``.
    """
    rx = _S2 * (X(a) + X(b))
    ry = _S2 * (Y(a) + Y(b))
    return (ry * rx).chop()


def lift_scheme(ms: MargolusScheme, swap: bool = False) -> MargolusScheme:
    """Scheme for ``T (x) id`` on enlarged sites of one physical and one ancilla cell.

    Site ``s`` holds physical cell ``2s`` and ancilla cell ``2s + 1``.  With
    ``swap`` the first layer ends by exchanging physical and ancilla content
    and the second layer starts by undoing it, so the gates really use the
    ancillas while the composite is unchanged.
    """
    if ms.site_width != 1:
        raise CircuitError("only one-cell sites can be lifted")
    phys = {0: 0, 1: 2}
    first = relabel_cells(ms.first.unitary, phys)
    second = relabel_cells(ms.second.unitary, phys)
    if swap:
        s = fermionic_swap(0, 1) * fermionic_swap(2, 3)
        first = (s * first).chop()
        second = (second * s.adjoint()).chop()
    cells = (0, 1, 2, 3)
    return MargolusScheme(Gate(first, cells), Gate(second, cells), ms.first_offset, site_width=2)


# Steps of the 12-site tile: (layer, left site, hosts newly assigned to ancilla roles).
_TILE_STEPS = (
    (("first", 2, {2: 10, 3: 0}), ("first", 4, {4: 1, 5: 8}), ("first", 6, {6: 9, 7: 11})),
    (("second", 3, {}), ("second", 5, {})),
    (("first", 8, {8: 4, 9: 3}),),
    (("second", 7, {}),),
    (("first", 0, {0: 11, 1: 5}),),
    (("second", 1, {}),),
    (("second", 9, {10: 0}),),
)


@dataclass(frozen=True)
class AncillaRole:
    site: int
    host: int
    gates: tuple
    completed: bool


@dataclass(frozen=True)
class AncillaSchedule:
    """Physical-cell circuit emulating an ancilla-assisted scheme on a 12-cell tile."""

    circuit: FDFC
    roles: tuple
    window: CellWindow
    interior: tuple

    def gate_sequence(self) -> list:
        return self.circuit.gates()

    def restored(self, tol: float = 1e-10) -> dict:
        """For each completed role: do its gates return the host generators to themselves?"""
        seq = self.gate_sequence()
        out = {}
        for role in self.roles:
            if not role.completed:
                continue
            lo, hi = min(role.gates), max(role.gates)
            sub = FDFC(tuple(Layer((g,)) for g in seq[lo : hi + 1]))
            out[role.site] = all(
                conjugate(sub, g).allclose(g, tol) for g in (X(role.host), Y(role.host))
            )
        return out


def ancilla_removal_schedule(ms: MargolusScheme, window12: CellWindow) -> AncillaSchedule:
    """Replace the ancillas of an enlarged-site scheme by idle physical cells.

    ``ms`` acts on sites of two cells (physical, ancilla) and implements
    ``T (x) id``; the result acts on the physical cells of a 12-cell tile at
    the left end of ``window12`` and agrees with ``T`` on tile cells 2..9.
    """
    if window12.size < 12:
        raise WindowError("ancilla removal needs a window of at least 12 cells")
    if ms.site_width != 2:
        raise CircuitError("the scheme must act on enlarged sites (site_width == 2)")
    # the tile puts the first layer on even site pairs; a translation-invariant scheme
    # is unchanged when both layers are shifted by one site
    templates = {"first": ms.first, "second": ms.second}
    lo = window12.lo
    hosts: dict = {}
    role_gates: dict = {}
    layers = []
    index = 0
    for step in _TILE_STEPS:
        gates = []
        for which, left, new_hosts in step:
            hosts.update(new_hosts)
            sites = (left, left + 1)
            mapping = {}
            for k, s in enumerate(sites):
                if s not in hosts:
                    raise CircuitError(f"no host assigned for the ancilla of site {s}")
                mapping[2 * k] = lo + s
                mapping[2 * k + 1] = lo + hosts[s]
                role_gates.setdefault(s, []).append(index)
            gates.append(templates[which].relabel(mapping))
            index += 1
        layers.append(Layer(tuple(gates)))
    roles = tuple(
        AncillaRole(s, lo + hosts[s], tuple(g), len(g) == 2) for s, g in sorted(role_gates.items())
    )
    return AncillaSchedule(FDFC(tuple(layers)), roles, CellWindow(lo, lo + 11), tuple(range(lo + 2, lo + 10)))


# equivalence -------------------------------------------------------------------
@dataclass(frozen=True)
class NotEquivalent:
    """Index mismatch; ``ratio`` is ``ind(t) / ind(s)``."""

    ratio: IndexValue
    index_t: IndexValue = field(default=None)
    index_s: IndexValue = field(default=None)


def equivalence_witness(t: Automaton, s: Automaton, tol: float = 1e-10):
    """Circuit ``F`` with ``Ad(F) o s == t``, or :class:`NotEquivalent`."""
    from .classify import classify

    it, is_ = compute_index(t), compute_index(s)
    if it != is_:
        return NotEquivalent(it / is_, it, is_)
    if t == s:
        return FDFC()
    from .classify import ClassificationError

    try:
        circuit = synthesize(classify(compose(t, invert(s))))
    except ClassificationError:
        # t o s^-1 reaches beyond nearest neighbours; go through the normal forms instead.
        # Both share the same peeled factor; plain shifts commute with everything else.
        ct, cs = classify(t), classify(s)
        if ct.inner is not None and (ct.family, ct.direction) != (cs.family, cs.direction):
            raise
        if ct.family == "majorana-shift-composed":
            raise
        it_, is_ = (ct.inner or ct), (cs.inner or cs)
        circuit = synthesize(is_).inverse().then(synthesize(it_))
    for c in (0, 1):
        for g in (X(c), Y(c)):
            if not conjugate(circuit, s.apply(g)).allclose(t.apply(g), max(tol, 1e-9)):
                raise CircuitError("synthesized circuit does not map s to t")
    return circuit
