"""Fermionic cellular automata given by a local rule on cell 0.

An automaton is fixed by the images of the two odd generators ``X(0)`` and
``Y(0)``; translation covariance gives the images of every other generator, and
the global action on a monomial is the ordered product of the generator images.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .graded_algebra import (
    CHOP_TOL,
    CellWindow,
    GradedOperator,
    WindowError,
    X,
    Y,
    Z,
    graded_commutator,
    identity,
    translate,
)

__all__ = [
    "LocalRule",
    "Violation",
    "ValidityReport",
    "validate_local_rule",
    "Automaton",
    "Custom",
    "Shift",
    "MajoranaShift",
    "Conjugation",
    "ControlledPhase",
    "Forking",
    "Composition",
    "substitute",
    "apply",
    "compose",
    "invert",
    "local_unitary",
    "controlled_phase_gate",
]

TWO_PI = 2 * math.pi


def _neigh(ops: Iterable[GradedOperator]) -> tuple:
    cells = set()
    for op in ops:
        cells |= op.support
    return tuple(sorted(cells)) or (0,)


@dataclass(frozen=True)
class LocalRule:
    """Images of ``X(0)`` and ``Y(0)`` plus the neighbourhood they live on."""

    image_x: GradedOperator
    image_y: GradedOperator
    neighbourhood: tuple = None

    def __post_init__(self):
        if self.neighbourhood is None:
            object.__setattr__(self, "neighbourhood", _neigh((self.image_x, self.image_y)))
        else:
            object.__setattr__(self, "neighbourhood", tuple(sorted(set(self.neighbourhood))))
        if not self.neighbourhood:
            raise ValueError("neighbourhood must be non-empty")

    @property
    def images(self) -> tuple:
        return (self.image_x, self.image_y)

    def image(self, mode: int) -> GradedOperator:
        """Image of the Majorana generator ``xi_mode``."""
        cell, which = divmod(mode, 2)
        return translate(self.images[which], cell)


@dataclass(frozen=True)
class Violation:
    condition: str
    detail: str
    witness: tuple = ()


@dataclass
class ValidityReport:
    violations: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid

    def conditions(self) -> list:
        return [v.condition for v in self.violations]


def validate_local_rule(rule: LocalRule, tol: float = 1e-10) -> ValidityReport:
    """Check that ``rule`` is the local transition rule of an FCA.

    Conditions, in order: odd images, images inside the declared neighbourhood,
    CAR preservation on cell 0, and graded commutation of the cell-0 images with
    every translated image whose neighbourhood overlaps.
    """
    report = ValidityReport()
    names = ("T(X0)", "T(Y0)")
    for name, img in zip(names, rule.images):
        if img.grade != 1 or img.is_zero():
            report.violations.append(Violation("parity", f"{name} is not a non-zero odd operator", (name,)))
    for name, img in zip(names, rule.images):
        outside = img.support - set(rule.neighbourhood)
        if outside:
            report.violations.append(
                Violation("locality", f"{name} touches cells {sorted(outside)} outside the neighbourhood", (name,))
            )
    if report.violations:
        return report

    a, b = rule.images
    one = identity()
    for label, lhs, rhs in (
        ("T(X0)^2 = I", a * a, one),
        ("T(Y0)^2 = I", b * b, one),
        ("{T(X0), T(Y0)} = 0", a * b + b * a, GradedOperator()),
    ):
        if not lhs.allclose(rhs, tol):
            report.violations.append(Violation("CAR", f"{label} fails", (label,)))

    nb = rule.neighbourhood
    shifts = sorted({q - p for p in nb for q in nb if q != p})
    for x in shifts:
        for i, left in enumerate(rule.images):
            for j, right in enumerate(rule.images):
                moved = translate(right, x)
                gc = graded_commutator(left, moved)
                if gc.max_abs() >= tol:
                    report.violations.append(
                        Violation(
                            "overlap",
                            f"[[{names[i]}, tau_{x} {names[j]}]] = {gc!r} != 0",
                            (names[i], x, names[j]),
                        )
                    )
    return report


def substitute(op: GradedOperator, image_of_mode, tol: float = CHOP_TOL) -> GradedOperator:
    """Homomorphic extension of a map on Majorana generators.

    Every monomial ``xi_{m1} ... xi_{mk}`` becomes the product of the images in
    the same order; the result is linear in ``op``.
    """
    cache: dict = {}
    out = GradedOperator()
    acc: dict = {}
    for modes, coeff in op.items():
        term = identity()
        for m in modes:
            img = cache.get(m)
            if img is None:
                img = cache[m] = image_of_mode(m)
            term = term * img
        for k, v in term.items():
            acc[k] = acc.get(k, 0j) + coeff * v
    out = GradedOperator._from_canonical({k: v for k, v in acc.items() if abs(v) >= tol})
    return out


class Automaton:
    """Base class; subclasses describe where ``X(0)`` and ``Y(0)`` go."""

    def local_images(self) -> tuple:
        raise NotImplementedError

    @property
    def neighbourhood(self) -> tuple:
        return _neigh(self.local_images())

    @property
    def rule(self) -> LocalRule:
        ix, iy = self.local_images()
        return LocalRule(ix, iy, self.neighbourhood)

    def image_of_mode(self, mode: int) -> GradedOperator:
        cell, which = divmod(mode, 2)
        return translate(self.local_images()[which], cell)

    def apply(self, op: GradedOperator, window: CellWindow | None = None) -> GradedOperator:
        if window is not None:
            _check_window(op, self.neighbourhood, window)
        return substitute(op, self.image_of_mode)

    def __call__(self, op: GradedOperator) -> GradedOperator:
        return self.apply(op)


def _check_window(op: GradedOperator, neighbourhood: Sequence[int], window: CellWindow) -> None:
    need = {c + n for c in op.support for n in neighbourhood}
    if not window.contains(need):
        raise WindowError(f"window [{window.lo}, {window.hi}] does not hold support + neighbourhood {sorted(need)}")


@dataclass(frozen=True)
class Custom(Automaton):
    local_rule: LocalRule

    def local_images(self):
        return self.local_rule.images

    @property
    def neighbourhood(self):
        return self.local_rule.neighbourhood


@dataclass(frozen=True)
class Shift(Automaton):
    """Lattice translation ``X(c) -> X(c + step)``, ``Y(c) -> Y(c + step)``."""

    step: int = 1

    def local_images(self):
        return X(self.step), Y(self.step)


@dataclass(frozen=True)
class MajoranaShift(Automaton):
    """``(X_c, Y_c) -> (Y_c, X_{c+s})``; the inverse is ``(X_c, Y_c) -> (Y_{c-s}, X_c)``."""

    sign: int = 1
    inverted: bool = False

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def local_images(self):
        if self.inverted:
            return Y(-self.sign), X(0)
        return Y(0), X(self.sign)


def local_unitary(theta: float, n: int, cell: int = 0) -> GradedOperator:
    """``U(theta, n) = exp(i theta Z) X^n`` on one cell."""
    u = math.cos(theta) * identity() + 1j * math.sin(theta) * Z(cell)
    if n:
        u = u * X(cell)
    return u


def controlled_phase_gate(phi: float, left: int = 0) -> GradedOperator:
    """``diag(1, 1, 1, e^{i phi})`` on cells ``left, left + 1``.

    Written as ``I + (e^{i phi} - 1) n_a n_b`` with occupation ``n = (I - Z) / 2``.
    """
    na = 0.5 * (identity() - Z(left))
    nb = 0.5 * (identity() - Z(left + 1))
    return (identity() + (complex(math.cos(phi), math.sin(phi)) - 1) * (na * nb)).chop()


@dataclass(frozen=True)
class Conjugation(Automaton):
    """Cellwise ``O -> U^dagger O U`` with ``U = U(theta, n)``."""

    theta: float = 0.0
    n: int = 0

    def local_images(self):
        u = local_unitary(self.theta, self.n)
        ud = u.adjoint()
        return (ud * X(0) * u).chop(), (ud * Y(0) * u).chop()


@dataclass(frozen=True)
class ControlledPhase(Automaton):
    """``T(xi) = G^dagger (U^dagger xi U) G`` with ``G = C(-1,0) C(0,1)`` of controlled phases."""

    phi: float = 0.0
    theta: float = 0.0
    n: int = 0

    def local_images(self):
        g = controlled_phase_gate(self.phi, -1) * controlled_phase_gate(self.phi, 0)
        gd = g.adjoint()
        inner = Conjugation(self.theta, self.n).local_images()
        return tuple((gd * img * g).chop() for img in inner)


@dataclass(frozen=True)
class Forking(Automaton):
    """Forking automaton ``T~ o U(theta, n)`` where ``T~: (X_c, Y_c) -> (Y_{c-1}, X_{c+1})``.

    With ``inverted`` set this is the inverse ``U^{-1} o T~^{-1}``.
    """

    theta: float = 0.0
    n: int = 0
    inverted: bool = False

    def local_images(self):
        conj = Conjugation(self.theta, self.n)
        if self.inverted:
            # T~ squares to the identity, so only the cellwise part is inverted.
            back = invert(conj)
            return back.apply(Y(-1)), back.apply(X(1))
        bare = (Y(-1), X(1))
        return tuple(substitute(img, lambda m: translate(bare[m % 2], m // 2)) for img in conj.local_images())


@dataclass(frozen=True)
class Composition(Automaton):
    """``factors[0] o factors[1] o ... o factors[-1]``; the last factor acts first."""

    factors: tuple = ()

    def local_images(self):
        return tuple(self.apply(g) for g in (X(0), Y(0)))

    @property
    def neighbourhood(self):
        nb = {0}
        for f in self.factors:
            nb = {a + b for a in nb for b in f.neighbourhood}
        return tuple(sorted(nb))

    def apply(self, op, window=None):
        if window is not None:
            _check_window(op, self.neighbourhood, window)
        for f in reversed(self.factors):
            op = f.apply(op)
        return op


def apply(aut: Automaton, op: GradedOperator, window: CellWindow | None = None) -> GradedOperator:
    return aut.apply(op, window)


def compose(*auts: Automaton) -> Automaton:
    """``compose(a, b)(op) == a(b(op))``.  Nested compositions are flattened."""
    factors = []
    for a in auts:
        factors.extend(a.factors if isinstance(a, Composition) else (a,))
    if len(factors) == 1:
        return factors[0]
    return Composition(tuple(factors))


def invert(aut: Automaton) -> Automaton:
    """Inverse of a built-in automaton or of a composition of built-ins."""
    if isinstance(aut, Shift):
        return Shift(-aut.step)
    if isinstance(aut, MajoranaShift):
        return MajoranaShift(aut.sign, not aut.inverted)
    if isinstance(aut, Conjugation):
        # U(theta, 1) squares to I, so it is its own inverse.
        if aut.n:
            return Conjugation(aut.theta, 1)
        return Conjugation((-aut.theta) % TWO_PI, 0)
    if isinstance(aut, ControlledPhase):
        return compose(invert(Conjugation(aut.theta, aut.n)), ControlledPhase((-aut.phi) % TWO_PI, 0.0, 0))
    if isinstance(aut, Forking):
        return Forking(aut.theta, aut.n, not aut.inverted)
    if isinstance(aut, Composition):
        return compose(*(invert(f) for f in reversed(aut.factors)))
    raise NotImplementedError(f"inversion of {type(aut).__name__} rules is not supported")
