"""Classification of nearest-neighbour automata with one mode per cell.

Index ``2**(+-1)`` rules are a shift composed with an index-one rule, index
``2**(+-1/2)`` rules a Majorana shift composed with one.  Index-one rules fall
into three families told apart by their edge supports (the support algebras of
the image of the cell-0 algebra on cells -1 and +1):

* both trivial: a cellwise conjugation ``U(theta, n)``;
* both ``span{I, Z}``: a controlled-phase rule;
* both generated by one odd operator: a forking rule, possibly followed by a
  cellwise rotation ``U(gamma, 0)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fca import (
    Automaton,
    Conjugation,
    ControlledPhase,
    Custom,
    Forking,
    LocalRule,
    MajoranaShift,
    Shift,
    compose,
    invert,
    validate_local_rule,
)
from .graded_algebra import GradedOperator, X, Y, graded_commutator, translate
from .support import AlgebraBasis, IndexValue, compute_index, support_algebra

__all__ = [
    "ClassificationError",
    "PhaseConsistencyError",
    "EdgeSupports",
    "Classification",
    "compute_edge_supports",
    "classify",
    "extract_parameters",
    "tcomm_residual",
    "FAMILIES",
]

TWO_PI = 2 * math.pi
FAMILIES = ("local-conjugation", "controlled-phase", "forking", "shift-composed", "majorana-shift-composed")


class ClassificationError(ValueError):
    pass


class PhaseConsistencyError(ClassificationError):
    pass


def _edge_kind(alg: AlgebraBasis) -> str:
    if alg.dimension == 1:
        return "trivial"
    if alg.dimension == 2:
        return "odd" if alg.grades()[1] else "even"
    return f"dim{alg.dimension}"


@dataclass
class EdgeSupports:
    eL: AlgebraBasis
    eC: AlgebraBasis
    eR: AlgebraBasis

    @property
    def kinds(self) -> tuple:
        return _edge_kind(self.eL), _edge_kind(self.eC), _edge_kind(self.eR)

    def balanced(self) -> bool:
        return self.eL.dimension == self.eR.dimension and _edge_kind(self.eL) == _edge_kind(self.eR)


def _as_rule(target) -> LocalRule:
    if isinstance(target, LocalRule):
        return target
    ix, iy = target.local_images()
    return LocalRule(ix, iy)


def compute_edge_supports(rule) -> EdgeSupports:
    rule = _as_rule(rule)
    if not set(rule.image_x.support | rule.image_y.support) <= {-1, 0, 1}:
        raise ClassificationError("edge supports need images inside cells -1..1")
    imgs = list(rule.images)
    return EdgeSupports(*(support_algebra(imgs, {c}) for c in (-1, 0, 1)))


@dataclass
class Classification:
    """Family name, its parameters and, for shifted families, the peeled inner rule."""

    family: str
    params: dict = field(default_factory=dict)
    direction: str | None = None
    inner: "Classification | None" = None
    index: IndexValue = field(default_factory=lambda: IndexValue(0))

    def to_automaton(self) -> Automaton:
        p = self.params
        if self.family == "local-conjugation":
            return Conjugation(p["theta"], p["n"])
        if self.family == "controlled-phase":
            return ControlledPhase(p["phi"], p["theta"], p["n"])
        if self.family == "forking":
            f = Forking(p["theta"], p["n"])
            return compose(Conjugation(p["gamma"], 0), f) if p.get("gamma") else f
        sign = 1 if self.direction == "+" else -1
        outer = Shift(sign) if self.family == "shift-composed" else MajoranaShift(sign)
        return compose(outer, self.inner.to_automaton())

    def summary(self) -> str:
        if self.inner is not None:
            return f"{self.family}({self.direction}, {self.inner.summary()})"
        args = ", ".join(f"{k}={v:.12g}" if isinstance(v, float) else f"{k}={v}" for k, v in self.params.items())
        return f"{self.family}({args})"

    def to_dict(self) -> dict:
        out = {"family": self.family, "params": dict(self.params), "index": list(self.index.reduced())}
        if self.inner is not None:
            out["direction"] = self.direction
            out["inner"] = self.inner.to_dict()
        return out


def _angle(two_theta: float) -> float:
    """``theta`` in ``[0, pi)`` from ``2 theta``."""
    t = (two_theta % TWO_PI) / 2
    return 0.0 if abs(t - math.pi) < 1e-13 else t


def _cell0_rotation(img_x: GradedOperator, img_y: GradedOperator, tol: float) -> np.ndarray:
    mat = np.array([[img.coeff((m,)) for m in (0, 1)] for img in (img_x, img_y)])
    rest = max(
        (img - GradedOperator({(0,): row[0], (1,): row[1]})).max_abs() for img, row in zip((img_x, img_y), mat)
    )
    if rest > tol or np.abs(mat.imag).max() > tol:
        raise ClassificationError("images are not a real rotation of X(0), Y(0)")
    r = mat.real
    if np.abs(r @ r.T - np.eye(2)).max() > tol:
        raise ClassificationError("images are not an orthogonal rotation of X(0), Y(0)")
    return r


def _local_params(img_x: GradedOperator, img_y: GradedOperator, tol: float) -> tuple:
    r = _cell0_rotation(img_x, img_y, tol)
    a, b = r[0]
    if np.linalg.det(r) > 0:
        return _angle(math.atan2(b, a)), 0
    return _angle(math.atan2(-b, a)), 1


def _circ(a: float, b: float) -> float:
    return abs((a - b + math.pi) % TWO_PI - math.pi)


def _slice(op: GradedOperator, zl: int, zr: int) -> GradedOperator:
    """Fix ``Z(-1) = zl`` and ``Z(1) = zr`` in an operator built from ``Z(+-1)`` and cell 0."""
    out = {}
    for modes, c in op.items():
        left = tuple(m for m in modes if m < 0)
        right = tuple(m for m in modes if m >= 2)
        mid = tuple(m for m in modes if 0 <= m < 2)
        f = c
        # X(c) Y(c) = i Z(c)
        if left == (-2, -1):
            f *= 1j * zl
        elif left:
            raise ClassificationError("left edge is not generated by Z(-1)")
        if right == (2, 3):
            f *= 1j * zr
        elif right:
            raise ClassificationError("right edge is not generated by Z(1)")
        out[mid] = out.get(mid, 0j) + f
    return GradedOperator({k: v for k, v in out.items() if abs(v) > 1e-14})


def _controlled_phase_params(rule: LocalRule, tol: float) -> tuple:
    thetas = {}
    ns = set()
    for i, zl in ((0, 1), (1, -1)):
        for j, zr in ((0, 1), (1, -1)):
            th, n = _local_params(_slice(rule.image_x, zl, zr), _slice(rule.image_y, zl, zr), tol)
            thetas[i, j] = th
            ns.add(n)
    if len(ns) != 1:
        raise PhaseConsistencyError("the conditional local unitaries disagree on the reflection part")
    n = ns.pop()
    s = 1 if n == 0 else -1
    phis = {k: (2 * s * (thetas[0, 0] - v)) % TWO_PI for k, v in thetas.items()}
    phi = phis[1, 0]
    if _circ(phis[0, 1], phi) > tol or _circ(phis[1, 1], 2 * phi) > tol:
        raise PhaseConsistencyError(
            f"phases phi_10={phis[1, 0]:.12g}, phi_01={phis[0, 1]:.12g}, phi_11={phis[1, 1]:.12g} are inconsistent"
        )
    if abs(phi - TWO_PI) < 1e-12:
        phi = 0.0
    return phi, thetas[0, 0], n


def _forking_params(aut: Automaton, edges: EdgeSupports, tol: float) -> tuple:
    gen = edges.eL.elements[1]
    p, q = gen.coeff((-2,)), gen.coeff((-1,))
    phase = p if abs(p) > abs(q) else q
    p, q = (p / phase * abs(phase)).real, (q / phase * abs(phase)).real
    # the left edge generator is +-(-sin 2g X + cos 2g Y); fix g in [0, pi/2)
    gamma = (math.atan2(-p, q) % math.pi) / 2
    if abs(gamma - math.pi / 2) < 1e-13:
        gamma = 0.0
    rest = compose(Forking(), invert(Conjugation(gamma, 0)), aut) if gamma else compose(Forking(), aut)
    theta, n = _local_params(*rest.local_images(), tol)
    return theta, n, gamma


def extract_parameters(rule, family: str, tol: float = 1e-9, edges: EdgeSupports | None = None) -> dict:
    """Parameters of an index-one rule whose family is already known."""
    aut = rule if isinstance(rule, Automaton) else Custom(rule)
    local = _as_rule(aut)
    if family == "local-conjugation":
        theta, n = _local_params(local.image_x, local.image_y, tol)
        return {"theta": theta, "n": n}
    if family == "controlled-phase":
        phi, theta, n = _controlled_phase_params(local, tol)
        return {"phi": phi, "theta": theta, "n": n}
    if family == "forking":
        theta, n, gamma = _forking_params(aut, edges or compute_edge_supports(local), tol)
        return {"theta": theta, "n": n, "gamma": gamma}
    raise ValueError(f"no parameter extraction for family {family!r}")


def tcomm_residual(rule, shifts=(1, 2)) -> float:
    """Largest graded commutator between the cell-0 images and their translates."""
    rule = _as_rule(rule)
    worst = 0.0
    for x in shifts:
        for a in rule.images:
            for b in rule.images:
                worst = max(worst, graded_commutator(a, translate(b, x)).max_abs())
    return worst


def _peel(index: IndexValue):
    k = index.log2_numerator
    if k == -2:
        return "shift-composed", "+", Shift(1)
    if k == 2:
        return "shift-composed", "-", Shift(-1)
    if k == -1:
        return "majorana-shift-composed", "+", MajoranaShift(1)
    if k == 1:
        return "majorana-shift-composed", "-", MajoranaShift(-1)
    return None


def classify(target, tol: float = 1e-9, check: bool = True) -> Classification:
    """Family and parameters of a valid nearest-neighbour rule or automaton."""
    aut = target if isinstance(target, Automaton) else Custom(target)
    if check:
        report = validate_local_rule(_as_rule(aut))
        if not report.valid:
            raise ClassificationError(f"rule is not a valid automaton: {report.conditions()}")
    index = compute_index(aut)
    peeled = _peel(index)
    if peeled is not None:
        family, direction, outer = peeled
        inner = classify(compose(invert(outer), aut), tol, check=False)
        if inner.index.log2_numerator != 0:
            raise ClassificationError("peeling one shift did not reach index one")
        return Classification(family, {}, direction, inner, index)
    if index.log2_numerator != 0:
        raise ClassificationError(f"index {index} is outside the one-mode nearest-neighbour range")
    rule = _as_rule(aut)
    if not (rule.image_x.support | rule.image_y.support) <= {-1, 0, 1}:
        raise ClassificationError("rule is not nearest-neighbour")
    edges = compute_edge_supports(rule)
    kl, _, kr = edges.kinds
    if kl != kr:
        raise ClassificationError(f"unbalanced edge supports {kl} / {kr}")
    family = {"trivial": "local-conjugation", "even": "controlled-phase", "odd": "forking"}.get(kl)
    if family is None:
        raise ClassificationError(f"edge supports of type {kl} fit no family")
    params = extract_parameters(aut, family, tol, edges)
    out = Classification(family, params, index=index)
    rebuilt = out.to_automaton()
    for g in (X(0), Y(0)):
        if not rebuilt.apply(g).allclose(aut.apply(g), max(tol, 1e-9)):
            raise ClassificationError(f"rebuilt {out.summary()} does not reproduce the rule")
    return out
