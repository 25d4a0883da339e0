"""Majorana-string calculus for a chain of one Fermionic mode per cell.

Cell ``c`` carries the two Majorana modes ``2c`` (the odd generator ``X(c)``)
and ``2c + 1`` (``Y(c)``).  An operator is a complex linear combination of
canonical monomials: strictly increasing tuples of mode indices.  Products are
reduced with ``xi_m ** 2 = I`` and ``xi_m xi_n = -xi_n xi_m`` for ``m != n``,
so equal operators always have identical term dictionaries.

A dense Jordan-Wigner representation on a finite cell window is provided as an
independent check of the symbolic rules.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from numbers import Number
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "CHOP_TOL",
    "Z_FROM_YX",
    "CellWindow",
    "GradedOperator",
    "NonHomogeneousError",
    "WindowError",
    "identity",
    "majorana",
    "X",
    "Y",
    "Z",
    "multiply",
    "graded_commutator",
    "translate",
    "relabel_cells",
    "jw_matrix",
    "from_jw_matrix",
    "hs_inner",
    "monomial_basis",
]

#: Magnitude below which coefficients of numerically produced operators are dropped.
CHOP_TOL = 1e-12

#: ``Z(c) == Z_FROM_YX * Y(c) * X(c)``; fixed against ``diag(1, -1)`` by the oracle tests.
Z_FROM_YX = 1j

Monomial = tuple  # strictly increasing tuple of mode indices


class NonHomogeneousError(ValueError):
    """An operation that needs a definite parity got a mixed-parity operator."""


class WindowError(ValueError):
    """An operator does not fit in the cell window it was evaluated on."""


@lru_cache(maxsize=1 << 18)
def _mono_mul(a: Monomial, b: Monomial) -> tuple[int, Monomial]:
    # Moving each b_j left past every a_i > b_j costs one sign; equal modes meet and square to I.
    swaps = 0
    for m in b:
        swaps += len(a) - bisect_right(a, m)
    merged = sorted(set(a).symmetric_difference(b))
    return (-1 if swaps & 1 else 1), tuple(merged)


def _canon_terms(pairs: Iterable[tuple[Monomial, complex]]) -> dict:
    out: dict = {}
    for modes, coeff in pairs:
        out[modes] = out.get(modes, 0j) + coeff
    return {k: v for k, v in out.items() if v != 0}


class GradedOperator:
    """Immutable linear combination of canonical Majorana monomials.

    Supports ``+``, ``-``, ``*`` (operator product or scalar), unary minus,
    and exact equality on the canonical term dictionary.  Use
    :meth:`allclose` for floating-point comparisons.
    """

    __slots__ = ("_terms", "_support")

    def __init__(self, terms: Mapping[Iterable[int], complex] | None = None):
        pairs = []
        for modes, coeff in (terms or {}).items():
            sign, canon = _canonicalize_modes(tuple(modes))
            pairs.append((canon, sign * complex(coeff)))
        self._terms = _canon_terms(pairs)
        self._support = None

    @classmethod
    def _from_canonical(cls, terms: dict) -> "GradedOperator":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._support = None
        return obj

    @property
    def terms(self) -> dict:
        """Copy of the ``{modes: coefficient}`` dictionary."""
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    @property
    def support(self) -> frozenset:
        """Cells touched by at least one term."""
        if self._support is None:
            self._support = frozenset(m // 2 for modes in self._terms for m in modes)
        return self._support

    @property
    def modes(self) -> frozenset:
        return frozenset(m for modes in self._terms for m in modes)

    @property
    def grade(self) -> int | None:
        """0 or 1 for parity-homogeneous operators, ``None`` for mixed ones.

        The zero operator is treated as even.
        """
        grades = {len(modes) & 1 for modes in self._terms}
        if not grades:
            return 0
        if len(grades) > 1:
            return None
        return grades.pop()

    def is_homogeneous(self) -> bool:
        return self.grade is not None

    def is_zero(self) -> bool:
        return not self._terms

    def even_part(self) -> "GradedOperator":
        return GradedOperator._from_canonical({k: v for k, v in self._terms.items() if not len(k) & 1})

    def odd_part(self) -> "GradedOperator":
        return GradedOperator._from_canonical({k: v for k, v in self._terms.items() if len(k) & 1})

    def coeff(self, modes: Iterable[int]) -> complex:
        sign, canon = _canonicalize_modes(tuple(modes))
        return sign * self._terms.get(canon, 0j)

    def adjoint(self) -> "GradedOperator":
        # (xi_1 ... xi_k)^dagger = xi_k ... xi_1 = (-1)^{k(k-1)/2} xi_1 ... xi_k
        return GradedOperator._from_canonical(
            {k: (-1) ** (len(k) * (len(k) - 1) // 2) * v.conjugate() for k, v in self._terms.items()}
        )

    def norm(self) -> float:
        """Normalized Hilbert-Schmidt norm, ``sqrt(tr(A^dagger A) / 2^n)``."""
        return float(np.sqrt(sum(abs(v) ** 2 for v in self._terms.values())))

    def chop(self, tol: float = CHOP_TOL) -> "GradedOperator":
        return GradedOperator._from_canonical({k: v for k, v in self._terms.items() if abs(v) >= tol})

    def allclose(self, other: "GradedOperator", tol: float = 1e-10) -> bool:
        return (self - other).max_abs() < tol

    def max_abs(self) -> float:
        return max((abs(v) for v in self._terms.values()), default=0.0)

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Number):
            other = complex(other) * identity()
        if not isinstance(other, GradedOperator):
            return NotImplemented
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, 0j) + v
        return GradedOperator._from_canonical({k: v for k, v in out.items() if v != 0})

    __radd__ = __add__

    def __neg__(self):
        return GradedOperator._from_canonical({k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, Number):
            other = complex(other) * identity()
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            c = complex(other)
            if c == 0:
                return GradedOperator()
            return GradedOperator._from_canonical({k: c * v for k, v in self._terms.items()})
        if isinstance(other, GradedOperator):
            return multiply(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Number):
            return self * (1 / complex(other))
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, Number):
            other = complex(other) * identity()
        if not isinstance(other, GradedOperator):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for modes in sorted(self._terms, key=lambda k: (len(k), k)):
            c = self._terms[modes]
            word = " ".join(("X" if m % 2 == 0 else "Y") + f"({m // 2})" for m in modes) or "I"
            parts.append(f"({_fmt_complex(c)}) {word}")
        return " + ".join(parts)


def _fmt_complex(c: complex) -> str:
    if c.imag == 0:
        return f"{c.real:.12g}"
    if c.real == 0:
        return f"{c.imag:.12g}j"
    return f"{c.real:.12g}{c.imag:+.12g}j"


def _canonicalize_modes(modes: tuple) -> tuple[int, Monomial]:
    sign = 1
    out: Monomial = ()
    for m in modes:
        s, out = _mono_mul(out, (int(m),))
        sign *= s
    return sign, out


# constructors ---------------------------------------------------------
def identity() -> GradedOperator:
    return GradedOperator._from_canonical({(): 1 + 0j})


def majorana(mode: int) -> GradedOperator:
    return GradedOperator._from_canonical({(int(mode),): 1 + 0j})


def X(cell: int) -> GradedOperator:
    """Odd generator ``xi_{2c}`` of cell ``c``."""
    return majorana(2 * cell)


def Y(cell: int) -> GradedOperator:
    """Odd generator ``xi_{2c+1}`` of cell ``c``."""
    return majorana(2 * cell + 1)


def Z(cell: int) -> GradedOperator:
    """Even cell parity operator, ``diag(1, -1)`` in the occupation basis."""
    return Z_FROM_YX * (Y(cell) * X(cell))


# core operations ------------------------------------------------------
def multiply(a: GradedOperator, b: GradedOperator) -> GradedOperator:
    """Canonical product ``a * b``."""
    out: dict = {}
    for ka, va in a._terms.items():
        for kb, vb in b._terms.items():
            s, k = _mono_mul(ka, kb)
            out[k] = out.get(k, 0j) + s * va * vb
    return GradedOperator._from_canonical({k: v for k, v in out.items() if v != 0})


def graded_commutator(a: GradedOperator, b: GradedOperator) -> GradedOperator:
    """``ab - (-1)^{g(a) g(b)} ba``: anticommutator for two odd operators."""
    ga, gb = a.grade, b.grade
    if ga is None or gb is None:
        raise NonHomogeneousError("graded commutator needs parity-homogeneous operands")
    if ga and gb:
        return a * b + b * a
    return a * b - b * a


def translate(a: GradedOperator, x: int) -> GradedOperator:
    """Shift every cell by ``x`` (every mode index by ``2x``)."""
    if x == 0:
        return a
    d = 2 * x
    return GradedOperator._from_canonical({tuple(m + d for m in k): v for k, v in a._terms.items()})


def relabel_cells(a: GradedOperator, mapping: Mapping[int, int]) -> GradedOperator:
    """Apply the algebra isomorphism induced by an injective cell relabelling.

    Each generator of cell ``c`` goes to the same generator of ``mapping[c]``;
    monomials are re-canonicalized, so reordering signs are accounted for.
    Cells missing from ``mapping`` are left in place.
    """
    pairs = []
    for modes, v in a._terms.items():
        new = tuple(2 * mapping.get(m // 2, m // 2) + (m & 1) for m in modes)
        sign, canon = _canonicalize_modes(new)
        pairs.append((canon, sign * v))
    return GradedOperator._from_canonical(_canon_terms(pairs))


def hs_inner(a: GradedOperator, b: GradedOperator) -> complex:
    """Normalized trace inner product ``tr(a^dagger b) / 2^n``.

    Canonical monomials are orthonormal for it, so it is a coefficient sum.
    """
    if len(a) > len(b):
        return sum(a._terms[k].conjugate() * v for k, v in b._terms.items() if k in a._terms)
    return sum(v.conjugate() * b._terms[k] for k, v in a._terms.items() if k in b._terms)


# Jordan-Wigner oracle -------------------------------------------------
@dataclass(frozen=True)
class CellWindow:
    """Contiguous open interval of cells ``lo..hi`` (inclusive)."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty window [{self.lo}, {self.hi}]")

    @property
    def cells(self) -> range:
        return range(self.lo, self.hi + 1)

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def contains(self, cells: Iterable[int]) -> bool:
        return all(self.lo <= c <= self.hi for c in cells)

    def expand(self, left: int, right: int | None = None) -> "CellWindow":
        return CellWindow(self.lo - left, self.hi + (left if right is None else right))

    @classmethod
    def around(cls, cells: Iterable[int], margin: int = 0) -> "CellWindow":
        cells = list(cells) or [0]
        return cls(min(cells) - margin, max(cells) + margin)


_PAULI = {
    "I": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@lru_cache(maxsize=256)
def _mode_matrix(mode: int, lo: int, hi: int) -> np.ndarray:
    cell = mode // 2
    out = np.ones((1, 1), dtype=complex)
    for c in range(lo, hi + 1):
        if c < cell:
            f = _PAULI["z"]
        elif c == cell:
            f = _PAULI["x"] if mode % 2 == 0 else _PAULI["y"]
        else:
            f = _PAULI["I"]
        out = np.kron(out, f)
    out.setflags(write=False)
    return out


def _monomial_matrix(modes: Monomial, w: CellWindow) -> np.ndarray:
    dim = 2 ** w.size
    out = np.eye(dim, dtype=complex)
    for m in modes:
        out = out @ _mode_matrix(m, w.lo, w.hi)
    return out


def jw_matrix(a: GradedOperator, w: CellWindow) -> np.ndarray:
    """Dense Jordan-Wigner matrix of ``a`` on window ``w`` (leftmost cell = most significant qubit)."""
    if not w.contains(a.support):
        raise WindowError(f"support {sorted(a.support)} not inside [{w.lo}, {w.hi}]")
    dim = 2 ** w.size
    out = np.zeros((dim, dim), dtype=complex)
    for modes, v in a._terms.items():
        out += v * _monomial_matrix(modes, w)
    return out


def monomial_basis(cells: Iterable[int]) -> list:
    """All ``4^k`` canonical monomials on the given cells, ordered by degree then modes."""
    modes = sorted(m for c in sorted(set(cells)) for m in (2 * c, 2 * c + 1))
    return [combo for r in range(len(modes) + 1) for combo in combinations(modes, r)]


def from_jw_matrix(mat: np.ndarray, w: CellWindow, tol: float = CHOP_TOL) -> GradedOperator:
    """Expand a ``2^n x 2^n`` matrix on window ``w`` in canonical monomials."""
    mat = np.asarray(mat, dtype=complex)
    dim = 2 ** w.size
    if mat.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} matrix for window [{w.lo}, {w.hi}]")
    terms = {}
    for modes in monomial_basis(w.cells):
        c = np.trace(_monomial_matrix(modes, w).conj().T @ mat) / dim
        if abs(c) >= tol:
            terms[modes] = complex(c)
    return GradedOperator._from_canonical(terms)
