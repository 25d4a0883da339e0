"""Support algebras, classification of graded algebras and the index.

Linear algebra runs in the monomial coordinate space of a finite cell set:
a monomial is a bitmask over the ``2 * len(cells)`` local modes, ordered like
the global modes, and an operator is a complex vector of length ``4**len(cells)``.
The coordinate inner product is ``hs_inner``, so orthonormal rows are
orthonormal operators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .fca import Automaton, compose
from .graded_algebra import GradedOperator

__all__ = [
    "SVD_TOL",
    "DegenerateDecompositionError",
    "IndexInconsistencyError",
    "AlgebraClassificationError",
    "CellSpace",
    "AlgebraBasis",
    "AlgebraClass",
    "IndexValue",
    "algebra_closure",
    "support_algebra",
    "classify_algebra",
    "compute_index",
    "index_details",
    "check_multiplicativity",
]

SVD_TOL = 1e-10
# relative residuals below NOISE_TOL are rounding; above REL_TOL they are new directions
NOISE_TOL = 1e-11
REL_TOL = 1e-6


class DegenerateDecompositionError(ValueError):
    pass


class IndexInconsistencyError(ValueError):
    pass


class AlgebraClassificationError(ValueError):
    pass


@lru_cache(maxsize=16)
def _tables(ncells: int) -> tuple:
    """Jordan-Wigner data for every monomial on ``ncells`` consecutive cells.

    Monomial ``m`` (bit ``j`` set when local mode ``j`` is present) has matrix
    entries ``M[s ^ flip[m], s] = phase[m, s]``.  Also returns the monomials
    grouped by flip pattern, ``groups[f]`` listing the ``2**ncells`` masks with
    ``flip == f``.
    """
    d = 1 << ncells
    nmodes = 2 * ncells
    states = np.arange(d)
    mode_flip = []
    mode_phase = []
    for j in range(nmodes):
        cell, which = divmod(j, 2)
        bit = 1 << (ncells - 1 - cell)
        left = sum(1 << (ncells - 1 - c) for c in range(cell))
        phase = 1 - 2 * (np.bitwise_count(states & left) & 1).astype(complex)
        if which:
            phase = phase * np.where(states & bit, -1j, 1j)
        mode_flip.append(bit)
        mode_phase.append(phase)
    nmono = 1 << nmodes
    flip = np.zeros(nmono, dtype=np.int64)
    phase = np.empty((nmono, d), dtype=complex)
    phase[0] = 1.0
    for m in range(1, nmono):
        top = m.bit_length() - 1
        rest = m ^ (1 << top)
        # canonical order puts the highest mode last: M_m = M_rest @ M_top
        fb = mode_flip[top]
        flip[m] = flip[rest] ^ fb
        phase[m] = phase[rest][states ^ fb] * mode_phase[top]
    groups = np.argsort(flip, kind="stable").reshape(d, d)
    return flip, phase, groups, phase[groups]


class CellSpace:
    """Operators on a finite set of cells as dense Jordan-Wigner matrices.

    A row is ``matrix.ravel() / sqrt(d)``; with that scaling the Euclidean inner
    product of rows equals ``hs_inner`` of the operators.
    """

    def __init__(self, cells: Iterable[int]):
        self.cells = tuple(sorted(set(cells)))
        self.ncells = len(self.cells)
        self.nmodes = 2 * self.ncells
        self.d = 1 << self.ncells
        self.dim = self.d * self.d
        self._pos = {c: i for i, c in enumerate(self.cells)}
        par = np.bitwise_count(np.arange(self.d)) & 1
        self.odd_entries = (par[:, None] ^ par[None, :]).astype(bool).ravel()
        s = np.arange(self.d)
        self._rows_idx = s[None, :] ^ s[:, None]  # [f, s] -> s ^ f
        self._cols_idx = np.broadcast_to(s, (self.d, self.d))

    def mask(self, modes: Sequence[int]) -> int:
        out = 0
        for m in modes:
            out |= 1 << (2 * self._pos[m // 2] + (m & 1))
        return out

    def modes(self, mask: int) -> tuple:
        return tuple(2 * self.cells[i >> 1] + (i & 1) for i in range(self.nmodes) if mask >> i & 1)

    # monomial coordinates <-> rows
    def coords_to_rows(self, coords: np.ndarray) -> np.ndarray:
        coords = np.atleast_2d(coords)
        _, _, groups, gphase = _tables(self.ncells)
        # entries[k, f, s] = M[s ^ f, s]
        entries = np.einsum("kfm,fms->kfs", coords[:, groups], gphase)
        mats = np.zeros((coords.shape[0], self.d, self.d), dtype=complex)
        mats[:, self._rows_idx, self._cols_idx] = entries
        return mats.reshape(coords.shape[0], self.dim) / math.sqrt(self.d)

    def rows_to_coords(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(rows)
        _, _, groups, gphase = _tables(self.ncells)
        mats = rows.reshape(rows.shape[0], self.d, self.d) * math.sqrt(self.d)
        entries = mats[:, self._rows_idx, self._cols_idx]
        out = np.zeros((rows.shape[0], self.dim), dtype=complex)
        out[:, groups] = np.einsum("kfs,fms->kfm", entries, gphase.conj()) / self.d
        return out

    def coords(self, op: GradedOperator) -> np.ndarray:
        if not op.support <= set(self.cells):
            raise ValueError(f"operator support {sorted(op.support)} not inside {list(self.cells)}")
        v = np.zeros(self.dim, dtype=complex)
        for modes, c in op.items():
            v[self.mask(modes)] = c
        return v

    def row(self, op: GradedOperator) -> np.ndarray:
        return self.coords_to_rows(self.coords(op))[0]

    def operator(self, row: np.ndarray, tol: float = 1e-13) -> GradedOperator:
        v = self.rows_to_coords(row)[0]
        idx = np.flatnonzero(np.abs(v) > tol)
        return GradedOperator._from_canonical({self.modes(int(i)): complex(v[i]) for i in idx})

    def multiply(self, a: np.ndarray, rows: np.ndarray) -> np.ndarray:
        """Rows of ``a * r`` for every row ``r``."""
        rows = np.atleast_2d(rows)
        am = a.reshape(self.d, self.d)
        bm = rows.reshape(rows.shape[0], self.d, self.d)
        return math.sqrt(self.d) * np.matmul(am, bm).reshape(rows.shape[0], self.dim)

    def multiply_right(self, a: np.ndarray, rows: np.ndarray) -> np.ndarray:
        """Rows of ``r * a`` for every row ``r``."""
        rows = np.atleast_2d(rows)
        am = a.reshape(self.d, self.d)
        bm = rows.reshape(rows.shape[0], self.d, self.d)
        return math.sqrt(self.d) * np.matmul(bm, am).reshape(rows.shape[0], self.dim)

    def split(self, rows: np.ndarray) -> tuple:
        """Even and odd parts of the rows."""
        return np.where(self.odd_entries, 0, rows), np.where(self.odd_entries, rows, 0)


def _independent(rows: np.ndarray, basis: np.ndarray | None, tol: float = SVD_TOL) -> np.ndarray:
    """Orthonormal rows spanning ``rows`` modulo the span of ``basis``."""
    # rows are products of unit-norm elements; rescaling small rows would only amplify rounding noise
    rows = rows[np.linalg.norm(rows, axis=1) > tol]
    if basis is not None and basis.shape[0] and rows.shape[0]:
        before = np.linalg.norm(rows, axis=1)
        rows = rows - (rows @ basis.conj().T) @ basis
        rows = rows - (rows @ basis.conj().T) @ basis
        rel = np.linalg.norm(rows, axis=1) / np.maximum(before, tol)
        if np.any((rel > NOISE_TOL) & (rel < REL_TOL) & (before > tol)):
            raise DegenerateDecompositionError("closure cannot separate a new direction from rounding noise")
        rows = rows[(rel >= REL_TOL) & (before > tol)]
    if rows.shape[0] == 0:
        return rows
    if rows.shape[0] > 64:
        # economical SVD through the Gram matrix; genuine singular values here are O(1)
        lam, u = np.linalg.eigh(rows @ rows.conj().T)
        keep = lam > tol
        vh = (u[:, keep].conj().T @ rows) / np.sqrt(lam[keep])[:, None]
        return _independent(vh, None, tol) if vh.shape[0] <= 64 else _reorthonormalize(vh)
    _, s, vh = np.linalg.svd(rows, full_matrices=False)
    return vh[s > tol]


def _reorthonormalize(rows: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(rows.conj().T)
    return q.conj().T


def _graded_independent(space: CellSpace, rows: np.ndarray, basis: np.ndarray | None) -> np.ndarray:
    even, odd = space.split(rows)
    return np.vstack([_independent(even, basis), _independent(odd, basis)])


class AlgebraBasis:
    """Orthonormal, parity-homogeneous basis of a unital product-closed span.

    ``elements`` are built lazily from the matrix rows.
    """

    def __init__(self, space: CellSpace, matrix: np.ndarray, generators: np.ndarray | None = None):
        self.space = space
        self.matrix = matrix
        self.generators = generators
        self.carrier = frozenset(space.cells)
        self._elements = None

    @property
    def elements(self) -> list:
        if self._elements is None:
            coords = self.space.rows_to_coords(self.matrix) if len(self.matrix) else self.matrix
            self._elements = [
                GradedOperator._from_canonical(
                    {self.space.modes(int(i)): complex(v[i]) for i in np.flatnonzero(np.abs(v) > 1e-13)}
                )
                for v in coords
            ]
        return self._elements

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[0])

    def __len__(self) -> int:
        return self.dimension

    def __repr__(self) -> str:
        return f"AlgebraBasis(dimension={self.dimension}, carrier={sorted(self.carrier)})"

    def grades(self) -> np.ndarray:
        """Parity of every basis row (each row is homogeneous)."""
        return np.linalg.norm(self.matrix[:, self.space.odd_entries], axis=1) > 0.5

    def residual(self, op: GradedOperator) -> float:
        v = self.space.row(op)
        return float(np.linalg.norm(v - (v @ self.matrix.conj().T) @ self.matrix))

    def contains(self, op: GradedOperator, tol: float = SVD_TOL) -> bool:
        if not op.support <= self.carrier:
            return False
        return self.residual(op) < tol * max(1.0, op.norm())

    def is_closed(self, tol: float = 1e-9) -> bool:
        """All pairwise products of basis elements stay in the span."""
        q = self.matrix
        for row in q:
            prod = self.space.multiply(row, q)
            res = prod - (prod @ q.conj().T) @ q
            if np.abs(res).max(initial=0.0) > tol:
                return False
        return True


def _closure(space: CellSpace, gens: np.ndarray) -> AlgebraBasis:
    one = space.coords_to_rows(np.eye(1, space.dim, dtype=complex))
    gen_rows = _graded_independent(space, gens, one) if gens.shape[0] else gens.reshape(0, space.dim)
    basis = np.vstack([one, gen_rows])
    frontier = basis
    while frontier.shape[0]:
        prods = np.vstack([space.multiply(g, frontier) for g in gen_rows]) if gen_rows.shape[0] else frontier[:0]
        new = _graded_independent(space, prods, basis)
        basis = np.vstack([basis, new])
        frontier = new
        if basis.shape[0] >= space.dim:
            break
    return AlgebraBasis(space, basis, gen_rows)


def algebra_closure(generators: Sequence[GradedOperator], cells: Iterable[int] | None = None) -> AlgebraBasis:
    """Smallest unital product-closed span containing ``generators``.

    The span is grown by left multiplication with the generators until no new
    direction appears; every generator is split into its parity parts first so
    the result is a graded algebra.
    """
    if cells is None:
        cells = set()
        for g in generators:
            cells |= g.support
    space = CellSpace(cells)
    coords = np.array([space.coords(g) for g in generators]).reshape(len(generators), space.dim)
    norms = np.linalg.norm(coords, axis=1)
    coords = coords[norms > SVD_TOL] / norms[norms > SVD_TOL, None]
    return _closure(space, space.coords_to_rows(coords) if len(coords) else coords)


def _reorder_sign(modes: tuple, inside: frozenset) -> int:
    """Sign for moving the ``inside`` modes of a monomial in front of the others."""
    swaps = 0
    outside_seen = 0
    for m in modes:
        if m // 2 in inside:
            swaps += outside_seen
        else:
            outside_seen += 1
    return -1 if swaps & 1 else 1


def support_algebra(ops: Sequence[GradedOperator], cells: Iterable[int]) -> AlgebraBasis:
    """Support algebra of ``ops`` on ``cells``.

    Each operator is written as ``sum_r A_r * e_r`` with ``e_r`` running over
    monomials of the complementary cells; the ``A_r`` (split by parity and
    reduced to an independent set) generate the returned algebra.
    """
    inside = frozenset(cells)
    space = CellSpace(inside)
    odd_mono = (np.bitwise_count(np.arange(space.dim)) & 1).astype(bool)
    factors = []
    for op in ops:
        table: dict = {}
        for modes, c in op.items():
            m_in = tuple(m for m in modes if m // 2 in inside)
            m_out = tuple(m for m in modes if m // 2 not in inside)
            row = table.setdefault(m_out, {})
            row[m_in] = row.get(m_in, 0j) + _reorder_sign(modes, inside) * c
        if not table:
            continue
        mat = np.zeros((len(table), space.dim), dtype=complex)
        for i, row in enumerate(table.values()):
            for m_in, c in row.items():
                mat[i, space.mask(m_in)] = c
        for sel in (~odd_mono, odd_mono):
            part = np.where(sel[None, :], mat, 0)
            if not np.any(np.abs(part) > SVD_TOL):
                continue
            _, s, vh = np.linalg.svd(part, full_matrices=False)
            rank = int(np.sum(s > SVD_TOL))
            if rank == 0 or (s[rank - 1] < 1e3 * SVD_TOL and s[0] > 1e6):
                raise DegenerateDecompositionError("factor set is numerically rank deficient")
            factors.append(vh[:rank])
    coords = np.vstack(factors) if factors else np.zeros((0, space.dim), dtype=complex)
    return _closure(space, space.coords_to_rows(coords) if len(coords) else coords)


@dataclass(frozen=True)
class AlgebraClass:
    """``FullMatrix`` (dim ``(p+q)**2``) or ``Clifford`` (dim ``2 (p+q)**2``).

    For Clifford algebras only ``p + q`` is determined here; it is stored as
    ``p`` with ``q = 0``.
    """

    variant: str
    p: int
    q: int

    @property
    def size(self) -> int:
        return self.p + self.q

    @property
    def dimension(self) -> int:
        return (1 if self.variant == "FullMatrix" else 2) * self.size ** 2


def _odd_center_dim(basis: AlgebraBasis) -> int:
    q = basis.matrix
    odd = q[basis.grades()]
    if odd.shape[0] == 0:
        return 0
    tests = basis.generators if basis.generators is not None and len(basis.generators) else q
    sp = basis.space
    # look for coefficient vectors alpha with sum_i alpha_i [t, odd_i] = 0 for every t
    gram = np.zeros((odd.shape[0], odd.shape[0]), dtype=complex)
    for t in tests:
        comm = sp.multiply(t, odd) - sp.multiply_right(t, odd)
        gram += comm @ comm.conj().T
    lam = np.linalg.eigvalsh(gram)
    return int(np.sum(lam < 1e-10))


def classify_algebra(basis: AlgebraBasis) -> AlgebraClass:
    """Full matrix or Clifford type, decided by odd elements of the center."""
    dim = basis.dimension
    odd_center = _odd_center_dim(basis)
    if odd_center:
        n = math.isqrt(dim // 2)
        if dim % 2 or 2 * n * n != dim:
            raise AlgebraClassificationError(f"dimension {dim} is not 2(p+q)^2 despite an odd central element")
        return AlgebraClass("Clifford", n, 0)
    n = math.isqrt(dim)
    if n * n != dim:
        raise AlgebraClassificationError(f"dimension {dim} is not (p+q)^2")
    even = int(np.sum(~basis.grades()))
    # p^2 + q^2 = even, p + q = n
    disc = 2 * even - n * n
    r = math.isqrt(max(disc, 0))
    if r * r != disc or (n + r) % 2:
        raise AlgebraClassificationError(f"even part of dimension {even} does not fit M(p|q) with p+q={n}")
    return AlgebraClass("FullMatrix", (n + r) // 2, (n - r) // 2)


@dataclass(frozen=True)
class IndexValue:
    """Index ``2**(log2_numerator / 2)``; exact, compared on the exponent only."""

    log2_numerator: int
    provenance: tuple = field(default=None, compare=False)
    log2_denominator: int = field(default=2, init=False)

    @property
    def value(self) -> float:
        return 2.0 ** (self.log2_numerator / 2)

    @property
    def log2(self):
        from fractions import Fraction

        return Fraction(self.log2_numerator, 2)

    def reduced(self) -> tuple:
        """``(num, den)`` with ``log2(index) = num / den`` in lowest terms."""
        k = self.log2_numerator
        return (k // 2, 1) if k % 2 == 0 else (k, 2)

    def __mul__(self, other: "IndexValue") -> "IndexValue":
        return IndexValue(self.log2_numerator + other.log2_numerator)

    def __truediv__(self, other: "IndexValue") -> "IndexValue":
        return IndexValue(self.log2_numerator - other.log2_numerator)

    def inverse(self) -> "IndexValue":
        return IndexValue(-self.log2_numerator)

    def __str__(self) -> str:
        k = self.log2_numerator
        if k == 0:
            return "1"
        return f"2^({k}/2)" if k % 2 else f"2^({k // 2})"


def _log2_exact(n: int) -> int:
    if n <= 0 or n & (n - 1):
        raise IndexInconsistencyError(f"support algebra dimension {n} is not a power of two")
    return n.bit_length() - 1


@dataclass
class IndexDetails:
    index: IndexValue
    block: int
    left: AlgebraBasis
    right: AlgebraBasis
    left_class: AlgebraClass


def index_details(aut: Automaton, site: int = 0) -> IndexDetails:
    """Support algebras across the cut between ``site`` and ``site + 1``.

    Blocks of ``b`` cells (``b`` the interaction radius) sit on either side of
    the cut; ``L`` and ``R`` are the support algebras of the image of their
    union on the half-lines left and right of the cut.
    """
    nb = aut.neighbourhood
    b = max(max(abs(min(nb)), abs(max(nb))), 1)
    block = range(site - b + 1, site + b + 1)
    images = [aut.image_of_mode(m) for c in block for m in (2 * c, 2 * c + 1)]
    cells = set()
    for img in images:
        cells |= img.support
    left = support_algebra(images, {c for c in cells if c <= site})
    right = support_algebra(images, {c for c in cells if c > site})
    kl = _log2_exact(left.dimension)
    kr = _log2_exact(right.dimension)
    if kl + kr != 4 * b:
        raise IndexInconsistencyError(
            f"dim L * dim R = 2^{kl + kr} differs from the block algebra dimension 2^{4 * b}"
        )
    cls = classify_algebra(left)
    m = 1 if cls.variant == "FullMatrix" else 2
    index = IndexValue(kl - 2 * b, (m, cls.size, 2 ** b))
    if index.log2_numerator != 2 * b - kr:
        raise IndexInconsistencyError("left and right expressions of the index disagree")
    return IndexDetails(index, b, left, right, cls)


def compute_index(aut: Automaton, site: int = 0) -> IndexValue:
    """Exact index ``sqrt(dim L / dim A_block)`` of an automaton."""
    return index_details(aut, site).index


def check_multiplicativity(a: Automaton, b: Automaton) -> bool:
    return compute_index(compose(a, b)) == compute_index(a) * compute_index(b)
