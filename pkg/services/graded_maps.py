"""
Graded free modules, graded matrices between them, and the coordinate
systems used to turn "find a map satisfying these equations" into a linear
system over the ground field.
"""
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from sympy.polys.rings import PolyElement

from services.debug import debug_log
from services.errors import DimensionMismatchError, MixedRingError, ValidationError
from services.exact_algebra import (
    GradedRing, SparseVector, constant_term, format_polynomial,
    is_homogeneous, monomials_of_degree, solve_sparse
)
from services.job_manager import check_cancelled

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradedFreeModule:
    """Q(-w_1) + ... + Q(-w_r): a free module given by its generator degrees."""
    weights: Tuple[int, ...] = ()

    @property
    def rank(self) -> int:
        return len(self.weights)

    def __add__(self, other: 'GradedFreeModule') -> 'GradedFreeModule':
        return GradedFreeModule(self.weights + other.weights)

    def twist(self, j: int) -> 'GradedFreeModule':
        return GradedFreeModule(tuple(w + j for w in self.weights))

    def restrict(self, indices: Sequence[int]) -> 'GradedFreeModule':
        return GradedFreeModule(tuple(self.weights[i] for i in indices))

    @classmethod
    def of(cls, weights: Sequence[int]) -> 'GradedFreeModule':
        return cls(tuple(int(w) for w in weights))


Rows = Tuple[Tuple[PolyElement, ...], ...]


def _mat_mul(left: Rows, right: Rows, n_rows: int, n_inner: int, n_cols: int, zero) -> Rows:
    out = []
    for i in range(n_rows):
        left_row = left[i]
        row = []
        for j in range(n_cols):
            acc = zero
            for k in range(n_inner):
                a = left_row[k]
                if a:
                    b = right[k][j]
                    if b:
                        acc = acc + a * b
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


@dataclass(frozen=True)
class GradedMatrix:
    """
    A map ``source -> target`` of graded free modules raised by ``shift``.

    Entry (i, j) is homogeneous of degree source[j] + shift - target[i]
    (or zero). Rows index the target, columns the source.
    """
    ring: GradedRing
    source: GradedFreeModule
    target: GradedFreeModule
    shift: int
    entries: Rows

    def __post_init__(self):
        if len(self.entries) != self.target.rank or any(len(r) != self.source.rank for r in self.entries):
            raise DimensionMismatchError(
                "Matrix shape does not match its modules",
                {'rows': len(self.entries), 'target_rank': self.target.rank, 'source_rank': self.source.rank}
            )

    @classmethod
    def build(cls, ring: GradedRing, source: GradedFreeModule, target: GradedFreeModule,
              shift: int, rows: Sequence[Sequence[Any]]) -> 'GradedMatrix':
        """Build from rows of polynomials or polynomial text."""
        converted = []
        for row in rows:
            converted.append(tuple(ring.parse(e) if isinstance(e, str) else e for e in row))
        for row in converted:
            for e in row:
                if e.ring != ring.poly_ring:
                    raise MixedRingError("Matrix entry belongs to another ring")
        return cls(ring, source, target, shift, tuple(converted))

    @classmethod
    def zero(cls, ring: GradedRing, source: GradedFreeModule, target: GradedFreeModule, shift: int = 0) -> 'GradedMatrix':
        z = ring.zero
        return cls(ring, source, target, shift, tuple(tuple(z for _ in range(source.rank)) for _ in range(target.rank)))

    @classmethod
    def identity(cls, ring: GradedRing, module: GradedFreeModule) -> 'GradedMatrix':
        return cls.scalar(ring, module, ring.one)

    @classmethod
    def scalar(cls, ring: GradedRing, module: GradedFreeModule, value: PolyElement, shift: int = 0) -> 'GradedMatrix':
        z = ring.zero
        rows = tuple(tuple(value if i == j else z for j in range(module.rank)) for i in range(module.rank))
        return cls(ring, module, module, shift, rows)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.target.rank, self.source.rank

    def entry_degree(self, i: int, j: int) -> int:
        return self.source.weights[j] + self.shift - self.target.weights[i]

    def degree_violations(self) -> List[Tuple[int, int]]:
        bad = []
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                if e and not is_homogeneous(e, self.ring, self.entry_degree(i, j)):
                    bad.append((i, j))
        return bad

    def is_zero(self) -> bool:
        return not any(e for row in self.entries for e in row)

    def _check_same_shape(self, other: 'GradedMatrix'):
        if self.ring != other.ring:
            raise MixedRingError("Matrices live over different rings")
        if self.source != other.source or self.target != other.target or self.shift != other.shift:
            raise DimensionMismatchError("Matrices have different modules or shifts")

    def __add__(self, other: 'GradedMatrix') -> 'GradedMatrix':
        self._check_same_shape(other)
        rows = tuple(tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.entries, other.entries))
        return GradedMatrix(self.ring, self.source, self.target, self.shift, rows)

    def __sub__(self, other: 'GradedMatrix') -> 'GradedMatrix':
        self._check_same_shape(other)
        rows = tuple(tuple(a - b for a, b in zip(r1, r2)) for r1, r2 in zip(self.entries, other.entries))
        return GradedMatrix(self.ring, self.source, self.target, self.shift, rows)

    def __neg__(self) -> 'GradedMatrix':
        return self.map_entries(lambda e: -e)

    def __matmul__(self, other: 'GradedMatrix') -> 'GradedMatrix':
        """Composition: ``self @ other`` applies ``other`` first."""
        if self.ring != other.ring:
            raise MixedRingError("Matrices live over different rings")
        if other.target != self.source:
            raise DimensionMismatchError(
                "Cannot compose: target of the right factor is not the source of the left factor",
                {'left_source': list(self.source.weights), 'right_target': list(other.target.weights)}
            )
        rows = _mat_mul(self.entries, other.entries, self.target.rank, self.source.rank,
                        other.source.rank, self.ring.zero)
        return GradedMatrix(self.ring, other.source, self.target, self.shift + other.shift, rows)

    def scale(self, c) -> 'GradedMatrix':
        return self.map_entries(lambda e: e.mul_ground(c) if c else self.ring.zero)

    def map_entries(self, fn: Callable[[PolyElement], PolyElement]) -> 'GradedMatrix':
        rows = tuple(tuple(fn(e) for e in row) for row in self.entries)
        return GradedMatrix(self.ring, self.source, self.target, self.shift, rows)

    def retyped(self, source: GradedFreeModule, target: GradedFreeModule, shift: Optional[int] = None) -> 'GradedMatrix':
        """Same entries viewed between other modules of the same ranks."""
        return GradedMatrix(self.ring, source, target, self.shift if shift is None else shift, self.entries)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> 'GradedMatrix':
        entries = tuple(tuple(self.entries[i][j] for j in cols) for i in rows)
        return GradedMatrix(self.ring, self.source.restrict(cols), self.target.restrict(rows), self.shift, entries)

    def constant_part(self) -> List[List[Any]]:
        """Field matrix of constant terms (the reduction modulo the irrelevant ideal)."""
        return [[constant_term(e) for e in row] for row in self.entries]

    def to_text(self) -> List[List[str]]:
        return [[format_polynomial(e, self.ring) for e in row] for row in self.entries]

    def __repr__(self) -> str:
        return f"GradedMatrix({list(self.target.weights)} <- {list(self.source.weights)}, shift={self.shift}, {self.to_text()})"


def block_diagonal(ring: GradedRing, blocks: Sequence[GradedMatrix], shift: Optional[int] = None) -> GradedMatrix:
    """Block-diagonal matrix; all blocks must share the same shift."""
    if not blocks:
        return GradedMatrix.zero(ring, GradedFreeModule(), GradedFreeModule(), shift or 0)
    shifts = {b.shift for b in blocks}
    if len(shifts) != 1:
        raise DimensionMismatchError("Blocks of a block-diagonal matrix need a common shift")
    source = GradedFreeModule(sum((b.source.weights for b in blocks), ()))
    target = GradedFreeModule(sum((b.target.weights for b in blocks), ()))
    z = ring.zero
    rows = []
    col_offset = 0
    for b in blocks:
        for row in b.entries:
            rows.append(tuple([z] * col_offset + list(row) + [z] * (source.rank - col_offset - b.source.rank)))
        col_offset += b.source.rank
    return GradedMatrix(ring, source, target, shifts.pop(), tuple(rows))


def block_matrix(ring: GradedRing, blocks: Sequence[Sequence[Optional[GradedMatrix]]],
                 sources: Sequence[GradedFreeModule], targets: Sequence[GradedFreeModule],
                 shift: int) -> GradedMatrix:
    """Assemble ``blocks[r][c]: sources[c] -> targets[r]``; None means a zero block."""
    source = GradedFreeModule(sum((m.weights for m in sources), ()))
    target = GradedFreeModule(sum((m.weights for m in targets), ()))
    z = ring.zero
    rows = []
    for r, tgt in enumerate(targets):
        for i in range(tgt.rank):
            row = []
            for c, src in enumerate(sources):
                block = blocks[r][c]
                if block is None:
                    row.extend([z] * src.rank)
                else:
                    if block.source.rank != src.rank or block.target.rank != tgt.rank:
                        raise DimensionMismatchError(f"Block ({r}, {c}) has the wrong shape")
                    row.extend(block.entries[i])
            rows.append(tuple(row))
    return GradedMatrix(ring, source, target, shift, tuple(rows))


def hstack(ring: GradedRing, blocks: Sequence[GradedMatrix]) -> GradedMatrix:
    """[B_1 B_2 ...]: a map out of a direct sum."""
    target = blocks[0].target
    return block_matrix(ring, [list(blocks)], [b.source for b in blocks], [target], blocks[0].shift)


def vstack(ring: GradedRing, blocks: Sequence[GradedMatrix]) -> GradedMatrix:
    """[B_1; B_2; ...]: a map into a direct sum."""
    source = blocks[0].source
    return block_matrix(ring, [[b] for b in blocks], [source], [b.target for b in blocks], blocks[0].shift)


# ---------------------------------------------------------------------------
# Coordinates on spaces of graded maps
# ---------------------------------------------------------------------------

BlockShape = Tuple[GradedFreeModule, GradedFreeModule, int]


class MapSpace:
    """
    The k-vector space of tuples of degree-legal matrices, one per block.

    A coordinate is (block, row, col, monomial); the order is fixed by block,
    then row, then column, then descending lex on monomials.
    """

    def __init__(self, ring: GradedRing, blocks: Sequence[BlockShape]):
        self.ring = ring
        self.blocks = list(blocks)
        self.keys: List[Tuple[int, int, int, Tuple[int, ...]]] = []
        self.index: Dict[Tuple[int, int, int, Tuple[int, ...]], int] = {}
        for b, (source, target, shift) in enumerate(self.blocks):
            for i in range(target.rank):
                for j in range(source.rank):
                    degree = source.weights[j] + shift - target.weights[i]
                    for m in monomials_of_degree(ring.weights, degree):
                        key = (b, i, j, m)
                        self.index[key] = len(self.keys)
                        self.keys.append(key)

    @property
    def dimension(self) -> int:
        return len(self.keys)

    def zero_maps(self) -> Tuple[GradedMatrix, ...]:
        return tuple(GradedMatrix.zero(self.ring, s, t, sh) for s, t, sh in self.blocks)

    def unflatten(self, vector: SparseVector) -> Tuple[GradedMatrix, ...]:
        entries = [[[self.ring.zero] * s.rank for _ in range(t.rank)] for s, t, _ in self.blocks]
        for k, c in vector.items():
            if not c:
                continue
            b, i, j, m = self.keys[k]
            entries[b][i][j] = entries[b][i][j] + self.ring.monomial(m, c)
        return tuple(
            GradedMatrix(self.ring, s, t, sh, tuple(tuple(r) for r in entries[b]))
            for b, (s, t, sh) in enumerate(self.blocks)
        )

    def basis_element(self, k: int) -> Tuple[GradedMatrix, ...]:
        return self.unflatten({k: self.ring.field.one})

    def flatten(self, maps: Sequence[GradedMatrix]) -> SparseVector:
        out: SparseVector = {}
        for b, matrix in enumerate(maps):
            for i, row in enumerate(matrix.entries):
                for j, e in enumerate(row):
                    for m, c in e.items():
                        key = (b, i, j, m)
                        if key not in self.index:
                            raise ValidationError(
                                "Matrix entry is not homogeneous of the required degree",
                                {'block': b, 'row': i, 'col': j, 'entry': format_polynomial(e, self.ring)}
                            )
                        out[self.index[key]] = c
        return out


def graded_map_space(source: GradedFreeModule, target: GradedFreeModule, shift: int,
                     ring: GradedRing) -> List[GradedMatrix]:
    """Monomial basis of degree-legal maps ``source -> target`` of the given shift."""
    space = MapSpace(ring, [(source, target, shift)])
    return [space.basis_element(k)[0] for k in range(space.dimension)]


def _equation_coordinates(outputs: Sequence[GradedMatrix]):
    for e_index, matrix in enumerate(outputs):
        for i, row in enumerate(matrix.entries):
            for j, entry in enumerate(row):
                for m, c in entry.items():
                    yield (e_index, i, j, m), c


def linear_system(space: MapSpace, equations: Callable[[Tuple[GradedMatrix, ...]], Sequence[GradedMatrix]],
                  rhs: Optional[Sequence[GradedMatrix]] = None):
    """
    Assemble the matrix of a linear operator on ``space`` by evaluating it on
    every basis element. Returns (rows, rhs vector, nrows).
    """
    row_index: Dict[Any, int] = {}
    columns: List[Dict[Any, Any]] = []
    for k in range(space.dimension):
        check_cancelled()
        column = {}
        for key, c in _equation_coordinates(equations(space.basis_element(k))):
            column[key] = c
        columns.append(column)
    rhs_entries = dict(_equation_coordinates(rhs)) if rhs is not None else {}

    all_keys = set(rhs_entries)
    for column in columns:
        all_keys.update(column)
    for key in sorted(all_keys):
        row_index[key] = len(row_index)

    rows: Dict[int, SparseVector] = {}
    for k, column in enumerate(columns):
        for key, c in column.items():
            rows.setdefault(row_index[key], {})[k] = c
    rhs_vector = {row_index[key]: c for key, c in rhs_entries.items() if c}
    return rows, rhs_vector, len(row_index)


def solve_graded_system(space: MapSpace, equations: Callable[[Tuple[GradedMatrix, ...]], Sequence[GradedMatrix]],
                        rhs: Optional[Sequence[GradedMatrix]] = None) -> Tuple[Optional[SparseVector], List[SparseVector]]:
    """
    Solve ``equations(maps) == rhs`` (rhs defaults to zero) for maps in ``space``.

    Returns (a particular solution or None, a kernel basis), both as
    coordinate vectors on ``space``.
    """
    rows, rhs_vector, nrows = linear_system(space, equations, rhs)
    debug_log("Graded system", unknowns=space.dimension, equations=nrows)
    return solve_sparse(rows, rhs_vector, nrows, space.dimension, space.ring.field.domain)


def solve_for_maps(space: MapSpace, equations, rhs=None) -> Optional[Tuple[GradedMatrix, ...]]:
    solution, _ = solve_graded_system(space, equations, rhs)
    if solution is None:
        return None
    return space.unflatten(solution)
