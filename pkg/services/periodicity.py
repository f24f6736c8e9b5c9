"""
Graded minimal free resolutions over the hypersurface R = Q/(f).

Everything is done degree by degree with exact linear algebra over the
ground field: R_d is Q_d modulo f*Q_{d-d_f}, kernels of presentation maps
are computed inside a finite degree window, and the window is certified a
posteriori by requiring that no minimal generator shows up near its top.

Over a hypersurface every high syzygy is maximal Cohen-Macaulay and the
resolution becomes 2-periodic; the periodic pair lifts to a matrix
factorization of f.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from config import Config
from services.debug import DebugTimer, debug_log
from services.errors import (
    DegreeWindowExhausted, InternalError, NoPeriodicityError, PreconditionError, ValidationError
)
from services.exact_algebra import (
    GradedRing, SparseVector, Subspace, homogeneous_coordinates, kernel_sparse,
    monomials_of_degree, rref_sparse
)
from services.graded_maps import GradedFreeModule, GradedMatrix, MapSpace, solve_for_maps
from services.group_twist import RingAction
from services.job_manager import check_cancelled
from services.mf_core import EquivariantMF, require_valid

logger = logging.getLogger(__name__)


@dataclass
class _DegreePiece:
    monomials: Tuple[Tuple[int, ...], ...]
    relations: Subspace
    standard: List[int]
    position: Dict[int, int]


class HypersurfaceQuotient:
    """
    R = Q/(f) one degree at a time.

    The basis of R_d is the set of degree-d monomials that are not pivots of
    the reduced echelon form of f*Q_{d-d_f}.
    """

    def __init__(self, ring: GradedRing):
        self.ring = ring
        self._pieces: Dict[int, _DegreePiece] = {}

    def _piece(self, d: int) -> _DegreePiece:
        piece = self._pieces.get(d)
        if piece is None:
            ring = self.ring
            monomials = monomials_of_degree(ring.weights, d)
            relations = [homogeneous_coordinates(ring.f * ring.monomial(m), ring, d)
                         for m in monomials_of_degree(ring.weights, d - ring.df)]
            span = Subspace(len(monomials), ring.field.domain, relations)
            pivots = set(span.pivots)
            standard = [i for i in range(len(monomials)) if i not in pivots]
            piece = _DegreePiece(monomials, span, standard, {i: k for k, i in enumerate(standard)})
            self._pieces[d] = piece
        return piece

    def dimension(self, d: int) -> int:
        if d < 0:
            return 0
        return len(self._piece(d).standard)

    def basis(self, d: int) -> List[Any]:
        if d < 0:
            return []
        piece = self._piece(d)
        return [self.ring.monomial(piece.monomials[i]) for i in piece.standard]

    def coordinates(self, p, d: int) -> SparseVector:
        """Coordinates of the class of a degree-d polynomial in the basis of R_d."""
        if d < 0 or not p:
            return {}
        piece = self._piece(d)
        remainder = piece.relations.reduce(homogeneous_coordinates(p, self.ring, d))
        return {piece.position[i]: c for i, c in remainder.items()}

    def element(self, vector: SparseVector, d: int):
        """Standard-monomial representative of a coordinate vector of R_d."""
        out = self.ring.zero
        if d < 0:
            return out
        piece = self._piece(d)
        for k, c in vector.items():
            if c:
                out = out + self.ring.monomial(piece.monomials[piece.standard[k]], c)
        return out

    def reduce(self, p, d: int):
        return self.element(self.coordinates(p, d), d)

    def free_dimension(self, module: GradedFreeModule, t: int) -> int:
        return sum(self.dimension(t - w) for w in module.weights)

    def _offsets(self, module: GradedFreeModule, t: int) -> List[int]:
        offsets, total = [], 0
        for w in module.weights:
            offsets.append(total)
            total += self.dimension(t - w)
        return offsets

    def degree_map(self, d: GradedMatrix, t: int) -> Tuple[Dict[int, SparseVector], int, int]:
        """
        The k-linear map (source)_t -> (target)_t induced by ``d`` over R,
        as sparse rows. ``d`` must have shift 0.
        """
        src_offsets = self._offsets(d.source, t)
        tgt_offsets = self._offsets(d.target, t)
        ncols = self.free_dimension(d.source, t)
        nrows = self.free_dimension(d.target, t)
        rows: Dict[int, SparseVector] = {}
        for j, w in enumerate(d.source.weights):
            for k, b in enumerate(self.basis(t - w)):
                col = src_offsets[j] + k
                for i, v in enumerate(d.target.weights):
                    entry = d.entries[i][j]
                    if not entry:
                        continue
                    for r, c in self.coordinates(entry * b, t - v).items():
                        rows.setdefault(tgt_offsets[i] + r, {})[col] = c
        return rows, nrows, ncols

    def rank_at(self, d: GradedMatrix, t: int) -> int:
        rows, nrows, ncols = self.degree_map(d, t)
        if not rows:
            return 0
        return len(rref_sparse(rows, (nrows, ncols), self.ring.field.domain)[1])

    def vector_of(self, module: GradedFreeModule, column: Sequence[Any], t: int) -> SparseVector:
        """Coordinates in (module)_t of a column of polynomials (entry j of degree t - w_j)."""
        out: SparseVector = {}
        for offset, w, p in zip(self._offsets(module, t), module.weights, column):
            for r, c in self.coordinates(p, t - w).items():
                out[offset + r] = c
        return out

    def column_of(self, module: GradedFreeModule, vector: SparseVector, t: int) -> Tuple[Any, ...]:
        offsets = self._offsets(module, t)
        out = []
        for j, w in enumerate(module.weights):
            size = self.dimension(t - w)
            piece = {k - offsets[j]: c for k, c in vector.items() if offsets[j] <= k < offsets[j] + size}
            out.append(self.element(piece, t - w))
        return tuple(out)

    def is_zero_mod_f(self, p) -> bool:
        return not p or not p.rem(self.ring.f)


# ---------------------------------------------------------------------------
# Modules and syzygies
# ---------------------------------------------------------------------------

class GradedRModule:
    """
    coker(presentation: F1 -> F0) over R.

    Presentation entries are stored in normal form (standard monomials only)
    and must lie in the irrelevant ideal, so F0 is a minimal generating set.
    """

    def __init__(self, quotient: HypersurfaceQuotient, presentation: GradedMatrix):
        if presentation.ring != quotient.ring:
            raise ValidationError("Presentation lives over another ring")
        if presentation.shift != 0:
            raise ValidationError("Presentation matrices must have shift 0")
        bad = presentation.degree_violations()
        if bad:
            i, j = bad[0]
            raise ValidationError(f"Presentation entry [{i}][{j}] is not homogeneous of degree "
                                  f"{presentation.entry_degree(i, j)}")
        if any(c for row in presentation.constant_part() for c in row):
            raise ValidationError("Presentation is not minimal: it has a unit entry")
        rows = tuple(
            tuple(quotient.reduce(e, presentation.entry_degree(i, j)) for j, e in enumerate(row))
            for i, row in enumerate(presentation.entries)
        )
        self.quotient = quotient
        self.presentation = GradedMatrix(quotient.ring, presentation.source, presentation.target, 0, rows)
        self._hilbert: Dict[int, int] = {}

    @property
    def ring(self) -> GradedRing:
        return self.quotient.ring

    @property
    def generators(self) -> GradedFreeModule:
        return self.presentation.target

    @property
    def relations(self) -> GradedFreeModule:
        return self.presentation.source

    def is_zero(self) -> bool:
        return self.generators.rank == 0

    def is_free(self) -> bool:
        return self.presentation.is_zero()

    def hilbert(self, t: int) -> int:
        if t not in self._hilbert:
            total = self.quotient.free_dimension(self.generators, t)
            self._hilbert[t] = total - self.quotient.rank_at(self.presentation, t)
        return self._hilbert[t]


def hilbert_function(module: GradedRModule, window: Sequence[int]) -> List[int]:
    """dim_k M_t for t in the window."""
    values = [module.hilbert(t) for t in window]
    if any(v < 0 for v in values):
        raise InternalError("Negative Hilbert function value")
    return values


def residue_field_module(ring: GradedRing) -> GradedRModule:
    """k = R/(x_1, ..., x_n), presented by the row of variables."""
    quotient = HypersurfaceQuotient(ring)
    presentation = GradedMatrix.build(ring, GradedFreeModule.of(ring.weights), GradedFreeModule((0,)), 0,
                                      [list(ring.gens)])
    return GradedRModule(quotient, presentation)


@dataclass
class SyzygyStep:
    """ker(connecting) = coker(module.presentation); kernel dimensions per window degree."""
    module: GradedRModule
    connecting: GradedMatrix
    window: Tuple[int, int]
    kernel_dimensions: Dict[int, int]


def _window(module: GradedFreeModule, ring: GradedRing, degree_bound: int) -> Tuple[int, int]:
    width = degree_bound or (2 * ring.df + max(ring.weights))
    return min(module.weights), max(module.weights) + width


def syzygy_step(module: GradedRModule, degree_bound: Optional[int] = None) -> SyzygyStep:
    """
    Minimal graded presentation of the first syzygy of ``module``.

    ``degree_bound`` is the width of the degree window above the top
    generator of the relation module (0 or None picks 2*d_f + max weight).
    Generators are a greedy complement, in increasing degree, of the part of
    the kernel already generated by lower-degree generators.
    """
    quotient = module.quotient
    ring = quotient.ring
    d = module.presentation
    F = d.source
    domain = ring.field.domain
    if degree_bound is None:
        degree_bound = Config.MFG_DEGREE_BOUND

    if F.rank == 0:
        empty = GradedMatrix.zero(ring, GradedFreeModule(), GradedFreeModule(), 0)
        return SyzygyStep(GradedRModule(quotient, empty), d, (0, -1), {})

    lo, hi = _window(F, ring, degree_bound)
    margin = ring.df + max(ring.weights)
    generators: List[Tuple[int, Tuple[Any, ...]]] = []
    kernel_dimensions: Dict[int, int] = {}

    with DebugTimer(f"Syzygy of a rank-{F.rank} relation module"):
        for t in range(lo, hi + 1):
            check_cancelled()
            rows, nrows, ncols = quotient.degree_map(d, t)
            if ncols == 0:
                kernel_dimensions[t] = 0
                continue
            kernel = kernel_sparse(rows, nrows, ncols, domain)
            kernel_dimensions[t] = len(kernel)
            generated = Subspace(ncols, domain)
            multiples = []
            for e, column in generators:
                for m in monomials_of_degree(ring.weights, t - e):
                    monomial = ring.monomial(m)
                    multiples.append(quotient.vector_of(F, [p * monomial for p in column], t))
            generated.extend(multiples)
            if generated.dimension > len(kernel):
                raise InternalError("Generated submodule is larger than the kernel", {'degree': t})
            fresh = generated.extend(kernel)
            if fresh and t > hi - margin:
                raise DegreeWindowExhausted(
                    "Syzygy generators did not stabilize inside the degree window; increase degree_bound",
                    {'degree': t, 'window': [lo, hi], 'degree_bound': degree_bound}
                )
            for vector in fresh:
                generators.append((t, quotient.column_of(F, vector, t)))
            if fresh:
                debug_log("New syzygy generators", degree=t, count=len(fresh), kernel=len(kernel))

    G = GradedFreeModule(tuple(e for e, _ in generators))
    rows = tuple(tuple(column[i] for _, column in generators) for i in range(F.rank))
    next_d = GradedMatrix(ring, G, F, 0, rows)
    _certify_exactness(quotient, d, next_d, kernel_dimensions)
    return SyzygyStep(GradedRModule(quotient, next_d), d, (lo, hi), kernel_dimensions)


def _certify_exactness(quotient: HypersurfaceQuotient, d: GradedMatrix, next_d: GradedMatrix,
                       kernel_dimensions: Dict[int, int]) -> None:
    """d * next_d = 0 over R, and rank(next_d) = dim ker(d) in every window degree."""
    product = d @ next_d
    for i, row in enumerate(product.entries):
        for j, e in enumerate(row):
            if not quotient.is_zero_mod_f(e):
                raise InternalError("Consecutive differentials do not compose to zero", {'row': i, 'col': j})
    for t, dimension in kernel_dimensions.items():
        if quotient.rank_at(next_d, t) != dimension:
            raise InternalError("Resolution is not exact in the degree window", {'degree': t})


# ---------------------------------------------------------------------------
# Periodic tails
# ---------------------------------------------------------------------------

@dataclass
class ResolutionTail:
    """
    F_0 <- F_1 <- ... <- F_N with differentials[i-1] = d_i: F_i -> F_{i-1}.

    ``kernel_dimensions[i-1]`` holds dim ker(d_i) per degree of the window
    used to compute d_{i+1}. ``period_start`` is the s where (d_s, d_{s+1})
    lifts to a factorization generating the rest of the resolution.
    """
    quotient: HypersurfaceQuotient
    modules: List[GradedFreeModule]
    differentials: List[GradedMatrix]
    windows: List[Tuple[int, int]] = field(default_factory=list)
    kernel_dimensions: List[Dict[int, int]] = field(default_factory=list)
    period_start: Optional[int] = None
    finite: bool = False

    @property
    def length(self) -> int:
        return len(self.differentials)

    def differential(self, i: int) -> GradedMatrix:
        if not 1 <= i <= self.length:
            raise PreconditionError(f"Differential d_{i} was not computed", {'length': self.length})
        return self.differentials[i - 1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'period_start': self.period_start,
            'finite': self.finite,
            'modules': [list(m.weights) for m in self.modules],
            'differentials': [d.to_text() for d in self.differentials],
            'windows': [list(w) for w in self.windows],
            'kernel_dimensions': [{str(t): n for t, n in sorted(dims.items())} for dims in self.kernel_dimensions]
        }


def _lift_factor(ring: GradedRing, A: GradedMatrix) -> Optional[GradedMatrix]:
    """B over Q with A*B = f*I (A: P1 -> P0 shift 0, B: P0 -> P1 shift d_f), or None."""
    P1, P0 = A.source, A.target
    if P0.rank != P1.rank:
        return None
    space = MapSpace(ring, [(P0, P1, ring.df)])
    expected = GradedMatrix.scalar(ring, P0, ring.f, ring.df)
    solution = solve_for_maps(space, lambda maps: [A @ maps[0]], [expected])
    return None if solution is None else solution[0]


def _periodic_at(tail: ResolutionTail, s: int) -> Optional[GradedMatrix]:
    ring = tail.quotient.ring
    F = tail.modules
    df = ring.df
    if F[s].rank == 0 or F[s].rank != F[s - 1].rank:
        return None
    if sorted(F[s + 1].weights) != sorted(w + df for w in F[s - 1].weights):
        return None
    if sorted(F[s + 2].weights) != sorted(w + df for w in F[s].weights):
        return None
    B = _lift_factor(ring, tail.differential(s))
    if B is None:
        return None
    # B mod f must generate ker(d_s) in every degree of its window
    reduced = B.retyped(F[s - 1].twist(df), F[s], 0)
    for t, dimension in tail.kernel_dimensions[s - 1].items():
        if tail.quotient.rank_at(reduced, t) != dimension:
            return None
    return B


def resolve_periodic(module: GradedRModule, max_steps: Optional[int] = None,
                     degree_bound: Optional[int] = None) -> ResolutionTail:
    """
    Resolve ``module`` until the resolution is visibly 2-periodic.

    At most ``max_steps`` differentials are computed. Free modules give an
    empty tail; a resolution that stops before becoming periodic is returned
    with ``finite`` set.
    """
    max_steps = max_steps if max_steps is not None else Config.MFG_MAX_STEPS
    quotient = module.quotient
    d1 = module.presentation
    tail = ResolutionTail(quotient, [d1.target], [])
    if module.is_free():
        tail.modules = [d1.target]
        tail.finite = True
        return tail
    tail.modules.append(d1.source)
    tail.differentials.append(d1)

    current = module
    with DebugTimer(f"Periodic resolution (max {max_steps} steps)"):
        while tail.length < max_steps:
            step = syzygy_step(current, degree_bound)
            tail.windows.append(step.window)
            tail.kernel_dimensions.append(step.kernel_dimensions)
            next_d = step.module.presentation
            if next_d.source.rank == 0:
                tail.finite = True
                logger.info(f"Resolution of length {tail.length} is finite")
                return tail
            tail.differentials.append(next_d)
            tail.modules.append(next_d.source)
            current = step.module
            debug_log("Resolution step", index=tail.length, rank=next_d.source.rank,
                      weights=list(next_d.source.weights))

            s = tail.length - 2
            if s >= 1 and _periodic_at(tail, s) is not None:
                tail.period_start = s
                logger.info(f"Resolution periodic from step {s} (rank {tail.modules[s].rank})")
                return tail

    raise NoPeriodicityError(
        f"No 2-periodicity detected within {max_steps} steps; increase max_steps",
        {'ranks': [m.rank for m in tail.modules]}
    )


def extract_mf(tail: ResolutionTail, step: int) -> EquivariantMF:
    """
    The factorization (A, B) with A = d_step lifted to Q, on P0 = F_{step-1}
    and P1 = F_step, with the trivial group acting.
    """
    if tail.period_start is None:
        raise PreconditionError("Resolution has no periodic tail")
    if step < tail.period_start:
        raise PreconditionError(f"Step {step} lies before the periodic tail", {'period_start': tail.period_start})
    ring = tail.quotient.ring
    A = tail.differential(step)
    B = _lift_factor(ring, A)
    if B is None:
        raise PreconditionError(f"d_{step} does not lift to a matrix factorization")
    action = RingAction.trivial(ring)
    X = EquivariantMF(action, A, B, (GradedMatrix.identity(ring, A.target),), (GradedMatrix.identity(ring, A.source),))
    return require_valid(X, f'extracted factorization at step {step}')


def kstab(ring: GradedRing, max_steps: Optional[int] = None, degree_bound: Optional[int] = None) -> EquivariantMF:
    """The factorization attached to a high syzygy of the residue field."""
    tail = resolve_periodic(residue_field_module(ring), max_steps, degree_bound)
    if tail.period_start is None:
        raise NoPeriodicityError("Residue field has a finite resolution; f is not singular at the origin")
    X = extract_mf(tail, tail.period_start)
    logger.info(f"k^stab for f={ring.potential}: rank {X.rank}, period start {tail.period_start}")
    return X
