"""
Graded G-equivariant matrix factorizations, their morphisms and homotopies,
and the stable (homotopy) category built from them.

Conventions used throughout:
  * A: P1 -> P0 has shift 0, B: P0 -> P1 has shift d_f, AB = f*I and BA = f*I.
  * M0[g], M1[g] give the G-action on P0, P1 (v -> M[g] sigma_g(v)).
  * A homotopy between X and Y is H0: X.P0 -> Y.P1 (shift 0) and
    H1: X.P1 -> Y.P0 (shift -d_f); its boundary is
    (A_Y H0 + H1 B_X, B_Y H1 + H0 A_X).
  * shift(X) has P0 = X.P1 twisted by -d_f, P1 = X.P0, A = -B, B = -A.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

from services.debug import DebugTimer, debug_log, debug_timer
from services.errors import (
    MixedRingError, PreconditionError, UnsupportedCharacteristicError, ValidationError
)
from services.exact_algebra import GradedRing, SparseVector, Subspace, format_polynomial
from services.findim_algebra import FinDimAlgebra, is_nc_local
from services.graded_maps import (
    GradedFreeModule, GradedMatrix, MapSpace, block_diagonal, block_matrix,
    solve_for_maps, solve_graded_system
)
from services.group_twist import RingAction, check_cocycle, check_intertwines

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EquivariantMF:
    """A graded G-equivariant matrix factorization of the ring's potential."""
    action: RingAction
    A: GradedMatrix
    B: GradedMatrix
    M0: Tuple[GradedMatrix, ...]
    M1: Tuple[GradedMatrix, ...]

    @property
    def ring(self) -> GradedRing:
        return self.action.ring

    @property
    def group(self):
        return self.action.group

    @property
    def p0(self) -> GradedFreeModule:
        return self.A.target

    @property
    def p1(self) -> GradedFreeModule:
        return self.A.source

    @property
    def rank(self) -> int:
        return self.p0.rank

    def module(self, parity: int) -> GradedFreeModule:
        return self.p0 if parity == 0 else self.p1

    def actions(self, parity: int) -> Tuple[GradedMatrix, ...]:
        return self.M0 if parity == 0 else self.M1

    @classmethod
    def build(cls, ring: GradedRing, p0: Sequence[int], p1: Sequence[int],
              A: Sequence[Sequence[Any]], B: Sequence[Sequence[Any]],
              action: Optional[RingAction] = None,
              M0: Optional[Dict[str, Sequence[Sequence[Any]]]] = None,
              M1: Optional[Dict[str, Sequence[Sequence[Any]]]] = None) -> 'EquivariantMF':
        """
        Build from weights and entry rows (polynomials or text). ``M0``/``M1``
        map group element labels to matrices; missing elements act by the identity.
        """
        action = action or RingAction.trivial(ring)
        if action.ring != ring:
            raise MixedRingError("Action is defined over another ring")
        P0, P1 = GradedFreeModule.of(p0), GradedFreeModule.of(p1)
        A_mat = GradedMatrix.build(ring, P1, P0, 0, A)
        B_mat = GradedMatrix.build(ring, P0, P1, ring.df, B)

        def action_matrices(module, given):
            given = given or {}
            unknown = set(given) - set(action.group.elements)
            if unknown:
                raise ValidationError(f"Action matrices for unknown group elements {sorted(unknown)}")
            out = []
            for label in action.group.elements:
                if label in given:
                    out.append(GradedMatrix.build(ring, module, module, 0, given[label]))
                else:
                    out.append(GradedMatrix.identity(ring, module))
            return tuple(out)

        return cls(action, A_mat, B_mat, action_matrices(P0, M0), action_matrices(P1, M1))

    @classmethod
    def zero_object(cls, action: RingAction) -> 'EquivariantMF':
        ring = action.ring
        empty = GradedFreeModule()
        z = GradedMatrix.zero(ring, empty, empty, 0)
        zf = GradedMatrix.zero(ring, empty, empty, ring.df)
        ids = tuple(z for _ in range(action.group.order))
        return cls(action, z, zf, ids, ids)

    def describe(self) -> str:
        return f"MF(rank={self.rank}, P0={list(self.p0.weights)}, P1={list(self.p1.weights)}, A={self.A.to_text()}, B={self.B.to_text()})"


@dataclass(frozen=True)
class MFMorphism:
    """Even morphism (U0, U1): source -> target."""
    source: EquivariantMF
    target: EquivariantMF
    U0: GradedMatrix
    U1: GradedMatrix

    def component(self, parity: int) -> GradedMatrix:
        return self.U0 if parity == 0 else self.U1

    def __matmul__(self, other: 'MFMorphism') -> 'MFMorphism':
        """``self @ other`` is the composite applying ``other`` first."""
        return compose(self, other)

    def __add__(self, other: 'MFMorphism') -> 'MFMorphism':
        _check_parallel(self, other)
        return MFMorphism(self.source, self.target, self.U0 + other.U0, self.U1 + other.U1)

    def __sub__(self, other: 'MFMorphism') -> 'MFMorphism':
        _check_parallel(self, other)
        return MFMorphism(self.source, self.target, self.U0 - other.U0, self.U1 - other.U1)

    def __neg__(self) -> 'MFMorphism':
        return MFMorphism(self.source, self.target, -self.U0, -self.U1)

    def scale(self, c) -> 'MFMorphism':
        return MFMorphism(self.source, self.target, self.U0.scale(c), self.U1.scale(c))

    def is_zero(self) -> bool:
        return self.U0.is_zero() and self.U1.is_zero()


@dataclass(frozen=True)
class Homotopy:
    """Odd map (H0, H1) from source to target."""
    source: EquivariantMF
    target: EquivariantMF
    H0: GradedMatrix
    H1: GradedMatrix

    def boundary(self) -> MFMorphism:
        X, Y = self.source, self.target
        return MFMorphism(X, Y, Y.A @ self.H0 + self.H1 @ X.B, Y.B @ self.H1 + self.H0 @ X.A)

    def __add__(self, other: 'Homotopy') -> 'Homotopy':
        return Homotopy(self.source, self.target, self.H0 + other.H0, self.H1 + other.H1)

    def __neg__(self) -> 'Homotopy':
        return Homotopy(self.source, self.target, -self.H0, -self.H1)

    def scale(self, c) -> 'Homotopy':
        return Homotopy(self.source, self.target, self.H0.scale(c), self.H1.scale(c))

    def precompose(self, u: MFMorphism) -> 'Homotopy':
        """H u, a homotopy for (first) @ u whenever H is one for first."""
        return Homotopy(u.source, self.target, self.H0 @ u.U0, self.H1 @ u.U1)

    def postcompose(self, v: MFMorphism) -> 'Homotopy':
        """v H, a homotopy for v @ (first) whenever H is one for first."""
        return Homotopy(self.source, v.target, v.U1 @ self.H0, v.U0 @ self.H1)


def _check_parallel(u: MFMorphism, v: MFMorphism):
    if u.source != v.source or u.target != v.target:
        raise ValidationError("Morphisms do not share source and target")


def _same_category(X: EquivariantMF, Y: EquivariantMF):
    if X.ring != Y.ring:
        raise MixedRingError("Objects live over different rings",
                             {'source': X.ring.potential, 'target': Y.ring.potential})
    if X.action != Y.action:
        raise ValidationError("Objects carry different group actions")


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass
class MFReport:
    ok: bool
    violation: Optional[str] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {'ok': self.ok, 'violation': self.violation, 'details': self.details}


def _first_difference(lhs: GradedMatrix, rhs: GradedMatrix):
    for i, (r1, r2) in enumerate(zip(lhs.entries, rhs.entries)):
        for j, (a, b) in enumerate(zip(r1, r2)):
            if a != b:
                return i, j, format_polynomial(a, lhs.ring), format_polynomial(b, lhs.ring)
    return None


def validate_mf(X: EquivariantMF) -> MFReport:
    """Check ranks, AB = BA = f*I, degree legality and the equivariant structure."""
    ring = X.ring
    if X.B.ring != ring or X.A.ring != ring:
        return MFReport(False, "matrix entries live over another ring")
    if X.p0.rank != X.p1.rank:
        return MFReport(False, "P0 and P1 have different ranks",
                        {'p0': list(X.p0.weights), 'p1': list(X.p1.weights)})
    if X.B.source != X.p0 or X.B.target != X.p1 or X.B.shift != ring.df or X.A.shift != 0:
        return MFReport(False, "B must map P0 to P1 with shift d_f and A must map P1 to P0 with shift 0")

    for name, product, module in (('A*B', X.A @ X.B, X.p0), ('B*A', X.B @ X.A, X.p1)):
        expected = GradedMatrix.scalar(ring, module, ring.f, ring.df)
        diff = _first_difference(product, expected)
        if diff:
            i, j, got, want = diff
            return MFReport(False, f"{name} != f*I at ({i}, {j}): {got} vs {want}",
                            {'product': name, 'row': i, 'col': j, 'got': got, 'expected': want})

    for name, matrix in (('A', X.A), ('B', X.B)):
        bad = matrix.degree_violations()
        if bad:
            i, j = bad[0]
            return MFReport(False, f"entry {name}[{i}][{j}] does not have degree {matrix.entry_degree(i, j)}",
                            {'matrix': name, 'row': i, 'col': j,
                             'entry': format_polynomial(matrix.entries[i][j], ring)})

    checks = (
        check_cocycle(X.action, X.p0, X.M0, 'M0'),
        check_cocycle(X.action, X.p1, X.M1, 'M1'),
        check_intertwines(X.action, X.A, X.M1, X.M0, 'A'),
        check_intertwines(X.action, X.B, X.M0, X.M1, 'B'),
    )
    for report in checks:
        if not report.ok:
            return MFReport(False, report.violation, report.witness or {})
    return MFReport(True)


def require_valid(X: EquivariantMF, name: str = 'object') -> EquivariantMF:
    report = validate_mf(X)
    if not report.ok:
        raise ValidationError(f"Invalid matrix factorization '{name}': {report.violation}", report.details)
    return X


# ---------------------------------------------------------------------------
# Linear equations for morphisms and homotopies
# ---------------------------------------------------------------------------

def even_space(X: EquivariantMF, Y: EquivariantMF) -> MapSpace:
    return MapSpace(X.ring, [(X.p0, Y.p0, 0), (X.p1, Y.p1, 0)])


def odd_space(X: EquivariantMF, Y: EquivariantMF) -> MapSpace:
    return MapSpace(X.ring, [(X.p0, Y.p1, 0), (X.p1, Y.p0, -X.ring.df)])


def _equivariance(action: RingAction, T: GradedMatrix, m_source: Sequence[GradedMatrix],
                  m_target: Sequence[GradedMatrix]) -> List[GradedMatrix]:
    return [T @ m_source[g] - m_target[g] @ action.apply_matrix(g, T) for g in action.group.non_identity()]


def morphism_equations(X: EquivariantMF, Y: EquivariantMF, U0: GradedMatrix, U1: GradedMatrix) -> List[GradedMatrix]:
    """Vanishes exactly when (U0, U1) is an equivariant chain map."""
    eqs = [U0 @ X.A - Y.A @ U1, U1 @ X.B - Y.B @ U0]
    if not X.group.is_trivial:
        eqs += _equivariance(X.action, U0, X.M0, Y.M0)
        eqs += _equivariance(X.action, U1, X.M1, Y.M1)
    return eqs


def odd_equivariance_equations(X: EquivariantMF, Y: EquivariantMF, H0: GradedMatrix, H1: GradedMatrix) -> List[GradedMatrix]:
    if X.group.is_trivial:
        return []
    return _equivariance(X.action, H0, X.M0, Y.M1) + _equivariance(X.action, H1, X.M1, Y.M0)


def boundary_maps(X: EquivariantMF, Y: EquivariantMF, H0: GradedMatrix, H1: GradedMatrix) -> List[GradedMatrix]:
    return [Y.A @ H0 + H1 @ X.B, Y.B @ H1 + H0 @ X.A]


def check_morphism(u: MFMorphism) -> MFReport:
    X, Y = u.source, u.target
    for name, matrix in (('U0', u.U0), ('U1', u.U1)):
        bad = matrix.degree_violations()
        if bad:
            i, j = bad[0]
            return MFReport(False, f"entry {name}[{i}][{j}] has the wrong degree")
    eqs = morphism_equations(X, Y, u.U0, u.U1)
    labels = ['U0 A = A\' U1', 'U1 B = B\' U0'] + \
        [f"U0 commutes with '{X.group.elements[g]}'" for g in X.group.non_identity()] + \
        [f"U1 commutes with '{X.group.elements[g]}'" for g in X.group.non_identity()]
    for label, eq in zip(labels, eqs):
        if not eq.is_zero():
            return MFReport(False, f"{label} fails", {'difference': eq.to_text()})
    return MFReport(True)


def identity(X: EquivariantMF) -> MFMorphism:
    return MFMorphism(X, X, GradedMatrix.identity(X.ring, X.p0), GradedMatrix.identity(X.ring, X.p1))


def zero_morphism(X: EquivariantMF, Y: EquivariantMF) -> MFMorphism:
    return MFMorphism(X, Y, GradedMatrix.zero(X.ring, X.p0, Y.p0), GradedMatrix.zero(X.ring, X.p1, Y.p1))


def zero_homotopy(X: EquivariantMF, Y: EquivariantMF) -> Homotopy:
    return Homotopy(X, Y, GradedMatrix.zero(X.ring, X.p0, Y.p1, 0),
                    GradedMatrix.zero(X.ring, X.p1, Y.p0, -X.ring.df))


def compose(v: MFMorphism, u: MFMorphism) -> MFMorphism:
    """v o u."""
    if u.target is not v.source and u.target != v.source:
        raise ValidationError("Cannot compose: target of the first map is not the source of the second")
    return MFMorphism(u.source, v.target, v.U0 @ u.U0, v.U1 @ u.U1)


# ---------------------------------------------------------------------------
# Hom spaces
# ---------------------------------------------------------------------------

@dataclass
class HomSpace:
    """
    Even morphisms source -> target, strictly or modulo null-homotopic maps.

    ``classes`` is an echelon basis of representatives complementary to the
    boundaries; coordinates of a morphism are read off after reducing by
    the boundaries.
    """
    source: EquivariantMF
    target: EquivariantMF
    parity: int
    modulo_homotopy: bool
    space: MapSpace
    cycle_dimension: int
    boundaries: Subspace
    classes: Subspace

    @property
    def dimension(self) -> int:
        return self.classes.dimension

    @property
    def boundary_dimension(self) -> int:
        return self.boundaries.dimension

    def _morphism(self, vector: SparseVector) -> MFMorphism:
        U0, U1 = self.space.unflatten(vector)
        return MFMorphism(self.source, self.target, U0, U1)

    @cached_property
    def representatives(self) -> List[MFMorphism]:
        return [self._morphism(row) for row in self.classes.rows]

    def coordinates(self, u: MFMorphism) -> List[Any]:
        vector = self.space.flatten((u.U0, u.U1))
        remainder = self.boundaries.reduce(vector)
        coords = self.classes.coordinates(remainder)
        if coords is None:
            raise PreconditionError("Map is not a morphism between these objects")
        return coords

    def from_coordinates(self, coefficients: Sequence[Any]) -> MFMorphism:
        return self._morphism(self.classes.combine(coefficients))

    def is_zero_class(self, u: MFMorphism) -> bool:
        return not any(self.coordinates(u))

    def summary(self) -> Dict[str, Any]:
        return {
            'parity': self.parity,
            'modulo_homotopy': self.modulo_homotopy,
            'dimension': self.dimension,
            'cycle_dimension': self.cycle_dimension,
            'boundary_dimension': self.boundary_dimension,
            'ambient_dimension': self.space.dimension
        }


def equivariant_odd_maps(X: EquivariantMF, Y: EquivariantMF) -> Tuple[MapSpace, List[SparseVector]]:
    odd = odd_space(X, Y)
    if X.group.is_trivial:
        one = X.ring.field.one
        return odd, [{k: one} for k in range(odd.dimension)]
    _, basis = solve_graded_system(odd, lambda maps: odd_equivariance_equations(X, Y, *maps))
    return odd, basis


def _hom_space(X: EquivariantMF, Y: EquivariantMF, parity: int, modulo_homotopy: bool) -> HomSpace:
    _same_category(X, Y)
    if parity not in (0, 1):
        raise ValidationError("Parity must be 0 or 1")
    target = shift(Y) if parity == 1 else Y
    domain = X.ring.field.domain
    even = even_space(X, target)
    _, cycles = solve_graded_system(even, lambda maps: morphism_equations(X, target, *maps))
    boundaries = Subspace(even.dimension, domain)
    if modulo_homotopy:
        odd, odd_basis = equivariant_odd_maps(X, target)
        images = [even.flatten(boundary_maps(X, target, *odd.unflatten(v))) for v in odd_basis]
        boundaries = Subspace(even.dimension, domain, [v for v in images if v])
    remainders = [boundaries.reduce(c) for c in cycles]
    classes = Subspace(even.dimension, domain, [r for r in remainders if r])
    debug_log("Hom space", parity=parity, stable=modulo_homotopy, cycles=len(cycles),
              boundaries=boundaries.dimension, classes=classes.dimension)
    return HomSpace(X, target, parity, modulo_homotopy, even, len(cycles), boundaries, classes)


@debug_timer
def morphism_space(X: EquivariantMF, Y: EquivariantMF) -> List[MFMorphism]:
    """Basis of the strict space of equivariant degree-0 chain maps X -> Y."""
    return strict_hom(X, Y).representatives


def strict_hom(X: EquivariantMF, Y: EquivariantMF) -> HomSpace:
    return _hom_space(X, Y, 0, modulo_homotopy=False)


@debug_timer
def stable_hom(X: EquivariantMF, Y: EquivariantMF, parity: int = 0) -> HomSpace:
    """Hom in the stable category; parity 1 gives Hom(X, shift(Y))."""
    return _hom_space(X, Y, parity, modulo_homotopy=True)


def homotopy_witness(u: MFMorphism, v: MFMorphism, equivariant: bool = True) -> Optional[Homotopy]:
    """
    An odd map H with boundary(H) = u - v, or None if u and v are not homotopic.

    With ``equivariant=False`` the homotopy is first found without the group
    constraint and then averaged over G.
    """
    _check_parallel(u, v)
    X, Y = u.source, u.target
    odd = odd_space(X, Y)
    rhs = [u.U0 - v.U0, u.U1 - v.U1]
    use_group = equivariant and not X.group.is_trivial

    def equations(maps):
        eqs = boundary_maps(X, Y, *maps)
        if use_group:
            eqs += odd_equivariance_equations(X, Y, *maps)
        return eqs

    solution = solve_for_maps(odd, equations, rhs)
    if solution is None:
        return None
    H = Homotopy(X, Y, *solution)
    if not equivariant and not X.group.is_trivial:
        H = average_homotopy(H)
    return H


def is_homotopic(u: MFMorphism, v: MFMorphism) -> bool:
    return homotopy_witness(u, v) is not None


def contraction(X: EquivariantMF) -> Optional[Homotopy]:
    """A homotopy from id_X to 0, if X is contractible."""
    return homotopy_witness(identity(X), zero_morphism(X, X))


def is_contractible(X: EquivariantMF) -> bool:
    return X.rank == 0 or contraction(X) is not None


# ---------------------------------------------------------------------------
# Averaging over G
# ---------------------------------------------------------------------------

def _require_invertible_order(action: RingAction):
    p = action.ring.field.characteristic
    if p and action.group.order % p == 0:
        raise UnsupportedCharacteristicError(
            f"Averaging needs |G| invertible (|G|={action.group.order}, characteristic {p})"
        )


def average_map(action: RingAction, T: GradedMatrix, m_source: Sequence[GradedMatrix],
                m_target: Sequence[GradedMatrix]) -> GradedMatrix:
    """(1/|G|) sum_g M'_g sigma_g(T) sigma_g(M_{g^-1}): the G-equivariant projection of T."""
    _require_invertible_order(action)
    group = action.group
    total = None
    for g in range(group.order):
        term = m_target[g] @ action.apply_matrix(g, T) @ action.apply_matrix(g, m_source[group.inverse(g)])
        total = term if total is None else total + term
    return total.scale(action.ring.field.one / action.ring.field.scalar(group.order))


def average_morphism(u: MFMorphism) -> MFMorphism:
    X, Y = u.source, u.target
    return MFMorphism(X, Y, average_map(X.action, u.U0, X.M0, Y.M0), average_map(X.action, u.U1, X.M1, Y.M1))


def average_homotopy(H: Homotopy) -> Homotopy:
    X, Y = H.source, H.target
    return Homotopy(X, Y, average_map(X.action, H.H0, X.M0, Y.M1), average_map(X.action, H.H1, X.M1, Y.M0))


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------

def direct_sum(*objects: EquivariantMF) -> EquivariantMF:
    if not objects:
        raise ValidationError("direct_sum needs at least one object")
    first = objects[0]
    for other in objects[1:]:
        _same_category(first, other)
    ring, action = first.ring, first.action
    A = block_diagonal(ring, [X.A for X in objects], 0)
    B = block_diagonal(ring, [X.B for X in objects], ring.df)
    M0 = tuple(block_diagonal(ring, [X.M0[g] for X in objects], 0) for g in range(action.group.order))
    M1 = tuple(block_diagonal(ring, [X.M1[g] for X in objects], 0) for g in range(action.group.order))
    return EquivariantMF(action, A, B, M0, M1)


def direct_sum_maps(objects: Sequence[EquivariantMF]) -> Tuple[EquivariantMF, List[MFMorphism], List[MFMorphism]]:
    """The sum with its canonical inclusions and projections."""
    S = direct_sum(*objects)
    ring = S.ring
    inclusions, projections = [], []
    for k, X in enumerate(objects):
        parts = []
        for parity in (0, 1):
            blocks = [[GradedMatrix.identity(ring, X.module(parity)) if m == k else None] for m in range(len(objects))]
            inc = block_matrix(ring, blocks, [X.module(parity)], [Y.module(parity) for Y in objects], 0)
            parts.append(inc)
        inclusions.append(MFMorphism(X, S, parts[0], parts[1]))
        projections.append(MFMorphism(S, X, _transpose_selector(parts[0], ring), _transpose_selector(parts[1], ring)))
    return S, inclusions, projections


def _transpose_selector(matrix: GradedMatrix, ring: GradedRing) -> GradedMatrix:
    rows = tuple(tuple(matrix.entries[i][j] for i in range(matrix.target.rank)) for j in range(matrix.source.rank))
    return GradedMatrix(ring, matrix.target, matrix.source, 0, rows)


def shift(X: EquivariantMF) -> EquivariantMF:
    """X[1]: swap the two sides with signs. shift(shift(X)) = twist(X, -d_f)."""
    df = X.ring.df
    P0 = X.p1.twist(-df)
    P1 = X.p0
    A = (-X.B).retyped(source=P1, target=P0, shift=0)
    B = (-X.A).retyped(source=P0, target=P1, shift=df)
    M0 = tuple(m.retyped(P0, P0) for m in X.M1)
    M1 = tuple(m.retyped(P1, P1) for m in X.M0)
    return EquivariantMF(X.action, A, B, M0, M1)


def shift_morphism(u: MFMorphism) -> MFMorphism:
    S, T = shift(u.source), shift(u.target)
    return MFMorphism(S, T, u.U1.retyped(S.p0, T.p0), u.U0.retyped(S.p1, T.p1))


def twist(X: EquivariantMF, j: int) -> EquivariantMF:
    """Internal degree shift: every generator degree raised by j."""
    P0, P1 = X.p0.twist(j), X.p1.twist(j)
    return EquivariantMF(
        X.action,
        X.A.retyped(P1, P0),
        X.B.retyped(P0, P1),
        tuple(m.retyped(P0, P0) for m in X.M0),
        tuple(m.retyped(P1, P1) for m in X.M1),
    )


def twist_morphism(u: MFMorphism, j: int) -> MFMorphism:
    S, T = twist(u.source, j), twist(u.target, j)
    return MFMorphism(S, T, u.U0.retyped(S.p0, T.p0), u.U1.retyped(S.p1, T.p1))


@dataclass
class ConeData:
    cone: EquivariantMF
    inclusion: MFMorphism   # Y -> C(u)
    projection: MFMorphism  # C(u) -> shift(X)


def cone(u: MFMorphism) -> ConeData:
    """Mapping cone C(u) = Y + X[1] with differential [[d_Y, u], [0, d_X[1]]]."""
    X, Y = u.source, u.target
    _same_category(X, Y)
    ring = X.ring
    SX = shift(X)
    C0 = [Y.p0, SX.p0]
    C1 = [Y.p1, SX.p1]
    A = block_matrix(ring, [[Y.A, u.U0.retyped(SX.p1, Y.p0)], [None, SX.A]], C1, C0, 0)
    B = block_matrix(ring, [[Y.B, u.U1.retyped(SX.p0, Y.p1, ring.df)], [None, SX.B]], C0, C1, ring.df)
    M0 = tuple(block_diagonal(ring, [Y.M0[g], SX.M0[g]], 0) for g in range(X.group.order))
    M1 = tuple(block_diagonal(ring, [Y.M1[g], SX.M1[g]], 0) for g in range(X.group.order))
    C = EquivariantMF(X.action, A, B, M0, M1)

    inc = []
    proj = []
    for parity in (0, 1):
        parts_y, parts_x = Y.module(parity), SX.module(parity)
        inc.append(block_matrix(ring, [[GradedMatrix.identity(ring, parts_y)], [None]], [parts_y], [parts_y, parts_x], 0))
        proj.append(block_matrix(ring, [[None, GradedMatrix.identity(ring, parts_x)]], [parts_y, parts_x], [parts_x], 0))
    return ConeData(C, MFMorphism(Y, C, inc[0], inc[1]), MFMorphism(C, SX, proj[0], proj[1]))


# ---------------------------------------------------------------------------
# Endomorphism algebras and isomorphisms
# ---------------------------------------------------------------------------

@dataclass
class EndomorphismAlgebra:
    """End(X) (strict or stable) as structure constants, with the translation back to maps."""
    obj: EquivariantMF
    hom: HomSpace
    algebra: FinDimAlgebra

    def element(self, u: MFMorphism) -> Tuple[Any, ...]:
        return tuple(self.hom.coordinates(u))

    def morphism(self, x: Sequence[Any]) -> MFMorphism:
        return self.hom.from_coordinates(x)


def endomorphism_algebra(X: EquivariantMF, stable: bool = True) -> EndomorphismAlgebra:
    """Multiplication is composition: x*y = x o y."""
    hom = stable_hom(X, X) if stable else strict_hom(X, X)
    reps = hom.representatives
    with DebugTimer(f"endomorphism algebra (dim {len(reps)}, stable={stable})"):
        products = []
        for a in reps:
            row = []
            for b in reps:
                coords = hom.coordinates(a @ b)
                row.append({k: c for k, c in enumerate(coords) if c})
            products.append(row)
        unit = tuple(hom.coordinates(identity(X))) if reps else ()
    return EndomorphismAlgebra(X, hom, FinDimAlgebra(X.ring.field, len(reps), products, unit))


@dataclass
class IsomorphismCertificate:
    """forward: X -> Y and backward: Y -> X with homotopies to the identities."""
    forward: MFMorphism
    backward: MFMorphism
    source_homotopy: Homotopy   # boundary = backward o forward - id_X
    target_homotopy: Homotopy   # boundary = forward o backward - id_Y


def find_isomorphism(X: EquivariantMF, Y: EquivariantMF, seed: int = 0) -> Optional[IsomorphismCertificate]:
    """
    Search for a stable isomorphism X -> Y.

    When the stable End(X) is local some basis composite v_j u_i is a unit,
    so the pairwise search is complete. Otherwise both sides are split into
    indecomposables, the summands are matched one to one and the matched
    isomorphisms are assembled into a block isomorphism.
    """
    _same_category(X, Y)
    if is_contractible(X) and is_contractible(Y):
        u, v = zero_morphism(X, Y), zero_morphism(Y, X)
        return _certify_iso(u, v)
    hXY, hYX = stable_hom(X, Y), stable_hom(Y, X)
    if hXY.dimension == 0 or hYX.dimension == 0:
        return None
    EX = endomorphism_algebra(X)
    EY = endomorphism_algebra(Y)
    for u in hXY.representatives:
        for v in hYX.representatives:
            w = EX.algebra.inverse(EX.element(v @ u))
            if w is None:
                continue
            backward = EX.morphism(w) @ v
            if EY.element(u @ backward) != EY.algebra.one():
                continue
            certificate = _certify_iso(u, backward)
            if certificate is not None:
                return certificate
    if is_nc_local(EX.algebra, seed):
        return None
    return _isomorphism_by_summands(X, Y, seed)


def _isomorphism_by_summands(X: EquivariantMF, Y: EquivariantMF, seed: int) -> Optional[IsomorphismCertificate]:
    from services.splitting import ks_decompose

    left = ks_decompose(X, seed).noncontractible
    right = ks_decompose(Y, seed).noncontractible
    if len(left) != len(right):
        return None
    debug_log("Matching summands", left=len(left), right=len(right))
    forward = zero_morphism(X, Y)
    backward = zero_morphism(Y, X)
    unmatched = list(right)
    for s in left:
        for index, t in enumerate(unmatched):
            if s.obj.rank != t.obj.rank:
                continue
            certificate = find_isomorphism(s.obj, t.obj, seed)
            if certificate is not None:
                forward = forward + t.iota @ certificate.forward @ s.pi
                backward = backward + s.iota @ certificate.backward @ t.pi
                unmatched.pop(index)
                break
        else:
            return None
    if unmatched:
        return None
    return _certify_iso(forward, backward)


def _certify_iso(u: MFMorphism, v: MFMorphism) -> Optional[IsomorphismCertificate]:
    h_source = homotopy_witness(v @ u, identity(u.source))
    h_target = homotopy_witness(u @ v, identity(u.target))
    if h_source is None or h_target is None:
        return None
    return IsomorphismCertificate(u, v, h_source, h_target)


def are_stably_isomorphic(X: EquivariantMF, Y: EquivariantMF) -> bool:
    return find_isomorphism(X, Y) is not None
