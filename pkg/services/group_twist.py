"""
Finite groups acting on a graded ring, the twisted group algebra Q#G and
semilinear (equivariant) module structures on free modules.

Conventions: the action is a left action, sigma_g(sigma_h(a)) = sigma_{gh}(a),
and g acts on a free module by v -> M_g sigma_g(v). The cocycle condition is
M_g sigma_g(M_h) = M_{gh} with M_e = I.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Sequence, Tuple, Union

from sympy.polys.rings import PolyElement

from services.errors import DimensionMismatchError, MixedRingError, ValidationError
from services.exact_algebra import GradedRing, format_polynomial, is_homogeneous, substitute
from services.graded_maps import GradedFreeModule, GradedMatrix

if TYPE_CHECKING:
    from services.mf_core import EquivariantMF

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroupData:
    """A finite group given by labelled elements and a multiplication table of indices."""
    elements: Tuple[str, ...]
    table: Tuple[Tuple[int, ...], ...]
    identity: int = 0

    def __post_init__(self):
        n = len(self.elements)
        if n == 0:
            raise ValidationError("A group needs at least one element")
        if len(set(self.elements)) != n:
            raise ValidationError("Group element labels must be distinct")
        if len(self.table) != n or any(len(row) != n for row in self.table):
            raise ValidationError("Multiplication table must be |G| x |G|")
        if any(not (0 <= v < n) for row in self.table for v in row):
            raise ValidationError("Multiplication table refers to unknown elements")
        e = self.identity
        for g in range(n):
            if self.table[e][g] != g or self.table[g][e] != g:
                raise ValidationError(f"'{self.elements[e]}' is not a two-sided identity")
            if e not in self.table[g]:
                raise ValidationError(f"'{self.elements[g]}' has no inverse")
        for g in range(n):
            for h in range(n):
                gh = self.table[g][h]
                for k in range(n):
                    if self.table[gh][k] != self.table[g][self.table[h][k]]:
                        raise ValidationError(
                            "Multiplication table is not associative",
                            {'g': self.elements[g], 'h': self.elements[h], 'k': self.elements[k]}
                        )

    @classmethod
    def from_labels(cls, elements: Sequence[str], table: Sequence[Sequence[str]]) -> 'GroupData':
        labels = [str(e) for e in elements]
        position = {label: i for i, label in enumerate(labels)}
        try:
            indices = tuple(tuple(position[str(v)] for v in row) for row in table)
        except KeyError as e:
            raise ValidationError(f"Multiplication table uses unknown element {e}")
        identity = None
        for g in range(len(labels)):
            if all(indices[g][h] == h for h in range(len(labels))):
                identity = g
                break
        if identity is None:
            raise ValidationError("Multiplication table has no identity element")
        return cls(tuple(labels), indices, identity)

    @classmethod
    def trivial(cls) -> 'GroupData':
        return cls(('e',), ((0,),), 0)

    @classmethod
    def cyclic(cls, n: int, name: str = 'g') -> 'GroupData':
        labels = tuple('e' if k == 0 else (name if k == 1 else f'{name}{k}') for k in range(n))
        table = tuple(tuple((a + b) % n for b in range(n)) for a in range(n))
        return cls(labels, table, 0)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def is_trivial(self) -> bool:
        return self.order == 1

    def mul(self, g: int, h: int) -> int:
        return self.table[g][h]

    @cached_property
    def _inverses(self) -> Tuple[int, ...]:
        return tuple(self.table[g].index(self.identity) for g in range(self.order))

    def inverse(self, g: int) -> int:
        return self._inverses[g]

    def index(self, label: str) -> int:
        try:
            return self.elements.index(label)
        except ValueError:
            raise ValidationError(f"Unknown group element '{label}'")

    def non_identity(self) -> List[int]:
        return [g for g in range(self.order) if g != self.identity]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'elements': list(self.elements),
            'table': [[self.elements[v] for v in row] for row in self.table]
        }


@dataclass(frozen=True)
class RingAction:
    """
    G acting on Q by graded automorphisms fixing f.

    ``images[g][i]`` is the canonical text of sigma_g(x_i).
    """
    ring: GradedRing
    group: GroupData
    images: Tuple[Tuple[str, ...], ...]

    def __post_init__(self):
        ring, group = self.ring, self.group
        if len(self.images) != group.order or any(len(row) != ring.ngens for row in self.images):
            raise ValidationError("Action needs one image per group element and variable")
        polys = self.image_polys
        canonical = tuple(tuple(format_polynomial(p, ring) for p in row) for row in polys)
        if canonical != self.images:
            object.__setattr__(self, 'images', canonical)
        for g in range(group.order):
            for i, p in enumerate(polys[g]):
                if not p or not is_homogeneous(p, ring, ring.weights[i]):
                    raise ValidationError(
                        f"sigma_{group.elements[g]}({ring.variables[i]}) must be homogeneous of degree {ring.weights[i]}",
                        {'image': canonical[g][i]}
                    )
        if polys[group.identity] != ring.gens:
            raise ValidationError("The identity element must act trivially")
        for g in range(group.order):
            for h in range(group.order):
                gh = group.mul(g, h)
                for i in range(ring.ngens):
                    if self.apply(g, polys[h][i]) != polys[gh][i]:
                        if self.apply(h, polys[g][i]) == polys[gh][i]:
                            raise ValidationError(
                                "Action images compose as a right action; a left action is required",
                                {'g': group.elements[g], 'h': group.elements[h], 'variable': ring.variables[i]}
                            )
                        raise ValidationError(
                            "Action is not compatible with the multiplication table",
                            {'g': group.elements[g], 'h': group.elements[h], 'variable': ring.variables[i]}
                        )
        for g in range(group.order):
            if self.apply(g, ring.f) != ring.f:
                raise ValidationError(
                    f"The potential is not invariant under '{group.elements[g]}'",
                    {'image': format_polynomial(self.apply(g, ring.f), ring)}
                )

    @classmethod
    def from_mapping(cls, ring: GradedRing, group: GroupData, mapping: Dict[str, Dict[str, str]]) -> 'RingAction':
        """Build from {element label: {variable: image text}}; omitted entries act trivially."""
        unknown = set(mapping) - set(group.elements)
        if unknown:
            raise ValidationError(f"Action refers to unknown group elements {sorted(unknown)}")
        images = []
        for label in group.elements:
            per_var = mapping.get(label, {})
            bad = set(per_var) - set(ring.variables)
            if bad:
                raise ValidationError(f"Action refers to unknown variables {sorted(bad)}")
            images.append(tuple(str(per_var.get(v, v)) for v in ring.variables))
        return cls(ring, group, tuple(images))

    @classmethod
    def trivial(cls, ring: GradedRing) -> 'RingAction':
        return cls(ring, GroupData.trivial(), (tuple(ring.variables),))

    @cached_property
    def image_polys(self) -> Tuple[Tuple[PolyElement, ...], ...]:
        return tuple(tuple(self.ring.parse(t) for t in row) for row in self.images)

    @cached_property
    def _is_identity(self) -> Tuple[bool, ...]:
        gens = self.ring.gens
        return tuple(self.image_polys[g] == gens for g in range(self.group.order))

    @property
    def is_trivial(self) -> bool:
        return self.group.is_trivial

    def apply(self, g: int, p: PolyElement) -> PolyElement:
        """sigma_g(p)."""
        if self._is_identity[g] or not p:
            return p
        return substitute(p, self.image_polys[g], self.ring.poly_ring)

    def apply_matrix(self, g: int, matrix: GradedMatrix) -> GradedMatrix:
        if self._is_identity[g]:
            return matrix
        return matrix.map_entries(lambda e: self.apply(g, e))

    def to_mapping(self) -> Dict[str, Dict[str, str]]:
        out = {}
        for g, label in enumerate(self.group.elements):
            if g == self.group.identity:
                continue
            out[label] = {v: self.images[g][i] for i, v in enumerate(self.ring.variables)}
        return out


def is_invariant(a: PolyElement, action: RingAction) -> bool:
    return all(action.apply(g, a) == a for g in range(action.group.order))


# ---------------------------------------------------------------------------
# Twisted group algebra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwistedElement:
    """sum_g a_g * g in Q#G, stored as one coefficient per group element."""
    action: RingAction
    coefficients: Tuple[PolyElement, ...]

    @classmethod
    def basis(cls, action: RingAction, g: int, a: Optional[PolyElement] = None) -> 'TwistedElement':
        ring = action.ring
        coeffs = [ring.zero] * action.group.order
        coeffs[g] = ring.one if a is None else a
        return cls(action, tuple(coeffs))

    def __add__(self, other: 'TwistedElement') -> 'TwistedElement':
        if self.action != other.action:
            raise MixedRingError("Twisted elements over different actions")
        return TwistedElement(self.action, tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def __mul__(self, other: 'TwistedElement') -> 'TwistedElement':
        return twisted_multiply(self, other)

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def describe(self) -> str:
        ring = self.action.ring
        parts = [f'({format_polynomial(a, ring)})*{self.action.group.elements[g]}'
                 for g, a in enumerate(self.coefficients) if a]
        return ' + '.join(parts) if parts else '0'


def twisted_multiply(u: TwistedElement, v: TwistedElement) -> TwistedElement:
    """(a*g)(b*h) = a*sigma_g(b)*gh."""
    if u.action != v.action:
        raise MixedRingError("Twisted elements over different actions")
    action = u.action
    group = action.group
    out = [action.ring.zero] * group.order
    for g, a in enumerate(u.coefficients):
        if not a:
            continue
        for h, b in enumerate(v.coefficients):
            if b:
                out[group.mul(g, h)] += a * action.apply(g, b)
    return TwistedElement(action, tuple(out))


# ---------------------------------------------------------------------------
# Semilinear module structures
# ---------------------------------------------------------------------------

@dataclass
class SemilinearReport:
    ok: bool
    violation: Optional[str] = None
    witness: Dict[str, Any] = None

    def to_dict(self) -> Dict[str, Any]:
        return {'ok': self.ok, 'violation': self.violation, 'witness': self.witness or {}}


def check_cocycle(action: RingAction, module: GradedFreeModule, matrices: Sequence[GradedMatrix],
                  name: str = 'M') -> SemilinearReport:
    """Check M_e = I, degree-0 entries, and M_g sigma_g(M_h) = M_{gh}."""
    group, ring = action.group, action.ring
    if len(matrices) != group.order:
        return SemilinearReport(False, f"{name}: expected {group.order} matrices", {})
    for g, m in enumerate(matrices):
        if m.source != module or m.target != module or m.shift != 0:
            return SemilinearReport(False, f"{name}_{group.elements[g]} is not a degree-0 endomorphism of the module",
                                    {'element': group.elements[g]})
        bad = m.degree_violations()
        if bad:
            i, j = bad[0]
            return SemilinearReport(False, f"{name}_{group.elements[g]} has an entry of the wrong degree at ({i}, {j})",
                                    {'element': group.elements[g], 'entry': format_polynomial(m.entries[i][j], ring)})
    if matrices[group.identity] != GradedMatrix.identity(ring, module):
        return SemilinearReport(False, f"{name}_e is not the identity", {})
    for g in range(group.order):
        for h in range(group.order):
            lhs = matrices[g] @ action.apply_matrix(g, matrices[h])
            rhs = matrices[group.mul(g, h)]
            if lhs != rhs:
                return SemilinearReport(
                    False,
                    f"cocycle condition fails: {name}_g sigma_g({name}_h) != {name}_gh",
                    {'g': group.elements[g], 'h': group.elements[h], 'lhs': lhs.to_text(), 'rhs': rhs.to_text()}
                )
    return SemilinearReport(True)


def check_intertwines(action: RingAction, d: GradedMatrix, m_source: Sequence[GradedMatrix],
                      m_target: Sequence[GradedMatrix], name: str = 'd') -> SemilinearReport:
    """Check M^target_g sigma_g(d) = d M^source_g for every g."""
    group = action.group
    for g in group.non_identity():
        lhs = m_target[g] @ action.apply_matrix(g, d)
        rhs = d @ m_source[g]
        if lhs != rhs:
            return SemilinearReport(
                False, f"{name} is not equivariant under '{group.elements[g]}'",
                {'g': group.elements[g], 'lhs': lhs.to_text(), 'rhs': rhs.to_text()}
            )
    return SemilinearReport(True)


def check_semilinear_module(M: Union['EquivariantMF', RingAction], module: Optional[GradedFreeModule] = None,
                            matrices: Optional[Sequence[GradedMatrix]] = None) -> SemilinearReport:
    """
    Confirm a graded Q#G-module structure.

    ``M`` is either an equivariant factorization, whose two modules must
    satisfy the cocycle condition and whose differentials must commute with
    the action, or a RingAction together with raw ``module`` and
    ``matrices``. Problems are reported, never raised.
    """
    if isinstance(M, RingAction):
        if module is None or matrices is None:
            return SemilinearReport(False, "raw action data needs a module and its matrices", {})
        foreign = _foreign_matrix(M, [('M', m) for m in matrices])
        if foreign:
            return foreign
        return check_cocycle(M, module, matrices)

    action = M.action
    named = [('A', M.A), ('B', M.B)] + [('M0', m) for m in M.M0] + [('M1', m) for m in M.M1]
    foreign = _foreign_matrix(action, named)
    if foreign:
        return foreign
    checks = (
        lambda: check_cocycle(action, M.p0, M.M0, 'M0'),
        lambda: check_cocycle(action, M.p1, M.M1, 'M1'),
        lambda: check_intertwines(action, M.A, M.M1, M.M0, 'A'),
        lambda: check_intertwines(action, M.B, M.M0, M.M1, 'B'),
    )
    for check in checks:
        report = check()
        if not report.ok:
            return report
    return SemilinearReport(True)


def _foreign_matrix(action: RingAction, named: Sequence[Tuple[str, GradedMatrix]]) -> Optional[SemilinearReport]:
    for name, m in named:
        if m.ring != action.ring:
            return SemilinearReport(False, f"{name} lives over another ring", {'matrix': name})
    return None


def act_on_vector(u: TwistedElement, matrices: Sequence[GradedMatrix], vector: Sequence[PolyElement]) -> Tuple[PolyElement, ...]:
    """(sum_g a_g g) . v = sum_g a_g M_g sigma_g(v)."""
    action = u.action
    ring = action.ring
    rank = len(vector)
    if matrices and matrices[0].shape != (rank, rank):
        raise DimensionMismatchError("Vector length does not match the module rank")
    out = [ring.zero] * rank
    for g, a in enumerate(u.coefficients):
        if not a:
            continue
        moved = [action.apply(g, c) for c in vector]
        m = matrices[g]
        for i in range(rank):
            acc = ring.zero
            for j in range(rank):
                if m.entries[i][j] and moved[j]:
                    acc += m.entries[i][j] * moved[j]
            out[i] += a * acc
    return tuple(out)
