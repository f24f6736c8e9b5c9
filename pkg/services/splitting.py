"""
Splitting idempotents of equivariant matrix factorizations.

Strict idempotents are split on the nose. Idempotents up to homotopy are
split through a Krull-Schmidt decomposition of the source, and the formal
idempotent completion is available for comparison.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from services.debug import DebugTimer, debug_log
from services.errors import InternalError, PreconditionError, ValidationError
from services.exact_algebra import Subspace, rref_sparse
from services.findim_algebra import corner_algebra, is_nc_local, primitive_decomposition
from services.graded_maps import MapSpace, solve_for_maps
from services.mf_core import (
    EquivariantMF, Homotopy, IsomorphismCertificate, MFMorphism, check_morphism,
    direct_sum_maps, endomorphism_algebra, find_isomorphism, homotopy_witness,
    identity, is_contractible, stable_hom, validate_mf, zero_morphism
)

logger = logging.getLogger(__name__)


@dataclass
class SplitResult:
    """Y with pi: X -> Y and iota: Y -> X, pi iota = id_Y and iota pi = e (exactly or up to homotopy)."""
    source: EquivariantMF
    idempotent: MFMorphism
    obj: EquivariantMF
    pi: MFMorphism
    iota: MFMorphism
    mode: str
    homotopies: Dict[str, Homotopy] = field(default_factory=dict)


def _sum_morphisms(maps: List[MFMorphism], source: EquivariantMF, target: EquivariantMF) -> MFMorphism:
    total = zero_morphism(source, target)
    for u in maps:
        total = total + u
    return total


# ---------------------------------------------------------------------------
# Strict idempotents
# ---------------------------------------------------------------------------

def split_strict_idempotent(X: EquivariantMF, e: MFMorphism) -> SplitResult:
    """
    Split e with e o e = e exactly.

    The image of e on each side is a graded free summand; a basis is given by
    the columns of E whose constant parts are pivot columns of E mod the
    irrelevant ideal.
    """
    if e.source != X or e.target != X:
        raise PreconditionError("Idempotent is not an endomorphism of the object")
    if e @ e != e:
        raise PreconditionError("Map is not a strict idempotent", {'difference': (e @ e - e).U0.to_text()})
    ring = X.ring
    domain = ring.field.domain

    iotas, pis = [], []
    for parity in (0, 1):
        E = e.component(parity)
        constant = E.constant_part()
        rows = {i: {j: v for j, v in enumerate(row) if v} for i, row in enumerate(constant)}
        _, pivots = rref_sparse(rows, (E.target.rank, E.source.rank), domain)
        iota = E.submatrix(range(E.target.rank), pivots)
        space = MapSpace(ring, [(X.module(parity), iota.source, 0)])
        solution = solve_for_maps(space, lambda maps: [iota @ maps[0]], [E])
        if solution is None:
            raise InternalError("Could not factor the idempotent through its image")
        iotas.append(iota)
        pis.append(solution[0])

    action = X.action
    A = pis[0] @ X.A @ iotas[1]
    B = pis[1] @ X.B @ iotas[0]
    M0 = tuple(pis[0] @ X.M0[g] @ action.apply_matrix(g, iotas[0]) for g in range(X.group.order))
    M1 = tuple(pis[1] @ X.M1[g] @ action.apply_matrix(g, iotas[1]) for g in range(X.group.order))
    Y = EquivariantMF(action, A, B, M0, M1)

    pi = MFMorphism(X, Y, pis[0], pis[1])
    iota = MFMorphism(Y, X, iotas[0], iotas[1])
    for name, check in (('image', validate_mf(Y)), ('pi', check_morphism(pi)), ('iota', check_morphism(iota))):
        if not check.ok:
            raise InternalError(f"Strict splitting produced an invalid {name}: {check.violation}")
    if pi @ iota != identity(Y) or iota @ pi != e:
        raise InternalError("Strict splitting certificates do not hold")
    debug_log("Split strict idempotent", rank=Y.rank)
    return SplitResult(X, e, Y, pi, iota, 'strict')


# ---------------------------------------------------------------------------
# Krull-Schmidt
# ---------------------------------------------------------------------------

@dataclass
class Summand:
    obj: EquivariantMF
    pi: MFMorphism
    iota: MFMorphism
    contractible: bool
    local: bool
    iso_class: Optional[int] = None


@dataclass
class IsoClass:
    representative: int
    members: List[int]
    isomorphisms: Dict[int, IsomorphismCertificate] = field(default_factory=dict)


@dataclass
class Decomposition:
    source: EquivariantMF
    summands: List[Summand]
    classes: List[IsoClass]
    total: Optional[EquivariantMF]
    pi_total: Optional[MFMorphism]
    iota_total: Optional[MFMorphism]

    @property
    def noncontractible(self) -> List[Summand]:
        return [s for s in self.summands if not s.contractible]

    def multiset(self) -> List[Tuple[EquivariantMF, int]]:
        return [(self.summands[c.representative].obj, len(c.members)) for c in self.classes]

    def summary(self) -> Dict[str, Any]:
        return {
            'summands': len(self.summands),
            'contractible': sum(1 for s in self.summands if s.contractible),
            'classes': [{'rank': self.summands[c.representative].obj.rank, 'multiplicity': len(c.members)}
                        for c in self.classes]
        }


def ks_decompose(X: EquivariantMF, seed: int = 0) -> Decomposition:
    """
    Split X into indecomposables using primitive idempotents of the strict
    endomorphism algebra, then group the non-contractible summands into
    stable isomorphism classes.
    """
    if X.rank == 0:
        return Decomposition(X, [], [], None, None, None)
    with DebugTimer(f"Krull-Schmidt decomposition (rank {X.rank})"):
        end = endomorphism_algebra(X, stable=False)
        idempotents = primitive_decomposition(end.algebra, seed)
        summands: List[Summand] = []
        for vec in idempotents:
            e = end.morphism(vec)
            split = split_strict_idempotent(X, e)
            local = is_nc_local(corner_algebra(end.algebra, vec).corner, seed)
            if not local:
                raise InternalError("Summand cut out by a primitive idempotent is not local")
            summands.append(Summand(split.obj, split.pi, split.iota, is_contractible(split.obj), local))

        classes: List[IsoClass] = []
        for k, s in enumerate(summands):
            if s.contractible:
                continue
            for c_index, c in enumerate(classes):
                certificate = find_isomorphism(s.obj, summands[c.representative].obj)
                if certificate is not None:
                    c.members.append(k)
                    c.isomorphisms[k] = certificate
                    s.iso_class = c_index
                    break
            else:
                s.iso_class = len(classes)
                classes.append(IsoClass(k, [k]))

        total, inclusions, projections = direct_sum_maps([s.obj for s in summands])
        pi_total = _sum_morphisms([inc @ s.pi for inc, s in zip(inclusions, summands)], X, total)
        iota_total = _sum_morphisms([s.iota @ proj for proj, s in zip(projections, summands)], total, X)
        if iota_total @ pi_total != identity(X) or pi_total @ iota_total != identity(total):
            raise InternalError("Krull-Schmidt certificates do not hold")

    logger.info(f"Decomposed rank-{X.rank} object into {len(summands)} summands "
                f"({len(classes)} non-contractible classes)")
    return Decomposition(X, summands, classes, total, pi_total, iota_total)


def same_decomposition(X: EquivariantMF, Y: EquivariantMF, seed: int = 0) -> bool:
    """Compare the multisets of non-contractible indecomposable summands."""
    left = ks_decompose(X, seed).multiset()
    right = ks_decompose(Y, seed).multiset()
    if sorted(m for _, m in left) != sorted(m for _, m in right):
        return False
    unmatched = list(right)
    for obj, mult in left:
        for index, (other, other_mult) in enumerate(unmatched):
            if mult == other_mult and find_isomorphism(obj, other) is not None:
                unmatched.pop(index)
                break
        else:
            return False
    return not unmatched


# ---------------------------------------------------------------------------
# Idempotents up to homotopy
# ---------------------------------------------------------------------------

def split_homotopy_idempotent(X: EquivariantMF, e: MFMorphism, seed: int = 0) -> SplitResult:
    """
    Split e with e o e homotopic to e.

    X is reduced to its non-contractible part Z. The corner of the stable
    End(Z) cut out by e is decomposed into primitive idempotents, each of
    which is matched to a summand Y_k of Z through a pair a, b with
    ab = 1 on Y_k and ba equal to the corner idempotent.
    """
    if e.source != X or e.target != X:
        raise PreconditionError("Idempotent is not an endomorphism of the object")
    report = check_morphism(e)
    if not report.ok:
        raise PreconditionError(f"Idempotent is not a morphism: {report.violation}")
    squared = homotopy_witness(e @ e, e)
    if squared is None:
        raise PreconditionError("e o e is not homotopic to e")

    D = ks_decompose(X, seed)
    reduced = D.noncontractible
    if not reduced:
        return _split_to_zero(X, e, squared)

    Z, z_inc, z_proj = direct_sum_maps([s.obj for s in reduced])
    p = _sum_morphisms([inc @ s.pi for inc, s in zip(z_inc, reduced)], X, Z)
    i = _sum_morphisms([s.iota @ proj for proj, s in zip(z_proj, reduced)], Z, X)

    end = endomorphism_algebra(Z, stable=True)
    E = end.algebra
    x = end.element(p @ e @ i)
    if not E.is_idempotent(x):
        raise InternalError("Transported idempotent is not idempotent in the stable endomorphism algebra")
    if E.is_zero(x):
        return _split_to_zero(X, e, squared)

    corner = corner_algebra(E, x)
    phis = [corner.embed(v) for v in primitive_decomposition(corner.corner, seed)]
    summand_idempotents = [end.element(inc @ proj) for inc, proj in zip(z_inc, z_proj)]

    pieces = []
    for phi in phis:
        match = _match_summand(E, phi, summand_idempotents)
        if match is None:
            raise InternalError("Primitive corner idempotent matches no summand")
        pieces.append(match)

    Y, y_inc, y_proj = direct_sum_maps([reduced[k].obj for k, _, _ in pieces])
    pi_parts, iota_parts = [], []
    for m, (k, a, b) in enumerate(pieces):
        a_map = z_proj[k] @ end.morphism(a)
        b_map = end.morphism(b) @ z_inc[k]
        pi_parts.append(y_inc[m] @ a_map @ p)
        iota_parts.append(i @ b_map @ y_proj[m])
    pi = _sum_morphisms(pi_parts, X, Y)
    iota = _sum_morphisms(iota_parts, Y, X)

    h_pi_iota = homotopy_witness(pi @ iota, identity(Y))
    h_iota_pi = homotopy_witness(iota @ pi, e)
    if h_pi_iota is None or h_iota_pi is None:
        raise InternalError("Homotopy splitting certificates could not be produced")
    logger.info(f"Split homotopy idempotent on rank-{X.rank} object: image rank {Y.rank}")
    return SplitResult(X, e, Y, pi, iota, 'homotopy',
                       {'idempotent': squared, 'pi_iota': h_pi_iota, 'iota_pi': h_iota_pi})


def _split_to_zero(X: EquivariantMF, e: MFMorphism, squared: Homotopy) -> SplitResult:
    Y = EquivariantMF.zero_object(X.action)
    pi, iota = zero_morphism(X, Y), zero_morphism(Y, X)
    h = homotopy_witness(iota @ pi, e)
    if h is None:
        raise InternalError("Idempotent vanishes stably but is not null-homotopic")
    return SplitResult(X, e, Y, pi, iota, 'homotopy',
                       {'idempotent': squared, 'pi_iota': homotopy_witness(pi @ iota, identity(Y)), 'iota_pi': h})


def _match_summand(E, phi, summand_idempotents):
    """Find (k, a, b) with a in eps_k E phi, b in phi E eps_k, ab = eps_k and ba = phi."""
    basis = [E.basis_vector(t) for t in range(E.dimension)]
    for k, eps in enumerate(summand_idempotents):
        corner = corner_algebra(E, eps)
        lefts = [E.mul(E.mul(eps, beta), phi) for beta in basis]
        rights = [E.mul(E.mul(phi, gamma), eps) for gamma in basis]
        for a in lefts:
            if E.is_zero(a):
                continue
            for b in rights:
                if E.is_zero(b):
                    continue
                local = corner.restrict(E.mul(a, b))
                if local is None:
                    continue
                w = corner.corner.inverse(local)
                if w is None:
                    continue
                a_adjusted = E.mul(corner.embed(w), a)
                if E.mul(b, a_adjusted) == tuple(phi) and E.mul(a_adjusted, b) == tuple(eps):
                    return k, a_adjusted, b
    return None


# ---------------------------------------------------------------------------
# Formal idempotent completion
# ---------------------------------------------------------------------------

@dataclass
class FormalIdempotentObject:
    """A pair (X, e) with e o e homotopic to e."""
    obj: EquivariantMF
    idempotent: MFMorphism
    witness: Homotopy

    @classmethod
    def create(cls, X: EquivariantMF, e: MFMorphism) -> 'FormalIdempotentObject':
        if e.source != X or e.target != X:
            raise PreconditionError("Idempotent is not an endomorphism of the object")
        h = homotopy_witness(e @ e, e)
        if h is None:
            raise PreconditionError("e o e is not homotopic to e")
        return cls(X, e, h)

    @classmethod
    def of(cls, X: EquivariantMF) -> 'FormalIdempotentObject':
        return cls.create(X, identity(X))


@dataclass
class FormalMorphism:
    source: FormalIdempotentObject
    target: FormalIdempotentObject
    map: MFMorphism


def _absorption_failure(composite: MFMorphism, u: MFMorphism, identity_text: str) -> Optional[Dict[str, Any]]:
    if homotopy_witness(composite, u) is not None:
        return None
    difference = composite - u
    return {'identity': identity_text, 'U0': difference.U0.to_text(), 'U1': difference.U1.to_text()}


def formal_morphism(P: FormalIdempotentObject, Q: FormalIdempotentObject, u: MFMorphism) -> FormalMorphism:
    """Accept u: P.obj -> Q.obj when u e_P and e_Q u are both homotopic to u."""
    if u.source != P.obj or u.target != Q.obj:
        raise ValidationError("Map does not go between the underlying objects")
    for composite, identity_text in ((u @ P.idempotent, 'u e_P = u'), (Q.idempotent @ u, 'e_Q u = u')):
        failure = _absorption_failure(composite, u, identity_text)
        if failure is not None:
            raise PreconditionError(f"Map is not compatible with the idempotents: {identity_text} fails", failure)
    return FormalMorphism(P, Q, u)


def formal_identity(P: FormalIdempotentObject) -> FormalMorphism:
    return FormalMorphism(P, P, P.idempotent)


def formal_compose(v: FormalMorphism, u: FormalMorphism) -> FormalMorphism:
    middle, start = u.target, v.source
    if middle is not start and (middle.obj != start.obj or middle.idempotent != start.idempotent):
        raise ValidationError("Formal morphisms are not composable",
                              {'same_object': middle.obj == start.obj,
                               'same_idempotent': middle.idempotent == start.idempotent})
    return FormalMorphism(u.source, v.target, v.map @ u.map)


def formal_equal(u: FormalMorphism, v: FormalMorphism) -> bool:
    return homotopy_witness(u.map, v.map) is not None


def formal_hom_dimension(P: FormalIdempotentObject, Q: FormalIdempotentObject) -> int:
    """dim e_Q Hom(X, Y) e_P in the stable category."""
    hom = stable_hom(P.obj, Q.obj)
    images = []
    for r in hom.representatives:
        coords = hom.coordinates(Q.idempotent @ r @ P.idempotent)
        images.append({k: c for k, c in enumerate(coords) if c})
    return Subspace(hom.dimension, P.obj.ring.field.domain, [v for v in images if v]).dimension


@dataclass
class FormalComparison:
    """(X, e) isomorphic to (Y, id) in the idempotent completion."""
    forward: FormalMorphism
    backward: FormalMorphism
    homotopies: Dict[str, Homotopy]


def compare_with_split(P: FormalIdempotentObject, split: SplitResult) -> FormalComparison:
    target = FormalIdempotentObject.of(split.obj)
    forward = formal_morphism(P, target, split.pi)
    backward = formal_morphism(target, P, split.iota)
    h_target = homotopy_witness(split.pi @ split.iota, identity(split.obj))
    h_source = homotopy_witness(split.iota @ split.pi, P.idempotent)
    if h_target is None or h_source is None:
        raise InternalError("Split object is not isomorphic to the formal summand")
    return FormalComparison(forward, backward, {'pi_iota': h_target, 'iota_pi': h_source})
