"""
Functors between categories of equivariant matrix factorizations:
base change along graded ring maps, forgetting and inducing the group
action, and strictification of homotopy-equivariant objects.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Sequence, Tuple

from sympy.polys.rings import PolyElement

from services.debug import DebugTimer
from services.errors import (
    InternalError, MixedRingError, PreconditionError, UnsupportedCharacteristicError, ValidationError
)
from services.exact_algebra import Subspace, format_polynomial, is_homogeneous, substitute
from services.graded_maps import GradedFreeModule, GradedMatrix, block_diagonal, block_matrix
from services.group_twist import RingAction
from services.mf_core import (
    EquivariantMF, Homotopy, MFMorphism, check_morphism, homotopy_witness, identity,
    stable_hom, twist, shift, validate_mf
)
from services.splitting import SplitResult, split_homotopy_idempotent

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Base change
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RingHom:
    """
    Graded map Q -> Q' sending f to f', given by the images of the variables.

    When the fields differ the map is a field extension QQ -> QQ(a) and the
    images are read in the target ring.
    """
    source: RingAction
    target: RingAction
    images: Tuple[str, ...]

    def __post_init__(self):
        src, tgt = self.source.ring, self.target.ring
        if len(self.images) != src.ngens:
            raise ValidationError("Ring map needs one image per source variable")
        if src.field != tgt.field and not (src.field.kind == 'rationals' and tgt.field.kind == 'extension'):
            raise ValidationError(
                f"Unsupported field change {src.field.describe()} -> {tgt.field.describe()}"
            )
        if self.source.group != self.target.group:
            raise ValidationError("Ring map must connect actions of the same group")
        for i, p in enumerate(self.image_polys):
            if p and not is_homogeneous(p, tgt, src.weights[i]):
                raise ValidationError(
                    f"Image of {src.variables[i]} must be homogeneous of degree {src.weights[i]}",
                    {'image': self.images[i]}
                )
        if self.apply(src.f) != tgt.f:
            raise ValidationError("Ring map does not send f to f'",
                                  {'image': format_polynomial(self.apply(src.f), tgt), 'expected': tgt.potential})
        for g in range(self.source.group.order):
            for i, x in enumerate(src.gens):
                if self.apply(self.source.apply(g, x)) != self.target.apply(g, self.image_polys[i]):
                    raise ValidationError(
                        f"Ring map is not equivariant for '{self.source.group.elements[g]}'",
                        {'variable': src.variables[i]}
                    )

    @classmethod
    def from_mapping(cls, source: RingAction, target: RingAction, mapping: Dict[str, str]) -> 'RingHom':
        src = source.ring
        unknown = set(mapping) - set(src.variables)
        if unknown:
            raise ValidationError(f"Ring map refers to unknown variables {sorted(unknown)}")
        images = tuple(str(mapping.get(v, v)) for v in src.variables)
        return cls(source, target, images)

    @cached_property
    def image_polys(self) -> Tuple[PolyElement, ...]:
        return tuple(self.target.ring.parse(t) for t in self.images)

    def apply(self, p: PolyElement) -> PolyElement:
        src, tgt = self.source.ring, self.target.ring
        return substitute(p, self.image_polys, tgt.poly_ring, src.field, tgt.field)

    def apply_matrix(self, matrix: GradedMatrix) -> GradedMatrix:
        rows = tuple(tuple(self.apply(e) for e in row) for row in matrix.entries)
        return GradedMatrix(self.target.ring, matrix.source, matrix.target, matrix.shift, rows)

    def to_dict(self) -> Dict[str, Any]:
        return {v: t for v, t in zip(self.source.ring.variables, self.images)}


def base_change(phi: RingHom, X: EquivariantMF) -> EquivariantMF:
    if X.action != phi.source:
        raise MixedRingError("Object does not live over the source of the ring map")
    Y = EquivariantMF(
        phi.target,
        phi.apply_matrix(X.A),
        phi.apply_matrix(X.B),
        tuple(phi.apply_matrix(m) for m in X.M0),
        tuple(phi.apply_matrix(m) for m in X.M1),
    )
    report = validate_mf(Y)
    if not report.ok:
        raise InternalError(f"Base change produced an invalid object: {report.violation}")
    return Y


def base_change_morphism(phi: RingHom, u: MFMorphism) -> MFMorphism:
    return MFMorphism(base_change(phi, u.source), base_change(phi, u.target),
                      phi.apply_matrix(u.U0), phi.apply_matrix(u.U1))


def base_change_homotopy(phi: RingHom, H: Homotopy) -> Homotopy:
    return Homotopy(base_change(phi, H.source), base_change(phi, H.target),
                    phi.apply_matrix(H.H0), phi.apply_matrix(H.H1))


@dataclass
class EndComparison:
    parity: int
    twist: int
    source_dimension: int
    target_dimension: int
    rank: int

    @property
    def isomorphism(self) -> bool:
        return self.source_dimension == self.target_dimension == self.rank

    def to_dict(self) -> Dict[str, Any]:
        return {
            'parity': self.parity, 'twist': self.twist,
            'source_dimension': self.source_dimension, 'target_dimension': self.target_dimension,
            'rank': self.rank, 'isomorphism': self.isomorphism
        }


def compare_end_homology(phi: RingHom, X: EquivariantMF, twists: Sequence[int] = (0,)) -> List[EndComparison]:
    """
    Rank of the induced map on stable Hom(X, twist(shift^p X, t)) for each
    parity p and twist t.
    """
    Y = base_change(phi, X)
    out = []
    for parity in (0, 1):
        for t in twists:
            source_space = stable_hom(X, twist(X, t), parity)
            target_space = stable_hom(Y, twist(Y, t), parity)
            images = []
            for r in source_space.representatives:
                image = MFMorphism(target_space.source, target_space.target,
                                   phi.apply_matrix(r.U0), phi.apply_matrix(r.U1))
                coords = target_space.coordinates(image)
                images.append({k: c for k, c in enumerate(coords) if c})
            rank = Subspace(target_space.dimension, Y.ring.field.domain, [v for v in images if v]).dimension
            out.append(EndComparison(parity, t, source_space.dimension, target_space.dimension, rank))
    return out


# ---------------------------------------------------------------------------
# Forget and induce
# ---------------------------------------------------------------------------

def forget(X: EquivariantMF) -> EquivariantMF:
    """Drop the group action."""
    trivial = RingAction.trivial(X.ring)
    return EquivariantMF(trivial, X.A, X.B, (GradedMatrix.identity(X.ring, X.p0),),
                         (GradedMatrix.identity(X.ring, X.p1),))


def twisted_object(P: EquivariantMF, action: RingAction, g: int) -> EquivariantMF:
    """sigma_g(P) for a non-equivariant P."""
    if not P.group.is_trivial:
        raise PreconditionError("twisted_object expects an object without group action")
    return EquivariantMF(P.action, action.apply_matrix(g, P.A), action.apply_matrix(g, P.B), P.M0, P.M1)


def twisted_morphism(u: MFMorphism, action: RingAction, g: int) -> MFMorphism:
    return MFMorphism(twisted_object(u.source, action, g), twisted_object(u.target, action, g),
                      action.apply_matrix(g, u.U0), action.apply_matrix(g, u.U1))


def induce(P: EquivariantMF, action: RingAction) -> EquivariantMF:
    """
    E(P) = sum over g of sigma_g(P), with h permuting the summands g -> hg.

    The summands are ordered like the group elements.
    """
    if not P.group.is_trivial:
        raise PreconditionError("induce expects an object without group action")
    if action.ring != P.ring:
        raise MixedRingError("Action is defined over another ring")
    ring, group = P.ring, action.group
    n = group.order
    A = block_diagonal(ring, [action.apply_matrix(g, P.A) for g in range(n)], 0)
    B = block_diagonal(ring, [action.apply_matrix(g, P.B) for g in range(n)], ring.df)

    def permutation(module: GradedFreeModule, h: int) -> GradedMatrix:
        blocks = [[None] * n for _ in range(n)]
        for g in range(n):
            blocks[group.mul(h, g)][g] = GradedMatrix.identity(ring, module)
        return block_matrix(ring, blocks, [module] * n, [module] * n, 0)

    M0 = tuple(permutation(P.p0, h) for h in range(n))
    M1 = tuple(permutation(P.p1, h) for h in range(n))
    return EquivariantMF(action, A, B, M0, M1)


def _require_invertible_order(action: RingAction):
    p = action.ring.field.characteristic
    if p and action.group.order % p == 0:
        raise UnsupportedCharacteristicError(
            f"|G| = {action.group.order} is not invertible in characteristic {p}"
        )


@dataclass
class AveragingSplitting:
    """p: E(F(Y)) -> Y and j: Y -> E(F(Y)) with p o j = id_Y exactly."""
    obj: EquivariantMF
    induced: EquivariantMF
    p: MFMorphism
    j: MFMorphism
    checks: Dict[str, bool]


def averaging_splitting(Y: EquivariantMF) -> AveragingSplitting:
    """p = [M_g]_g and j = (1/|G|) [sigma_h(M_{h^-1})]_h."""
    action = Y.action
    _require_invertible_order(action)
    ring, group = Y.ring, action.group
    n = group.order
    E = induce(forget(Y), action)
    inv = ring.field.one / ring.field.scalar(n)

    p_parts, j_parts = [], []
    for parity in (0, 1):
        module, mats = Y.module(parity), Y.actions(parity)
        p_blocks = [[mats[g].retyped(module, module) for g in range(n)]]
        p_parts.append(block_matrix(ring, p_blocks, [module] * n, [module], 0))
        j_blocks = [[action.apply_matrix(h, mats[group.inverse(h)]).scale(inv)] for h in range(n)]
        j_parts.append(block_matrix(ring, j_blocks, [module], [module] * n, 0))
    p = MFMorphism(E, Y, p_parts[0], p_parts[1])
    j = MFMorphism(Y, E, j_parts[0], j_parts[1])
    checks = {
        'p_morphism': check_morphism(p).ok,
        'j_morphism': check_morphism(j).ok,
        'p_j_identity': p @ j == identity(Y),
    }
    if not all(checks.values()):
        failed = [k for k, v in checks.items() if not v]
        raise InternalError(f"Averaging splitting failed its checks: {failed}")
    return AveragingSplitting(Y, E, p, j, checks)


# ---------------------------------------------------------------------------
# Homotopy-equivariant objects
# ---------------------------------------------------------------------------

@dataclass
class HomotopyEquivariantObject:
    """
    P without group action plus theta_g: sigma_g(P) -> P such that theta_e is
    homotopic to id and theta_g o sigma_g(theta_h) is homotopic to theta_{gh}.
    """
    obj: EquivariantMF
    action: RingAction
    theta: Tuple[MFMorphism, ...]
    witnesses: Dict[str, Homotopy] = field(default_factory=dict)

    def __post_init__(self):
        if not self.obj.group.is_trivial:
            raise ValidationError("The underlying object of a homotopy-equivariant object has no group action")
        if len(self.theta) != self.action.group.order:
            raise ValidationError("Need one theta per group element")
        for g, t in enumerate(self.theta):
            if t.source != twisted_object(self.obj, self.action, g) or t.target != self.obj:
                raise ValidationError(f"theta_{self.action.group.elements[g]} must map sigma_g(P) to P")

    @classmethod
    def build(cls, P: EquivariantMF, action: RingAction,
              theta: Dict[str, Tuple[Sequence[Sequence[Any]], Sequence[Sequence[Any]]]]) -> 'HomotopyEquivariantObject':
        """theta maps element labels to (U0 rows, U1 rows); missing labels use the identity matrix."""
        ring = P.ring
        maps = []
        for g, label in enumerate(action.group.elements):
            source = twisted_object(P, action, g)
            if label in theta:
                U0_rows, U1_rows = theta[label]
                U0 = GradedMatrix.build(ring, P.p0, P.p0, 0, U0_rows)
                U1 = GradedMatrix.build(ring, P.p1, P.p1, 0, U1_rows)
            else:
                U0, U1 = GradedMatrix.identity(ring, P.p0), GradedMatrix.identity(ring, P.p1)
            maps.append(MFMorphism(source, P, U0, U1))
        return cls(P, action, tuple(maps))

    @classmethod
    def from_equivariant(cls, X: EquivariantMF) -> 'HomotopyEquivariantObject':
        """A genuine object viewed as a homotopy-equivariant one (theta_g = M_g)."""
        P = forget(X)
        maps = tuple(MFMorphism(twisted_object(P, X.action, g), P, X.M0[g], X.M1[g])
                     for g in range(X.group.order))
        return cls(P, X.action, maps)


def certify_homotopy_equivariant_object(H: HomotopyEquivariantObject) -> HomotopyEquivariantObject:
    """Check every theta is a morphism and produce the unit and cocycle homotopies."""
    group, action = H.action.group, H.action
    for g, t in enumerate(H.theta):
        report = check_morphism(t)
        if not report.ok:
            raise ValidationError(f"theta_{group.elements[g]} is not a morphism: {report.violation}")
    witnesses: Dict[str, Homotopy] = {}
    unit = homotopy_witness(H.theta[group.identity], identity(H.obj))
    if unit is None:
        raise ValidationError("theta_e is not homotopic to the identity")
    witnesses['unit'] = unit
    for g in range(group.order):
        for h in range(group.order):
            lhs = H.theta[g] @ twisted_morphism(H.theta[h], action, g)
            w = homotopy_witness(lhs, H.theta[group.mul(g, h)])
            if w is None:
                raise ValidationError(
                    "Homotopy cocycle condition fails",
                    {'g': group.elements[g], 'h': group.elements[h]}
                )
            witnesses[f'{group.elements[g]},{group.elements[h]}'] = w
    H.witnesses = witnesses
    return H


@dataclass
class StrictificationResult:
    """
    A genuine object Z with phi: F(Z) -> P and psi: P -> F(Z) inverse up to
    homotopy, compatible with theta up to homotopy.
    """
    source: HomotopyEquivariantObject
    obj: EquivariantMF
    split: SplitResult
    phi: MFMorphism
    psi: MFMorphism
    homotopies: Dict[str, Homotopy]


def strictify(H: HomotopyEquivariantObject, seed: int = 0) -> StrictificationResult:
    """
    Split the homotopy idempotent e_theta on E(P), whose block (h, g) is
    (1/|G|) sigma_h(theta_{h^-1 g}), and compare the image with P.
    """
    action = H.action
    _require_invertible_order(action)
    if not H.witnesses:
        certify_homotopy_equivariant_object(H)
    P, ring, group = H.obj, H.obj.ring, action.group
    n = group.order
    inv = ring.field.one / ring.field.scalar(n)
    E = induce(P, action)

    with DebugTimer(f"strictify (|G|={n}, rank {P.rank})"):
        parts = []
        for parity in (0, 1):
            module = P.module(parity)
            blocks = [[action.apply_matrix(h, H.theta[group.mul(group.inverse(h), g)].component(parity)).scale(inv)
                       for g in range(n)] for h in range(n)]
            parts.append(block_matrix(ring, blocks, [module] * n, [module] * n, 0))
        e_theta = MFMorphism(E, E, parts[0], parts[1])
        report = check_morphism(e_theta)
        if not report.ok:
            raise InternalError(f"Projector is not an equivariant morphism: {report.violation}")

        split = split_homotopy_idempotent(E, e_theta, seed)
        Z = split.obj
        FZ, FE = forget(Z), forget(E)
        iota = MFMorphism(FZ, FE, split.iota.U0, split.iota.U1)
        pi = MFMorphism(FE, FZ, split.pi.U0, split.pi.U1)

        p_theta, j_theta = [], []
        for parity in (0, 1):
            module = P.module(parity)
            p_theta.append(block_matrix(ring, [[H.theta[g].component(parity) for g in range(n)]],
                                        [module] * n, [module], 0))
            j_theta.append(block_matrix(
                ring, [[action.apply_matrix(h, H.theta[group.inverse(h)].component(parity)).scale(inv)]
                       for h in range(n)],
                [module], [module] * n, 0))
        p_map = MFMorphism(FE, P, p_theta[0], p_theta[1])
        j_map = MFMorphism(P, FE, j_theta[0], j_theta[1])
        phi = p_map @ iota
        psi = pi @ j_map

        homotopies: Dict[str, Homotopy] = {}
        for name, lhs, rhs in (('phi_psi', phi @ psi, identity(P)), ('psi_phi', psi @ phi, identity(FZ))):
            w = homotopy_witness(lhs, rhs)
            if w is None:
                raise InternalError(f"Strictification comparison {name} is not homotopic to the identity")
            homotopies[name] = w
        for g in range(n):
            z_action = MFMorphism(twisted_object(FZ, action, g), FZ, Z.M0[g], Z.M1[g])
            lhs = H.theta[g] @ twisted_morphism(phi, action, g)
            rhs = phi @ z_action
            w = homotopy_witness(lhs, rhs)
            if w is None:
                raise InternalError(f"Comparison map is not compatible with theta_{group.elements[g]}")
            homotopies[f'compatible:{group.elements[g]}'] = w

    logger.info(f"Strictified homotopy-equivariant object of rank {P.rank}: genuine rank {Z.rank}")
    return StrictificationResult(H, Z, split, phi, psi, homotopies)
