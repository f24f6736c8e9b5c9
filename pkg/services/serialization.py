"""
JSON codecs for rings, group actions, factorizations, morphisms, homotopies,
homotopy-equivariant objects and ring maps.

Polynomials are written in the canonical text of ``format_polynomial`` so the
same object always serializes to the same bytes.
"""
import logging
from typing import Any, Dict, Optional, Sequence

from services.errors import MFGError, ParseError, ValidationError
from services.exact_algebra import GradedRing
from services.functors import HomotopyEquivariantObject, RingHom
from services.graded_maps import GradedFreeModule, GradedMatrix
from services.group_twist import GroupData, RingAction
from services.mf_core import EquivariantMF, Homotopy, MFMorphism

logger = logging.getLogger(__name__)


def _rows(data: Any, what: str) -> Sequence[Sequence[str]]:
    if not isinstance(data, list) or any(not isinstance(row, list) for row in data):
        raise ParseError(f"{what} must be a list of rows")
    out = []
    for row in data:
        converted = []
        for entry in row:
            if isinstance(entry, bool) or not isinstance(entry, (str, int)):
                raise ParseError(f"{what} entries must be polynomial strings or integers", {'entry': repr(entry)})
            converted.append(str(entry))
        out.append(converted)
    return out


def _weights(data: Any, what: str) -> GradedFreeModule:
    if not isinstance(data, list) or any(isinstance(w, bool) or not isinstance(w, int) for w in data):
        raise ParseError(f"{what} must be a list of integer weights")
    return GradedFreeModule.of(data)


def matrix_from_rows(ring: GradedRing, source: GradedFreeModule, target: GradedFreeModule,
                     shift: int, rows: Any, what: str) -> GradedMatrix:
    parsed = _rows(rows, what)
    if len(parsed) != target.rank or any(len(r) != source.rank for r in parsed):
        raise ValidationError(f"{what} has shape {len(parsed)}x{len(parsed[0]) if parsed else 0}, "
                              f"expected {target.rank}x{source.rank}")
    return GradedMatrix.build(ring, source, target, shift, parsed)


# ---------------------------------------------------------------------------
# Rings and actions
# ---------------------------------------------------------------------------

def group_from_dict(data: Optional[Dict[str, Any]]) -> GroupData:
    if data is None:
        return GroupData.trivial()
    if not isinstance(data, dict):
        raise ParseError("Group must be a JSON object")
    if 'cyclic' in data:
        return GroupData.cyclic(int(data['cyclic']), str(data.get('generator', 'g')))
    try:
        return GroupData.from_labels(data['elements'], data['table'])
    except (KeyError, TypeError) as e:
        raise ParseError(f"Malformed group description: {e}")


def action_to_dict(action: RingAction) -> Dict[str, Any]:
    return {
        'ring': action.ring.to_dict(),
        'group': action.group.to_dict(),
        'action': action.to_mapping()
    }


def action_from_dict(data: Dict[str, Any]) -> RingAction:
    """Ring block plus optional group block and {element: {variable: image}} action."""
    if not isinstance(data, dict):
        raise ParseError("Context must be a JSON object")
    ring = GradedRing.from_dict(data.get('ring', data))
    group = group_from_dict(data.get('group'))
    mapping = data.get('action', {})
    if not isinstance(mapping, dict) or any(not isinstance(v, dict) for v in mapping.values()):
        raise ParseError("Action must map group elements to {variable: image} objects")
    return RingAction.from_mapping(ring, group, mapping)


# ---------------------------------------------------------------------------
# Factorizations, morphisms, homotopies
# ---------------------------------------------------------------------------

def mf_to_dict(X: EquivariantMF) -> Dict[str, Any]:
    """Action matrices are written for every non-identity element."""
    group = X.group
    data: Dict[str, Any] = {
        'p0': list(X.p0.weights),
        'p1': list(X.p1.weights),
        'A': X.A.to_text(),
        'B': X.B.to_text()
    }
    if not group.is_trivial:
        data['action'] = {
            group.elements[g]: {'p0': X.M0[g].to_text(), 'p1': X.M1[g].to_text()}
            for g in group.non_identity()
        }
    return data


def mf_from_dict(data: Dict[str, Any], action: RingAction, name: str = 'object') -> EquivariantMF:
    """Decode without validating; callers decide whether to run validate_mf."""
    if not isinstance(data, dict):
        raise ParseError(f"Object '{name}' must be a JSON object")
    missing = [k for k in ('p0', 'p1', 'A', 'B') if k not in data]
    if missing:
        raise ParseError(f"Object '{name}' is missing {missing}")
    ring = action.ring
    P0 = _weights(data['p0'], f"{name}.p0")
    P1 = _weights(data['p1'], f"{name}.p1")
    A = matrix_from_rows(ring, P1, P0, 0, data['A'], f"{name}.A")
    B = matrix_from_rows(ring, P0, P1, ring.df, data['B'], f"{name}.B")
    given = data.get('action', {})
    if not isinstance(given, dict):
        raise ParseError(f"{name}.action must map group elements to matrices")
    unknown = set(given) - set(action.group.elements)
    if unknown:
        raise ValidationError(f"Object '{name}' has action matrices for unknown elements {sorted(unknown)}")
    M0, M1 = [], []
    for label in action.group.elements:
        block = given.get(label)
        if block is None:
            M0.append(GradedMatrix.identity(ring, P0))
            M1.append(GradedMatrix.identity(ring, P1))
            continue
        if not isinstance(block, dict) or 'p0' not in block or 'p1' not in block:
            raise ParseError(f"{name}.action.{label} needs 'p0' and 'p1' matrices")
        M0.append(matrix_from_rows(ring, P0, P0, 0, block['p0'], f"{name}.action.{label}.p0"))
        M1.append(matrix_from_rows(ring, P1, P1, 0, block['p1'], f"{name}.action.{label}.p1"))
    return EquivariantMF(action, A, B, tuple(M0), tuple(M1))


def morphism_to_dict(u: MFMorphism, source: str, target: str) -> Dict[str, Any]:
    return {'source': source, 'target': target, 'U0': u.U0.to_text(), 'U1': u.U1.to_text()}


def morphism_from_dict(data: Dict[str, Any], objects: Dict[str, EquivariantMF], name: str = 'map') -> MFMorphism:
    X, Y = _endpoints(data, objects, name)
    ring = X.ring
    return MFMorphism(
        X, Y,
        matrix_from_rows(ring, X.p0, Y.p0, 0, data.get('U0'), f"{name}.U0"),
        matrix_from_rows(ring, X.p1, Y.p1, 0, data.get('U1'), f"{name}.U1")
    )


def homotopy_to_dict(H: Homotopy, source: str, target: str) -> Dict[str, Any]:
    return {'source': source, 'target': target, 'H0': H.H0.to_text(), 'H1': H.H1.to_text()}


def homotopy_from_dict(data: Dict[str, Any], objects: Dict[str, EquivariantMF], name: str = 'homotopy') -> Homotopy:
    X, Y = _endpoints(data, objects, name)
    ring = X.ring
    return Homotopy(
        X, Y,
        matrix_from_rows(ring, X.p0, Y.p1, 0, data.get('H0'), f"{name}.H0"),
        matrix_from_rows(ring, X.p1, Y.p0, -ring.df, data.get('H1'), f"{name}.H1")
    )


def _endpoints(data: Dict[str, Any], objects: Dict[str, EquivariantMF], name: str):
    if not isinstance(data, dict):
        raise ParseError(f"'{name}' must be a JSON object")
    try:
        X, Y = objects[data['source']], objects[data['target']]
    except KeyError as e:
        raise ValidationError(f"'{name}' refers to an unknown object {e}")
    if X.action != Y.action:
        raise ValidationError(f"'{name}' connects objects over different rings or actions")
    return X, Y


# ---------------------------------------------------------------------------
# Homotopy-equivariant objects and ring maps
# ---------------------------------------------------------------------------

def homotopy_object_to_dict(H: HomotopyEquivariantObject) -> Dict[str, Any]:
    group = H.action.group
    return {
        'object': mf_to_dict(H.obj),
        'theta': {group.elements[g]: {'U0': t.U0.to_text(), 'U1': t.U1.to_text()}
                  for g, t in enumerate(H.theta)}
    }


def homotopy_object_from_dict(data: Dict[str, Any], action: RingAction, name: str = 'homotopy_object') -> HomotopyEquivariantObject:
    if not isinstance(data, dict) or 'object' not in data:
        raise ParseError(f"Homotopy-equivariant object '{name}' needs an 'object'")
    P = mf_from_dict(data['object'], RingAction.trivial(action.ring), f"{name}.object")
    theta = data.get('theta', {})
    if not isinstance(theta, dict):
        raise ParseError(f"{name}.theta must map group elements to matrices")
    unknown = set(theta) - set(action.group.elements)
    if unknown:
        raise ValidationError(f"{name}.theta names unknown elements {sorted(unknown)}")
    rows = {}
    for label, block in theta.items():
        if not isinstance(block, dict) or 'U0' not in block or 'U1' not in block:
            raise ParseError(f"{name}.theta.{label} needs 'U0' and 'U1'")
        rows[label] = (_rows(block['U0'], f"{name}.theta.{label}.U0"), _rows(block['U1'], f"{name}.theta.{label}.U1"))
        if len(rows[label][0]) != P.p0.rank or len(rows[label][1]) != P.p1.rank:
            raise ValidationError(f"{name}.theta.{label} has the wrong shape")
    return HomotopyEquivariantObject.build(P, action, rows)


def ring_hom_to_dict(phi: RingHom) -> Dict[str, Any]:
    return {
        'target': action_to_dict(phi.target),
        'images': phi.to_dict()
    }


def ring_hom_from_dict(data: Dict[str, Any], source: RingAction, name: str = 'ring_hom') -> RingHom:
    """
    The target ring carries the same group; its action defaults to the
    source action's images read in the target ring.
    """
    if not isinstance(data, dict) or 'target' not in data:
        raise ParseError(f"Ring map '{name}' needs a 'target' ring")
    target_ring = GradedRing.from_dict(data['target'].get('ring', data['target'])
                                       if isinstance(data['target'], dict) else data['target'])
    mapping = data.get('target_action', source.to_mapping())
    try:
        target = RingAction.from_mapping(target_ring, source.group, mapping)
    except MFGError as e:
        raise ValidationError(f"Target action of ring map '{name}': {e.message}", e.details)
    images = data.get('images', {})
    if not isinstance(images, dict):
        raise ParseError(f"{name}.images must map variables to polynomials")
    return RingHom.from_mapping(source, target, {str(k): str(v) for k, v in images.items()})
