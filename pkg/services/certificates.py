"""
Certified reports: building them from computed results and re-checking
them from the JSON alone.

A report carries every object, map and homotopy its claims mention, so
verification needs nothing but exact matrix arithmetic: no hom-space, no
search and no solver is run.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from models import Claim, Report
from services.errors import MFGError, ValidationError
from services.group_twist import RingAction
from services.mf_core import (
    EquivariantMF, Homotopy, MFMorphism, check_morphism, identity, validate_mf, zero_morphism
)
from services.serialization import (
    action_from_dict, action_to_dict, homotopy_from_dict, homotopy_to_dict,
    mf_from_dict, mf_to_dict, morphism_from_dict, morphism_to_dict
)

logger = logging.getLogger(__name__)


class ReportBuilder:
    """
    Collects named objects, maps and homotopies plus claims about them.

    Objects and contexts are deduplicated by equality, so a map whose source
    was already registered refers to it by its existing name.
    """

    def __init__(self, op: str, task: str, seed: int):
        self.report = Report(op=op, task=task, seed=seed)
        self._contexts: List[RingAction] = []
        self._objects: List[EquivariantMF] = []
        self._object_names: List[str] = []

    # -- registration -----------------------------------------------------

    def context(self, action: RingAction) -> str:
        for k, known in enumerate(self._contexts):
            if known == action:
                return f'ctx{k}'
        name = f'ctx{len(self._contexts)}'
        self._contexts.append(action)
        self.report.contexts[name] = action_to_dict(action)
        return name

    def add_object(self, X: EquivariantMF, name: Optional[str] = None) -> str:
        for known, known_name in zip(self._objects, self._object_names):
            if known == X:
                return known_name
        name = name or f'obj{len(self._objects)}'
        if name in self.report.objects:
            raise ValidationError(f"Report object name '{name}' is already used")
        data = mf_to_dict(X)
        data['context'] = self.context(X.action)
        self._objects.append(X)
        self._object_names.append(name)
        self.report.objects[name] = data
        return name

    def add_map(self, name: str, u: MFMorphism) -> str:
        source, target = self.add_object(u.source), self.add_object(u.target)
        self.report.maps[name] = morphism_to_dict(u, source, target)
        return name

    def add_homotopy(self, name: str, H: Homotopy) -> str:
        source, target = self.add_object(H.source), self.add_object(H.target)
        self.report.homotopies[name] = homotopy_to_dict(H, source, target)
        return name

    def identity_of(self, X: EquivariantMF) -> str:
        return f'id:{self.add_object(X)}'

    # -- claims -----------------------------------------------------------

    def claim_valid(self, X: EquivariantMF, name: Optional[str] = None, note: str = '') -> str:
        name = self.add_object(X, name)
        self.report.claims.append(Claim('valid-mf', subject=name, note=note))
        return name

    def claim_morphism(self, name: str, u: MFMorphism, note: str = '') -> str:
        self.add_map(name, u)
        self.report.claims.append(Claim('morphism', subject=name, note=note))
        return name

    def claim_equal(self, lhs: Sequence[str], rhs: Sequence[str], note: str = ''):
        self.report.claims.append(Claim('equal', lhs=list(lhs), rhs=list(rhs), note=note))

    def claim_homotopic(self, lhs: Sequence[str], rhs: Sequence[str], homotopy_name: str,
                        H: Homotopy, note: str = ''):
        self.add_homotopy(homotopy_name, H)
        self.report.claims.append(Claim('homotopic', lhs=list(lhs), rhs=list(rhs),
                                        homotopy=homotopy_name, note=note))

    def claim_isomorphism(self, prefix: str, certificate, note: str = ''):
        """Forward/backward maps with both homotopies to the identities."""
        fwd = self.claim_morphism(f'{prefix}.forward', certificate.forward)
        bwd = self.claim_morphism(f'{prefix}.backward', certificate.backward)
        self.claim_homotopic([bwd, fwd], [self.identity_of(certificate.forward.source)],
                             f'{prefix}.source_homotopy', certificate.source_homotopy, note)
        self.claim_homotopic([fwd, bwd], [self.identity_of(certificate.forward.target)],
                             f'{prefix}.target_homotopy', certificate.target_homotopy, note)

    def build(self, summary: Optional[Dict[str, Any]] = None) -> Report:
        if summary is not None:
            self.report.summary = summary
        return self.report


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

@dataclass
class ClaimFailure:
    index: int
    kind: str
    message: str
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {'claim': self.index, 'kind': self.kind, 'message': self.message, 'details': self.details}


@dataclass
class VerificationResult:
    checked: int
    failures: List[ClaimFailure]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ok': self.ok,
            'checked': self.checked,
            'failures': [f.to_dict() for f in self.failures]
        }


class _Decoded:
    def __init__(self, report: Report):
        self.actions: Dict[str, RingAction] = {
            name: action_from_dict(data) for name, data in sorted(report.contexts.items())
        }
        self.objects: Dict[str, EquivariantMF] = {}
        for name, data in sorted(report.objects.items()):
            context = data.get('context') if isinstance(data, dict) else None
            if context not in self.actions:
                raise ValidationError(f"Object '{name}' refers to unknown context '{context}'")
            self.objects[name] = mf_from_dict(data, self.actions[context], name)
        self.maps: Dict[str, MFMorphism] = {
            name: morphism_from_dict(data, self.objects, name) for name, data in sorted(report.maps.items())
        }
        self.homotopies: Dict[str, Homotopy] = {
            name: homotopy_from_dict(data, self.objects, name) for name, data in sorted(report.homotopies.items())
        }

    def chain(self, names: Sequence[str]) -> MFMorphism:
        result = None
        for item in names:
            if item.startswith('id:'):
                obj = self.objects.get(item[3:])
                if obj is None:
                    raise ValidationError(f"Unknown object in '{item}'")
                u = identity(obj)
            elif item in self.maps:
                u = self.maps[item]
            else:
                raise ValidationError(f"Unknown map '{item}'")
            result = u if result is None else result @ u
        if result is None:
            raise ValidationError("Empty composition chain")
        return result


def _first_entry_difference(lhs: MFMorphism, rhs: MFMorphism) -> Dict[str, Any]:
    for name, a, b in (('U0', lhs.U0, rhs.U0), ('U1', lhs.U1, rhs.U1)):
        for i, (ra, rb) in enumerate(zip(a.to_text(), b.to_text())):
            for j, (x, y) in enumerate(zip(ra, rb)):
                if x != y:
                    return {'component': name, 'row': i, 'col': j, 'lhs': x, 'rhs': y}
    return {}


def _check_claim(decoded: _Decoded, claim: Claim) -> Optional[ClaimFailure]:
    if claim.kind == 'valid-mf':
        X = decoded.objects.get(claim.subject)
        if X is None:
            raise ValidationError(f"Unknown object '{claim.subject}'")
        result = validate_mf(X)
        if not result.ok:
            return ClaimFailure(0, claim.kind, f"{claim.subject}: {result.violation}", result.details)
        return None

    if claim.kind == 'morphism':
        u = decoded.maps.get(claim.subject)
        if u is None:
            raise ValidationError(f"Unknown map '{claim.subject}'")
        result = check_morphism(u)
        if not result.ok:
            return ClaimFailure(0, claim.kind, f"{claim.subject}: {result.violation}", result.details)
        return None

    lhs = decoded.chain(claim.lhs)
    rhs = decoded.chain(claim.rhs) if claim.rhs else zero_morphism(lhs.source, lhs.target)
    if lhs.source != rhs.source or lhs.target != rhs.target:
        return ClaimFailure(0, claim.kind, "Both sides must have the same source and target")
    label = f"{' o '.join(claim.lhs)} vs {' o '.join(claim.rhs) or '0'}"

    if claim.kind == 'equal':
        if lhs != rhs:
            return ClaimFailure(0, claim.kind, f"{label} differ", _first_entry_difference(lhs, rhs))
        return None

    H = decoded.homotopies.get(claim.homotopy)
    if H is None:
        raise ValidationError(f"Unknown homotopy '{claim.homotopy}'")
    if H.source != lhs.source or H.target != lhs.target:
        return ClaimFailure(0, claim.kind, f"Homotopy '{claim.homotopy}' has the wrong source or target")
    difference = lhs - rhs
    boundary = H.boundary()
    if boundary != difference:
        return ClaimFailure(0, claim.kind, f"{label}: boundary of '{claim.homotopy}' is not the difference",
                            _first_entry_difference(boundary, difference))
    return None


def verify_report(data: Dict[str, Any]) -> VerificationResult:
    """
    Re-check every claim of a report dictionary.

    Schema problems raise ValidationError/ParseError; failed claims are
    collected, each pinpointing the first violated identity.
    """
    report = Report.from_dict(data)
    decoded = _Decoded(report)
    failures: List[ClaimFailure] = []
    for index, claim in enumerate(report.claims):
        try:
            failure = _check_claim(decoded, claim)
        except MFGError as e:
            failure = ClaimFailure(index, claim.kind, e.message, e.details)
        if failure is not None:
            failure.index = index
            failures.append(failure)
    logger.info(f"Verified report '{report.task}' ({report.op}): "
                f"{len(report.claims) - len(failures)}/{len(report.claims)} claims hold")
    return VerificationResult(len(report.claims), failures)
