"""
Acceptance corpus.

Every criterion draws its samples from ``random.Random`` seeded with the
suite seed, the criterion name and the sample index, so two runs with the
same seed build the same objects and write byte-identical reports. Each
sample that produces factorizations leaves a certified report behind, and
the report is re-verified from its JSON before the sample counts as passed.
"""
import logging
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from config import Config
from models import Report
from services.certificates import ReportBuilder, verify_report
from services.debug import DebugTimer
from services.errors import AcceptanceFailure, MFGError, UnsupportedCharacteristicError, ValidationError
from services.exact_algebra import Field, GradedRing, monomials_of_degree
from services.findim_algebra import (
    EXPECTED_PRIMITIVE_COUNTS, FinDimAlgebra, algebra_corpus, brute_force_idempotents, corner_algebra,
    is_nc_local, lift_idempotent, primitive_decomposition, quotient_algebra, radical
)
from services.functors import (
    HomotopyEquivariantObject, averaging_splitting, forget, induce, strictify, twisted_object
)
from services.graded_maps import GradedFreeModule, GradedMatrix
from services.group_twist import GroupData, RingAction
from services.mf_core import (
    EquivariantMF, Homotopy, MFMorphism, average_homotopy, average_map, direct_sum_maps,
    endomorphism_algebra, find_isomorphism, identity, is_contractible, morphism_equations,
    validate_mf, zero_morphism
)
from services.periodicity import extract_mf, residue_field_module, resolve_periodic
from services.report_store import ReportStore, render_report
from services.splitting import split_homotopy_idempotent, split_strict_idempotent
from services.task_runner import record_averaging, record_decomposition, record_split, record_strictification

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Counts and results
# ---------------------------------------------------------------------------

@dataclass
class SuiteCounts:
    """Sample counts per criterion; the defaults are the full acceptance counts."""
    homotopy_idempotents: int = 100
    classification_samples: int = 25
    averaging_objects: int = 50
    strictify_samples: int = 20
    random_algebras: int = 50
    strict_idempotents: int = 100
    determinism: bool = True
    criteria: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'homotopy_idempotents': self.homotopy_idempotents,
            'classification_samples': self.classification_samples,
            'averaging_objects': self.averaging_objects,
            'strictify_samples': self.strictify_samples,
            'random_algebras': self.random_algebras,
            'strict_idempotents': self.strict_idempotents,
            'determinism': self.determinism,
            'criteria': list(self.criteria)
        }

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> 'SuiteCounts':
        data = data or {}
        counts = cls()
        unknown = set(data) - set(counts.to_dict())
        if unknown:
            raise ValidationError(f"Unknown suite settings {sorted(unknown)}")
        for key, value in data.items():
            if key == 'determinism':
                if not isinstance(value, bool):
                    raise ValidationError("suite.determinism must be true or false")
            elif key == 'criteria':
                if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
                    raise ValidationError("suite.criteria must be a list of criterion names")
            elif isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ValidationError(f"suite.{key} must be a non-negative integer")
            setattr(counts, key, value)
        return counts


@dataclass
class CriterionResult:
    name: str
    description: str
    checked: int = 0
    failures: List[str] = field(default_factory=list)
    reports: List[Report] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, message: str):
        logger.warning(f"[{self.name}] {message}")
        self.failures.append(message)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'description': self.description,
            'passed': self.passed,
            'checked': self.checked,
            'failures': list(self.failures),
            'reports': [r.task for r in self.reports]
        }


@dataclass
class SuiteResult:
    seed: int
    counts: SuiteCounts
    criteria: List[CriterionResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    def reports(self) -> List[Report]:
        return [r for c in self.criteria for r in c.reports]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema': Config.MFG_SCHEMA_VERSION,
            'seed': self.seed,
            'counts': self.counts.to_dict(),
            'passed': self.passed,
            'criteria': [c.to_dict() for c in self.criteria]
        }


def _require(condition: bool, message: str, details: Optional[Dict[str, Any]] = None):
    if not condition:
        raise AcceptanceFailure(message, details)


def _rng(seed: int, criterion: str, index: int) -> random.Random:
    return random.Random(f'{seed}/{criterion}/{index}')


def _run_sample(result: CriterionResult, label: str, op: str, seed: int,
                body: Callable[[ReportBuilder], Dict[str, Any]]) -> Optional[Report]:
    """Run one sample; a raised MFGError or a report that fails to verify is a failure."""
    builder = ReportBuilder(op, f'{result.name}.{label}', seed)
    result.checked += 1
    try:
        summary = body(builder)
    except MFGError as e:
        result.fail(f"{label}: {e.message}")
        return None
    report = builder.build(summary)
    verification = verify_report(report.to_dict())
    if not verification.ok:
        first = verification.failures[0]
        result.fail(f"{label}: certificate {first.index} ({first.kind}) does not verify: {first.message}")
    result.reports.append(report)
    return report


# ---------------------------------------------------------------------------
# Sample objects
# ---------------------------------------------------------------------------

def _ring(variables: Sequence[str], potential: str, field_: Optional[Field] = None) -> GradedRing:
    return GradedRing.create(field_ or Field.rationals(), variables, [1] * len(variables), potential)


def _z2(ring: GradedRing, images: Dict[str, str]) -> RingAction:
    return RingAction.from_mapping(ring, GroupData.cyclic(2, 's'), {'s': images})


@dataclass(frozen=True)
class ObjectFamily:
    """Indecomposable building blocks over one ring with one group action."""
    name: str
    action: RingAction
    blocks: Tuple[EquivariantMF, ...]

    @property
    def ring(self) -> GradedRing:
        return self.action.ring

    def contractible(self) -> EquivariantMF:
        return EquivariantMF.build(self.ring, [0], [0], [['1']], [[self.ring.potential]], self.action)


def power_pair(action: RingAction, a: int, signs: Optional[Tuple[int, int]] = None) -> EquivariantMF:
    """(x^a, x^(n-a)) for f = x^n; ``signs`` gives the action of 's' on P0 and P1."""
    ring = action.ring
    n = ring.df
    M0 = M1 = None
    if signs is not None:
        M0, M1 = {'s': [[str(signs[0])]]}, {'s': [[str(signs[1])]]}
    return EquivariantMF.build(ring, [0], [a], [[f'x^{a}']], [[f'x^{n - a}']], action, M0, M1)


def _sum_of_squares(action: RingAction, structure: Optional[Tuple[List[List[str]], List[List[str]]]] = None) -> EquivariantMF:
    M0 = M1 = None
    if structure is not None:
        M0, M1 = {'s': structure[0]}, {'s': structure[1]}
    return EquivariantMF.build(action.ring, [0, 0], [1, 1], [['x', '-y'], ['y', 'x']], [['x', 'y'], ['-y', 'x']],
                               action, M0, M1)


def _sum_of_cubes(action: RingAction, linear_first: bool, sign: Optional[int] = None) -> EquivariantMF:
    linear, quadratic = 'x + y', 'x^2 - x*y + y^2'
    A, B = (linear, quadratic) if linear_first else (quadratic, linear)
    M = None if sign is None else {'s': [[str(sign)]]}
    return EquivariantMF.build(action.ring, [0], [1 if linear_first else 2], [[A]], [[B]], action, M, M)


def object_families() -> List[ObjectFamily]:
    """Every potential with every Z/2 action it admits, over the rationals."""
    families = []
    for n in (3, 4):
        action = RingAction.trivial(_ring(['x'], f'x^{n}'))
        families.append(ObjectFamily(f'x^{n}', action, tuple(power_pair(action, a) for a in range(1, n))))
    sign = _z2(_ring(['x'], 'x^4'), {'x': '-x'})
    families.append(ObjectFamily('x^4/sign', sign, tuple(
        power_pair(sign, a, (eps, eps * (-1) ** a)) for a in range(1, 4) for eps in (1, -1)
    )))

    squares = _ring(['x', 'y'], 'x^2 + y^2')
    trivial = RingAction.trivial(squares)
    families.append(ObjectFamily('x^2+y^2', trivial, (_sum_of_squares(trivial),)))
    sign = _z2(squares, {'x': '-x', 'y': '-y'})
    families.append(ObjectFamily('x^2+y^2/sign', sign, tuple(
        _sum_of_squares(sign, ([[str(eps), '0'], ['0', str(eps)]], [[str(-eps), '0'], ['0', str(-eps)]]))
        for eps in (1, -1)
    )))
    swap = _z2(squares, {'x': 'y', 'y': 'x'})
    families.append(ObjectFamily('x^2+y^2/swap', swap, tuple(
        _sum_of_squares(swap, ([[str(eps), '0'], ['0', str(-eps)]], [['0', str(-eps)], [str(-eps), '0']]))
        for eps in (1, -1)
    )))

    cubes = _ring(['x', 'y'], 'x^3 + y^3')
    trivial = RingAction.trivial(cubes)
    families.append(ObjectFamily('x^3+y^3', trivial, (_sum_of_cubes(trivial, True), _sum_of_cubes(trivial, False))))
    swap = _z2(cubes, {'x': 'y', 'y': 'x'})
    families.append(ObjectFamily('x^3+y^3/swap', swap, tuple(
        _sum_of_cubes(swap, first, eps) for first in (True, False) for eps in (1, -1)
    )))
    return families


def _random_form(ring: GradedRing, degree: int, rng: random.Random):
    monomials = monomials_of_degree(ring.weights, degree)
    p = ring.zero
    for m in rng.sample(monomials, min(2, len(monomials))):
        p += ring.monomial(m, ring.field.scalar(rng.randint(-2, 2)))
    return p


def random_matrix(ring: GradedRing, source: GradedFreeModule, target: GradedFreeModule, shift: int,
                  rng: random.Random, mask: Optional[Callable[[int, int], bool]] = None) -> GradedMatrix:
    rows = []
    for i, wt in enumerate(target.weights):
        rows.append([_random_form(ring, ws + shift - wt, rng) if mask is None or mask(i, j) else ring.zero
                     for j, ws in enumerate(source.weights)])
    return GradedMatrix.build(ring, source, target, shift, rows)


def random_null_homotopic(X: EquivariantMF, rng: random.Random) -> MFMorphism:
    """The boundary of a random equivariant odd endomorphism of X."""
    ring = X.ring
    H = Homotopy(X, X, random_matrix(ring, X.p0, X.p1, 0, rng), random_matrix(ring, X.p1, X.p0, -ring.df, rng))
    if not X.group.is_trivial:
        H = average_homotopy(H)
    return H.boundary()


def _unipotent(S: EquivariantMF, parity: int, owners: Sequence[int], rng: random.Random):
    """I + N and its inverse for an equivariant N that is strictly upper triangular by summand."""
    ring, module = S.ring, S.module(parity)
    N = random_matrix(ring, module, module, 0, rng, mask=lambda i, j: owners[i] < owners[j])
    if not S.group.is_trivial:
        N = average_map(S.action, N, S.actions(parity), S.actions(parity))
    one = GradedMatrix.identity(ring, module)
    minus_n = -N
    inverse, power = one, one
    for _ in range(len(set(owners))):
        power = power @ minus_n
        inverse = inverse + power
    return one + N, inverse


@dataclass
class ConjugatedSum:
    """
    A direct sum of family blocks (label -1 is the contractible block) with
    a random equivariant change of basis applied to both sides.
    """
    family: ObjectFamily
    labels: List[int]
    parts: List[EquivariantMF]
    plain: EquivariantMF
    obj: EquivariantMF
    inclusions: List[MFMorphism]
    projections: List[MFMorphism]
    to_obj: MFMorphism
    from_obj: MFMorphism

    def projector(self, chosen: Sequence[int]) -> MFMorphism:
        """The strict idempotent of obj that keeps the chosen parts."""
        total = zero_morphism(self.plain, self.plain)
        for k in chosen:
            total = total + self.inclusions[k] @ self.projections[k]
        return self.to_obj @ total @ self.from_obj

    def reduced_rank(self, chosen: Sequence[int]) -> int:
        return sum(self.parts[k].rank for k in chosen if self.labels[k] >= 0)


def random_sample(family: ObjectFamily, rng: random.Random, max_rank: int = 4,
                  contractible: bool = False) -> ConjugatedSum:
    labels = [rng.randrange(len(family.blocks)) for _ in range(rng.randint(1, 3))]
    while len(labels) > 1 and sum(family.blocks[k].rank for k in labels) > max_rank:
        labels.pop()
    if contractible:
        labels.insert(rng.randrange(len(labels) + 1), -1)
    parts = [family.contractible() if k < 0 else family.blocks[k] for k in labels]
    S, inclusions, projections = direct_sum_maps(parts)

    owners = [k for k, X in enumerate(parts) for _ in range(X.rank)]
    g0, g0_inv = _unipotent(S, 0, owners, rng)
    g1, g1_inv = _unipotent(S, 1, owners, rng)
    X = EquivariantMF(S.action, g0 @ S.A @ g1_inv, g1 @ S.B @ g0_inv, S.M0, S.M1)
    return ConjugatedSum(family, labels, parts, S, X, inclusions, projections,
                         MFMorphism(S, X, g0, g1), MFMorphism(X, S, g0_inv, g1_inv))


def _choose(rng: random.Random, n: int) -> List[int]:
    return sorted(rng.sample(range(n), rng.randint(1, n)))


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------

def check_homotopy_splitting(counts: SuiteCounts, seed: int) -> CriterionResult:
    result = CriterionResult('homotopy_split', 'Idempotents up to homotopy split, with verifiable certificates')
    families = object_families()
    for k in range(counts.homotopy_idempotents):
        rng = _rng(seed, result.name, k)
        family = families[k % len(families)]

        def body(builder: ReportBuilder) -> Dict[str, Any]:
            sample = random_sample(family, rng, max_rank=3, contractible=rng.random() < 0.3)
            chosen = _choose(rng, len(sample.parts))
            e = sample.projector(chosen) + random_null_homotopic(sample.obj, rng)
            split = split_homotopy_idempotent(sample.obj, e, seed)
            _require(split.obj.rank == sample.reduced_rank(chosen), "Image has the wrong rank",
                     {'rank': split.obj.rank, 'expected': sample.reduced_rank(chosen)})
            summary = record_split(builder, sample.obj, e, split)
            summary['family'] = family.name
            return summary

        _run_sample(result, f's{k:03d}', 'split-idempotent', seed, body)
    return result


def _identify(X: EquivariantMF, blocks: Sequence[EquivariantMF]) -> Optional[int]:
    for index, block in enumerate(blocks):
        if find_isomorphism(X, block) is not None:
            return index
    return None


def check_classification(counts: SuiteCounts, seed: int) -> CriterionResult:
    result = CriterionResult('classification', 'Indecomposables of x^(n+1) are recovered by Krull-Schmidt')
    for n in range(1, 5):
        action = RingAction.trivial(_ring(['x'], f'x^{n + 1}'))
        blocks = tuple(power_pair(action, a) for a in range(1, n + 1))
        family = ObjectFamily(f'x^{n + 1}', action, blocks)

        def structure(builder: ReportBuilder) -> Dict[str, Any]:
            for a, X in enumerate(blocks, 1):
                builder.claim_valid(X, f'x{a}')
                _require(not is_contractible(X), f"(x^{a}, x^{n + 1 - a}) is contractible")
                _require(is_nc_local(endomorphism_algebra(X).algebra, seed),
                         f"(x^{a}, x^{n + 1 - a}) is decomposable")
            for a in range(len(blocks)):
                for b in range(a + 1, len(blocks)):
                    _require(find_isomorphism(blocks[a], blocks[b]) is None,
                             f"x^{a + 1} and x^{b + 1} factorizations are isomorphic")
            return {'n': n, 'indecomposables': len(blocks)}

        _run_sample(result, f'n{n}.blocks', 'decompose', seed, structure)

        for k in range(counts.classification_samples):
            rng = _rng(seed, f'{result.name}/{n}', k)

            def body(builder: ReportBuilder) -> Dict[str, Any]:
                sample = random_sample(family, rng, max_rank=4, contractible=rng.random() < 0.3)
                summary, decomposition = record_decomposition(builder, sample.obj, seed)
                found: Counter = Counter()
                for c in decomposition.classes:
                    index = _identify(decomposition.summands[c.representative].obj, blocks)
                    _require(index is not None, "A summand matches no known indecomposable")
                    found[index] += len(c.members)
                expected = Counter(k for k in sample.labels if k >= 0)
                _require(found == expected, "Recovered multiset differs",
                         {'found': sorted(found.elements()), 'expected': sorted(expected.elements())})
                summary['multiset'] = sorted(expected.elements())
                return summary

            _run_sample(result, f'n{n}.s{k:03d}', 'decompose', seed, body)
    return result


def _equivariant_families() -> List[ObjectFamily]:
    return [f for f in object_families() if not f.action.group.is_trivial]


def check_averaging(counts: SuiteCounts, seed: int) -> CriterionResult:
    result = CriterionResult('averaging', 'Averaging splitting is Q#G-linear, a chain map, and p o j = id')
    families = _equivariant_families()
    for k in range(counts.averaging_objects):
        rng = _rng(seed, result.name, k)
        family = families[k % len(families)]

        def body(builder: ReportBuilder) -> Dict[str, Any]:
            Y = random_sample(family, rng).obj
            split = averaging_splitting(Y)
            for name, u in (('p', split.p), ('j', split.j)):
                equations = morphism_equations(u.source, u.target, u.U0, u.U1)
                _require(all(eq.is_zero() for eq in equations[:2]), f"{name} is not a chain map")
                _require(all(eq.is_zero() for eq in equations[2:]), f"{name} is not linear over Q#G")
            _require(split.p @ split.j == identity(Y), "p o j is not the identity")
            summary = record_averaging(builder, Y, split)
            summary['family'] = family.name
            return summary

        _run_sample(result, f's{k:03d}', 'averaging', seed, body)

    def characteristic_two(builder: ReportBuilder) -> Dict[str, Any]:
        swap = _z2(_ring(['x', 'y'], 'x^2 + y^2', Field.prime(2)), {'x': 'y', 'y': 'x'})
        Y = EquivariantMF.build(swap.ring, [0], [1], [['x + y']], [['x + y']], swap)
        builder.claim_valid(Y, 'object')
        try:
            averaging_splitting(Y)
        except UnsupportedCharacteristicError as e:
            return {'characteristic': 2, 'error_code': e.error_code, 'error': e.message}
        raise AcceptanceFailure("Averaging did not refuse characteristic 2")

    _run_sample(result, 'char2', 'averaging', seed, characteristic_two)
    return result


def sign_structures() -> Tuple[RingAction, List[EquivariantMF]]:
    """All constant sign structures on (x, x) for f = x^2 with x -> -x that are valid."""
    action = _z2(_ring(['x'], 'x^2'), {'x': '-x'})
    candidates = [power_pair(action, 1, (m0, m1)) for m0 in (1, -1) for m1 in (1, -1)]
    return action, [X for X in candidates if validate_mf(X).ok]


def check_sign_count(counts: SuiteCounts, seed: int) -> CriterionResult:
    result = CriterionResult('sign_count', 'Exactly two equivariant structures on (x, x), both inside E(F(X))')
    action, structures = sign_structures()

    def count(builder: ReportBuilder) -> Dict[str, Any]:
        _require(len(structures) == 2, f"Expected 2 equivariant structures, found {len(structures)}")
        for k, X in enumerate(structures):
            builder.claim_valid(X, f'structure{k}')
            _require(is_nc_local(endomorphism_algebra(X).algebra, seed), f"Structure {k} is decomposable")
        _require(find_isomorphism(structures[0], structures[1]) is None, "The two structures are isomorphic")
        return {'structures': len(structures)}

    _run_sample(result, 'structures', 'validate', seed, count)
    if len(structures) != 2:
        return result

    for k, X in enumerate(structures):
        def body(builder: ReportBuilder) -> Dict[str, Any]:
            E = induce(forget(X), action)
            builder.claim_valid(E, 'induced')
            summary, decomposition = record_decomposition(builder, E, seed)
            _require(len(decomposition.classes) == 2, "Induced object does not have two classes")
            matched = set()
            for c in decomposition.classes:
                _require(len(c.members) == 1, "A class occurs more than once")
                index = _identify(decomposition.summands[c.representative].obj, structures)
                _require(index is not None, "A summand is neither structure")
                matched.add(index)
            _require(matched == {0, 1}, "Induced object does not contain both structures")
            return summary

        _run_sample(result, f'induced{k}', 'induce', seed, body)
    return result


def check_kstab(counts: SuiteCounts, seed: int) -> CriterionResult:
    result = CriterionResult('kstab', 'k^stab of x^n is (x, x^(n-1)), periodic by step 2')
    for n in range(2, 6):
        def body(builder: ReportBuilder) -> Dict[str, Any]:
            ring = _ring(['x'], f'x^{n}')
            tail = resolve_periodic(residue_field_module(ring))
            _require(tail.period_start is not None and tail.period_start <= 2,
                     f"Periodicity detected late: {tail.period_start}")
            X = extract_mf(tail, tail.period_start)
            f_identity = GradedMatrix.scalar(ring, X.p0, ring.f, ring.df)
            _require(X.A @ X.B == f_identity and X.B @ X.A == f_identity.retyped(X.p1, X.p1),
                     "AB = BA = f I fails")
            builder.claim_valid(X, 'kstab')
            expected = power_pair(RingAction.trivial(ring), 1)
            builder.claim_valid(expected, 'expected')
            certificate = find_isomorphism(X, expected)
            _require(certificate is not None, "k^stab is not isomorphic to (x, x^(n-1))")
            builder.claim_isomorphism('expected', certificate)
            return {'n': n, 'period_start': tail.period_start, 'rank': X.rank}

        _run_sample(result, f'n{n}', 'kstab', seed, body)
    return result


def _perturbed(X: EquivariantMF, rng: random.Random) -> HomotopyEquivariantObject:
    """X as a homotopy-equivariant object, each non-identity theta moved by a random boundary."""
    base = HomotopyEquivariantObject.from_equivariant(X)
    P, action = base.obj, base.action
    ring = P.ring
    thetas = list(base.theta)
    for g in action.group.non_identity():
        source = twisted_object(P, action, g)
        H = Homotopy(source, P, random_matrix(ring, P.p0, P.p1, 0, rng),
                     random_matrix(ring, P.p1, P.p0, -ring.df, rng))
        thetas[g] = thetas[g] + H.boundary()
    return HomotopyEquivariantObject(P, action, tuple(thetas))


def check_strictification(counts: SuiteCounts, seed: int) -> CriterionResult:
    result = CriterionResult('strictify', 'Strictification recovers the genuine object up to certified isomorphism')
    action, structures = sign_structures()
    P = forget(structures[0]) if structures else None
    strict_signs: Dict[int, EquivariantMF] = {}

    for sign in (1, -1):
        def sign_body(builder: ReportBuilder) -> Dict[str, Any]:
            H = HomotopyEquivariantObject.build(P, action, {'s': ([[str(sign)]], [[str(-sign)]])})
            outcome = strictify(H, seed)
            summary = record_strictification(builder, H, outcome)
            genuine = power_pair(action, 1, (sign, -sign))
            certificate = find_isomorphism(outcome.obj, genuine)
            _require(certificate is not None, f"Strictification of theta = {sign}(1, -1) is not the genuine object")
            builder.claim_isomorphism('expected', certificate)
            strict_signs[sign] = outcome.obj
            summary['sign'] = sign
            return summary

        _run_sample(result, f'sign{"+" if sign > 0 else "-"}', 'strictify', seed, sign_body)

    if len(strict_signs) == 2:
        result.checked += 1
        if find_isomorphism(strict_signs[1], strict_signs[-1]) is not None:
            result.fail("The two sign choices strictify to isomorphic objects")

    families = _equivariant_families()
    for k in range(max(counts.strictify_samples - 2, 0)):
        rng = _rng(seed, result.name, k)
        family = families[k % len(families)]

        def body(builder: ReportBuilder) -> Dict[str, Any]:
            X = random_sample(family, rng, max_rank=2).obj
            H = _perturbed(X, rng)
            outcome = strictify(H, seed)
            summary = record_strictification(builder, H, outcome)
            certificate = find_isomorphism(outcome.obj, X)
            _require(certificate is not None, "Strictification is not isomorphic to the genuine object")
            builder.claim_isomorphism('expected', certificate)
            summary['family'] = family.name
            return summary

        _run_sample(result, f's{k:03d}', 'strictify', seed, body)
    return result


def check_algebra(A: FinDimAlgebra, seed: int, expected: Optional[int] = None) -> Dict[str, Any]:
    """Radical, lifting and primitive decomposition postconditions, plus the brute-force cross-check."""
    J = radical(A)
    _require(J.is_two_sided() and J.is_nilpotent(), "Radical is not a nilpotent two-sided ideal")
    Q = quotient_algebra(A, J)
    _require(radical(Q.quotient).dimension == 0, "Quotient by the radical is not semisimple")
    idempotents = primitive_decomposition(A, seed)
    total = A.zero()
    for i, e in enumerate(idempotents):
        _require(A.is_idempotent(e), f"Idempotent {i} is not idempotent")
        for j, other in enumerate(idempotents):
            if i != j:
                _require(A.is_zero(A.mul(e, other)), f"Idempotents {i} and {j} are not orthogonal")
        _require(is_nc_local(corner_algebra(A, e).corner, seed), f"Idempotent {i} is not primitive")
        c = Q.lift(Q.project(e))
        lifted = lift_idempotent(A, J, c)
        _require(A.is_idempotent(lifted) and J.contains(A.sub(lifted, c)), f"Lift of idempotent {i} fails")
        total = A.add(total, e)
    _require(A.is_zero(A.sub(total, A.one())), "Idempotents do not sum to 1")
    if expected is not None:
        _require(len(idempotents) == expected, f"Expected {expected} primitive idempotents, found {len(idempotents)}")
    summary: Dict[str, Any] = {
        'dimension': A.dimension,
        'radical_dimension': J.dimension,
        'primitive_idempotents': len(idempotents)
    }
    if A.field.characteristic and A.dimension <= Config.MFG_BRUTE_FORCE_MAX_DIM:
        found = brute_force_idempotents(A)
        nontrivial = [e for e in found if not A.is_zero(e) and not A.is_zero(A.sub(e, A.one()))]
        _require(bool(nontrivial) == (len(idempotents) > 1), "Brute-force idempotent search disagrees")
        summary['idempotents'] = len(found)
    return summary


def check_algebras(counts: SuiteCounts, seed: int) -> CriterionResult:
    result = CriterionResult('findim', 'Finite-dimensional algebra postconditions and brute-force agreement')
    for field_ in (Field.rationals(), Field.prime(7)):
        for name, A in sorted(algebra_corpus(field_).items()):
            if A.dimension > 4:
                continue
            prefix = f"gf{field_.characteristic}" if field_.characteristic else 'q'
            label = re.sub(r'[^A-Za-z0-9_.]+', '_', f"{prefix}.{name}")
            _run_sample(result, label, 'findim', seed,
                        lambda builder, A=A, name=name: {'algebra': name,
                                                         **check_algebra(A, seed, EXPECTED_PRIMITIVE_COUNTS.get(name))})

    families = object_families()
    for k in range(counts.random_algebras):
        rng = _rng(seed, result.name, k)
        family = families[k % len(families)]

        def body(builder: ReportBuilder) -> Dict[str, Any]:
            X = random_sample(family, rng, max_rank=3).obj
            stable = rng.random() < 0.5
            builder.claim_valid(X, 'object')
            summary = check_algebra(endomorphism_algebra(X, stable=stable).algebra, seed)
            summary.update(family=family.name, stable=stable)
            return summary

        _run_sample(result, f's{k:03d}', 'findim', seed, body)
    return result


def check_strict_splitting(counts: SuiteCounts, seed: int) -> CriterionResult:
    result = CriterionResult('strict_split', 'Exact idempotents split with pi iota = id and iota pi = e')
    families = object_families()
    for k in range(counts.strict_idempotents):
        rng = _rng(seed, result.name, k)
        family = families[k % len(families)]

        def body(builder: ReportBuilder) -> Dict[str, Any]:
            sample = random_sample(family, rng, contractible=rng.random() < 0.3)
            chosen = _choose(rng, len(sample.parts))
            e = sample.projector(chosen)
            _require(e @ e == e, "Synthesized idempotent is not idempotent")
            split = split_strict_idempotent(sample.obj, e)
            _require(split.pi @ split.iota == identity(split.obj), "pi o iota is not the identity")
            _require(split.iota @ split.pi == e, "iota o pi is not e")
            expected_rank = sum(sample.parts[c].rank for c in chosen)
            _require(split.obj.rank == expected_rank, "Image has the wrong rank",
                     {'rank': split.obj.rank, 'expected': expected_rank})
            summary = record_split(builder, sample.obj, e, split)
            summary['family'] = family.name
            return summary

        _run_sample(result, f's{k:03d}', 'split-idempotent', seed, body)
    return result


CRITERIA: Tuple[Tuple[str, Callable[[SuiteCounts, int], CriterionResult]], ...] = (
    ('homotopy_split', check_homotopy_splitting),
    ('classification', check_classification),
    ('averaging', check_averaging),
    ('sign_count', check_sign_count),
    ('kstab', check_kstab),
    ('strictify', check_strictification),
    ('findim', check_algebras),
    ('strict_split', check_strict_splitting),
)


def _run_criteria(counts: SuiteCounts, seed: int, only: Optional[Sequence[str]]) -> List[CriterionResult]:
    results = []
    for name, check in CRITERIA:
        if only and name not in only:
            continue
        with DebugTimer(f"suite criterion {name}"):
            outcome = check(counts, seed)
        logger.info(f"Criterion '{name}': {'passed' if outcome.passed else 'FAILED'} ({outcome.checked} checks)")
        results.append(outcome)
    return results


def _rendered(results: List[CriterionResult]) -> Dict[str, str]:
    return {r.task: render_report(r) for c in results for r in c.reports}


def run_suite(counts: Optional[SuiteCounts] = None, seed: Optional[int] = None,
              only: Optional[Sequence[str]] = None) -> SuiteResult:
    """Run the selected criteria; with ``counts.determinism`` run them twice and compare the reports."""
    counts = counts or SuiteCounts()
    only = only or counts.criteria or None
    seed = Config.MFG_DEFAULT_SEED if seed is None else seed
    known = [name for name, _ in CRITERIA]
    unknown = [name for name in (only or []) if name not in known]
    if unknown:
        raise ValidationError(f"Unknown suite criteria {unknown}", {'criteria': known})

    logger.info(f"Acceptance suite started (seed {seed})")
    results = _run_criteria(counts, seed, only)
    if counts.determinism:
        determinism = CriterionResult('determinism', 'Two runs with the same seed give byte-identical reports')
        first = _rendered(results)
        second = _rendered(_run_criteria(counts, seed, only))
        determinism.checked = len(first)
        if sorted(first) != sorted(second):
            determinism.fail("The two runs produced different report sets")
        for task in sorted(set(first) & set(second)):
            if first[task] != second[task]:
                determinism.fail(f"Report '{task}' differs between runs")
        results.append(determinism)
    suite = SuiteResult(seed, counts, results)
    logger.info(f"Acceptance suite {'passed' if suite.passed else 'FAILED'}")
    return suite


def write_suite(suite: SuiteResult, out_dir: str) -> List[str]:
    """Write every sample report plus ``summary.json``; returns the written paths."""
    store = ReportStore(out_dir)
    paths = [store.save(report) for report in suite.reports()]
    paths.append(store.save_json('summary', suite.to_dict()))
    return paths
