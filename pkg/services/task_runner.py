"""
Problem files in, certified reports out.

A problem is loaded and fully validated (ring, group action, every object,
every task argument) before anything is computed; tasks then run one by one
or on a thread pool, each producing a self-contained Report.
"""
import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

from config import Config
from models import ProblemConfig, Report, TaskSpec
from services.certificates import ReportBuilder
from services.debug import DebugTimer
from services.errors import MFGError, ParseError, PreconditionError, ValidationError
from services.exact_algebra import tjurina_algebra
from services.functors import (
    HomotopyEquivariantObject, RingHom, averaging_splitting, base_change,
    compare_end_homology, forget, induce, strictify, twisted_object
)
from services.group_twist import RingAction
from services.job_manager import cancellation_scope
from services.mf_core import (
    EquivariantMF, MFMorphism, check_morphism, contraction, find_isomorphism,
    require_valid, stable_hom
)
from services.periodicity import extract_mf, residue_field_module, resolve_periodic
from services.serialization import (
    action_from_dict, homotopy_object_from_dict, matrix_from_rows, mf_from_dict, ring_hom_from_dict
)
from services.splitting import ks_decompose, split_homotopy_idempotent, split_strict_idempotent

logger = logging.getLogger(__name__)


@dataclass
class RunOptions:
    """Command-line overrides; None means "take it from the problem or Config"."""
    seed: Optional[int] = None
    degree_bound: Optional[int] = None
    max_steps: Optional[int] = None
    parallel: bool = False


@dataclass
class Workspace:
    problem: ProblemConfig
    action: RingAction
    objects: Dict[str, EquivariantMF] = field(default_factory=dict)
    homotopy_objects: Dict[str, HomotopyEquivariantObject] = field(default_factory=dict)
    ring_homs: Dict[str, RingHom] = field(default_factory=dict)
    inputs: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    @property
    def ring(self):
        return self.action.ring


@dataclass
class TaskOutcome:
    task: str
    report: Optional[Report] = None
    error: Optional[MFGError] = None

    @property
    def ok(self) -> bool:
        return self.error is None


# ---------------------------------------------------------------------------
# Loading and validation
# ---------------------------------------------------------------------------

def load_problem(path: str) -> ProblemConfig:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path} is not valid JSON: {e}")
    except OSError as e:
        raise ParseError(f"Cannot read {path}: {e}")
    return ProblemConfig.from_dict(data)


def build_workspace(problem: ProblemConfig) -> Workspace:
    """Build and validate every declared input; raises before any computation."""
    group = problem.group or {}
    action = action_from_dict({'ring': problem.ring, 'group': problem.group, 'action': group.get('action', {})})
    ws = Workspace(problem, action)

    for name, data in sorted(problem.objects.items()):
        ws.objects[name] = require_valid(mf_from_dict(data, action, name), name)
    for name, data in sorted(problem.homotopy_objects.items()):
        H = homotopy_object_from_dict(data, action, name)
        require_valid(H.obj, f'{name}.object')
        for g, theta in enumerate(H.theta):
            report = check_morphism(theta)
            if not report.ok:
                raise ValidationError(
                    f"theta_{action.group.elements[g]} of '{name}' is not a morphism: {report.violation}"
                )
        ws.homotopy_objects[name] = H
    for name, data in sorted(problem.ring_homs.items()):
        ws.ring_homs[name] = ring_hom_from_dict(data, action, name)

    for name, task in sorted(problem.tasks.items()):
        ws.inputs[name] = _prepare(ws, task)
    logger.info(f"Problem validated: {len(ws.objects)} objects, {len(problem.tasks)} tasks over {action.ring.potential}")
    return ws


def _lookup(ws: Workspace, task: TaskSpec, key: str, table: str, required: bool = True):
    registry = getattr(ws, table)
    if key not in task.args:
        if required:
            raise ValidationError(f"Task '{task.name}' needs argument '{key}'")
        return None
    name = task.args[key]
    if not isinstance(name, str) or name not in registry:
        raise ValidationError(f"Task '{task.name}' refers to unknown {table[:-1].replace('_', ' ')} '{name}'")
    return registry[name]


def _int_arg(task: TaskSpec, key: str) -> Optional[int]:
    value = task.args.get(key)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ValidationError(f"Task '{task.name}': '{key}' must be a non-negative integer")
    return value


def _prepare(ws: Workspace, task: TaskSpec) -> Dict[str, Any]:
    """Resolve the names a task refers to and check its argument shapes."""
    op, args = task.op, task.args
    inputs: Dict[str, Any] = {}
    if op in ('decompose', 'induce', 'averaging', 'split-idempotent', 'base-change', 'compare-end'):
        inputs['object'] = _lookup(ws, task, 'object', 'objects')
    if op in ('base-change', 'compare-end'):
        inputs['ring_hom'] = _lookup(ws, task, 'ring_hom', 'ring_homs')
        if inputs['object'].action != inputs['ring_hom'].source:
            raise ValidationError(f"Task '{task.name}': object does not live over the ring map's source")
        twists = args.get('twists', [0])
        if not isinstance(twists, list) or any(isinstance(t, bool) or not isinstance(t, int) for t in twists):
            raise ValidationError(f"Task '{task.name}': 'twists' must be a list of integers")
        inputs['twists'] = twists
    if op == 'split-idempotent':
        X = inputs['object']
        block = args.get('idempotent')
        if not isinstance(block, dict) or 'U0' not in block or 'U1' not in block:
            raise ValidationError(f"Task '{task.name}' needs an 'idempotent' with 'U0' and 'U1'")
        e = MFMorphism(X, X,
                       matrix_from_rows(ws.ring, X.p0, X.p0, 0, block['U0'], f"{task.name}.idempotent.U0"),
                       matrix_from_rows(ws.ring, X.p1, X.p1, 0, block['U1'], f"{task.name}.idempotent.U1"))
        report = check_morphism(e)
        if not report.ok:
            raise ValidationError(f"Task '{task.name}': idempotent is not a morphism: {report.violation}")
        mode = args.get('mode', 'auto')
        if mode not in ('auto', 'strict', 'homotopy'):
            raise ValidationError(f"Task '{task.name}': mode must be auto, strict or homotopy")
        inputs.update(idempotent=e, mode=mode)
    if op == 'stable-hom':
        inputs['source'] = _lookup(ws, task, 'source', 'objects')
        inputs['target'] = _lookup(ws, task, 'target', 'objects')
        parity = args.get('parity', 0)
        if parity not in (0, 1):
            raise ValidationError(f"Task '{task.name}': parity must be 0 or 1")
        inputs['parity'] = parity
    if op == 'strictify':
        inputs['homotopy_object'] = _lookup(ws, task, 'homotopy_object', 'homotopy_objects')
        inputs['expected'] = _lookup(ws, task, 'expected', 'objects', required=False)
    if op == 'kstab':
        inputs['expected'] = _lookup(ws, task, 'expected', 'objects', required=False)
        inputs['max_steps'] = _int_arg(task, 'max_steps')
        inputs['degree_bound'] = _int_arg(task, 'degree_bound')
        inputs['extra_steps'] = _int_arg(task, 'extra_steps') or 0
    if op == 'induce':
        expected = args.get('expected', [])
        if not isinstance(expected, list) or any(name not in ws.objects for name in expected):
            raise ValidationError(f"Task '{task.name}': 'expected' must list known objects")
        inputs['expected'] = [(name, ws.objects[name]) for name in expected]
    return inputs


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def _op_validate(ws: Workspace, inputs, builder: ReportBuilder, opts: RunOptions) -> Dict[str, Any]:
    for name, X in sorted(ws.objects.items()):
        builder.claim_valid(X, name)
    return {
        'ring': ws.ring.to_dict(),
        'group_order': ws.action.group.order,
        'objects': {name: {'rank': X.rank} for name, X in sorted(ws.objects.items())},
        'homotopy_objects': sorted(ws.homotopy_objects),
        'ring_homs': sorted(ws.ring_homs),
        'tasks': sorted(ws.problem.tasks)
    }


def record_decomposition(builder: ReportBuilder, X: EquivariantMF, seed: int):
    decomposition = ks_decompose(X, seed)
    for k, s in enumerate(decomposition.summands):
        name = builder.claim_valid(s.obj, f'summand{k}')
        pi = builder.claim_morphism(f'pi{k}', s.pi)
        iota = builder.claim_morphism(f'iota{k}', s.iota)
        builder.claim_equal([pi, iota], [f'id:{name}'], note='summand retraction')
        if s.contractible:
            builder.claim_homotopic([f'id:{name}'], [], f'contraction{k}', contraction(s.obj),
                                    note='contractible summand')
    if decomposition.total is not None:
        total = builder.claim_valid(decomposition.total, 'total')
        pi = builder.claim_morphism('pi_total', decomposition.pi_total)
        iota = builder.claim_morphism('iota_total', decomposition.iota_total)
        builder.claim_equal([iota, pi], [builder.identity_of(X)], note='decomposition is complete')
        builder.claim_equal([pi, iota], [f'id:{total}'], note='decomposition is complete')
    for c_index, c in enumerate(decomposition.classes):
        for member, certificate in sorted(c.isomorphisms.items()):
            builder.claim_isomorphism(f'class{c_index}.member{member}', certificate,
                                      note=f'summand {member} is isomorphic to summand {c.representative}')
    return decomposition.summary(), decomposition


def _op_decompose(ws: Workspace, inputs, builder: ReportBuilder, opts: RunOptions) -> Dict[str, Any]:
    X = inputs['object']
    builder.claim_valid(X, _object_name(ws, X))
    summary, _ = record_decomposition(builder, X, opts.seed)
    return summary


def _object_name(ws: Workspace, X: EquivariantMF) -> Optional[str]:
    for name, obj in sorted(ws.objects.items()):
        if obj == X:
            return name
    return None


def record_split(builder: ReportBuilder, X: EquivariantMF, e: MFMorphism, result,
                 name: Optional[str] = None) -> Dict[str, Any]:
    """Claims for a splitting: pi o iota = id and iota o pi = e, exactly or up to homotopy."""
    builder.claim_valid(X, name)
    image = builder.claim_valid(result.obj, 'image')
    e_name = builder.claim_morphism('e', e)
    pi = builder.claim_morphism('pi', result.pi)
    iota = builder.claim_morphism('iota', result.iota)
    if result.mode == 'strict':
        builder.claim_equal([e_name, e_name], [e_name], note='e is idempotent')
        builder.claim_equal([pi, iota], [f'id:{image}'])
        builder.claim_equal([iota, pi], [e_name])
    else:
        builder.claim_homotopic([e_name, e_name], [e_name], 'e_squared', result.homotopies['idempotent'],
                                note='e is idempotent up to homotopy')
        builder.claim_homotopic([pi, iota], [f'id:{image}'], 'pi_iota', result.homotopies['pi_iota'])
        builder.claim_homotopic([iota, pi], [e_name], 'iota_pi', result.homotopies['iota_pi'])
    return {'mode': result.mode, 'source_rank': X.rank, 'image_rank': result.obj.rank}


def _op_split_idempotent(ws: Workspace, inputs, builder: ReportBuilder, opts: RunOptions) -> Dict[str, Any]:
    X, e, mode = inputs['object'], inputs['idempotent'], inputs['mode']
    if mode == 'auto':
        mode = 'strict' if e @ e == e else 'homotopy'
    if mode == 'strict':
        result = split_strict_idempotent(X, e)
    else:
        result = split_homotopy_idempotent(X, e, opts.seed)
    return record_split(builder, X, e, result, _object_name(ws, X))


def _op_stable_hom(ws: Workspace, inputs, builder: ReportBuilder, opts: RunOptions) -> Dict[str, Any]:
    X, Y, parity = inputs['source'], inputs['target'], inputs['parity']
    hom = stable_hom(X, Y, parity)
    builder.claim_valid(X, _object_name(ws, X))
    builder.claim_valid(hom.target, _object_name(ws, hom.target))
    for k, u in enumerate(hom.representatives):
        builder.claim_morphism(f'basis{k}', u)
    return hom.summary()


def _op_kstab(ws: Workspace, inputs, builder: ReportBuilder, opts: RunOptions) -> Dict[str, Any]:
    ring = ws.ring
    max_steps = opts.max_steps if opts.max_steps is not None else inputs['max_steps']
    degree_bound = opts.degree_bound if opts.degree_bound is not None else inputs['degree_bound']
    tail = resolve_periodic(residue_field_module(ring), max_steps, degree_bound)
    if tail.period_start is None:
        raise PreconditionError("Residue field has a finite resolution; f is not singular at the origin")
    X = extract_mf(tail, tail.period_start)
    builder.claim_valid(X, 'kstab')
    summary: Dict[str, Any] = {'rank': X.rank, 'period_start': tail.period_start, 'resolution': tail.to_dict()}
    for offset in range(1, inputs['extra_steps'] + 1):
        step = tail.period_start + offset
        if step > tail.length:
            break
        builder.claim_valid(extract_mf(tail, step), f'kstab_step{step}')
    expected = inputs['expected']
    if expected is not None:
        certificate = find_isomorphism(X, forget(expected))
        summary['matches_expected'] = certificate is not None
        if certificate is not None:
            builder.claim_isomorphism('expected', certificate)
    return summary


def _op_induce(ws: Workspace, inputs, builder: ReportBuilder, opts: RunOptions) -> Dict[str, Any]:
    X = inputs['object']
    E = induce(forget(X), ws.action)
    builder.claim_valid(E, 'induced')
    summary, decomposition = record_decomposition(builder, E, opts.seed)
    matches = {}
    for name, Y in inputs['expected']:
        matches[name] = None
        for c_index, c in enumerate(decomposition.classes):
            certificate = find_isomorphism(decomposition.summands[c.representative].obj, Y)
            if certificate is not None:
                builder.claim_isomorphism(f'expected.{name}', certificate)
                matches[name] = c_index
                break
    summary['expected_matches'] = matches
    return summary


def record_strictification(builder: ReportBuilder, H: HomotopyEquivariantObject, result) -> Dict[str, Any]:
    """Claims that phi, psi are inverse up to homotopy and intertwine theta with the strict action."""
    P, Z = H.obj, result.obj
    action = H.action
    builder.claim_valid(P, 'underlying')
    builder.claim_valid(Z, 'strict')
    phi = builder.claim_morphism('phi', result.phi)
    psi = builder.claim_morphism('psi', result.psi)
    builder.claim_homotopic([phi, psi], [builder.identity_of(P)], 'phi_psi', result.homotopies['phi_psi'])
    builder.claim_homotopic([psi, phi], [builder.identity_of(result.phi.source)], 'psi_phi',
                            result.homotopies['psi_phi'])
    FZ = result.phi.source
    for g, label in enumerate(action.group.elements):
        theta = builder.claim_morphism(f'theta.{label}', H.theta[g])
        twisted_phi = MFMorphism(twisted_object(FZ, action, g), twisted_object(P, action, g),
                                 action.apply_matrix(g, result.phi.U0), action.apply_matrix(g, result.phi.U1))
        z_action = MFMorphism(twisted_object(FZ, action, g), FZ, Z.M0[g], Z.M1[g])
        builder.claim_morphism(f'sigma.{label}.phi', twisted_phi)
        builder.claim_morphism(f'strict_action.{label}', z_action)
        builder.claim_homotopic([theta, f'sigma.{label}.phi'], [phi, f'strict_action.{label}'],
                                f'compatible.{label}', result.homotopies[f'compatible:{label}'])
    return {'underlying_rank': P.rank, 'strict_rank': Z.rank}


def _op_strictify(ws: Workspace, inputs, builder: ReportBuilder, opts: RunOptions) -> Dict[str, Any]:
    H = inputs['homotopy_object']
    result = strictify(H, opts.seed)
    summary = record_strictification(builder, H, result)
    expected = inputs['expected']
    if expected is not None:
        certificate = find_isomorphism(result.obj, expected)
        summary['matches_expected'] = certificate is not None
        if certificate is not None:
            builder.claim_isomorphism('expected', certificate)
    return summary


def _op_base_change(ws: Workspace, inputs, builder: ReportBuilder, opts: RunOptions) -> Dict[str, Any]:
    X, phi = inputs['object'], inputs['ring_hom']
    Y = base_change(phi, X)
    builder.claim_valid(X, _object_name(ws, X))
    builder.claim_valid(Y, 'base_changed')
    comparisons = compare_end_homology(phi, X, inputs['twists'])
    return {
        'target_ring': phi.target.ring.to_dict(),
        'rank': Y.rank,
        'end_comparison': [c.to_dict() for c in comparisons]
    }


def _op_compare_end(ws: Workspace, inputs, builder: ReportBuilder, opts: RunOptions) -> Dict[str, Any]:
    X, phi = inputs['object'], inputs['ring_hom']
    comparisons = compare_end_homology(phi, X, inputs['twists'])
    builder.claim_valid(X, _object_name(ws, X))
    return {
        'end_comparison': [c.to_dict() for c in comparisons],
        'fully_faithful_on_object': all(c.isomorphism for c in comparisons)
    }


def record_averaging(builder: ReportBuilder, Y: EquivariantMF, result, name: Optional[str] = None) -> Dict[str, Any]:
    builder.claim_valid(Y, name)
    builder.claim_valid(result.induced, 'induced')
    p = builder.claim_morphism('p', result.p)
    j = builder.claim_morphism('j', result.j)
    builder.claim_equal([p, j], [builder.identity_of(Y)], note='p o j = id')
    return {'rank': Y.rank, 'induced_rank': result.induced.rank, 'checks': result.checks}


def _op_averaging(ws: Workspace, inputs, builder: ReportBuilder, opts: RunOptions) -> Dict[str, Any]:
    Y = inputs['object']
    return record_averaging(builder, Y, averaging_splitting(Y), _object_name(ws, Y))


def _op_is_isolated(ws: Workspace, inputs, builder: ReportBuilder, opts: RunOptions) -> Dict[str, Any]:
    return tjurina_algebra(ws.ring).to_dict()


OPERATIONS: Dict[str, Callable[..., Dict[str, Any]]] = {
    'validate': _op_validate,
    'decompose': _op_decompose,
    'split-idempotent': _op_split_idempotent,
    'stable-hom': _op_stable_hom,
    'kstab': _op_kstab,
    'induce': _op_induce,
    'strictify': _op_strictify,
    'base-change': _op_base_change,
    'compare-end': _op_compare_end,
    'averaging': _op_averaging,
    'is-isolated': _op_is_isolated,
}


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

def resolve_seed(ws: Workspace, opts: RunOptions) -> int:
    return opts.seed if opts.seed is not None else ws.problem.seed


def run_task(ws: Workspace, task_name: str, opts: Optional[RunOptions] = None) -> Report:
    opts = opts or RunOptions()
    task = ws.problem.tasks.get(task_name)
    if task is None:
        raise ValidationError(f"Unknown task '{task_name}'", {'tasks': sorted(ws.problem.tasks)})
    seed = resolve_seed(ws, opts)
    run_opts = RunOptions(seed, opts.degree_bound, opts.max_steps, opts.parallel)
    builder = ReportBuilder(task.op, task.name, seed)
    logger.info(f"Task '{task.name}' ({task.op}) started")
    with DebugTimer(f"task {task.name}"):
        summary = OPERATIONS[task.op](ws, ws.inputs[task.name], builder, run_opts)
    logger.info(f"Task '{task.name}' finished")
    return builder.build(summary)


def select_tasks(ws: Workspace, op: Optional[str] = None, task_name: Optional[str] = None) -> List[str]:
    """Task names to run: one by name, all with a given op, or all (sorted)."""
    tasks = ws.problem.tasks
    if task_name is not None:
        if task_name not in tasks:
            raise ValidationError(f"Unknown task '{task_name}'", {'tasks': sorted(tasks)})
        if op is not None and tasks[task_name].op != op:
            raise ValidationError(f"Task '{task_name}' is a '{tasks[task_name].op}' task, not '{op}'")
        return [task_name]
    names = sorted(name for name, t in tasks.items() if op is None or t.op == op)
    if not names:
        raise ValidationError(f"No '{op}' task in the problem" if op else "Problem defines no tasks")
    return names


def run_tasks(ws: Workspace, names: List[str], opts: Optional[RunOptions] = None) -> List[TaskOutcome]:
    """
    Run tasks sequentially, or on a thread pool with ``opts.parallel``.

    Outcomes come back in the order of ``names`` either way. In parallel mode
    the first failure cancels the tasks still running.
    """
    opts = opts or RunOptions()

    def one(name: str) -> TaskOutcome:
        try:
            return TaskOutcome(name, report=run_task(ws, name, opts))
        except MFGError as e:
            logger.error(f"Task '{name}' failed: {e.message}")
            return TaskOutcome(name, error=e)

    if not opts.parallel or len(names) < 2:
        return [one(name) for name in names]

    cancel = threading.Event()

    def guarded(name: str) -> TaskOutcome:
        with cancellation_scope(cancel):
            outcome = one(name)
        if not outcome.ok:
            cancel.set()
        return outcome

    with ThreadPoolExecutor(max_workers=Config.MFG_PARALLEL_WORKERS, thread_name_prefix='mfg-task') as pool:
        return list(pool.map(guarded, names))
