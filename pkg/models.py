from dataclasses import dataclass, field
from typing import List, Optional, Dict, Any

from config import Config
from services.errors import ParseError, ValidationError

OPERATIONS = (
    'validate', 'decompose', 'split-idempotent', 'stable-hom', 'kstab', 'induce',
    'strictify', 'base-change', 'averaging', 'compare-end', 'is-isolated'
)

CLAIM_KINDS = ('valid-mf', 'morphism', 'equal', 'homotopic')


def _require_mapping(data: Any, what: str) -> Dict[str, Any]:
    if not isinstance(data, dict):
        raise ParseError(f"{what} must be a JSON object")
    return data


@dataclass
class TaskSpec:
    """A named operation with its arguments."""
    name: str
    op: str
    args: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'op': self.op,
            'args': self.args
        }

    @classmethod
    def from_dict(cls, name: str, data: Dict[str, Any]) -> 'TaskSpec':
        data = _require_mapping(data, f"Task '{name}'")
        if 'op' not in data:
            raise ParseError(f"Task '{name}' has no 'op'")
        op = str(data['op'])
        if op not in OPERATIONS:
            raise ValidationError(f"Task '{name}' uses unknown operation '{op}'", {'allowed': list(OPERATIONS)})
        return cls(name=name, op=op, args=_require_mapping(data.get('args', {}), f"Arguments of task '{name}'"))


@dataclass
class ProblemConfig:
    """A parsed problem file. Objects stay as raw JSON until the runner builds them."""
    ring: Dict[str, Any]
    group: Optional[Dict[str, Any]] = None
    objects: Dict[str, Any] = field(default_factory=dict)
    homotopy_objects: Dict[str, Any] = field(default_factory=dict)
    ring_homs: Dict[str, Any] = field(default_factory=dict)
    tasks: Dict[str, TaskSpec] = field(default_factory=dict)
    suite: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    schema: str = Config.MFG_SCHEMA_VERSION

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema': self.schema,
            'seed': self.seed,
            'ring': self.ring,
            'group': self.group,
            'objects': self.objects,
            'homotopy_objects': self.homotopy_objects,
            'ring_homs': self.ring_homs,
            'tasks': {name: task.to_dict() for name, task in self.tasks.items()},
            'suite': self.suite
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ProblemConfig':
        data = _require_mapping(data, "Problem config")
        schema = data.get('schema', Config.MFG_SCHEMA_VERSION)
        if schema != Config.MFG_SCHEMA_VERSION:
            raise ValidationError(f"Unsupported schema '{schema}'", {'expected': Config.MFG_SCHEMA_VERSION})
        if 'ring' not in data:
            raise ParseError("Problem config has no 'ring' block")
        seed = data.get('seed', Config.MFG_DEFAULT_SEED)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ValidationError("seed must be an integer")
        tasks = {
            name: TaskSpec.from_dict(name, spec)
            for name, spec in _require_mapping(data.get('tasks', {}), "tasks").items()
        }
        return cls(
            ring=_require_mapping(data['ring'], "ring"),
            group=_require_mapping(data['group'], "group") if data.get('group') is not None else None,
            objects=_require_mapping(data.get('objects', {}), "objects"),
            homotopy_objects=_require_mapping(data.get('homotopy_objects', {}), "homotopy_objects"),
            ring_homs=_require_mapping(data.get('ring_homs', {}), "ring_homs"),
            tasks=tasks,
            suite=_require_mapping(data.get('suite', {}), "suite"),
            seed=seed,
            schema=schema
        )


@dataclass
class Claim:
    """
    One re-checkable statement in a report.

    ``lhs``/``rhs`` are composition chains of map names (rightmost applied
    first); ``id:<object>`` names an identity and an empty ``rhs`` the zero map.
    """
    kind: str
    subject: Optional[str] = None
    lhs: List[str] = field(default_factory=list)
    rhs: List[str] = field(default_factory=list)
    homotopy: Optional[str] = None
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {'kind': self.kind}
        if self.subject is not None:
            data['subject'] = self.subject
        if self.kind in ('equal', 'homotopic'):
            data['lhs'] = list(self.lhs)
            data['rhs'] = list(self.rhs)
        if self.homotopy is not None:
            data['homotopy'] = self.homotopy
        if self.note:
            data['note'] = self.note
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Claim':
        data = _require_mapping(data, "Claim")
        kind = data.get('kind')
        if kind not in CLAIM_KINDS:
            raise ValidationError(f"Unknown claim kind '{kind}'", {'allowed': list(CLAIM_KINDS)})
        return cls(
            kind=kind,
            subject=data.get('subject'),
            lhs=[str(x) for x in data.get('lhs', [])],
            rhs=[str(x) for x in data.get('rhs', [])],
            homotopy=data.get('homotopy'),
            note=str(data.get('note', ''))
        )


@dataclass
class Report:
    """Self-contained result of one task: every object, map and homotopy a claim refers to."""
    op: str
    task: str
    seed: int
    summary: Dict[str, Any] = field(default_factory=dict)
    contexts: Dict[str, Any] = field(default_factory=dict)
    objects: Dict[str, Any] = field(default_factory=dict)
    maps: Dict[str, Any] = field(default_factory=dict)
    homotopies: Dict[str, Any] = field(default_factory=dict)
    claims: List[Claim] = field(default_factory=list)
    schema: str = Config.MFG_SCHEMA_VERSION

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema': self.schema,
            'op': self.op,
            'task': self.task,
            'seed': self.seed,
            'summary': self.summary,
            'contexts': self.contexts,
            'objects': self.objects,
            'maps': self.maps,
            'homotopies': self.homotopies,
            'claims': [c.to_dict() for c in self.claims]
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Report':
        data = _require_mapping(data, "Report")
        missing = [k for k in ('schema', 'op', 'task', 'objects', 'maps', 'homotopies', 'claims') if k not in data]
        if missing:
            raise ValidationError("Report is missing required fields", {'missing': missing})
        if data['schema'] != Config.MFG_SCHEMA_VERSION:
            raise ValidationError(f"Unsupported report schema '{data['schema']}'",
                                  {'expected': Config.MFG_SCHEMA_VERSION})
        if not isinstance(data['claims'], list):
            raise ValidationError("Report claims must be a list")
        return cls(
            op=str(data['op']),
            task=str(data['task']),
            seed=int(data.get('seed', 0)),
            summary=data.get('summary', {}),
            contexts=_require_mapping(data.get('contexts', {}), "contexts"),
            objects=_require_mapping(data['objects'], "objects"),
            maps=_require_mapping(data['maps'], "maps"),
            homotopies=_require_mapping(data['homotopies'], "homotopies"),
            claims=[Claim.from_dict(c) for c in data['claims']],
            schema=data['schema']
        )
