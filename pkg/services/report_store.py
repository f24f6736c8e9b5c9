import json
import logging
import os
import tempfile
from typing import Any, Dict, List, Optional

from config import Config
from models import Report
from services.errors import ParseError

logger = logging.getLogger(__name__)


def render_report(report: Report) -> str:
    """Canonical bytes of a report: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + '\n'


def render_text(report: Report) -> str:
    """Short human-readable rendering: summary fields and one line per claim."""
    lines = [f"{report.op} '{report.task}' (seed {report.seed})"]
    for key, value in sorted(report.summary.items()):
        lines.append(f"  {key}: {json.dumps(value, sort_keys=True)}")
    for index, claim in enumerate(report.claims):
        if claim.kind in ('valid-mf', 'morphism'):
            statement = f"{claim.kind} {claim.subject}"
        else:
            rhs = ' o '.join(claim.rhs) or '0'
            relation = '==' if claim.kind == 'equal' else f'~[{claim.homotopy}]'
            statement = f"{' o '.join(claim.lhs)} {relation} {rhs}"
        lines.append(f"  [{index}] {statement}" + (f"  # {claim.note}" if claim.note else ''))
    return '\n'.join(lines)


class ReportStore:
    """Report files in one directory, written with write-then-rename."""

    def __init__(self, report_dir: Optional[str] = None):
        self._report_dir = report_dir or Config.MFG_REPORT_DIR

    @property
    def report_dir(self) -> str:
        return self._report_dir

    def path_for(self, task: str) -> str:
        return os.path.join(self._report_dir, f"{task}.json")

    def save(self, report: Report) -> str:
        """Write atomically; readers never observe a partial report."""
        return self.save_text(report.task, render_report(report))

    def save_json(self, name: str, data: Dict[str, Any]) -> str:
        return self.save_text(name, json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + '\n')

    def save_text(self, name: str, text: str) -> str:
        os.makedirs(self._report_dir, exist_ok=True)
        path = self.path_for(name)
        fd, temp_path = tempfile.mkstemp(dir=self._report_dir, prefix=f".{name}.", suffix='.tmp')
        try:
            with os.fdopen(fd, 'w', encoding='utf-8') as f:
                f.write(text)
            os.replace(temp_path, path)
        except OSError:
            if os.path.exists(temp_path):
                os.remove(temp_path)
            raise
        logger.info(f"Report written: {path}")
        return path

    def load(self, task: str) -> Optional[Dict[str, Any]]:
        path = self.path_for(task)
        if not os.path.exists(path):
            return None
        return load_report_file(path)

    def list_all(self) -> List[str]:
        if not os.path.exists(self._report_dir):
            return []
        return sorted(name[:-5] for name in os.listdir(self._report_dir)
                      if name.endswith('.json') and not name.startswith('.'))

    def delete(self, task: str) -> bool:
        path = self.path_for(task)
        if not os.path.exists(path):
            return False
        os.remove(path)
        return True


def load_report_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(f"Report {path} is not valid JSON: {e}")
