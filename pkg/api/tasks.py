import uuid

from flask import Blueprint, jsonify, request

from models import ProblemConfig
from services.errors import ParseError, ValidationError
from services.job_manager import job_manager
from services.report_store import ReportStore
from services.task_runner import RunOptions, build_workspace, run_task, select_tasks

tasks_bp = Blueprint('tasks', __name__, url_prefix='/api/tasks')


def _optional_int(data: dict, key: str):
    value = data.get(key)
    if value is not None and (isinstance(value, bool) or not isinstance(value, int)):
        raise ValidationError(f"'{key}' must be an integer")
    return value


@tasks_bp.route('/run', methods=['POST'])
def start_task():
    """
    Validate a problem and start one of its tasks as a background job.

    JSON body:
    - problem: the problem config (same schema as the CLI)
    - task: name of the task to run
    - seed, degree_bound, max_steps: optional overrides
    - save: write the report to the report directory when done

    The problem is validated before the job is created, so malformed input
    fails fast with 400/422. Poll /api/tasks/<job_id> for the report.
    """
    data = request.get_json(silent=True)
    if not isinstance(data, dict) or 'problem' not in data or 'task' not in data:
        raise ParseError("Request needs 'problem' and 'task'")
    ws = build_workspace(ProblemConfig.from_dict(data['problem']))
    task_name = select_tasks(ws, task_name=str(data['task']))[0]
    opts = RunOptions(seed=_optional_int(data, 'seed'), degree_bound=_optional_int(data, 'degree_bound'),
                      max_steps=_optional_int(data, 'max_steps'))
    save = bool(data.get('save', False))

    def work():
        report = run_task(ws, task_name, opts)
        result = {'report': report.to_dict()}
        if save:
            result['path'] = ReportStore().save(report)
        return result

    job_id = str(uuid.uuid4())
    job_manager.create_job(job_id, task_name)
    job_manager.run_in_background(job_id, work)
    return jsonify({
        'status': 'started',
        'job_id': job_id,
        'task': task_name,
        'op': ws.problem.tasks[task_name].op
    }), 202


@tasks_bp.route('/<job_id>', methods=['GET'])
def get_job_status(job_id):
    job = job_manager.get_job(job_id)
    if not job:
        return jsonify({'error': 'Job not found'}), 404
    return jsonify(job.to_dict())


@tasks_bp.route('/<job_id>/cancel', methods=['POST'])
def cancel_job(job_id):
    """Ask a running job to stop; it halts at the next cancellation check."""
    if not job_manager.cancel(job_id):
        return jsonify({'error': 'Job not found or already finished'}), 404
    return jsonify({'message': 'Cancellation requested', 'job_id': job_id})


@tasks_bp.route('/<job_id>', methods=['DELETE'])
def delete_job(job_id):
    if not job_manager.get_job(job_id):
        return jsonify({'error': 'Job not found'}), 404
    job_manager.cancel(job_id)
    job_manager.delete_job(job_id)
    return jsonify({'message': 'Job deleted'})
