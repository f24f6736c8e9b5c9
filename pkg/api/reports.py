from flask import Blueprint, jsonify, request

from services.certificates import verify_report
from services.errors import ParseError
from services.report_store import ReportStore

reports_bp = Blueprint('reports', __name__, url_prefix='/api/reports')


@reports_bp.route('/verify', methods=['POST'])
def verify():
    """Re-check every certificate of the report in the request body."""
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise ParseError("Request body must be a report object")
    return jsonify(verify_report(data).to_dict())


@reports_bp.route('', methods=['GET'])
def list_reports():
    return jsonify({'reports': ReportStore().list_all()})


@reports_bp.route('/<task>', methods=['GET'])
def get_report(task):
    data = ReportStore().load(task)
    if data is None:
        return jsonify({'error': 'Report not found'}), 404
    return jsonify(data)


@reports_bp.route('/<task>/verify', methods=['GET'])
def verify_stored(task):
    data = ReportStore().load(task)
    if data is None:
        return jsonify({'error': 'Report not found'}), 404
    return jsonify(verify_report(data).to_dict())
