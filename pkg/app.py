from flask import Flask, jsonify
from flask_cors import CORS
import os
import logging

from config import Config
from services.errors import MFGError, ParseError, ValidationError

# Configure logging
logging.basicConfig(
    level=logging.DEBUG if Config.DEV_DEBUG else logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

app = Flask(__name__)
app.config.from_object(Config)

# Enable CORS for API endpoints
CORS(app, resources={r"/api/*": {"origins": "*"}})

os.makedirs(Config.MFG_REPORT_DIR, exist_ok=True)

# Register blueprints
from api.objects import objects_bp
from api.tasks import tasks_bp
from api.reports import reports_bp

app.register_blueprint(objects_bp)
app.register_blueprint(tasks_bp)
app.register_blueprint(reports_bp)


def status_for(error: MFGError) -> int:
    if isinstance(error, ParseError):
        return 400
    if isinstance(error, ValidationError):
        return 422
    return 500


@app.errorhandler(MFGError)
def handle_mfg_error(error: MFGError):
    status = status_for(error)
    if status == 500:
        app.logger.error(f"Computation failed: {error.message}")
    return jsonify(error.to_dict()), status


@app.route('/api')
def api_info():
    """API information endpoint."""
    return jsonify({
        'message': 'Equivariant Matrix Factorization API',
        'version': '1.0.0',
        'schema': Config.MFG_SCHEMA_VERSION,
        'endpoints': {
            '/api/objects/validate': 'POST - Validate a matrix factorization',
            '/api/objects/stable-hom': 'POST - Stable Hom space between two objects',
            '/api/objects/is-isolated': 'POST - Tjurina algebra of the potential',
            '/api/tasks/run': 'POST - Start a problem task as a background job',
            '/api/tasks/<job_id>': 'GET/DELETE - Job status and report, or delete',
            '/api/tasks/<job_id>/cancel': 'POST - Cancel a running job',
            '/api/reports': 'GET - List stored reports',
            '/api/reports/<task>': 'GET - Stored report',
            '/api/reports/verify': 'POST - Re-check the certificates of a report',
            '/health': 'GET - Health check'
        }
    })


@app.route('/health')
def health():
    """Health check endpoint for deployment monitoring."""
    return jsonify({'status': 'healthy'}), 200


if __name__ == '__main__':
    port = int(os.environ.get('PORT', 5000))
    app.run(host='0.0.0.0', port=port, debug=Config.DEV_DEBUG)
