from flask import Blueprint, jsonify, request

from services.errors import ParseError
from services.exact_algebra import GradedRing, tjurina_algebra
from services.mf_core import require_valid, stable_hom, validate_mf
from services.serialization import action_from_dict, mf_from_dict

objects_bp = Blueprint('objects', __name__, url_prefix='/api/objects')


def _body() -> dict:
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise ParseError("Request body must be a JSON object")
    return data


def _context(data: dict):
    if 'ring' not in data:
        raise ParseError("Request needs a 'ring' block")
    group = data.get('group') or {}
    return action_from_dict({'ring': data['ring'], 'group': data.get('group'), 'action': group.get('action', {})})


def _object(data: dict, key: str, action):
    if key not in data:
        raise ParseError(f"Request needs '{key}'")
    return mf_from_dict(data[key], action, key)


@objects_bp.route('/validate', methods=['POST'])
def validate_object():
    """
    Check AB = BA = f*I, degrees and the equivariant structure.

    JSON body: ring, optional group, object. Invalid objects are reported,
    not rejected: the response is 200 with ok = false and the violation.
    """
    data = _body()
    action = _context(data)
    X = _object(data, 'object', action)
    report = validate_mf(X)
    return jsonify({**report.to_dict(), 'rank': X.rank})


@objects_bp.route('/stable-hom', methods=['POST'])
def stable_hom_space():
    """Dimension and basis of the stable Hom space. JSON body: ring, group, source, target, parity."""
    data = _body()
    action = _context(data)
    X = require_valid(_object(data, 'source', action), 'source')
    Y = require_valid(_object(data, 'target', action), 'target')
    parity = data.get('parity', 0)
    if parity not in (0, 1):
        raise ParseError("parity must be 0 or 1")
    hom = stable_hom(X, Y, parity)
    return jsonify({**hom.summary(), 'basis': [{'U0': u.U0.to_text(), 'U1': u.U1.to_text()}
                                               for u in hom.representatives]})


@objects_bp.route('/is-isolated', methods=['POST'])
def is_isolated():
    """Tjurina algebra of the potential. JSON body: ring."""
    data = _body()
    if 'ring' not in data:
        raise ParseError("Request needs a 'ring' block")
    return jsonify(tjurina_algebra(GradedRing.from_dict(data['ring'])).to_dict())
