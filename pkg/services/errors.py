"""
Structured errors shared by every service.

Each error carries a machine-readable ``error_code`` and optional ``details``
so the CLI can pick an exit code and the HTTP API can render a JSON body
without string matching.
"""
from typing import Any, Dict, Optional


class MFGError(Exception):
    """Base class for all toolkit failures."""

    error_code = 'computation_error'

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'error': self.message,
            'error_code': self.error_code,
            'details': self.details
        }


class ParseError(MFGError):
    """Malformed polynomial text, JSON or config structure."""
    error_code = 'parse_error'


class ValidationError(MFGError):
    """Input parses but violates an invariant (config, ring, group, object)."""
    error_code = 'validation_error'


class MixedRingError(MFGError):
    """Operands live over different graded rings."""
    error_code = 'mixed_ring'


class DimensionMismatchError(MFGError):
    """Matrix or module shapes do not fit together."""
    error_code = 'dimension_mismatch'


class UnsupportedCharacteristicError(MFGError):
    """The requested method is not valid in this characteristic."""
    error_code = 'unsupported_characteristic'


class PreconditionError(MFGError):
    """An operation precondition failed; ``details`` holds the witness."""
    error_code = 'precondition_failed'


class DegreeWindowExhausted(MFGError):
    """Syzygy generators did not stabilize inside the degree window."""
    error_code = 'degree_window_exhausted'


class NoPeriodicityError(MFGError):
    """The resolution did not become 2-periodic within max_steps."""
    error_code = 'no_periodicity'


class UnsupportedAlgebraError(MFGError):
    """Idempotent search cannot decide the structure of this algebra."""
    error_code = 'unsupported_algebra'


class ComputationCancelled(MFGError):
    """Cooperative cancellation was requested by the caller."""
    error_code = 'cancelled'


class InternalError(MFGError):
    """A postcondition that should always hold did not."""
    error_code = 'internal_error'


class AcceptanceFailure(MFGError):
    """A property checked by the acceptance suite did not hold."""
    error_code = 'acceptance_failure'
