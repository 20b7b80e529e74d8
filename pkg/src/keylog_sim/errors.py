"""Exception hierarchy.

Errors flagged ``numerical = True`` signal a failed simulation (truncation,
decoding) rather than bad input; the CLI maps them to exit code 2.
"""


class KeylogError(Exception):
    code = "keylog_error"
    numerical = False

    def __init__(self, message, **context):
        super().__init__(message)
        self.message = message
        self.context = context


class ConfigError(KeylogError, ValueError):
    code = "config_error"


class DimensionTooSmall(KeylogError, ValueError):
    code = "dimension_too_small"


class DimensionMismatch(KeylogError, ValueError):
    code = "dimension_mismatch"


class DimensionGuardExceeded(KeylogError, ValueError):
    code = "dimension_guard_exceeded"


class BadAssignment(KeylogError, ValueError):
    code = "bad_assignment"


class NotAQubit(KeylogError, ValueError):
    code = "not_a_qubit"


class TruncationRisk(KeylogError, ArithmeticError):
    code = "truncation_risk"
    numerical = True


class PhaseOutOfAlphabet(KeylogError, ArithmeticError):
    code = "phase_out_of_alphabet"
    numerical = True


class EntanglementResidue(KeylogError, ArithmeticError):
    code = "entanglement_residue"
    numerical = True


class IoFailure(KeylogError, OSError):
    code = "io_failure"
