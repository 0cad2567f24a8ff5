"""Exception hierarchy shared by every datavalor module.

Validation problems (bad input shape, unknown ids, out-of-range
parameters) and math-domain problems (degenerate bounds, undefined
alignment, non-convergence) are kept distinct so the CLI and the HTTP
service can map them to different exit codes / status codes.
"""

from __future__ import annotations


class DataValorError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(DataValorError):
    """Input is malformed or violates a declared precondition.

    ``path`` is a JSON-pointer-ish location inside the offending
    document, e.g. ``/candidates/0/icf``. It is empty when the error
    is not tied to a specific field.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{message} (at {path})" if path else message)
        self.message = message


class MathError(DataValorError):
    """The computation is undefined for the given values.

    Examples: v_max == v_min in midpoint potential, a negative target
    paired with a zero metric under the ratio alignment, temporal
    correction below 1, power iteration failing to converge.
    """


class NotFoundError(DataValorError):
    """A referenced entity (metric, scenario, candidate, session) does not exist."""


class OrderError(DataValorError):
    """A screening answer was submitted for a question that is not the current one."""
