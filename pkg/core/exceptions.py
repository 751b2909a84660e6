"""
Lab error hierarchy.

Every failure the numerical apps raise on purpose is a ``LabError``. Commands
render it with ``as_dict()`` and exit with ``exit_code``.
"""


class LabError(Exception):
    """
    Base class for errors raised by the lab.

    Attributes:
        kind (str): Machine-readable error kind.
        exit_code (int): Process exit code used by the management commands.
        context (dict): Extra data describing the failure.
    """
    kind = 'internal_error'
    exit_code = 1

    def __init__(self, message, kind=None, **context):
        super().__init__(message)
        self.message = message
        if kind:
            self.kind = kind
        self.context = context

    def __reduce__(self):
        return (_rebuild, (self.__class__, self.message, self.kind, self.context))

    def as_dict(self):
        """
        Return the error as a JSON-serializable dict.

        Returns:
            dict: kind, message, context and exit code.
        """
        return {
            'kind': self.kind,
            'message': self.message,
            'context': self.context,
            'exit_code': self.exit_code,
        }


def _rebuild(cls, message, kind, context):
    return cls(message, kind, **context)


class StructuralError(LabError):
    """Inputs have the wrong shape, length or size."""
    kind = 'structural_error'


class NumericError(LabError):
    """Non-finite data or a numerically meaningless result."""
    kind = 'numeric_error'


class DomainError(LabError):
    """A parameter lies outside the regime where the problem is posed."""
    kind = 'domain_error'
    exit_code = 2


class FrequencyOutOfWindow(DomainError):
    kind = 'frequency_out_of_window'


class MassBelowThreshold(DomainError):
    kind = 'mass_below_threshold'


class ConvergenceError(LabError):
    """An iterative method stopped without meeting its tolerance."""
    kind = 'convergence_error'
    exit_code = 3
