"""Exception hierarchy shared by all modules."""


class ContactQMError(Exception):
    """Base class for every error raised by this package."""


class ChartSingular(ContactQMError):
    """The pivot component of a chart vanishes (point outside the chart domain)."""


class DimensionMismatch(ContactQMError, ValueError):
    pass


class DomainError(ContactQMError, ValueError):
    """Arguments outside the domain of a closed-form expression."""


class NonMarkovian(ContactQMError):
    """Master-equation form requested for a contact Hamiltonian nonlinear in S."""


class UnsupportedScenario(ContactQMError):
    pass


class DegenerateV(ContactQMError, ValueError):
    """Coupling V vanishes and the requested closed form does not apply."""


class StepFailure(ContactQMError):
    """The integrator could not meet its tolerance.

    Attributes
    ----------
    t : float
        Time of the last accepted state.
    state : ExtendedState
        Last accepted state.
    """

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class ScenarioError(ContactQMError, ValueError):
    """Malformed scenario file; carries line number and field name."""

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field
