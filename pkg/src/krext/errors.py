"""Exception taxonomy shared by the whole package.

Contract violations (bad inputs, broken preconditions) and solver
failures (an optimizer that could not certify its answer) are kept
apart so callers, and in particular the command line driver, can map
them to distinct exit codes.
"""


class ContractError(ValueError):
    """An input violates a documented precondition or invariant."""


class MalformedInputError(ContractError):
    """Structurally broken input: wrong shape, wrong type, unknown key."""


class SolverError(RuntimeError):
    """An optimizer failed to produce a certified answer."""


class JsonParseError(ValueError):
    """A file is not valid JSON at all; carries position information.

    Distinct from MalformedInputError (valid JSON, wrong schema) so the
    command line can report the parse position and exit differently.
    """

    def __init__(self, path: str, lineno: int, colno: int, reason: str):
        super().__init__(f"{path}:{lineno}:{colno}: {reason}")
        self.path = path
        self.lineno = lineno
        self.colno = colno
        self.reason = reason
