"""Exception types shared across the package."""


class GeometryDomainError(ValueError):
    """A point or radius lies outside the valid chart of the model space."""


class HemisphereExitError(GeometryDomainError):
    """A computation left the open hemisphere (r >= pi/2) in the K=+1 space."""

    def __init__(self, message, exit_bound=None):
        super().__init__(message)
        self.exit_bound = exit_bound


class UnsupportedSpaceError(ValueError):
    """Operation requested in a space form where it is not defined."""


class CausticError(RuntimeError):
    """The equidistant flow developed a caustic (area factor J <= 0)."""


class CompatibilityError(RuntimeError):
    """The discrete Neumann system is inconsistent with the supplied constant."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class PreconditionError(RuntimeError):
    """A documented operation precondition was violated.

    ``invariant`` names the violated contract so the CLI can report it.
    """

    def __init__(self, invariant, message):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class SpecFileError(ValueError):
    """A domain description file failed to parse or violated an invariant."""

    def __init__(self, invariant, message):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant
