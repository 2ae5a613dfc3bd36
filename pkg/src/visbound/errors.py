"""Exception hierarchy shared by the library and the CLI."""


class VisboundError(Exception):
    """Base class for all library errors."""


class InvalidDimensionError(VisboundError, ValueError):
    pass


class DomainError(VisboundError, ValueError):
    """An argument lies outside the region where a formula is defined."""


class InvalidInputError(VisboundError, ValueError):
    pass


class InfeasibleError(VisboundError):
    """Transport instance has unequal total row and column mass."""


class SolverError(VisboundError):
    pass


class TrappedRayError(VisboundError):
    pass


class SingularHitError(VisboundError):
    """A ray struck a polygon vertex, where the reflection law is undefined."""


class SceneError(InvalidInputError):
    pass
