"""Exception hierarchy shared by all roomanc modules."""


class RoomAncError(Exception):
    """Base class for every error raised by roomanc."""


class InvalidArgumentError(RoomAncError, ValueError):
    pass


class InvalidGeometryError(RoomAncError, ValueError):
    """Source/receiver placement that the image model cannot handle."""


class DegenerateInputError(RoomAncError, ValueError):
    pass


class InsufficientDecayError(RoomAncError, ValueError):
    """The energy decay curve does not span the fit range."""


class InsufficientDataError(RoomAncError, ValueError):
    pass


class InvalidSpecError(RoomAncError, ValueError):
    pass


class InvalidConfigError(RoomAncError, ValueError):
    pass


class DivergenceError(InsufficientDataError):
    """Every simulation of a study diverged."""
