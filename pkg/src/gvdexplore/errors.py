"""Exception types raised across the package."""


class GvdExploreError(Exception):
    """Base class for all package errors."""


class MapFormatError(GvdExploreError):
    """Map file failed to parse; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)


class InvalidDimensionsError(GvdExploreError):
    """Map has zero area or inconsistent dimensions."""


class OutOfBoundsError(GvdExploreError):
    """A world point lies outside the grid."""


class UndefinedFieldError(GvdExploreError):
    """Distance transform requested on a grid with no obstacle cells."""


class InvalidStateError(GvdExploreError):
    """Simulation state violates a precondition (e.g. robot inside a wall)."""


class ShapeMismatchError(GvdExploreError):
    """Two rasters that must share a shape do not."""


class MissingNodeError(GvdExploreError):
    """A node id is not present in the graph."""


class OrphanBranchError(GvdExploreError):
    """A branch component has no connection to any stem node."""


class InvalidStartError(GvdExploreError):
    """Path planning start cell is occupied or unknown."""
