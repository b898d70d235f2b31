"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes): problems with
the inputs themselves (files, schemas, missing landmarks) and problems that
only surface during computation (degenerate geometry, disconnected surfaces).
"""


class MandimorphError(Exception):
    """Base class for all package errors."""


class InputError(MandimorphError):
    """Invalid or inconsistent input: files, schemas, missing landmarks."""


class ComputationError(MandimorphError):
    """Geometrically degenerate or infeasible computation."""


class MeshParseError(InputError):
    """A mesh file could not be parsed in the stated format."""


class MeshValidationError(InputError):
    """Mesh data violates a structural invariant."""


class LandmarkError(InputError):
    """Missing, duplicated or inconsistent landmarks."""


class PairSpecError(InputError):
    """Invalid landmark-pair specification."""


class GeodesicError(ComputationError):
    """No surface path exists between the query points."""


class DegenerateGeometryError(ComputationError):
    """Geometry too degenerate to define the requested quantity."""
