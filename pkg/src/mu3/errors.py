"""Exception hierarchy.

Three error classes map onto the CLI exit codes: geometry problems exit 2,
numerical failures exit 3, input/output problems exit 4.
"""


class Mu3Error(Exception):
    exit_code = 1


class GeometryError(Mu3Error):
    exit_code = 2


class NumericsError(Mu3Error):
    exit_code = 3


class InputOutputError(Mu3Error):
    exit_code = 4


# geometry
class ComponentsIntersect(GeometryError):
    pass


class TubesOverlap(GeometryError):
    pass


class EmbeddingFailed(GeometryError):
    pass


class LeftTube(GeometryError):
    pass


class ClosureFailed(GeometryError):
    pass


# numerics
class PoleSingularity(NumericsError):
    pass


class UnresolvablePole(NumericsError):
    pass


class UndersampledField(NumericsError):
    pass


class NotExact(NumericsError):
    pass


class GridMismatch(NumericsError):
    pass


class NotRegularValue(NumericsError):
    pass


class BrokenChain(NumericsError):
    pass


class EstimatorUnreliable(NumericsError):
    pass


# input / output
class UnknownLink(InputOutputError):
    pass


class IncompleteTable(InputOutputError):
    pass


class ConfigError(InputOutputError):
    pass
