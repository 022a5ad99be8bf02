from typing import Optional


class BlowupError(Exception):
    pass


class DimensionError(BlowupError, ValueError):
    pass


class FieldMismatchError(DimensionError):
    pass


class ZeroVectorError(BlowupError, ValueError):
    pass


class SingularMatrixError(BlowupError, ValueError):
    pass


class OutsideChartError(BlowupError, ValueError):
    pass


class IncidenceError(BlowupError, ValueError):
    pass


class LiftError(BlowupError, ValueError):
    pass


class MapSpecError(BlowupError, ValueError):
    pass


class StepScheduleError(BlowupError, ValueError):
    pass


class ConjugacyError(BlowupError, ValueError):
    pass


class AllocationError(BlowupError, ValueError):
    pass


class ScheduleError(BlowupError, ValueError):
    pass


class LevelOrderError(BlowupError, ValueError):
    pass


class ConfigError(BlowupError, ValueError):
    pass


class UsageError(BlowupError, ValueError):
    pass


class OrbitError(BlowupError, ValueError):
    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class NonFiniteError(BlowupError, ValueError):
    pass


class CurveError(BlowupError, ValueError):
    pass


class InvarianceError(BlowupError, ValueError):
    pass
