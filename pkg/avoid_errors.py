"""
avoid_errors.py

Exception tree shared by every frenet-avoid module.
Callers that only care "did the pipeline refuse this input" catch AvoidError.
"""


class AvoidError(Exception):
    """Root of all frenet-avoid errors."""


class ConfigError(AvoidError):
    """Invalid configuration, calibration, scenario or dataclass field."""


# ---- geometry ----
class EmptyRegion(AvoidError):
    """No valid depth cell inside the bounding box."""


class BoundingBoxError(AvoidError, ValueError):
    """Bounding box empty or outside the depth map."""


class NonPositiveDepth(AvoidError):
    pass


# ---- perception ----
class UnknownModel(AvoidError):
    pass


# ---- reference path ----
class DegenerateWaypoints(AvoidError):
    pass


class OutOfRange(AvoidError):
    pass


class ProjectionAmbiguous(AvoidError):
    pass


class FoldOver(AvoidError):
    """Lateral offset reaches the path's centre of curvature (|d·k| >= 1)."""


# ---- planner ----
class NonPositiveHorizon(AvoidError):
    pass


class NoFeasiblePath(AvoidError):
    pass


# ---- tracker ----
class EmptyTrajectory(AvoidError):
    pass


class CoincidentTarget(AvoidError):
    pass


# ---- harness ----
class UnknownCase(AvoidError):
    pass
