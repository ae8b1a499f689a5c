"""Exception hierarchy shared by every module."""


class MinoriaError(Exception):
    """Base class for all errors raised by this package."""


class DataError(MinoriaError, ValueError):
    """Input data is malformed or lacks a required column."""


class GeometryError(MinoriaError, ValueError):
    """A geometric precondition does not hold (e.g. no positive ray intersection)."""


class DegenerateProjectionError(MinoriaError, ValueError):
    """The projection has zero spread, so skewness is undefined."""


class RankDeficientError(MinoriaError, ValueError):
    """The centred scatter matrix is singular or too badly conditioned to solve."""


class MedianEqualsMeanError(MinoriaError, ValueError):
    """The median tuple coincides with the mean, so the stationary direction is undefined."""


class BoundInapplicableError(MinoriaError, ValueError):
    """The median changed under rotation; the rotation bound does not apply."""


class SweepError(MinoriaError, RuntimeError):
    """The kinetic order became inconsistent while sweeping (degeneracy handling failed)."""


class OptimizerError(MinoriaError, RuntimeError):
    """A numerical optimizer failed to reach the feasibility tolerance."""
