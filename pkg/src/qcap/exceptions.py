"""Exception types raised across the toolkit."""


class QcapError(Exception):
    """Base class for every error raised by qcap."""


class NonSquare(QcapError, ValueError):
    pass


class NotHermitian(QcapError, ValueError):
    pass


class NoConvergence(QcapError, RuntimeError):
    pass


class InvalidP(QcapError, ValueError):
    pass


class DimensionMismatch(QcapError, ValueError):
    pass


class InvalidParameter(QcapError, ValueError):
    pass


class InvalidState(QcapError, ValueError):
    pass


class InvalidD(QcapError, ValueError):
    pass


class InvalidQ(QcapError, ValueError):
    pass


class NotCovariant(QcapError, ValueError):
    pass


class EmptyGrid(QcapError, ValueError):
    pass


class RouteDisagreement(QcapError, RuntimeError):
    """The two derivative routes returned values further apart than allowed."""

    def __init__(self, message, route_i=None, route_ii=None):
        super().__init__(message)
        self.route_i = route_i
        self.route_ii = route_ii


class InvalidN(QcapError, ValueError):
    pass


class SchemaError(QcapError, ValueError):
    pass


class InvalidChannel(QcapError, ValueError):
    """Channel data parsed but failed validation; ``residuals`` holds the numbers."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class FileNotFound(QcapError, FileNotFoundError):
    pass
