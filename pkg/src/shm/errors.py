"""Exception hierarchy. Every error raised by the package derives from ShmError."""


class ShmError(Exception):
    pass


# linear algebra
class ShapeMismatch(ShmError, ValueError):
    pass


class NotSymmetric(ShmError, ValueError):
    pass


class SingularAfterRegularization(ShmError, ArithmeticError):
    pass


class ConvergenceFailure(ShmError, ArithmeticError):
    pass


# training
class SingularCovariance(SingularAfterRegularization):
    pass


class NoPositiveSupportVector(ShmError):
    pass


class DegenerateModel(ShmError):
    pass


class QpFailure(ShmError, ArithmeticError):
    pass


class NotConverged(QpFailure):
    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class InfeasibleBox(QpFailure, ValueError):
    pass


class IndefiniteHessian(QpFailure, ValueError):
    pass


class TooLarge(ShmError, ValueError):
    pass


# model
class DimensionMismatch(ShapeMismatch):
    pass


class KernelModeUnsupported(ShmError):
    pass


class ZeroNormVector(ShmError, ArithmeticError):
    pass


class RidgedProjector(ShmError, ValueError):
    pass


# files
class ParseError(ShmError, ValueError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


class BadLabel(ParseError):
    pass


class RaggedRow(ParseError):
    pass


class VersionMismatch(ShmError, ValueError):
    pass


class CorruptField(ShmError, ValueError):
    pass
