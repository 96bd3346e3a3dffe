"""Exception hierarchy shared by the whole package."""


class XCFError(Exception):
    """Base class for every error raised by xcftorus."""


class InvalidParam(XCFError, ValueError):
    pass


class Infeasible(XCFError, ValueError):
    """Boundary meridian too short for a negatively curved filling."""


class CurvatureSignViolation(XCFError, ValueError):
    pass


class NonFinite(XCFError, ArithmeticError):
    pass


class PositivityLost(XCFError, ArithmeticError):
    pass


class EllipticityLost(XCFError, ArithmeticError):
    """The diffusion coefficient alpha reached the positivity floor."""


class MaxStepsExceeded(XCFError, RuntimeError):
    pass


class ConfigError(XCFError, ValueError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class ValidationError(ConfigError):
    pass
