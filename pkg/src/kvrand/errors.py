"""Exception hierarchy.

Every error raised on purpose by the package derives from ``KvrandError``.
The ``exit_code`` attribute is what the CLI returns for that error class.
"""


class KvrandError(Exception):
    exit_code = 3


class UsageError(KvrandError):
    exit_code = 1


class ParseError(KvrandError):
    exit_code = 2


class NumericError(KvrandError, ValueError):
    exit_code = 3


# kvector
class TooFewElements(NumericError):
    pass


class NonFiniteValue(NumericError):
    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class InvalidRange(NumericError):
    pass


# function inversion
class NonFiniteFunctionValue(NonFiniteValue):
    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class NoRootFound(NumericError):
    pass


class NoSignChange(NumericError):
    pass


class MaxIterationsExceeded(NumericError):
    """Raised when refinement runs out of iterations; ``estimate`` holds the best guess."""

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


# optimal grid / sampler
class EmptyGrid(NumericError):
    pass


class NotMonotone(NumericError):
    pass


class OutOfRange(NumericError):
    pass


class DegenerateBracket(NumericError):
    pass


# distributions
class DensityEvaluationError(NumericError):
    pass


class AllZeroDensity(NumericError):
    pass


class ExpressionSyntaxError(ParseError, SyntaxError):
    def __init__(self, message, position, expected=()):
        self.position = position
        self.expected = tuple(expected)
        text = f"{message} at position {position}"
        if self.expected:
            text += " (expected " + ", ".join(self.expected) + ")"
        ParseError.__init__(self, text)
        self.msg = text
        self.offset = position + 1

    def __str__(self):
        return self.msg


class UnknownIdentifier(ExpressionSyntaxError):
    pass


class TableFormatError(ParseError):
    pass


# lookup table
class EmptyTable(NumericError):
    pass


# statistics
class BadEdges(NumericError):
    pass


class EmptySample(NumericError):
    pass


class ZeroExpected(NumericError):
    pass


# artifact files
class BadArtifact(KvrandError):
    exit_code = 2
