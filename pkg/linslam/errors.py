# -*- encoding: utf-8 -*-

"""
Exception Hierarchy of the LinSLAM Package

All the errors raised by the package derive from :class:`LinSLAMError`
so that a caller (for example the command line interface) can handle
the whole family with a single ``except`` clause, while the individual
classes keep enough context (a key, a step index, a line number) to
produce a readable diagnostic.
"""

class LinSLAMError(Exception):
    """Base Class for all the Errors Raised by :mod:`linslam`"""


class InvalidInput(LinSLAMError, ValueError):
    """
    Input Violates a Documented Precondition

    :type  line: int
    :param line: Optional 1-based line number, set when the invalid
        value was read from a file.
    """

    def __init__(self, message : str, line : int = None) -> None:
        super().__init__(message)
        self.line = line


class DegenerateRotation(LinSLAMError):
    """Euler Angle Extraction is Too Close to the Gimbal Lock"""


class DegenerateFrame(LinSLAMError):
    """Coordinate Frame Defining Features are Coincident or Collinear"""


class DegenerateCommonSet(LinSLAMError):
    """Common Features of Two 3D Maps are (Numerically) Collinear"""


class SingularSystem(LinSLAMError):
    """A Sparse Symmetric System is not Positive Definite"""


class SingularMarginalization(LinSLAMError):
    """The Information Block of the Removed Entries is not Invertible"""


class NotConverged(LinSLAMError):
    """
    An Iterative Solver Exhausted its Iteration Limit

    :type  result: object
    :param result: The (non-converged) result, returned to the caller
        so that it can still be inspected or used.
    """

    def __init__(self, message : str, result : object = None) -> None:
        super().__init__(message)
        self.result = result


class MissingEntity(LinSLAMError, KeyError):
    """A Referenced Pose/Feature is not Present in a Map or Solution"""

    def __str__(self) -> str:
        # ? KeyError quotes its argument, keep the plain message instead
        return str(self.args[0]) if self.args else ""


class FrameMismatch(LinSLAMError):
    """Two Maps Must Share the Same Coordinate Frame to be Joined"""


class NotJoinable(LinSLAMError):
    """
    Two Maps do not Share Enough Common Entities to be Joined

    :type  step: int
    :param step: Index of the failing join step when raised by one of
        the map joining drivers, else None.
    """

    def __init__(self, message : str, step : int = None) -> None:
        super().__init__(message)
        self.step = step


class ParseError(LinSLAMError):
    """
    Malformed Input File, Positioned at the Offending Line

    :type  line: int
    :param line: 1-based line number of the offending record.

    :type  text: str
    :param text: The raw text of the offending line (may be empty when
        the input ended prematurely).
    """

    def __init__(self, message : str, line : int, text : str = "") -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.text = text
