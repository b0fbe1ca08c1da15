# src/utils/errors.py

"""
Exception hierarchy shared by every module of the lab.
All errors derive from LabError so the CLI can catch them in one place.
"""


class LabError(Exception):
    """Base class for all lab errors."""


# field_core
class NonPrime(LabError, ValueError):
    def __init__(self, p):
        super().__init__(f"characteristic {p} is not prime")
        self.p = p


class DegreeZero(LabError, ValueError):
    def __init__(self, n=0):
        super().__init__(f"extension degree must be >= 1, got {n}")
        self.n = n


class FieldTooLarge(LabError, ValueError):
    def __init__(self, q, cap):
        super().__init__(f"field size {q} exceeds the configured cap {cap}")
        self.q = q
        self.cap = cap


class DivisionByZero(LabError, ZeroDivisionError):
    pass


class LogOfZero(LabError, ZeroDivisionError):
    def __init__(self, msg="discrete logarithm of zero is undefined"):
        super().__init__(msg)


# mult_structure
class IndexNotDividing(LabError, ValueError):
    def __init__(self, d, order):
        super().__init__(f"subgroup index {d} does not divide {order}")
        self.d = d
        self.order = order


class EmptyM(LabError, ValueError):
    def __init__(self):
        super().__init__("coset exponent set M is empty")


class ExponentOutOfRange(LabError, ValueError):
    def __init__(self, m, d):
        super().__init__(f"coset exponent {m} is outside [0, {d})")
        self.m = m
        self.d = d


class DuplicateExponent(LabError, ValueError):
    def __init__(self, m):
        super().__init__(f"coset exponent {m} appears more than once")
        self.m = m


# directions
class TooFewPoints(LabError, ValueError):
    def __init__(self, count):
        super().__init__(f"a direction set needs at least 2 points, got {count}")
        self.count = count


class DuplicatePoint(LabError, ValueError):
    def __init__(self, point):
        super().__init__(f"point {point} is repeated")
        self.point = point


class ZeroInD(LabError, ValueError):
    def __init__(self):
        super().__init__("the set D must not contain 0")


# rigidity_search
class ParamOutOfRange(LabError, ValueError):
    pass


class SearchSpaceTooLarge(LabError, ValueError):
    def __init__(self, size, cap):
        super().__init__(f"search space of size {size} exceeds the cap {cap}")
        self.size = size
        self.cap = cap


# char_sum_lab
class HypothesisViolated(LabError):
    def __init__(self, failed):
        super().__init__(f"hypotheses not satisfied: {', '.join(failed)}")
        self.failed = list(failed)


class DegenerateInput(LabError, ValueError):
    pass


class PreconditionViolated(LabError, ValueError):
    pass


class NotFound(LabError):
    pass


# clique_lab
class IndexNotDividingQPlus1(LabError, ValueError):
    def __init__(self, d, q):
        super().__init__(f"index {d} does not divide q+1 = {q + 1}")
        self.d = d
        self.q = q


class NotAGraph(LabError):
    pass


class VInS(LabError, ValueError):
    pass


# cli_reports
class UnknownCommand(LabError):
    def __init__(self, command):
        super().__init__(f"unknown command: {command!r}")
        self.command = command


class InvalidValue(LabError, ValueError):
    def __init__(self, key, message):
        super().__init__(f"invalid value for {key!r}: {message}")
        self.key = key
        self.message = message


class IoFailure(LabError, OSError):
    pass
