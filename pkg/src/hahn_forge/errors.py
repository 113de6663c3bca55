"""Exception types shared across the package."""


class HahnForgeError(Exception):
    """Base class for all errors raised by this package."""


class ZeroOrUncertainLeadingTerm(HahnForgeError):
    """Inversion needs a nonzero leading term below the precision bound."""


class UndecidableAtPrecision(HahnForgeError):
    """The query cannot be answered from the stored truncation."""


class NotInValuationRing(HahnForgeError):
    """Standard part requested for an element with negative valuation."""


class NotPositive(HahnForgeError):
    """Root extraction requires a positive element."""


class IrrationalLeadingCoefficient(HahnForgeError):
    """The leading coefficient has no exact rational n-th root."""


class InsufficientPrecision(HahnForgeError):
    """The stored precision does not determine the requested data."""


class ZeroInverse(HahnForgeError):
    """Inverse of the zero class in the leading-term structure."""


class SingletonBall(HahnForgeError):
    """Sampling requested from a one-point ball."""


class NormNotOne(HahnForgeError):
    """Operation requires Gauss norm one (additive norm zero)."""


class NotRegular(HahnForgeError):
    """Divisor is not regular in the distinguished variable."""


class NonUnitNorm(HahnForgeError):
    """Weierstrass division requires a norm-one divisor."""


class NotAUnit(HahnForgeError):
    """Unit inversion applied to a non-unit."""


class NotInfinitesimal(HahnForgeError):
    """Analytic evaluation in exact mode needs infinitesimal arguments."""


class PrecisionStall(HahnForgeError):
    """Input precision cannot support the requested output precision."""


class NotRegularDegreeOne(HahnForgeError):
    """Implicit solving requires regularity of degree one."""


class DuplicateName(HahnForgeError):
    """A function with this name is already registered."""


class MalformedRule(HahnForgeError):
    """Rejected analytic function specification."""


class UndecidedSign(HahnForgeError):
    """Interval refinement hit its depth limit without deciding a sign."""


class DepthExhausted(HahnForgeError):
    """Preparation kept failing verification at the maximum depth."""


class DomainViolation(HahnForgeError):
    """A sampled point left the declared domain."""


class TermSyntaxError(HahnForgeError):
    """Parse failure, with position information."""

    def __init__(self, message, line=1, col=1):
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


class UnknownFunction(HahnForgeError):
    """Term references a function absent from the registry."""


class ArityMismatch(HahnForgeError):
    """Function application with the wrong number of arguments."""


class DomainError(HahnForgeError):
    """Term evaluation outside the supported exact-mode domain."""


class DivisionByZero(HahnForgeError):
    """Exact zero denominator without the zero-inverse convention."""


class BudgetExhausted(HahnForgeError):
    """Preparation budget ran out; carries the best failing report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
