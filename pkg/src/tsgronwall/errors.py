"""Exception hierarchy.

Every error carries a short ``tag`` so the command line can print a
machine-parsable first token on stderr.
"""


class GronwallError(Exception):
    tag = "error"
    #: exit code used by the command line (1: hypothesis/validation, 2: usage)
    exit_code = 1


class UsageError(GronwallError):
    tag = "usage"
    exit_code = 2


# -- time scales -------------------------------------------------------------

class ScaleError(GronwallError):
    tag = "scale"


class EmptyScale(ScaleError):
    tag = "empty-scale"


class NonMonotone(ScaleError):
    tag = "non-monotone"


class PointNotInScale(ScaleError):
    tag = "point-not-in-scale"


class ReversedRange(ScaleError):
    tag = "reversed-range"


class NotInKappa(ScaleError):
    tag = "not-in-kappa"


class NotRegressive(ScaleError):
    tag = "not-regressive"

    def __init__(self, message, tau=None):
        super().__init__(message)
        self.tau = tau


class NotRefinable(ScaleError):
    tag = "not-refinable"


class ScaleMismatch(ScaleError):
    tag = "scale-mismatch"


# -- expressions -------------------------------------------------------------

class ExprSyntaxError(GronwallError):
    """Raised by the parser. ``offset`` is 1-based."""

    tag = "syntax"
    exit_code = 2

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifier(ExprSyntaxError):
    tag = "unknown-identifier"


class EvalFault(GronwallError):
    tag = "eval-fault"

    def __init__(self, message, inputs=None, overflow=False):
        if inputs:
            detail = ", ".join(f"{k}={v!r}" for k, v in inputs.items())
            message = f"{message} ({detail})"
        super().__init__(message)
        self.inputs = inputs or {}
        self.overflow = bool(overflow)


# -- transforms and bounds ---------------------------------------------------

class DomainExceeded(GronwallError):
    tag = "domain-exceeded"

    def __init__(self, message, target=None, supremum=None):
        super().__init__(message)
        self.target = target
        self.supremum = supremum


class NonpositiveInput(GronwallError):
    tag = "nonpositive-input"


class IntegrandFault(GronwallError):
    tag = "integrand-fault"


class NonpositiveZeta(GronwallError):
    tag = "nonpositive-zeta"


class WrongScaleKind(GronwallError):
    tag = "wrong-scale-kind"


class NonmonotoneR(GronwallError):
    tag = "nonmonotone-r"


class InvalidInstance(GronwallError):
    tag = "invalid-instance"


class HypothesisFailed(InvalidInstance):
    """A property certificate required by the selected theorem is FAIL."""

    tag = "certificate-fail"


# -- dynamics and harness ----------------------------------------------------

class Overflow(GronwallError):
    tag = "overflow"


class EnvelopeViolated(GronwallError):
    tag = "envelope-violated"


class HypothesisViolated(GronwallError):
    tag = "hypothesis-violated"


class GeneratorExhausted(GronwallError):
    tag = "generator-exhausted"
