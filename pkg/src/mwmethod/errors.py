"""Exception hierarchy shared by all modules."""


class MWError(Exception):
    """Base class for every error raised by mwmethod."""


class NonAssociative(MWError):
    pass


class NoIdentity(MWError):
    pass


class NoInverse(MWError):
    pass


class GroupMismatch(MWError):
    pass


class EmptyInput(MWError):
    pass


class CarrierMismatch(MWError):
    pass


class NotInDomain(MWError):
    pass


class ZeroMeasure(MWError):
    pass


class EmptyCoveringSet(MWError):
    pass


class NotSymmetric(MWError):
    pass


class MissingIdentity(MWError):
    pass


class DepthExceeded(MWError):
    pass


class HypothesisViolated(MWError):
    pass


class BudgetExhausted(MWError):
    pass


class ExponentCapExceeded(MWError):
    pass


class NotStabilized(MWError):
    pass


class NotSubgroup(MWError):
    """A set expected to be a subgroup is not closed; indicates a bug."""


class ParseError(MWError):
    pass


class ValidationError(MWError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
