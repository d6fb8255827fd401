"""Exception types shared across the package."""


class ZetaBoundError(Exception):
    """Base class for all package errors."""


class DomainError(ZetaBoundError, ValueError):
    """An argument lies outside the domain of the operation."""


class HypothesisError(ZetaBoundError, ValueError):
    """Parameters are arithmetically valid but cannot satisfy the lemma's hypothesis."""


class RefusalError(ZetaBoundError):
    """The request would exceed a configured work cap (oracle length, zeta height)."""


class InfeasibleError(ZetaBoundError, ValueError):
    """Region parameters violate the validity condition r0 <= R0."""


class PrecisionError(ZetaBoundError):
    """A computed value could not be certified to the required accuracy."""
