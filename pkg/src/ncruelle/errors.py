"""Exception types shared across the package."""


class NCRuelleError(Exception):
    """Base class for all package errors."""


class CapacityError(NCRuelleError):
    """A table would exceed the configured entry cap."""


class DomainError(NCRuelleError, ValueError):
    """An argument lies outside the domain of an operation."""


class DisallowedWordError(NCRuelleError, KeyError):
    """A word uses a transition forbidden by the transition matrix."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class NormalizationError(NCRuelleError, ValueError):
    """The potential is not normalized within tolerance."""


class DegenerateEigenvalueError(NCRuelleError):
    """The eigenvalue 1 is not simple for the finite section."""


class EigensolverError(NCRuelleError):
    """The dense eigensolver did not produce a usable decomposition."""
