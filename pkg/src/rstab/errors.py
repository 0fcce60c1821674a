"""Exception hierarchy shared by all modules."""


class RStabError(Exception):
    """Base class for errors raised by this package."""


class DomainError(RStabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(RStabError):
    """The requested enumeration is too large to run."""


class UnsupportedModelError(RStabError):
    """The spacetime model lacks the structure an operation needs."""


class SpacelikeError(RStabError):
    """A graph function violates the spacelike bound.

    ``nodes`` holds the flat indices of the offending grid nodes.
    """

    def __init__(self, message, nodes=()):
        super().__init__(message)
        self.nodes = list(nodes)


class DiscretizationError(RStabError):
    """A stencil or grid cannot be built at the requested resolution."""


class PreconditionError(RStabError):
    """A numerical check was requested on an input that violates its premise."""


class ManifestError(RStabError):
    """An experiment manifest failed validation."""
