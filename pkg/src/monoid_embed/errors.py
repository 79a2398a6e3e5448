"""Exception hierarchy shared by all modules."""


class ConstructionError(Exception):
    """Base class for errors raised by this package."""


class DomainError(ConstructionError, ValueError):
    """An argument lies outside the domain of the operation."""


class TruncationError(DomainError):
    """An operation would leave the truncated index tree."""


class ResourceError(ConstructionError, RuntimeError):
    """A combinatorial or memory budget would be exceeded."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class ConfigurationError(ConstructionError, ValueError):
    """A run or instance configuration is inconsistent."""


class LatticeError(ConstructionError, ValueError):
    """A lattice description is malformed or violates the lattice axioms."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class OrderError(LatticeError):
    """The supplied relation is not a partial order."""


class NotALatticeError(LatticeError):
    """Some pair of elements lacks a join or a meet."""
