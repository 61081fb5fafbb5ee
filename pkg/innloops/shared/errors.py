"""
Exception hierarchy. Every error carries the exit code the CLI maps it to.
"""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVARIANT = 2
EXIT_RESOURCE = 3
EXIT_NEGATIVE = 10


class InnLoopsError(Exception):
    """Base class for all library errors."""

    exit_code = EXIT_INVARIANT


# Loop tables
class LoopTableError(InnLoopsError):
    """A table or subset failed a loop invariant."""


class BadShape(LoopTableError):
    """Table is not square, is empty, too large, or has entries out of range."""


class NotLatin(LoopTableError):
    """A row or column repeats an element."""


class NoIdentity(LoopTableError):
    """Row 0 or column 0 is not the identity."""


class NotNormal(LoopTableError):
    """Subloop is not normal: cosets overlap or the coset product is ill-defined."""


class NotSubloop(LoopTableError):
    """Subset is not closed under product and divisions, or misses 0."""


# Permutation groups
class PermGroupError(InnLoopsError):
    """Bad permutation data."""


class DegreeMismatch(PermGroupError):
    """Generators act on different point sets."""


class NotBijection(PermGroupError):
    """Image list is not a permutation."""


class TooLarge(PermGroupError):
    """Element enumeration exceeds the configured limit."""

    exit_code = EXIT_RESOURCE


# Extensions
class ExtensionError(InnLoopsError):
    """Bad nuclear extension data."""


class BadAction(ExtensionError):
    """The action is not a homomorphism into the kernel automorphisms."""


class BadCocycle(ExtensionError):
    """The cocycle is not normalized or has values outside the kernel."""


class KernelNotNuclear(ExtensionError):
    """Kernel is not inside the nucleus, or not an elementary abelian 2-group."""


class KernelNotNormal(ExtensionError):
    """Kernel is not a normal subloop."""


class BadSection(ExtensionError):
    """Section does not pick exactly one element per coset with identity first."""


class ActionsDoNotCommute(ExtensionError):
    """Scalar action and kernel action do not commute."""


# Modification
class ModificationError(InnLoopsError):
    """Bad modification context."""


class ChainViolation(ModificationError):
    """The subgroup chain does not satisfy its structural requirements."""


class NotNormalizedMu(ModificationError):
    """mu is not normalized, not constant on cosets, or leaves Z."""


class PreconditionFailed(ModificationError):
    """A condition required by the requested check does not hold."""


class ClassMismatch(ModificationError):
    """Nilpotency classes differ from the ones the operation requires."""


class NotCentralInvolution(ModificationError):
    """Element is not a central involution of the loop."""


# Greedy search
class GreedyError(InnLoopsError):
    """Bad greedy search input."""


class BadCosetStructure(GreedyError):
    """Subloop is not normal or does not contain the flip element."""


# Resources and usage
class ResourceLimit(InnLoopsError):
    """A configured budget was exhausted."""

    exit_code = EXIT_RESOURCE


class SearchLimitExceeded(ResourceLimit):
    """Isomorphism search visited more nodes than allowed."""


class InvalidSpec(InnLoopsError):
    """Experiment specification or command arguments are invalid."""

    exit_code = EXIT_USAGE


class UsageError(InvalidSpec):
    """Bad command line."""


class StoreError(InnLoopsError):
    """Reading or writing a stored table or document failed."""
