"""Exception types shared across the package."""


class BidbgError(Exception):
    """Base class for all package errors."""


class InvalidKError(BidbgError, ValueError):
    """Graph order k is unusable (even, too small, or above the word limit)."""


class InvalidSymbolError(BidbgError, ValueError):
    """A sequence contains a character outside the DNA alphabet.

    Carries the offending character and its 0-based offset.
    """

    def __init__(self, char: str, offset: int):
        self.char = char
        self.offset = offset
        super().__init__(f"invalid symbol {char!r} at offset {offset} (expected one of ACGT)")


class ContractError(BidbgError, ValueError):
    """An operation was handed input that violates its stated precondition."""


class ConfigError(BidbgError, ValueError):
    """Unusable resource configuration (memory budget, block size, fan-in)."""


class FormatError(BidbgError, ValueError):
    """A binary or text file does not match the expected on-disk format."""


class WalkStructureError(BidbgError, ValueError):
    """A walk references vertices or edges that are not incident in the graph.

    Distinct from a walk that is structurally sound but strand-inconsistent;
    the latter makes is_valid_walk return False rather than raise.
    """


class IntegrityError(BidbgError, ValueError):
    """A graph invariant does not hold (dangling endpoint, unsorted vertex table)."""
