"""Exception hierarchy shared by all matchbench modules.

Exit-code mapping for the CLI: ContractError subclasses map to exit 1,
IoError subclasses to exit 2.
"""


class MatchbenchError(Exception):
    """Base class for all toolkit errors."""


class ContractError(MatchbenchError):
    """A caller violated a documented precondition or invariant."""


class IoError(MatchbenchError):
    """Filesystem-level failure (missing file, short read, write error)."""


# --- image I/O ---

class MissingFile(IoError):
    pass


class BadMagic(ContractError):
    pass


class TruncatedBody(ContractError):
    pass


class UnsupportedMaxval(ContractError):
    pass


class IoFailure(IoError):
    pass


# --- enhancement ---

class DegenerateImage(ContractError):
    """Image carries no information for the requested operation."""


class BadParams(ContractError):
    pass


class DimensionMismatch(ContractError):
    pass


class LengthMismatch(ContractError):
    pass


# --- features / geometry ---

class TooSmall(ContractError):
    pass


class DegenerateConfiguration(ContractError):
    """Point configuration does not determine a homography."""


class NumericalFailure(MatchbenchError):
    pass


class PointAtInfinity(MatchbenchError):
    pass


class DegenerateModel(ContractError):
    pass


class BadMotion(ContractError):
    """Synthetic camera path leaves the source texture."""
