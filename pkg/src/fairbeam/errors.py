"""Exception hierarchy shared across the package."""


class FairbeamError(Exception):
    """Base class for all package errors."""


class DimensionError(FairbeamError):
    """Operand shapes are incompatible."""


class DomainError(FairbeamError):
    """A scalar argument is outside its mathematical domain."""


class SingularMatrixError(FairbeamError):
    """Matrix is singular or too ill-conditioned to invert reliably."""


class InsufficientBeamsError(FairbeamError):
    """Fewer qualifying quantized angle pairs than RF chains requested.

    ``qualifying`` carries how many pairs survived the cover/exclude test
    so the caller can retry with a smaller per-group RF chain count.
    """

    def __init__(self, group: int, requested: int, qualifying: int):
        self.group = group
        self.requested = requested
        self.qualifying = qualifying
        super().__init__(
            f"group {group}: {qualifying} qualifying angle pairs, {requested} requested"
        )


class ConfigError(FairbeamError):
    """Configuration file or optimizer settings failed validation."""


class CampaignError(FairbeamError):
    """Monte-Carlo campaign aborted (too many failed realizations)."""
