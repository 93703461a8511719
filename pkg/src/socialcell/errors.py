"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1,
anything that blows up mid-computation exits 2.
"""


class SocialCellError(Exception):
    """Base class for package errors."""


class ConfigError(SocialCellError):
    """Invalid parameter value or malformed configuration input."""


class InputError(SocialCellError):
    """Malformed data file or reference to an unknown node."""


class LinkRangeError(SocialCellError):
    """Transmitter-receiver distance exceeds the transmitter's service radius."""
