"""Shared exception types."""


class TensorlabError(Exception):
    """Base class for all tensorlab errors."""


class ValidationError(TensorlabError, ValueError):
    """Malformed input: bad ring, bad shape, bad parameter value."""


class CapExceeded(TensorlabError, ValueError):
    """A documented size cap was exceeded; the message names the cap."""
