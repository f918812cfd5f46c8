"""Exception hierarchy shared by all voxmerge modules.

The CLI maps these onto exit codes: usage problems exit 1, any
:class:`VoxmergeError` raised while processing data exits 2.
"""


class VoxmergeError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(VoxmergeError):
    """Shapes, resolutions, or channel counts do not line up."""


class DomainError(VoxmergeError):
    """A parameter value is outside its legal range."""


class PreconditionError(VoxmergeError):
    """An operation was called on inputs that violate its preconditions."""


class DataError(VoxmergeError):
    """Payload values are invalid (non-finite, unnormalizable, ...)."""


class FormatError(VoxmergeError):
    """A file does not conform to its binary or text format.

    ``offset`` is the byte position of the first offending field when it
    is known, else ``None``.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class SchemaError(FormatError):
    """A structured document (JSON) violates its schema."""
