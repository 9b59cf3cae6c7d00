"""Exception types shared across the package."""


class SymtriError(Exception):
    """Base class for all errors raised by :mod:`symtri`."""


class ResourceLimitError(SymtriError):
    """A configured resource guard (ring size, pivots, degree) was exceeded."""


class DegreeOverflowError(ResourceLimitError):
    pass


class CertificateError(SymtriError):
    """A certificate or witness failed exact verification."""


class WiringError(SymtriError):
    """No (or no unique) convention reproduces the target distribution."""


class ModelFileError(SymtriError):
    """Malformed model, witness or LP file.

    ``table`` names the offending section when one can be identified.
    """

    def __init__(self, message, table=None):
        super().__init__(message)
        self.table = table
