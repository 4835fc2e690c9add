"""Exception types that map onto CLI exit codes."""


class GaborHmmError(Exception):
    """Base class for package errors."""


class DataError(GaborHmmError):
    """Malformed input: files, manifests, configs, shape mismatches."""


class NumericError(GaborHmmError):
    """Numeric failure: non-finite values, impossible estimation."""
