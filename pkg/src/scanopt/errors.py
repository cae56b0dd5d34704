"""Shared exception hierarchy."""


class ScanoptError(Exception):
    """Base class for all errors raised by this package."""
