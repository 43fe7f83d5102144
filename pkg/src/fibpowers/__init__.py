"""Verification toolkit for perfect powers in the Fibonacci and Lucas sequences."""

from .seqcore import SeqKind, DomainError

__version__ = "0.1.0"

__all__ = ["SeqKind", "DomainError", "__version__"]
