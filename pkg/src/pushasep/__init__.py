"""Exact and asymptotic current laws for PushASEP on a ring."""

__version__ = "0.1.0"

from .ring_model import ConfigurationError, RingParams  # noqa: F401
