"""Exact distributions and inference for the rounded count proxy U = n [Y / n]."""

from roundcount._core import *  # noqa: F401,F403
from roundcount._core import CountModel, DomainError, NumericalError, cli

__all__ = [name for name in dir() if not name.startswith("_")]
