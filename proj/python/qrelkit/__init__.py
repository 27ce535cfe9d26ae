"""Diagnose, denoise and re-judge retrieval test collections."""

from ._core import *  # noqa: F401,F403
from ._core import DataError, Error, UndefinedStatistic, ValidationError

__version__ = "0.1.0"
