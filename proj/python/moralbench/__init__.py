"""Moral-story benchmark toolkit: corpus handling, task construction,
retrieval augmentation and evaluation metrics."""

from ._core import *  # noqa: F401,F403
from ._core import ResourceError, ValidationError  # noqa: F401

__version__ = "0.1.0"
