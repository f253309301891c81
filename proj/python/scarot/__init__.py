"""Scaling-rotation statistics for SPD matrices."""

from ._scarot import *  # noqa: F401,F403
from ._scarot import __version__  # noqa: F401
