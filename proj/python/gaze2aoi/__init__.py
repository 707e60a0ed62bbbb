"""Python access to the gaze-to-AOI engine.

All parsing, association and metric computation happens in the compiled
core; this package only re-exports it.
"""

from ._core import *  # noqa: F401,F403
from ._core import Error

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
