"""Shrunk-gradient optimizer toolkit.

Thin package wrapper around the compiled extension. Everything public lives
in ``sradam._core``; this module re-exports it.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
