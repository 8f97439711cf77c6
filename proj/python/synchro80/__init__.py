"""Shared-memory backends and frontends with bursting mode."""

from ._synchro80 import *  # noqa: F401,F403
from ._synchro80 import __version__, SEGMENT_VERSION  # noqa: F401
