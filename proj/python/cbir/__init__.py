"""Content-based image retrieval over HSV colour histograms and texture moments."""

from ._core import *  # noqa: F401,F403
from ._core import CbirError, __version__  # noqa: F401
