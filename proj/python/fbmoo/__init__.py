"""Desk-scale computational harmonic analysis on the dyadic unit interval.

Everything lives in the compiled extension; this package re-exports it.
"""

from fbmoo._core import *  # noqa: F401,F403
from fbmoo._core import __doc__ as _core_doc  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]
