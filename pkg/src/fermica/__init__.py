"""Fermionic cellular automata on a one-dimensional chain of Majorana pairs."""
from .graded_algebra import *  # noqa: F401,F403
from .fca import *  # noqa: F401,F403
from .support import *  # noqa: F401,F403
from .classify import *  # noqa: F401,F403
from .circuits import *  # noqa: F401,F403

__version__ = "0.1.0"
