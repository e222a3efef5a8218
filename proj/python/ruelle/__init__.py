"""Spectral thermodynamic formalism on compact metric alphabets."""

from ._ruelle import *  # noqa: F401,F403
from ._ruelle import __version__  # noqa: F401
