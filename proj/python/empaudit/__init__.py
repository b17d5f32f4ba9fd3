"""Persona-conditioned empathy audit harness.

Thin python veneer over the C++ core: persona grids, intensity lexicon
lookups, affective/cognitive shift metrics, treatment-effect estimation
with bootstrap significance, lexical log-odds, TAV, and the full manifest-
driven pipeline.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
