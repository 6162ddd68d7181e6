"""Persona-imitation evaluation core, backed by the _mimic_eval extension."""

from ._mimic_eval import *  # noqa: F401,F403
from ._mimic_eval import __doc__  # noqa: F401
