"""Power and beam control for two-cell downlink networks with reinforcement learning."""

from ._beamrl import *  # noqa: F401,F403
from ._beamrl import __doc__  # noqa: F401

__version__ = "0.1.0"
