"""Multi-layer convolutional sparse coding: operators, pursuits, bounds and experiments."""
from ._mlcsc import *  # noqa: F401,F403
from ._mlcsc import __doc__  # noqa: F401
