"""nmlab - certify and construct suboptimal local minima of tiny neural networks."""

from nmlab.__about__ import __version__

__all__ = ["__version__"]
