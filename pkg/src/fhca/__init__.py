"""Monte Carlo simulator for frequency-hopping links under the convolution attack."""

__version__ = "0.1.0"
