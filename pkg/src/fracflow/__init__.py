"""Mixed finite elements with convolution quadrature for time-fractional Fokker-Planck problems."""

__version__ = "0.1.0"
