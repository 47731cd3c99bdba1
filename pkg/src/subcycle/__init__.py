"""p-cycle protection planning with spectral sub-graphing."""

__version__ = "0.1.0"
