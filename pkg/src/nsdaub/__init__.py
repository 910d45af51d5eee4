"""Non-stationary exponential Daubechies-type wavelets built from interpolatory subdivision."""
__version__ = "0.1.0"
