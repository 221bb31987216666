"""Sub-Nyquist sampling and two-step recovery of sparse and correlated ensembles."""

__version__ = "0.1.0"
