"""Complex-weight Boltzmann machine states with phase-reweighted sampling."""
__version__ = "0.1.0"
