"""Random quantum codes from Gaussian ensembles, with numerical audits."""

__version__ = "0.1.0"
