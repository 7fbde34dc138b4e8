"""Property testers and learners for linear juntas on Gaussian space."""
__version__ = "0.1.0"
