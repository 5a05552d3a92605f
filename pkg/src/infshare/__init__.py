"""Secret sharing over continuous domains, with Monte Carlo verification."""

__version__ = "0.1.0"
