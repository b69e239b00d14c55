"""Products of truncated unitary matrices as limits of skew plane partition slices."""

__version__ = "0.1.0"
