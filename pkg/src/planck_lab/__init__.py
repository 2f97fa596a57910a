"""Planck-scale equidistribution laboratory for Laplacian eigenfunctions on model manifolds."""

__version__ = "0.1.0"
