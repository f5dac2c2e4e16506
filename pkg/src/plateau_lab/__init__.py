"""Desk-scale numerical laboratory for the l2 spherical Plateau problem.

The package computes with finitely supported unit vectors in l2(G, R^m)
acted on by the left regular representation of a finitely generated group,
polyhedral cycles in the sphere quotient together with their mass, explicit
hyperbolic-surface embeddings, barycenter maps with Jacobian certificates,
and spectral-gap quantities on Cayley graphs.
"""

__version__ = "0.1.0"
