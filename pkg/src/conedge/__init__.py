"""Convex cone constraint sets on symmetric matrices.

Subpackages cover the Frobenius geometry of Sym2(R^n), invariant
decompositions under complex/quaternionic structures, cone membership
oracles built around edge subspaces, pluriharmonic quadratics, grid
Dirichlet solvers, and the catalog of named cones.
"""

__version__ = "0.1.0"
