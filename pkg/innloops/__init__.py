"""
Finite loops of nilpotency class three with abelian inner mapping groups.

Loops are stored as Cayley tables over 0..n-1 with 0 the identity. The
modules build the named examples by nuclear extensions, crosshomomorphisms
and group modifications, compute nuclei, centers, multiplication and inner
mapping groups, decide isomorphism, and run the seeded experiments.
"""

__version__ = "1.1.0"
