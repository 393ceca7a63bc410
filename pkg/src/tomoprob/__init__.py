"""Tomographic-probability representation of quantum mechanics.

Quantum states as families of genuine (nonnegative, normalized) probability
distributions of measurable observables: position-momentum quadratures in a
scaled/rotated reference frame, and spin projections along rotated axes.
The package provides the forward maps (marginals of a density matrix), the
inverse maps (density reconstruction from marginals), the evolution equation
the marginals obey for a spin-1/2 particle (free, diagonal-spin, trapped and
magnetic-field Hamiltonians), closed-form reference solutions, and a dense
von Neumann propagator used as an independent cross-check.
"""

__version__ = "0.1.0"
