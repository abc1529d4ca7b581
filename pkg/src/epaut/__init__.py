"""Numerical laboratory for geodesic flows on automorphism groups of
trivial principal bundles: charged-peakon particles, compressible 1D and
incompressible 2D field solvers, Clebsch representations, and the
momentum-map / conservation-law verification suite."""

__version__ = "0.1.0"
