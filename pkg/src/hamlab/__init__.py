"""Hamiltonicity experiments on randomly perturbed graphs.

Bit-matrix graphs, seeded generators, a rotation-extension (Posa) engine,
exact small-graph oracles, expansion certificates and a Monte Carlo harness.
"""

__version__ = "0.1.0"
