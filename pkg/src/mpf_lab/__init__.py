"""Multi-product formula laboratory.

Dense-matrix components for product-formula time evolution, multi-product
linear combinations, nested-commutator expansions, and the commutator
scaling metrics that set their step counts. Import the submodules directly:

    from mpf_lab import hamiltonians, mpf, commutators
"""

__version__ = "0.1.0"

__all__ = [
    "bch",
    "cli",
    "commutators",
    "experiments",
    "formulas",
    "hamiltonians",
    "mpf",
    "operators",
    "pauli",
]
