"""ordtower: a desk-scale laboratory for ordinal notation segments, nicified
enumeration trees, finite-injury tree towers, and fast-growing modulus
hierarchies, with exhaustive structural verifiers and a CLI.

Everything runs under explicit finite budgets (stages, depth, probes);
verifier verdicts are stamped with the budget they were computed at.
"""

__version__ = "0.1.0"

from . import cli, formulas, hierarchy, machine, nicety, notation, tower, trees

__all__ = ["cli", "formulas", "hierarchy", "machine", "nicety", "notation",
           "tower", "trees", "__version__"]
