"""Shared checkers used by both the unit tests and the acceptance suite.

The copylen sweeps moved into the package proper (the CLI replays them);
they stay importable from here so the two test tiers share one spelling.
"""

from ordtower.nicety import CopylenSweep, copylen_sweep, divergence_check

__all__ = ["CopylenSweep", "copylen_sweep", "divergence_check"]
