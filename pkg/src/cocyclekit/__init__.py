"""cocyclekit: cocycle-level characteristic class computation and verification.

Exact Todd/Chern invariant polynomials, Chern-Weil labelings of chart
simplices, Cech/group cochain differentials, and Bochner-Martinelli kernel
checks, all driven by explicit atlas and group-action input.
"""

__version__ = "0.1.0"
