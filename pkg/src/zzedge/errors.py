"""Exception types shared across the package.

Each numerical failure mode gets its own class so that the CLI can map
errors onto exit codes without string matching.
"""


class ZZEdgeError(Exception):
    """Base class for all package errors."""


class NoEdgeState(ZZEdgeError):
    """Requested the edge state where the point spectrum is empty (|zeta| >= 1)."""


class DegenerateFiber(ZZEdgeError):
    """kpar = pi: zeta = 0 degenerates the transfer matrix."""


class OnEssentialSpectrum(ZZEdgeError):
    """Spectral parameter lies in the essential band [dgap, dmax]."""


class PoleAtZero(ZZEdgeError):
    """z = 0 is a resolvent pole when the flat-band state exists."""


class DiracDegeneracy(ZZEdgeError):
    """Bulk 2x2 symbol is degenerate at this (kpar, kperp)."""


class NearDiracPoint(ZZEdgeError):
    """dgap too small for a reliable winding computation."""


class NoBoundState(ZZEdgeError):
    """Atomic well too shallow to produce a negative-energy ground state."""


class GridTooLarge(ZZEdgeError):
    """Requested cylinder grid exceeds the resource limit."""


class EigensolverError(ZZEdgeError):
    """Iterative eigensolver failed to converge; message carries the residual."""
