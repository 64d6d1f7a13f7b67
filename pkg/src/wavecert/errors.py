"""Exception types shared across the toolkit."""

from __future__ import annotations


class WavecertError(Exception):
    """Base class for all toolkit errors."""


class AsymmetricInput(WavecertError):
    """Coefficient matrix field is not symmetric."""


class NonSPD(WavecertError):
    """Coefficient matrix field is not positive definite."""


class NormalizationViolated(WavecertError):
    """Eigenvalue range does not straddle 1 and rescaling was disabled."""


class SourceOutsideGrid(WavecertError):
    """Requested source point does not lie on the grid."""


class ParameterOrder(WavecertError):
    """Scalar parameters violate a required ordering (e.g. gamma > T - ell)."""


class EmptyRegion(WavecertError):
    """The requested space-time region contains no grid nodes."""


class EmptyAnnulus(WavecertError):
    """The requested distance annulus contains no grid nodes."""


class InsufficientStencil(WavecertError):
    """Grid too small for the finite-difference stencil."""


class DescentStall(WavecertError):
    """Steepest descent on the distance field stopped making progress."""


class GeometryViolated(WavecertError):
    """A geometric admissibility condition failed."""


class SupportConditionViolated(WavecertError):
    """A localized solution leaks outside its certified sublevel set."""


class TargetEscapesOmega0(WavecertError):
    """A 2R-neighborhood of a covering center exits the ambient region."""


class ZeroSolutionNorm(WavecertError):
    """The solution norm is zero, making the stability bound vacuous."""


class CFLViolated(WavecertError):
    """The time step exceeds the stability limit of the explicit scheme."""


class WindowTooShort(WavecertError):
    """Time support sits too close to the analysis window edge."""


class FitFailed(WavecertError):
    """Least-squares decay fit did not reach the required quality."""


class UnsupportedOrder(WavecertError):
    """Requested Sobolev order is outside the supported range."""


class NonPositiveInput(WavecertError):
    """An input that must be strictly positive is zero or negative."""


class DegenerateRadius(WavecertError):
    """A certified radius collapsed to machine precision."""


class AlphaOutOfRange(WavecertError):
    """Gevrey index alpha must lie strictly between 0 and 1."""


class BetaTooSmall(WavecertError):
    """Frequency-splitting parameter must exceed 2."""


class DivergentConstant(WavecertError):
    """A constant formula diverges at the supplied inputs."""


class Overflow(WavecertError):
    """A certified constant exceeds even log-space representation."""


class ConfigError(WavecertError):
    """Run configuration failed validation."""
