"""Shared exception types."""


class DomainError(ValueError):
    """Input lies outside the documented domain of an operation."""


class RangeError(ValueError):
    """Index argument outside its admissible range."""


class AddressError(ValueError):
    """Rectangle address inconsistent with the parameters or the query point."""


class CapExceeded(RuntimeError):
    """Enumeration would materialize more rectangles than the configured cap."""


class Infeasible(ValueError):
    """No admissible parameter pair exists within the search bound."""


class DegenerateSample(ValueError):
    """Sample set cannot support the requested estimate (e.g. all gaps equal)."""


class InsufficientSamples(ValueError):
    """Too few usable samples after filtering."""


class ResolutionError(ValueError):
    """Polyline resolution too coarse for the requested refinement depth."""
