"""
Domain exceptions for the wake detection toolkit.

Validation failures also derive from ValueError so callers that only
catch the builtin keep working.
"""


class WakeDetectionError(Exception):
    """Base class for every error raised by the toolkit."""


class InvalidInput(WakeDetectionError, ValueError):
    """Base class for rejected arguments or malformed data."""


# Image interchange
class MalformedHeader(InvalidInput):
    pass


class UnsupportedMaxval(InvalidInput):
    pass


class TruncatedPayload(InvalidInput):
    pass


class InvalidImage(InvalidInput):
    pass


class NegativeSigma(InvalidInput):
    pass


# Scene synthesis
class InvalidScene(InvalidInput):
    pass


# Wavelets
class UnknownWavelet(InvalidInput):
    pass


class BadDimensions(InvalidInput):
    pass


class MalformedPyramid(InvalidInput):
    pass


# Shrinkage
class EmptySubband(InvalidInput):
    pass


class NegativeThreshold(InvalidInput):
    pass


class EmptyVector(InvalidInput):
    pass


class EvenWindow(InvalidInput):
    pass


class UnknownDenoiser(InvalidInput):
    pass


# Metrics
class EmptyImage(InvalidInput):
    pass


class ZeroNoise(InvalidInput):
    pass


class DimensionMismatch(InvalidInput):
    pass


# Radon
class NonSquareImage(InvalidInput):
    pass


class BadThetaStep(InvalidInput):
    pass


class NoValidCells(InvalidInput):
    pass


class OutOfRangeTheta(InvalidInput):
    pass


# Configuration
class ConfigError(InvalidInput):
    pass
