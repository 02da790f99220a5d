"""Exception taxonomy.

Two families matter to callers: ``InputError`` covers bad arguments, bad
files and invalid configurations (CLI exit code 1); ``ComputationError``
covers degeneracies discovered while computing (CLI exit code 2).
"""


class ViametryError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ViametryError):
    """Invalid input: arguments, files, or configuration."""


class ComputationError(ViametryError):
    """A numerical or geometric degeneracy was hit during computation."""


# --- light handling ---------------------------------------------------------

class ZeroVector(InputError):
    """A light position vector has (near-)zero length."""


class BelowPlane(InputError):
    """A light position lies on or below the sample plane (z <= 0)."""


class RankDeficientLights(InputError):
    """Light directions are coplanar; the per-pixel solve is underdetermined."""


class ShapeMismatch(InputError):
    """Image count, frame sizes, or light count disagree."""


# --- integration ------------------------------------------------------------

class EmptyRaster(InputError):
    """A transform was asked to operate on a zero-sized raster."""


class DegenerateFit(ComputationError):
    """Plane fit is singular (fewer than 3 non-collinear valid pixels)."""


# --- leveling ---------------------------------------------------------------

class DegenerateWeights(ComputationError):
    """All filter weights underflowed; depth_sigma is far too small."""


# --- metrology --------------------------------------------------------------

class TooFewPoints(ComputationError):
    """A circle fit needs at least 3 points."""


class CollinearPoints(ComputationError):
    """Circle fit input is collinear; no finite circle exists."""


class NoContour(ComputationError):
    """No iso-contour exists at the requested depth level."""


class OpenContourOnly(ComputationError):
    """Contours exist but none is closed (via truncated by the image border)."""


class NoVia(ComputationError):
    """Depth range of the map is below the noise floor; nothing to measure."""


class LengthMismatch(InputError):
    """Measured and reference lists have different lengths."""


# --- illumination geometry --------------------------------------------------

class InvalidNA(InputError):
    """Numerical aperture must satisfy 0 < NA < immersion index."""


class InvalidIndex(InputError):
    """Substrate refractive index must exceed 1."""


class NonpositiveOffset(InputError):
    """Lateral light offset must be positive."""


# --- synthetic scenes -------------------------------------------------------

class OverlappingVias(InputError):
    """Two vias in a scene overlap."""


# --- file formats -----------------------------------------------------------

class DimensionMismatch(InputError):
    """Images in a stack do not share identical dimensions."""


class MalformedHeader(InputError):
    """A file header could not be parsed."""


class UnsupportedMaxval(InputError):
    """PGM maxval outside the supported 1..65535 range."""


class BadMagic(InputError):
    """File does not start with the expected magic string."""


class TruncatedPayload(InputError):
    """Binary payload is shorter than the header promises."""
