"""Exception taxonomy for the vlscene package.

Every error raised by the library derives from VlsceneError so callers can
catch one base class at the CLI boundary. Names mirror the failure they
signal rather than where they occur.
"""


class VlsceneError(Exception):
    """Base class for all vlscene errors."""


class DimMismatchError(VlsceneError):
    """Operands have incompatible dimensions."""


class ZeroVectorError(VlsceneError):
    """A vector with (near-)zero norm reached an operation that needs a direction."""


class EmptyInputError(VlsceneError):
    """An operation received an empty collection where at least one element is required."""


class NonFiniteError(VlsceneError):
    """NaN or Inf encountered where only finite values are allowed."""


class InvalidTauError(VlsceneError):
    """Softmax temperature must be a positive finite real."""


class InvalidShapeError(VlsceneError):
    """Requested or supplied array shape is invalid."""


class TokenOutOfRangeError(VlsceneError):
    """A token id falls outside the configured vocabulary."""


class EmptyBatchError(VlsceneError):
    """A training batch contains no pairs."""


class ConfigInvalidError(VlsceneError):
    """A configuration value violates its documented constraints."""


class UnknownLabelError(VlsceneError):
    """A ground-truth label is missing from the label set."""


class DegenerateKError(VlsceneError):
    """Metric undefined for fewer than two classes."""


class MissingMaskError(VlsceneError):
    """Attention overlap requested for a record with no relevance mask."""


class DatasetMismatchError(VlsceneError):
    """Two reports do not cover the same set of scenes."""


class SeparationFailureError(VlsceneError):
    """Could not sample mutually separated prototypes within the retry budget."""


class VlebFormatError(VlsceneError):
    """Malformed embedding-bundle file."""


class BadMagicError(VlebFormatError):
    """File does not start with the VLEB magic bytes."""


class UnsupportedVersionError(VlebFormatError):
    """File declares a format version this reader does not understand."""


class TruncatedFileError(VlebFormatError):
    """File is shorter than its header promises."""


class MetaParseError(VlebFormatError):
    """Embedded metadata is not valid UTF-8 JSON or violates the metadata schema."""
