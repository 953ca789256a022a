"""Exception types shared across the library."""


class TwoViewError(Exception):
    """Base class for all library errors."""


class FormatError(TwoViewError):
    """A serialized file could not be decoded."""


class BadMagicError(FormatError):
    """File does not start with the expected magic bytes."""


class TruncatedError(FormatError):
    """Declared counts exceed the remaining bytes in the file."""


class InvalidDataError(TwoViewError):
    """A decoded or constructed value violates a domain invariant."""


class ManifestError(TwoViewError):
    """Base class for pair-manifest loading failures."""


class ManifestParseError(ManifestError):
    pass


class DuplicatePairIdError(ManifestError):
    pass


class MissingFileError(ManifestError):
    pass


class PairIdMismatchError(TwoViewError):
    """Fusion inputs do not all belong to the same pair."""


class ChannelMismatchError(TwoViewError):
    pass


class DimMismatchError(TwoViewError):
    pass


class DegenerateInputError(TwoViewError):
    """Input configuration admits no unique model (rank deficiency)."""


class UndefinedSampsonError(TwoViewError):
    """Sampson denominator vanished; the distance is undefined."""


class UnknownPresetError(TwoViewError):
    pass
