"""Exception types shared across the package."""


class PsyFilterError(Exception):
    """Base class for every error this package raises on purpose."""


class MalformedWavError(PsyFilterError):
    """File is not a readable RIFF/WAVE container."""


class UnsupportedEncodingError(PsyFilterError):
    """WAV encoding other than PCM16 or IEEE float32."""


class EmptyAudioError(PsyFilterError):
    """Audio payload contains no samples."""


class SampleRateMismatchError(PsyFilterError):
    """Buffer sample rate differs from the rate the caller requires."""


class ShapeMismatchError(PsyFilterError):
    """Matrix operands do not share the expected shape."""


class AllZeroSpectrogramError(PsyFilterError):
    """dB conversion has no reference maximum on an all-zero spectrogram."""


class EmptyReferenceError(PsyFilterError):
    """Word error rate is undefined against an empty reference transcript."""


class LengthMismatchError(PsyFilterError):
    """Paired signals must have equal length."""


class NoUsableSegmentsError(PsyFilterError):
    """Every segment was skipped, so the segmental SNR mean is undefined."""
