"""Perceptual input hardening for speech recognition front ends.

Keeps only the audio a human listener can actually hear: short-time spectra
are compared against per-frame hearing thresholds and inaudible bins are
zeroed, then everything outside a speech band is cut. The same masks can be
replayed onto externally supplied spectrogram gradients, and WER / segmental
SNR helpers quantify what the processing cost.
"""

from . import errors
from .audio_io import AudioBuffer, PCM16_SCALE, read_wav, require_rate, write_wav
from .filtering import (
    FilterConfig,
    PIPELINE_RATE,
    apply_mask,
    band_pass,
    in_band_bins,
    mask_gradient_bandpass,
    mask_gradient_psycho,
    perceptual_filter,
)
from .metrics import SnrsegResult, WerBreakdown, snrseg, wer
from .psychoacoustic import (
    HearingThresholds,
    Masker,
    SpectralMask,
    bark,
    compute_mask,
    compute_thresholds,
    decimate_maskers,
    find_maskers,
    global_threshold,
    masking_index,
    quiet_threshold_row,
    spreading_function,
    threshold_in_quiet,
)
from .spectral import DB_CEILING, DB_FLOOR, Spectrogram, hann_window, istft, magnitude_db, stft

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer",
    "DB_CEILING",
    "DB_FLOOR",
    "FilterConfig",
    "HearingThresholds",
    "Masker",
    "PCM16_SCALE",
    "PIPELINE_RATE",
    "SnrsegResult",
    "SpectralMask",
    "Spectrogram",
    "WerBreakdown",
    "apply_mask",
    "band_pass",
    "bark",
    "compute_mask",
    "compute_thresholds",
    "decimate_maskers",
    "errors",
    "find_maskers",
    "global_threshold",
    "hann_window",
    "in_band_bins",
    "istft",
    "magnitude_db",
    "mask_gradient_bandpass",
    "mask_gradient_psycho",
    "masking_index",
    "perceptual_filter",
    "quiet_threshold_row",
    "read_wav",
    "require_rate",
    "snrseg",
    "spreading_function",
    "stft",
    "threshold_in_quiet",
    "wer",
    "write_wav",
]
