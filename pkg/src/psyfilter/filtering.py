"""Spectral-domain filters, the end-to-end hardening pipeline, and the
matching gradient gates.

Two independent stages: the perceptual mask silences bins a listener could
not hear anyway, and the band-pass confines the spectrum to the voice band.
The gradient gates let external attack tooling push the same projections
through its backward pass, since content in a destroyed subspace can never
reach the recognizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioBuffer, require_rate
from .errors import ShapeMismatchError
from .psychoacoustic import (
    HearingThresholds,
    SpectralMask,
    compute_mask,
    compute_thresholds,
)
from .spectral import Spectrogram, istft, stft

PIPELINE_RATE = 16000


@dataclass(frozen=True)
class FilterConfig:
    """Knobs for the filtering pipeline.

    phi is the dB margin added to the hearing threshold: 0 removes only what
    the model considers imperceptible, positive values cut into audible
    content. The band edges are inclusive on bin center frequencies.
    """

    phi: float = 0.0
    f_min: float = 200.0
    f_max: float = 7000.0
    psycho_enabled: bool = True
    bandpass_enabled: bool = True
    frame_len: int = 512
    hop: int = 256

    def __post_init__(self):
        if not np.isfinite(self.phi):
            raise ValueError("phi must be finite")
        if self.frame_len <= 0 or (self.frame_len & (self.frame_len - 1)) != 0:
            raise ValueError(f"frame_len must be a power of two, got {self.frame_len}")
        if not 0 < self.hop <= self.frame_len:
            raise ValueError(f"hop must satisfy 0 < hop <= frame_len, got {self.hop}")
        if self.bandpass_enabled and not 0.0 <= self.f_min < self.f_max:
            raise ValueError(
                f"need 0 <= f_min < f_max, got {self.f_min}..{self.f_max}"
            )


def in_band_bins(num_bins: int, sample_rate: int, frame_len: int,
                 f_min: float, f_max: float) -> np.ndarray:
    """Boolean row marking bins whose center frequency lies in [f_min, f_max].

    Both edges count as in-band; everything outside is discarded outright.
    """
    if not 0.0 <= f_min < f_max:
        raise ValueError(f"need 0 <= f_min < f_max, got {f_min}..{f_max}")
    if f_max > sample_rate / 2.0:
        raise ValueError(f"f_max {f_max} beyond Nyquist {sample_rate / 2.0}")
    freqs = np.arange(num_bins) * (sample_rate / frame_len)
    return (freqs >= f_min) & (freqs <= f_max)


def band_pass(spec: Spectrogram, f_min: float, f_max: float) -> Spectrogram:
    """Zero every bin outside the band; in-band bins pass through untouched."""
    keep = in_band_bins(spec.num_bins, spec.sample_rate, spec.frame_len, f_min, f_max)
    bins = spec.bins.copy()
    bins[:, ~keep] = 0.0
    return spec.replace_bins(bins)


def apply_mask(spec: Spectrogram, mask: SpectralMask) -> Spectrogram:
    """Element-wise product of the spectrogram with the binary mask."""
    if mask.bits.shape != spec.bins.shape:
        raise ShapeMismatchError(
            f"mask shape {mask.bits.shape} does not match "
            f"spectrogram shape {spec.bins.shape}"
        )
    return spec.replace_bins(spec.bins * mask.bits)


def perceptual_filter(
    buffer: AudioBuffer, config: FilterConfig
) -> tuple[AudioBuffer, SpectralMask, HearingThresholds]:
    """Run the full hardening pipeline on one 16 kHz buffer.

    Analysis, thresholds, mask, mask multiply, band-pass, resynthesis.
    Disabled stages drop out as identities (a disabled mask stage reports an
    all-ones mask). The mask and thresholds are returned with the audio so
    callers can audit what was removed.
    """
    require_rate(buffer, PIPELINE_RATE)
    spec = stft(buffer, frame_len=config.frame_len, hop=config.hop)
    thresholds = compute_thresholds(spec)
    if config.psycho_enabled:
        mask = compute_mask(spec, thresholds, config.phi)
        filtered = apply_mask(spec, mask)
    else:
        mask = SpectralMask(bits=np.ones(spec.bins.shape, dtype=np.uint8))
        filtered = spec
    if config.bandpass_enabled:
        filtered = band_pass(filtered, config.f_min, config.f_max)
    audio = istft(filtered, out_len=len(buffer))
    return audio, mask, thresholds


def mask_gradient_bandpass(grad, f_min: float, f_max: float,
                           sample_rate: int = PIPELINE_RATE) -> np.ndarray:
    """Zero gradient columns for out-of-band bins.

    The bin rule is exactly band_pass's; the FFT length is inferred from the
    column count (bins = frame_len/2 + 1), so a gradient shaped like a
    spectrogram gets the same support as the signal filter.
    """
    g = np.asarray(grad)
    if g.ndim != 2:
        raise ShapeMismatchError("gradient must be a 2-D spectrogram-shaped matrix")
    frame_len = 2 * (g.shape[1] - 1)
    if frame_len <= 0:
        raise ShapeMismatchError("gradient needs at least 2 bin columns")
    keep = in_band_bins(g.shape[1], sample_rate, frame_len, f_min, f_max)
    out = g.copy()
    out[:, ~keep] = 0.0
    return out


def mask_gradient_psycho(grad, mask: SpectralMask) -> np.ndarray:
    """Gate the gradient with the same bits that gated the signal."""
    g = np.asarray(grad)
    if g.shape != mask.bits.shape:
        raise ShapeMismatchError(
            f"gradient shape {g.shape} does not match mask shape {mask.bits.shape}"
        )
    return g * mask.bits
