"""STFT analysis/synthesis and dB magnitude conversion.

All masking math happens on the one-sided complex matrix produced here.
Frames are centered: frame m covers input samples
[m*hop - frame_len/2, m*hop + frame_len/2), taken from a zero-padded copy of
the signal. Centering keeps every real sample under nonzero total window
weight (the periodic Hann window is zero at its first sample), which is what
lets overlap-add synthesis invert the transform to float precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioBuffer
from .errors import AllZeroSpectrogramError, EmptyAudioError

DB_CEILING = 96.0
DB_FLOOR = -100.0


def hann_window(frame_len: int) -> np.ndarray:
    # periodic form; the symmetric variant breaks overlap-add at hop = frame_len/2
    k = np.arange(frame_len)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * k / frame_len)


@dataclass(frozen=True)
class Spectrogram:
    """One-sided complex STFT; frames along axis 0, bins along axis 1."""

    bins: np.ndarray
    frame_len: int
    hop: int
    window: str
    sample_rate: int

    def __post_init__(self):
        bins = np.asarray(self.bins, dtype=np.complex128)
        if bins.ndim != 2:
            raise ValueError("Spectrogram bins must be a 2-D matrix")
        if bins.shape[1] != self.frame_len // 2 + 1:
            raise ValueError(
                f"{bins.shape[1]} bins do not match frame_len {self.frame_len} "
                "(need frame_len/2 + 1 for a one-sided spectrum)"
            )
        if not np.all(np.isfinite(bins)):
            raise ValueError("Spectrogram entries must be finite")
        object.__setattr__(self, "bins", bins)

    @property
    def num_frames(self) -> int:
        return int(self.bins.shape[0])

    @property
    def num_bins(self) -> int:
        return int(self.bins.shape[1])

    def bin_frequencies(self) -> np.ndarray:
        """Center frequency of every bin, in Hz."""
        return np.arange(self.num_bins) * (self.sample_rate / self.frame_len)

    def replace_bins(self, bins: np.ndarray) -> "Spectrogram":
        """Same transform metadata around a new bin matrix."""
        return Spectrogram(
            bins=bins,
            frame_len=self.frame_len,
            hop=self.hop,
            window=self.window,
            sample_rate=self.sample_rate,
        )


def stft(buffer: AudioBuffer, frame_len: int = 512, hop: int = 256) -> Spectrogram:
    """Hann-windowed one-sided STFT with ceil(len/hop) centered frames."""
    if frame_len <= 0 or (frame_len & (frame_len - 1)) != 0:
        raise ValueError(f"frame_len must be a power of two, got {frame_len}")
    if not 0 < hop <= frame_len:
        raise ValueError(f"hop must satisfy 0 < hop <= frame_len, got {hop}")
    x = buffer.samples
    if x.size == 0:
        raise EmptyAudioError("cannot transform an empty buffer")
    num_frames = -(-x.size // hop)
    half = frame_len // 2
    padded = np.zeros(max((num_frames - 1) * hop + frame_len, half + x.size))
    padded[half:half + x.size] = x
    frames = np.lib.stride_tricks.sliding_window_view(padded, frame_len)[::hop]
    frames = frames[:num_frames]
    bins = np.fft.rfft(frames * hann_window(frame_len), axis=1)
    return Spectrogram(
        bins=bins,
        frame_len=frame_len,
        hop=hop,
        window="hann",
        sample_rate=buffer.sample_rate,
    )


def istft(spec: Spectrogram, out_len: int) -> AudioBuffer:
    """Weighted overlap-add synthesis, truncated or zero-padded to out_len.

    Each frame is windowed again on the way out and the sum is normalized by
    the accumulated squared window, so unmodified spectra reconstruct the
    input exactly. Requires hop = frame_len/2, the overlap the Hann window
    was chosen for.
    """
    if spec.hop * 2 != spec.frame_len:
        raise ValueError(
            f"istft needs hop = frame_len/2 for the Hann window, "
            f"got hop {spec.hop} with frame_len {spec.frame_len}"
        )
    if out_len < 0:
        raise ValueError("out_len must be non-negative")
    frame_len, hop = spec.frame_len, spec.hop
    window = hann_window(frame_len)
    frames = np.fft.irfft(spec.bins, n=frame_len, axis=1)
    total = (spec.num_frames - 1) * hop + frame_len
    acc = np.zeros(total)
    weight = np.zeros(total)
    for m in range(spec.num_frames):
        start = m * hop
        acc[start:start + frame_len] += window * frames[m]
        weight[start:start + frame_len] += window * window
    # drop the half-frame of analysis padding, then normalize where covered
    covered = acc[hop:min(total, hop + out_len)]
    weights = weight[hop:min(total, hop + out_len)]
    out = np.zeros(covered.size)
    nonzero = weights > 0.0
    out[nonzero] = covered[nonzero] / weights[nonzero]
    samples = np.zeros(out_len)
    samples[:out.size] = out
    return AudioBuffer(samples=samples, sample_rate=spec.sample_rate)


def magnitude_db(spec: Spectrogram) -> np.ndarray:
    """Bin magnitudes in dB with the loudest bin pinned at 96 dB.

    The scale is relative, so rescaling the waveform does not move the
    result. Values are floored at -100 dB; exact zeros land on the floor.
    """
    mags = np.abs(spec.bins)
    peak = mags.max()
    if peak == 0.0:
        raise AllZeroSpectrogramError("all-zero spectrogram has no reference maximum")
    with np.errstate(divide="ignore"):
        levels = DB_CEILING + 20.0 * np.log10(mags / peak)
    return np.maximum(levels, DB_FLOOR)
