"""WAV input/output and the in-memory waveform type.

Everything past read_wav works on float64 mono samples at a known rate;
write_wav is the only way audio leaves the pipeline, always as PCM16.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile

from .errors import (
    EmptyAudioError,
    MalformedWavError,
    SampleRateMismatchError,
    UnsupportedEncodingError,
)

PCM16_SCALE = 32768.0


@dataclass(frozen=True)
class AudioBuffer:
    """Mono waveform plus its sample rate.

    read_wav guarantees samples in [-1, 1]; synthesis may overshoot slightly,
    which write_wav clips on the way out. Samples must always be finite.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("AudioBuffer samples must be one-dimensional")
        if samples.size and not np.all(np.isfinite(samples)):
            raise ValueError("AudioBuffer samples must be finite")
        if int(self.sample_rate) <= 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return self.samples.size / self.sample_rate


def _sniff_wav_format(path) -> tuple[int, int]:
    """Return (format_tag, bits_per_sample) from the fmt chunk.

    Walks the RIFF chunks by hand so "not a WAV at all" and "a WAV we do not
    decode" raise different error kinds before the decoder touches the file.
    """
    with open(path, "rb") as fh:
        header = fh.read(12)
        if len(header) < 12 or header[:4] != b"RIFF" or header[8:12] != b"WAVE":
            raise MalformedWavError(f"{path}: not a RIFF/WAVE file")
        while True:
            chunk_header = fh.read(8)
            if len(chunk_header) < 8:
                raise MalformedWavError(f"{path}: no fmt chunk found")
            chunk_id, chunk_size = struct.unpack("<4sI", chunk_header)
            if chunk_id == b"fmt ":
                body = fh.read(chunk_size)
                if len(body) < 16:
                    raise MalformedWavError(f"{path}: fmt chunk truncated")
                format_tag, _, _, _, _, bits = struct.unpack("<HHIIHH", body[:16])
                return format_tag, bits
            # chunks are word-aligned: odd sizes carry a pad byte
            fh.seek(chunk_size + (chunk_size & 1), 1)


def read_wav(path) -> AudioBuffer:
    """Read a PCM16 or IEEE float32 WAV as a normalized mono buffer.

    PCM16 value v maps to v / 32768; float data is taken as stored.
    Multichannel input is averaged down to mono.
    """
    format_tag, bits = _sniff_wav_format(path)
    if not ((format_tag == 1 and bits == 16) or (format_tag == 3 and bits == 32)):
        raise UnsupportedEncodingError(
            f"{path}: WAV format tag {format_tag} at {bits} bits; "
            "only PCM16 and IEEE float32 are read"
        )
    try:
        rate, data = wavfile.read(path)
    except Exception as exc:
        raise MalformedWavError(f"{path}: {exc}") from exc
    if data.size == 0:
        raise EmptyAudioError(f"{path}: zero-length audio")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / PCM16_SCALE
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise UnsupportedEncodingError(f"{path}: unexpected sample dtype {data.dtype}")
    if samples.ndim > 1:
        samples = samples.mean(axis=1)
    if not np.all(np.isfinite(samples)):
        raise MalformedWavError(f"{path}: non-finite samples in payload")
    return AudioBuffer(samples=samples, sample_rate=int(rate))


def write_wav(buffer: AudioBuffer, path) -> None:
    """Write a buffer as mono PCM16, clipping to [-1, 1] first.

    Quantization rounds half away from zero; +1.0 lands on 32767 because the
    positive PCM16 range is one step short of the negative one.
    """
    if len(buffer) == 0:
        raise EmptyAudioError("refusing to write a zero-length buffer")
    scaled = np.clip(buffer.samples, -1.0, 1.0) * PCM16_SCALE
    quantized = np.where(scaled >= 0.0, np.floor(scaled + 0.5), np.ceil(scaled - 0.5))
    pcm = np.clip(quantized, -32768, 32767).astype(np.int16)
    wavfile.write(path, buffer.sample_rate, pcm)


def require_rate(buffer: AudioBuffer, rate: int) -> AudioBuffer:
    """Pass the buffer through untouched if it is at `rate`, else raise.

    There is deliberately no resampling: it would silently shift every bin
    frequency the threshold model depends on.
    """
    if buffer.sample_rate != rate:
        raise SampleRateMismatchError(
            f"expected {rate} Hz, got {buffer.sample_rate} Hz"
        )
    return buffer
