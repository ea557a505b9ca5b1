"""Transcription accuracy (word error rate) and perturbation audibility
(segmental SNR) measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioBuffer
from .errors import (
    EmptyReferenceError,
    LengthMismatchError,
    NoUsableSegmentsError,
    SampleRateMismatchError,
)

SEGMENT_LEN = 256  # 16 ms at 16 kHz
SEGMENT_ENERGY_EPS = 1e-12


@dataclass(frozen=True)
class WerBreakdown:
    """Edit counts behind a word error rate."""

    substitutions: int
    deletions: int
    insertions: int
    reference_len: int
    wer_percent: float


def _tokens(text) -> list[str]:
    parts = text.split() if isinstance(text, str) else list(text)
    return [str(t).casefold() for t in parts]


def wer(reference, hypothesis) -> WerBreakdown:
    """Word error rate with its substitution/deletion/insertion split.

    Inputs are whitespace-tokenized and case-folded; punctuation is left
    alone, so callers normalize transcripts themselves. Alignment ties
    resolve as match, then substitution, then deletion, then insertion.
    The rate is 100*(S+D+I)/N and can exceed 100% with enough insertions.
    """
    ref = _tokens(reference)
    hyp = _tokens(hypothesis)
    if not ref:
        raise EmptyReferenceError("reference transcript has no words")
    m, n = len(ref), len(hyp)
    dist = np.zeros((m + 1, n + 1), dtype=np.int64)
    dist[:, 0] = np.arange(m + 1)
    dist[0, :] = np.arange(n + 1)
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            dist[i, j] = min(
                dist[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1]),
                dist[i - 1, j] + 1,
                dist[i, j - 1] + 1,
            )
    subs = dels = ins = 0
    i, j = m, n
    while i > 0 or j > 0:
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and dist[i, j] == dist[i - 1, j - 1]:
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dist[i, j] == dist[i - 1, j - 1] + 1:
            subs += 1
            i, j = i - 1, j - 1
        elif i > 0 and dist[i, j] == dist[i - 1, j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return WerBreakdown(
        substitutions=subs,
        deletions=dels,
        insertions=ins,
        reference_len=m,
        wer_percent=100.0 * (subs + dels + ins) / m,
    )


@dataclass(frozen=True)
class SnrsegResult:
    """Segmental SNR plus the segment bookkeeping behind it."""

    snrseg_db: float
    segments_used: int
    segments_skipped: int
    segment_len: int


def snrseg(original: AudioBuffer, modified: AudioBuffer,
           segment_len: int = SEGMENT_LEN) -> SnrsegResult:
    """Mean per-segment dB energy ratio of the original to the difference.

    Segments are non-overlapping; a trailing partial segment is dropped.
    A segment is skipped (and counted) when either its signal energy or its
    difference energy sits below 1e-12, where the ratio would be meaningless
    or infinite. Higher values mean a quieter difference. Per-segment values
    are not clamped, so heavily distorted pairs can go far below 0 dB.
    """
    if original.sample_rate != modified.sample_rate:
        raise SampleRateMismatchError(
            f"rates differ: {original.sample_rate} vs {modified.sample_rate}"
        )
    if len(original) != len(modified):
        raise LengthMismatchError(
            f"lengths differ: {len(original)} vs {len(modified)}"
        )
    if segment_len <= 0:
        raise ValueError("segment_len must be positive")
    total = len(original) // segment_len
    if total == 0:
        raise NoUsableSegmentsError(
            f"signal shorter than one {segment_len}-sample segment"
        )
    span = total * segment_len
    x = original.samples[:span].reshape(total, segment_len)
    noise = (modified.samples - original.samples)[:span].reshape(total, segment_len)
    signal_energy = np.sum(x * x, axis=1)
    noise_energy = np.sum(noise * noise, axis=1)
    usable = (signal_energy >= SEGMENT_ENERGY_EPS) & (noise_energy >= SEGMENT_ENERGY_EPS)
    used = int(usable.sum())
    if used == 0:
        raise NoUsableSegmentsError("no segment has usable energy in both terms")
    ratios = 10.0 * np.log10(signal_energy[usable] / noise_energy[usable])
    return SnrsegResult(
        snrseg_db=float(ratios.mean()),
        segments_used=used,
        segments_skipped=total - used,
        segment_len=segment_len,
    )
