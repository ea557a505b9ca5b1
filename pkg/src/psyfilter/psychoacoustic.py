"""Hearing-threshold model and the binary keep/drop mask.

Per frame: take the 96 dB-referenced power spectrum, pick tonal peaks and
per-critical-band noise maskers, drop the inaudible and crowded ones, then
power-sum each survivor's masking curve with the threshold in quiet. A bin
survives the mask only when its level clears the threshold plus the
aggressiveness margin phi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError
from .spectral import DB_CEILING, DB_FLOOR, Spectrogram, magnitude_db

TONAL = "tonal"
NOISE = "noise"

# a local maximum must beat every probed neighbor by this much to count as tonal
TONAL_DOMINANCE_DB = 7.0

# maskers closer than this are redundant; only the louder one survives
DECIMATION_WINDOW_BARK = 0.5

# masking curves contribute nothing outside this Bark distance from the masker
SPREAD_SUPPORT_BARK = (-3.0, 8.0)

# critical band edges in Hz; bands above Nyquist are dropped at runtime
CRITICAL_BAND_EDGES = (
    0.0, 100.0, 200.0, 300.0, 400.0, 510.0, 630.0, 770.0, 920.0, 1080.0,
    1270.0, 1480.0, 1720.0, 2000.0, 2320.0, 2700.0, 3150.0, 3700.0, 4400.0,
    5300.0, 6400.0, 7700.0, 9500.0, 12000.0, 15500.0, 22050.0,
)


def bark(freq):
    """Critical-band rate (Bark) for a frequency in Hz."""
    f = np.asarray(freq, dtype=np.float64)
    z = 13.0 * np.arctan(0.00076 * f) + 3.5 * np.arctan((f / 7500.0) ** 2)
    return float(z) if z.ndim == 0 else z


def threshold_in_quiet(freq):
    """Softest audible level (dB) at a frequency with no other sound present.

    Valid for freq > 0. Clamped at 96 dB so the unbounded low-frequency tail
    cannot dominate later power sums.
    """
    f = np.asarray(freq, dtype=np.float64)
    if np.any(f <= 0.0):
        raise ValueError("threshold_in_quiet needs a positive frequency")
    khz = f / 1000.0
    levels = (
        3.64 * khz ** -0.8
        - 6.5 * np.exp(-0.6 * (khz - 3.3) ** 2)
        + 1e-3 * khz ** 4
    )
    levels = np.minimum(levels, DB_CEILING)
    return float(levels) if levels.ndim == 0 else levels


def quiet_threshold_row(sample_rate: int, frame_len: int) -> np.ndarray:
    """threshold_in_quiet sampled at every bin center.

    The DC bin, where the formula diverges, takes the 96 dB clamp value.
    """
    freqs = np.arange(frame_len // 2 + 1) * (sample_rate / frame_len)
    row = np.empty(freqs.size)
    row[0] = DB_CEILING
    row[1:] = threshold_in_quiet(freqs[1:])
    return row


@dataclass(frozen=True)
class Masker:
    """One spectral component that raises thresholds around itself."""

    kind: str  # TONAL or NOISE
    bin: int
    level: float  # dB on the 96 dB full-scale convention
    bark: float


def _tonal_probe_offsets(k: int) -> tuple[int, ...]:
    # probe width grows with frequency, following the coder-model convention
    if k < 63:
        return (2,)
    if k < 127:
        return (2, 3)
    return (2, 3, 4, 5, 6)


def find_maskers(power_row, sample_rate: int, frame_len: int) -> list[Masker]:
    """Extract tonal and noise maskers from one frame of the dB spectrum.

    Tonal: a local maximum that beats every probe bin by at least 7 dB; its
    level pools the peak with both immediate neighbors. Noise: the bins no
    tonal masker claimed, pooled per critical band and placed at the band's
    geometric-mean bin.
    """
    row = np.asarray(power_row, dtype=np.float64)
    num_bins = row.size
    bin_hz = sample_rate / frame_len
    maskers = []
    claimed = np.zeros(num_bins, dtype=bool)

    for k in range(3, num_bins - 1):
        if not (row[k] > row[k - 1] and row[k] >= row[k + 1]):
            continue
        offsets = _tonal_probe_offsets(k)
        dominant = True
        for d in offsets:
            for kk in (k - d, k + d):
                if 0 <= kk < num_bins and row[k] - row[kk] < TONAL_DOMINANCE_DB:
                    dominant = False
                    break
            if not dominant:
                break
        if not dominant:
            continue
        level = 10.0 * np.log10(
            10.0 ** (row[k - 1] / 10.0)
            + 10.0 ** (row[k] / 10.0)
            + 10.0 ** (row[k + 1] / 10.0)
        )
        maskers.append(
            Masker(kind=TONAL, bin=k, level=float(level), bark=bark(k * bin_hz))
        )
        claimed[max(0, k - offsets[-1]):min(num_bins, k + offsets[-1] + 1)] = True

    freqs = np.arange(num_bins) * bin_hz
    nyquist = sample_rate / 2.0
    edges = [e for e in CRITICAL_BAND_EDGES if e < nyquist] + [nyquist]
    for i in range(len(edges) - 1):
        in_band = (freqs >= edges[i]) & (freqs < edges[i + 1]) & ~claimed
        if i == len(edges) - 2:
            in_band |= (freqs == edges[i + 1]) & ~claimed
        members = np.nonzero(in_band)[0]
        if members.size == 0:
            continue
        level = 10.0 * np.log10(np.sum(10.0 ** (row[members] / 10.0)))
        # geometric mean of member indices, floored at 1 and kept inside the band
        mean_index = np.exp(np.mean(np.log(np.maximum(members, 1))))
        center = int(np.clip(round(mean_index), members[0], members[-1]))
        maskers.append(
            Masker(kind=NOISE, bin=center, level=float(level), bark=bark(center * bin_hz))
        )

    maskers.sort(key=lambda m: m.bin)
    return maskers


def decimate_maskers(maskers, sample_rate: int, frame_len: int) -> list[Masker]:
    """Drop inaudible maskers, then thin crowded ones.

    A masker below the quiet threshold at its own bin is removed. Of any two
    survivors within half a Bark, only the louder is kept.
    """
    bin_hz = sample_rate / frame_len
    audible = []
    for m in maskers:
        freq = m.bin * bin_hz
        floor = DB_CEILING if freq <= 0.0 else threshold_in_quiet(freq)
        if m.level >= floor:
            audible.append(m)
    audible.sort(key=lambda m: m.bark)
    kept: list[Masker] = []
    for m in audible:
        if kept and m.bark - kept[-1].bark < DECIMATION_WINDOW_BARK:
            if m.level > kept[-1].level:
                kept[-1] = m
        else:
            kept.append(m)
    return kept


def spreading_function(delta_bark, masker_level: float) -> np.ndarray:
    """Masking slope in dB at a Bark distance from a masker of a given level.

    Piecewise linear: steep below the masker, shallower above, with the
    upper slopes opening up for louder maskers. Returns -inf outside the
    [-3, 8) Bark support so the value drops out of power sums.
    """
    dz = np.atleast_1d(np.asarray(delta_bark, dtype=np.float64))
    level = float(masker_level)
    out = np.full(dz.shape, -np.inf)
    seg = (dz >= -3.0) & (dz < -1.0)
    out[seg] = 17.0 * dz[seg] - 0.4 * level + 11.0
    seg = (dz >= -1.0) & (dz < 0.0)
    out[seg] = (0.4 * level + 6.0) * dz[seg]
    seg = (dz >= 0.0) & (dz < 1.0)
    out[seg] = -17.0 * dz[seg]
    seg = (dz >= 1.0) & (dz < 8.0)
    out[seg] = (0.15 * level - 17.0) * dz[seg] - 0.15 * level
    return out.reshape(np.shape(delta_bark))


def masking_index(kind: str, masker_bark: float) -> float:
    """Offset from masker level to the peak of its masking curve.

    Tonal maskers mask less than noise at the same level, and both indices
    fall with critical-band rate.
    """
    if kind == TONAL:
        return -6.025 - 0.275 * masker_bark
    if kind == NOISE:
        return -2.025 - 0.175 * masker_bark
    raise ValueError(f"unknown masker kind: {kind!r}")


def global_threshold(maskers, num_bins: int, sample_rate: int, frame_len: int) -> np.ndarray:
    """Per-bin threshold: power sum of the quiet curve and every masking curve.

    With no maskers the row is exactly the quiet curve; each masker adds
    10^(T/10) over its spreading support only.
    """
    freqs = np.arange(num_bins) * (sample_rate / frame_len)
    bark_axis = bark(freqs)
    total = 10.0 ** (quiet_threshold_row(sample_rate, frame_len) / 10.0)
    for m in maskers:
        curve = (
            m.level
            + masking_index(m.kind, m.bark)
            + spreading_function(bark_axis - m.bark, m.level)
        )
        total = total + 10.0 ** (curve / 10.0)
    return 10.0 * np.log10(total)


@dataclass(frozen=True)
class HearingThresholds:
    """Per-frame, per-bin audibility floor, on the magnitude_db scale."""

    levels: np.ndarray
    frame_len: int
    hop: int
    window: str
    sample_rate: int

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=np.float64)
        if levels.ndim != 2:
            raise ValueError("threshold matrix must be 2-D")
        if not np.all(np.isfinite(levels)):
            raise ValueError("threshold entries must be finite")
        object.__setattr__(self, "levels", levels)


@dataclass(frozen=True)
class SpectralMask:
    """Binary keep (1) / drop (0) decision per spectrogram cell."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2:
            raise ValueError("mask must be 2-D")
        if bits.size and not np.isin(bits, (0, 1)).all():
            raise ValueError("mask entries must be 0 or 1")
        object.__setattr__(self, "bits", bits.astype(np.uint8))

    @property
    def zero_fraction(self) -> float:
        """Fraction of cells the mask removes."""
        return float(1.0 - self.bits.mean()) if self.bits.size else 0.0


def compute_thresholds(spec: Spectrogram) -> HearingThresholds:
    """Threshold matrix for every frame of a spectrogram.

    Silence is a fixpoint, not an error: with no reference maximum to pin
    the dB scale, every row is simply the quiet curve.
    """
    if np.abs(spec.bins).max() == 0.0:
        quiet = quiet_threshold_row(spec.sample_rate, spec.frame_len)
        levels = np.tile(quiet, (spec.num_frames, 1))
    else:
        power = magnitude_db(spec)
        rows = []
        for n in range(spec.num_frames):
            maskers = find_maskers(power[n], spec.sample_rate, spec.frame_len)
            maskers = decimate_maskers(maskers, spec.sample_rate, spec.frame_len)
            rows.append(
                global_threshold(maskers, spec.num_bins, spec.sample_rate, spec.frame_len)
            )
        levels = np.vstack(rows)
    return HearingThresholds(
        levels=levels,
        frame_len=spec.frame_len,
        hop=spec.hop,
        window=spec.window,
        sample_rate=spec.sample_rate,
    )


def compute_mask(spec: Spectrogram, thresholds: HearingThresholds, phi: float) -> SpectralMask:
    """Keep a bin only when its level rises above threshold + phi.

    Larger phi removes more of the signal. The comparison happens in dB; an
    all-zero spectrogram sits on the -100 dB floor everywhere, so silence
    needs no special case in callers.
    """
    if not np.isfinite(phi):
        raise ValueError("phi must be finite")
    if thresholds.levels.shape != spec.bins.shape:
        raise ShapeMismatchError(
            f"threshold shape {thresholds.levels.shape} does not match "
            f"spectrogram shape {spec.bins.shape}"
        )
    if np.abs(spec.bins).max() == 0.0:
        power = np.full(spec.bins.shape, DB_FLOOR)
    else:
        power = magnitude_db(spec)
    return SpectralMask(bits=(power > thresholds.levels + phi).astype(np.uint8))
