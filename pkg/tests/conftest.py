import numpy as np
import pytest

from psyfilter import AudioBuffer, write_wav

RATE = 16000


def speech_like(seconds=1.0, seed=0, rate=RATE):
    """Synthetic voiced-speech stand-in: drifting f0, harmonic stack, soft hiss.

    Not speech, but spectrally busy enough to exercise masker detection the
    way real recordings do.
    """
    rng = np.random.default_rng(seed)
    n = int(round(seconds * rate))
    t = np.arange(n) / rate
    f0 = 110.0 + 30.0 * np.sin(2 * np.pi * 1.7 * t + rng.uniform(0, 2 * np.pi))
    phase = 2 * np.pi * np.cumsum(f0) / rate
    x = np.zeros(n)
    for mult, amp in [(1, 1.0), (2, 0.55), (3, 0.4), (4, 0.25), (6, 0.18), (9, 0.1)]:
        x += amp * np.sin(mult * phase + rng.uniform(0, 2 * np.pi))
    x *= 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)
    x += 0.01 * rng.standard_normal(n)
    return AudioBuffer(x / (np.max(np.abs(x)) * 1.05), rate)


def make_corpus(directory, count=10, seconds=0.25):
    """Write a small WAV corpus; returns the file paths in name order."""
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        path = directory / f"utt{i:02d}.wav"
        write_wav(speech_like(seconds=seconds, seed=100 + i), path)
        paths.append(path)
    return paths


@pytest.fixture
def speech_buffer():
    return speech_like(seconds=1.0, seed=13)


@pytest.fixture
def corpus_dir(tmp_path):
    make_corpus(tmp_path / "corpus")
    return tmp_path / "corpus"
