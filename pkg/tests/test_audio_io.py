import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.io import wavfile

from psyfilter import AudioBuffer, read_wav, require_rate, write_wav
from psyfilter.errors import (
    EmptyAudioError,
    MalformedWavError,
    SampleRateMismatchError,
    UnsupportedEncodingError,
)


def write_pcm16_reference(path, samples_int16, rate=16000):
    """Independent, struct-level PCM16 WAV encoder used as the read oracle."""
    data = struct.pack(f"<{len(samples_int16)}h", *samples_int16)
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(data), b"WAVE",
        b"fmt ", 16, 1, 1, rate, rate * 2, 2, 16,
        b"data", len(data),
    )
    with open(path, "wb") as fh:
        fh.write(header + data)


def test_read_pcm16_scaling(tmp_path):
    path = tmp_path / "ref.wav"
    write_pcm16_reference(path, [16384, -16384, 0, 32767, -32768])
    buf = read_wav(path)
    assert buf.sample_rate == 16000
    np.testing.assert_allclose(
        buf.samples, [0.5, -0.5, 0.0, 32767 / 32768, -1.0], atol=0
    )


def test_read_float32_passthrough(tmp_path):
    path = tmp_path / "f32.wav"
    payload = np.array([0.25, -0.75, 1.5], dtype=np.float32)
    wavfile.write(path, 16000, payload)
    buf = read_wav(path)
    np.testing.assert_array_equal(buf.samples, payload.astype(np.float64))


def test_read_stereo_downmix(tmp_path):
    path = tmp_path / "st.wav"
    left = np.array([16384, 0], dtype=np.int16)
    right = np.array([0, 16384], dtype=np.int16)
    wavfile.write(path, 16000, np.stack([left, right], axis=1))
    buf = read_wav(path)
    np.testing.assert_allclose(buf.samples, [0.25, 0.25])


def test_write_rounds_half_away_from_zero(tmp_path):
    path = tmp_path / "w.wav"
    write_wav(AudioBuffer(np.array([0.5, -0.5, 1.5, -1.5]), 16000), path)
    _, raw = wavfile.read(path)
    np.testing.assert_array_equal(raw, [16384, -16384, 32767, -32768])


def test_write_empty_rejected(tmp_path):
    buf = AudioBuffer(np.array([0.1]), 16000)
    object.__setattr__(buf, "samples", np.array([]))
    with pytest.raises(EmptyAudioError):
        write_wav(buf, tmp_path / "e.wav")


@pytest.mark.parametrize(
    "payload",
    [
        np.array([10, 20, 30], dtype=np.uint8),
        np.array([1000, -1000], dtype=np.int32),
        np.array([0.5, -0.5], dtype=np.float64),
    ],
    ids=["uint8", "int32", "float64"],
)
def test_unsupported_encodings_rejected(tmp_path, payload):
    path = tmp_path / "enc.wav"
    wavfile.write(path, 16000, payload)
    with pytest.raises(UnsupportedEncodingError):
        read_wav(path)


def test_malformed_not_riff(tmp_path):
    path = tmp_path / "junk.wav"
    path.write_bytes(b"this is not audio at all, not even close")
    with pytest.raises(MalformedWavError):
        read_wav(path)


def test_malformed_truncated_header(tmp_path):
    path = tmp_path / "trunc.wav"
    good = tmp_path / "good.wav"
    write_pcm16_reference(good, [100, 200, 300])
    path.write_bytes(good.read_bytes()[:20])
    with pytest.raises(MalformedWavError):
        read_wav(path)


def test_malformed_missing_fmt_chunk(tmp_path):
    path = tmp_path / "nofmt.wav"
    body = struct.pack("<4sI4s", b"RIFF", 12, b"WAVE")
    body += struct.pack("<4sI", b"data", 4) + b"\x00\x00\x00\x00"
    path.write_bytes(body)
    with pytest.raises(MalformedWavError):
        read_wav(path)


def test_empty_payload_rejected(tmp_path):
    path = tmp_path / "empty.wav"
    wavfile.write(path, 16000, np.array([], dtype=np.int16))
    with pytest.raises(EmptyAudioError):
        read_wav(path)


def test_require_rate():
    buf = AudioBuffer(np.array([0.1]), 8000)
    with pytest.raises(SampleRateMismatchError):
        require_rate(buf, 16000)
    assert require_rate(buf, 8000) is buf


def test_buffer_validation():
    with pytest.raises(ValueError):
        AudioBuffer(np.array([np.nan]), 16000)
    with pytest.raises(ValueError):
        AudioBuffer(np.array([0.1]), 0)
    with pytest.raises(ValueError):
        AudioBuffer(np.zeros((2, 3)), 16000)
    buf = AudioBuffer(np.array([1, 2, 3]), 16000)
    assert buf.samples.dtype == np.float64
    assert len(buf) == 3
    assert buf.duration == pytest.approx(3 / 16000)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.floats(min_value=-1.0, max_value=32767 / 32768, allow_nan=False),
        min_size=1,
        max_size=200,
    )
)
def test_write_read_round_trip(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("rt") / "rt.wav"
    original = np.array(values)
    write_wav(AudioBuffer(original, 16000), path)
    back = read_wav(path)
    # PCM16 quantization: half a step either way
    assert np.max(np.abs(back.samples - original)) <= 0.5 / 32768 + 1e-12
