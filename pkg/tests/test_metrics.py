from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psyfilter import AudioBuffer, snrseg, wer
from psyfilter.errors import (
    EmptyReferenceError,
    LengthMismatchError,
    NoUsableSegmentsError,
    SampleRateMismatchError,
)

RATE = 16000


def oracle_distance(ref, hyp):
    """Plain recursive Levenshtein, memoized; written apart from the DP."""

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(ref):
            return len(hyp) - j
        if j == len(hyp):
            return len(ref) - i
        if ref[i] == hyp[j]:
            return go(i + 1, j + 1)
        return 1 + min(go(i + 1, j + 1), go(i + 1, j), go(i, j + 1))

    return go(0, 0)


def oracle_triples(ref, hyp):
    """All (S, D, I) splits achievable at minimum total cost."""

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(ref) and j == len(hyp):
            return {(0, 0, 0)}
        options = []
        if i < len(ref) and j < len(hyp) and ref[i] == hyp[j]:
            options.append((0, 0, 0, go(i + 1, j + 1)))
        if i < len(ref) and j < len(hyp):
            options.append((1, 0, 0, go(i + 1, j + 1)))
        if i < len(ref):
            options.append((0, 1, 0, go(i + 1, j)))
        if j < len(hyp):
            options.append((0, 0, 1, go(i, j + 1)))
        candidates = set()
        for s, d, ins, rest in options:
            for rs, rd, ri in rest:
                candidates.add((s + rs, d + rd, ins + ri))
        best = min(a + b + c for a, b, c in candidates)
        return {t for t in candidates if sum(t) == best}

    return go(0, 0)


def test_single_substitution():
    got = wer("the cat sat", "the bat sat")
    assert (got.substitutions, got.deletions, got.insertions) == (1, 0, 0)
    assert got.reference_len == 3
    assert got.wer_percent == pytest.approx(100.0 / 3)


def test_insertions_push_past_hundred():
    got = wer("hi", "hi there you two")
    assert got.insertions == 3
    assert got.wer_percent == pytest.approx(300.0)
    got = wer("a", "a b c")
    assert got.wer_percent == pytest.approx(200.0)


def test_identical_and_casefold():
    assert wer("Hello World", "hello world").wer_percent == 0.0
    assert wer("x y z", "x y z").wer_percent == 0.0


def test_all_deleted():
    got = wer("one two three", "")
    assert got.deletions == 3
    assert got.wer_percent == pytest.approx(100.0)


def test_token_list_input():
    got = wer(["a", "b"], ["a", "c"])
    assert got.substitutions == 1


def test_empty_reference_rejected():
    with pytest.raises(EmptyReferenceError):
        wer("", "anything")
    with pytest.raises(EmptyReferenceError):
        wer("   ", "anything")


def test_wer_matches_oracle_random_pairs():
    rng = np.random.default_rng(17)
    words = ["a", "b", "c", "d", "e"]
    for _ in range(300):
        m = rng.integers(1, 9)
        n = rng.integers(0, 9)
        ref = tuple(rng.choice(words, m))
        hyp = tuple(rng.choice(words, n))
        got = wer(list(ref), list(hyp))
        dist = oracle_distance(ref, hyp)
        total = got.substitutions + got.deletions + got.insertions
        assert total == dist
        assert got.wer_percent == pytest.approx(100.0 * dist / m)
        assert (got.substitutions, got.deletions, got.insertions) in oracle_triples(ref, hyp)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.sampled_from("abc"), min_size=1, max_size=6),
    st.lists(st.sampled_from("abc"), min_size=0, max_size=6),
)
def test_wer_distance_properties(ref, hyp):
    got = wer(ref, hyp)
    total = got.substitutions + got.deletions + got.insertions
    # symmetry of the underlying distance
    if hyp:
        flipped = wer(hyp, ref)
        assert flipped.substitutions + flipped.deletions + flipped.insertions == total
    # distance bounded by the longer sequence
    assert total <= max(len(ref), len(hyp))
    assert got.substitutions + got.deletions <= len(ref)


def random_audio(n, seed, scale=0.5):
    rng = np.random.default_rng(seed)
    return AudioBuffer(rng.uniform(-scale, scale, n), RATE)


def oracle_snrseg(x, y, seg=256):
    """Loop-written segmental SNR; same skip rule, different dataflow."""
    count = x.size // seg
    values = []
    for i in range(count):
        sx = x[i * seg : (i + 1) * seg]
        noise = sx - y[i * seg : (i + 1) * seg]
        ex = float(np.dot(sx, sx))
        en = float(np.dot(noise, noise))
        if ex < 1e-12 or en < 1e-12:
            continue
        values.append(10.0 * np.log10(ex / en))
    if not values:
        raise AssertionError("oracle found no usable segments")
    return sum(values) / len(values)


def test_tenth_amplitude_noise_gives_twenty_db():
    x = random_audio(4096, 1)
    y = AudioBuffer(x.samples - x.samples / 10.0, RATE)
    got = snrseg(x, y)
    assert got.snrseg_db == pytest.approx(20.0, abs=1e-9)
    assert got.segments_used == 16
    assert got.segments_skipped == 0


def test_full_cancellation_gives_zero_db():
    x = random_audio(4096, 2)
    y = AudioBuffer(np.zeros(4096), RATE)
    assert snrseg(x, y).snrseg_db == pytest.approx(0.0, abs=1e-9)


def test_matches_oracle_on_random_pairs():
    rng = np.random.default_rng(5)
    for seed in range(20):
        n = int(rng.integers(300, 5000))
        x = random_audio(n, seed)
        noise = rng.uniform(-0.1, 0.1, n)
        y = AudioBuffer(x.samples - noise, RATE)
        got = snrseg(x, y).snrseg_db
        want = oracle_snrseg(x.samples, y.samples)
        assert got == pytest.approx(want, abs=1e-9)


def test_doubling_noise_drops_six_db():
    x = random_audio(2048, 9)
    rng = np.random.default_rng(10)
    noise = rng.uniform(-0.05, 0.05, 2048)
    one = snrseg(x, AudioBuffer(x.samples - noise, RATE))
    two = snrseg(x, AudioBuffer(x.samples - 2 * noise, RATE))
    assert two.snrseg_db < one.snrseg_db
    assert one.snrseg_db - two.snrseg_db == pytest.approx(20 * np.log10(2), abs=1e-9)


def test_trailing_partial_segment_dropped():
    x = random_audio(256 + 100, 3)
    y = AudioBuffer(x.samples - x.samples / 10.0, RATE)
    got = snrseg(x, y)
    assert got.segments_used + got.segments_skipped == 1


def test_silent_segments_skipped():
    x = np.zeros(1024)
    x[:256] = np.linspace(-0.5, 0.5, 256)
    y = x - x / 10.0
    got = snrseg(AudioBuffer(x, RATE), AudioBuffer(y, RATE))
    assert got.segments_used == 1
    assert got.segments_skipped == 3
    assert got.snrseg_db == pytest.approx(20.0, abs=1e-9)


def test_identical_signals_have_no_usable_segments():
    x = random_audio(2048, 4)
    with pytest.raises(NoUsableSegmentsError):
        snrseg(x, x)


def test_too_short_input_rejected():
    x = random_audio(100, 6)
    y = random_audio(100, 7)
    with pytest.raises(NoUsableSegmentsError):
        snrseg(x, y)


def test_input_validation():
    x = random_audio(1024, 8)
    with pytest.raises(LengthMismatchError):
        snrseg(x, random_audio(1000, 8))
    with pytest.raises(SampleRateMismatchError):
        snrseg(x, AudioBuffer(x.samples, 8000))
    with pytest.raises(ValueError):
        snrseg(x, x, segment_len=0)
