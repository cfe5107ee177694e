import numpy as np
import pytest

from polarsw.crc import crc_append
from polarsw.polar_core import CodeSpec, compute_syndrome, construct_code
from polarsw.sw import (FrameError, RateSplit, asym_decode, asym_decode_frame, asym_encode,
                        compress_single, decompress_single, nonasym_decode,
                        nonasym_decode_frames, nonasym_encode_x, nonasym_encode_y,
                        pack_stream, rate_of, unpack_stream)
from polarsw.systematic import SystematicSpec

from conftest import random_spec


@pytest.fixture(scope="module")
def spec2048():
    return construct_code(11, 1024, 0.09, l_crc=16)


@pytest.fixture(scope="module")
def spec256():
    return construct_code(8, 128, 0.05, fidelity=64, l_crc=16)


def pair(rng, n, p):
    x = rng.integers(0, 2, n).astype(np.uint8)
    return x, x ^ (rng.random(n) < p).astype(np.uint8)


def test_rate_of():
    spec = CodeSpec(n=11, K=1024, info_set=tuple(range(1024, 2048)), design_p=0.09)
    assert rate_of(RateSplit(1024, 0), spec) == (1.0, 0.5)
    assert rate_of(RateSplit(512, 512), spec) == (0.75, 0.75)
    for k1 in (0, 1, 333, 1024):
        rx, ry = rate_of(RateSplit.from_k1(k1, spec), spec)
        assert rx + ry == 1 + (spec.N - spec.K) / spec.N
    with pytest.raises(ValueError):
        rate_of(RateSplit(5, 5), spec)
    with pytest.raises(ValueError):
        RateSplit(-1, 3)


def test_single_zero_and_linear(spec256, rng):
    n = spec256.payload_length
    assert not compress_single(np.zeros(n), spec256).any()
    x, x2 = rng.integers(0, 2, (2, n)).astype(np.uint8)
    assert np.array_equal(compress_single(x ^ x2, spec256),
                          compress_single(x, spec256) ^ compress_single(x2, spec256))
    xh, ok = decompress_single(np.zeros(spec256.N - spec256.K), 0.1, spec256)
    assert ok and not xh.any()
    assert asym_encode is compress_single
    with pytest.raises(ValueError):
        compress_single(np.zeros(n + 1), spec256)


def test_single_round_trip_n2048(spec2048, rng):
    ok_blocks = 0
    for _ in range(200):
        x = (rng.random(spec2048.payload_length) < 0.07).astype(np.uint8)
        xh, ok = decompress_single(compress_single(x, spec2048), 0.09, spec2048)
        ok_blocks += ok and np.array_equal(xh, x)
    assert ok_blocks >= 198


def test_single_beyond_capacity_fails_crc(spec256, rng):
    fails = 0
    for _ in range(40):
        x = (rng.random(spec256.payload_length) < 0.3).astype(np.uint8)
        fails += not decompress_single(compress_single(x, spec256), 0.3, spec256)[1]
    assert fails >= 30


def test_asym_exact_when_y_equals_x_n8(rng):
    spec = random_spec(rng, 3, K=4)
    for v in range(256):
        x = np.array([(v >> i) & 1 for i in range(8)], dtype=np.uint8)
        xh, ok = asym_decode(asym_encode(x, spec), x, 0.01, spec)
        assert ok and np.array_equal(xh, x)


def test_asym_round_trip_n2048(spec2048, rng):
    for _ in range(30):
        x, y = pair(rng, spec2048.payload_length, 0.0)
        xh, ok = asym_decode(asym_encode(x, spec2048), y, 0.01, spec2048)
        assert ok and np.array_equal(xh, x)
    good = 0
    for _ in range(100):
        x, y = pair(rng, spec2048.payload_length, 0.05)
        s = asym_encode(x, spec2048)
        f, ok = asym_decode_frame(s, y, 0.05, spec2048)
        assert np.array_equal(compute_syndrome(f, spec2048), s)
        good += ok and np.array_equal(f[:spec2048.payload_length], x)
    assert good >= 99


def test_asym_tampered_syndrome(spec256, rng):
    for _ in range(30):
        x, y = pair(rng, spec256.payload_length, 0.02)
        s = asym_encode(x, spec256)
        s[rng.integers(s.size)] ^= 1
        assert not asym_decode(s, y, 0.02, spec256)[1]


def test_nonasym_identical_sources(spec256, rng):
    ss = SystematicSpec(spec256)
    for k1 in (0, 1, 50, 128):
        split = RateSplit.from_k1(k1, spec256)
        for p in (0.001, 0.2, 0.49):
            x = rng.integers(0, 2, spec256.payload_length).astype(np.uint8)
            est = nonasym_decode(nonasym_encode_x(x, split, ss), nonasym_encode_y(x, split, ss),
                                 split, p, ss)
            assert est.crc_pass
            assert np.array_equal(est.x_hat, x) and np.array_equal(est.y_hat, x)


def test_nonasym_encoder_shapes(spec256, rng):
    ss = SystematicSpec(spec256)
    n = spec256.payload_length
    for k1 in (0, 128):
        split = RateSplit.from_k1(k1, spec256)
        ex = nonasym_encode_x(np.zeros(n), split, ss)
        ey = nonasym_encode_y(np.zeros(n), split, ss)
        assert ex.xa1.size == k1 and ey.ya2.size == 128 - k1
        assert not ex.xa1.any() and not ex.s_x.any() and not ey.s_y.any()
    split = RateSplit(40, 88)
    x, x2 = rng.integers(0, 2, (2, n)).astype(np.uint8)
    a, b, c = (nonasym_encode_x(v, split, ss) for v in (x, x2, x ^ x2))
    assert np.array_equal(c.xa1, a.xa1 ^ b.xa1) and np.array_equal(c.s_x, a.s_x ^ b.s_x)
    fx = crc_append(x, spec256.N)
    assert np.array_equal(a.xa1, fx[ss.b_set[:40]])
    ey = nonasym_encode_y(x, split, ss)
    assert np.array_equal(ey.ya2, fx[ss.b_set[40:]])
    with pytest.raises(ValueError):
        nonasym_encode_x(x, RateSplit(1, 1), ss)


def test_nonasym_correct_error_pattern_gives_exact_sources(rng):
    for _ in range(40):
        spec = random_spec(rng, 4, K=int(rng.integers(2, 12)))
        ss = SystematicSpec(spec)
        x, y = pair(rng, 16, 0.05)
        outcomes = []
        for k1 in range(spec.K + 1):
            split = RateSplit.from_k1(k1, spec)
            ex, ey = nonasym_encode_x(x, split, ss), nonasym_encode_y(y, split, ss)
            xf, yf, e, _ = nonasym_decode_frames(ex, ey, split, 0.05, ss)
            outcomes.append(e)
            assert np.array_equal(compute_syndrome(xf, spec), ex.s_x)
            assert np.array_equal(compute_syndrome(yf, spec), ey.s_y)
            if np.array_equal(e, x ^ y):
                assert np.array_equal(xf, x) and np.array_equal(yf, y)
        # the error-pattern step never looks at the split
        assert all(np.array_equal(o, outcomes[0]) for o in outcomes)


def test_nonasym_degenerate_splits_match_asym(spec256, rng):
    ss = SystematicSpec(spec256)
    n = spec256.payload_length
    for _ in range(40):
        x, y = pair(rng, n, 0.06)
        s_x = asym_encode(x, spec256)
        s_y = asym_encode(y, spec256)
        # K1 = 0: y travels in full, x matches decoding it against side info y
        split = RateSplit.from_k1(0, spec256)
        est = nonasym_decode(nonasym_encode_x(x, split, ss), nonasym_encode_y(y, split, ss),
                             split, 0.06, ss)
        assert np.array_equal(est.y_hat, y)
        assert np.array_equal(est.x_hat, asym_decode(s_x, y, 0.06, spec256)[0])
        # K1 = K: the mirror image
        split = RateSplit.from_k1(spec256.K, spec256)
        est = nonasym_decode(nonasym_encode_x(x, split, ss), nonasym_encode_y(y, split, ss),
                             split, 0.06, ss)
        assert np.array_equal(est.x_hat, x)
        assert np.array_equal(est.y_hat, asym_decode(s_y, x, 0.06, spec256)[0])


def test_stream_round_trip(spec256, rng):
    blocks = [(rng.integers(0, 2, 37).astype(np.uint8),
               rng.integers(0, 2, 128).astype(np.uint8)) for _ in range(3)]
    data = pack_stream("nonasym-x", spec256, 37, blocks)
    assert len(data) == 21 + 3 * ((37 + 128 + 7) // 8)
    mode, k1, got = unpack_stream(data, spec256)
    assert mode == "nonasym-x" and k1 == 37
    for (a, b), (c, d) in zip(blocks, got):
        assert np.array_equal(a, c) and np.array_equal(b, d)
    with pytest.raises(FrameError):
        unpack_stream(data, spec256, "nonasym-y")
    with pytest.raises(FrameError):
        unpack_stream(data[:-1], spec256)
    with pytest.raises(FrameError):
        unpack_stream(b"XXXX" + data[4:], spec256)
    other = construct_code(8, 120, 0.05, fidelity=64, l_crc=16)
    with pytest.raises(FrameError):
        unpack_stream(data, other)
