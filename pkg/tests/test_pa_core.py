import io
import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import pa_core
import reference
from bignum import LimbVec
from errors import (
    ConfigurationError,
    InsufficientMaterialError,
    RejectedBlockError,
    SecurityConditionError,
    SessionStateError,
    SizeError,
)
from pa_core import BlockReason, PaParams, PaSession, SessionState


def _params(gamma, k, r, s=0, seed=b"fixture"):
    return PaParams.from_seed(gamma, k, r, s, seed)


def _bits_of(value, n):
    return reference.int_to_bits(value, n)


# ---------- parameters ----------

def test_params_guard_examples():
    p = PaParams(13, 2, 5, 2, (1, 2), 3, 4)
    assert p.alpha == 13 and p.beta == 5
    with pytest.raises(ConfigurationError):
        PaParams(13, 2, 5, 2, (1, 2), 4, 4)  # even b
    with pytest.raises(ConfigurationError):
        PaParams(13, 2, 5, 2, (1, 2**13 - 1), 3, 4)  # a_i = p
    with pytest.raises(ConfigurationError):
        PaParams(13, 3, 5, 2, (1, 2), 3, 4)  # wrong seed count
    with pytest.raises(ConfigurationError):
        PaParams(12, 1, 5, 2, (1,), 3, 4)  # not a Mersenne exponent


def test_security_guard_randomized():
    rnd = random.Random(5)
    gammas = [13, 17, 19, 31, 61, 89, 107, 127, 521]
    for _ in range(100):
        gamma = rnd.choice(gammas)
        s = rnd.randrange(0, gamma)
        r = rnd.randrange(max(1, gamma - s), gamma + 50)
        with pytest.raises(SecurityConditionError):
            PaParams.from_seed(gamma, 2, r, s, rnd.randbytes(8))


def test_from_seed_is_deterministic_and_valid():
    a = _params(521, 8, 256)
    b = _params(521, 8, 256)
    assert a.a == b.a and a.b == b.b and a.c == b.c
    assert a.b & 1
    assert all(0 <= v < 2**521 - 1 for v in a.a)
    assert _params(521, 8, 256, seed=b"other").a != a.a


def test_seed_file_roundtrip(tmp_path):
    p = _params(61, 4, 20, 8)
    path = pa_core.write_seed_file(p, tmp_path / "seeds.bin")
    assert path.stat().st_size == 8 * 6
    q = pa_core.load_seed_file(path, 61, 4, 20, 8)
    assert (q.a, q.b, q.c) == (p.a, p.b, p.c)


def test_seed_file_validation(tmp_path, caplog):
    nb = 2  # gamma = 13
    fields = [1, 2, 4, 5]  # a1, a2, b (even), c
    path = tmp_path / "seeds.bin"
    path.write_bytes(b"".join(v.to_bytes(nb, "little") for v in fields))
    with caplog.at_level("WARNING"):
        p = pa_core.load_seed_file(path, 13, 2, 5, 2)
    assert p.b == 5
    assert "even" in caplog.text

    path.write_bytes(b"\x00" * 7)
    with pytest.raises(SizeError):
        pa_core.load_seed_file(path, 13, 2, 5, 2)

    path.write_bytes((2**13).to_bytes(2, "little") + b"\x00" * 6)
    with pytest.raises(ConfigurationError):
        pa_core.load_seed_file(path, 13, 2, 5, 2)


def test_seed_file_reads_all_ones_a_as_zero(tmp_path, caplog):
    fields = [2**13 - 1, 7, 3, 4]  # a1 = p, a2, b, c
    path = tmp_path / "seeds.bin"
    path.write_bytes(b"".join(v.to_bytes(2, "little") for v in fields))
    with caplog.at_level("WARNING"):
        p = pa_core.load_seed_file(path, 13, 2, 5, 2)
    assert p.a == (0, 7)
    assert "2^gamma - 1" in caplog.text
    assert pa_core._reduce_mmh_seeds([2**13 - 1, 5], 13) == (0, 5)


# ---------- blocks ----------

def test_split_blocks_boundary_values():
    # gamma=5, k=2, bits 1111100000 LSB-first
    blocks = pa_core.split_blocks(bytes([0b00011111, 0b00]), 5, 2)
    assert [b.to_int() for b in blocks] == [31, 0]
    assert not pa_core.screen_block(blocks[0], 5).accepted
    assert pa_core.screen_block(blocks[1], 5).accepted


def test_split_blocks_roundtrip(rng):
    gamma, k = 521, 8
    data = rng.bytes(gamma * k // 8)  # 4168 bits, whole bytes
    blocks = pa_core.split_blocks(data, gamma, k)
    joined = sum(b.to_int() << (gamma * i) for i, b in enumerate(blocks))
    assert joined == int.from_bytes(data, "little")
    assert all(b.to_int() < 2**gamma for b in blocks)


@pytest.mark.slow
def test_split_blocks_production_width(rng):
    gamma, k = 756839, 3
    n = -(-gamma * k // 8)
    data = bytearray(rng.bytes(n))
    data[-1] &= (1 << (gamma * k % 8)) - 1
    blocks = pa_core.split_blocks(bytes(data), gamma, k)
    assert len(blocks) == 3 and all(b.bit_len == gamma for b in blocks)


def test_split_blocks_rejects_wrong_length():
    with pytest.raises(SizeError):
        pa_core.split_blocks(b"\x00" * 3, 5, 2)
    with pytest.raises(SizeError):
        pa_core.split_blocks(bytes([0, 0b100]), 5, 2)  # padding bit set


def test_screen_block_examples():
    gamma = 61
    assert pa_core.screen_block(2**gamma - 1, gamma).reason is BlockReason.ALL_ONES_REJECTED
    assert pa_core.screen_block(0, gamma).reason is BlockReason.OK
    assert pa_core.screen_block(LimbVec.from_int(2**gamma - 2, gamma), gamma).accepted
    with pytest.raises(SizeError):
        pa_core.screen_block(2**gamma, gamma)


def test_bit_reader_crosses_bytes():
    data = (0b1_10101_01010).to_bytes(2, "little")
    reader = pa_core.BitReader(io.BytesIO(data), 5)
    assert reader.read_block().to_int() == 0b01010
    assert reader.read_block().to_int() == 0b10101
    assert reader.read_block().to_int() == 1
    assert reader.read_block() is None
    assert reader.blocks_read == 3


def test_pack_unpack_bits():
    bits = np.array([1, 0, 1, 1, 0, 0, 0, 0, 1], dtype=np.uint8)
    packed = pa_core.pack_bits(bits)
    assert packed == bytes([0b1101, 0b1])
    assert pa_core.unpack_bits(packed, 9).tolist() == bits.tolist()
    with pytest.raises(SizeError):
        pa_core.unpack_bits(packed, 17)


# ---------- MMH / MH ----------

def test_mmh_examples(rng):
    x = [rng.integers(0, 2**13 - 1) for _ in range(4)]
    zero = PaParams(13, 4, 5, 0, (0, 0, 0, 0), 1, 0)
    assert pa_core.mmh(zero, x) == 0

    one = PaParams(13, 1, 5, 0, (1,), 1, 0)
    assert pa_core.mmh(one, [1234]) == 1234

    p = _params(13, 4, 5)
    assert pa_core.mmh(p, x).to_int() == reference.mmh_reference(p.a, x, 13)


def test_mmh_refuses_unscreened_block():
    p = _params(13, 2, 5)
    with pytest.raises(RejectedBlockError):
        pa_core.mmh(p, [3, 2**13 - 1])
    with pytest.raises(SizeError):
        pa_core.mmh(p, [3])


def test_mh_examples(rng):
    gamma, r = 61, 20
    y = int(rng.integers(0, 2**61 - 1))
    ident = PaParams(gamma, 1, r, 0, (0,), 1, 0)
    assert pa_core.mh(ident, y).tolist() == _bits_of(y >> (gamma - r), r).tolist()

    p = _params(521, 8, 256)
    y = random.Random(1).randrange(2**521 - 1)
    want = reference.mh_reference(p.b, p.c, y, 521, 256)
    assert pa_core.mh(p, y).tolist() == _bits_of(want, 256).tolist()


def test_mh_hand_checked_window():
    # alpha=8, beta=3, b=5, c=7, y=200: (1007 mod 256) = 239, 239 >> 5 = 7
    assert reference.mh_reference(5, 7, 200, 8, 3) == 7
    v = LimbVec.from_int(5 * 200 + 7)
    assert pa_core.extract_window(v, 8, 3).tolist() == [1, 1, 1]


def test_extract_window_examples():
    v = LimbVec.from_int((0xABCDEF << 24) | 0x123456, 48)
    assert pa_core.bits_to_int(pa_core.extract_window(v, 48, 24)) == 0xABCDEF

    v = LimbVec.from_int(random.Random(2).getrandbits(72))
    got = pa_core.extract_window(v, 50, 20)
    assert got.size == 20
    assert pa_core.bits_to_int(got) == reference.window_reference(v.to_int(), 50, 20)
    frames = list(pa_core.iter_window(v, 50, 20))
    assert [f.size for f in frames] == [18, 2]
    assert np.concatenate(frames).tolist() == got.tolist()

    with pytest.raises(SizeError):
        pa_core.extract_window(v, 20, 20)


def test_extract_window_ten_thousand_random_cases():
    rnd = random.Random(99)
    for _ in range(10_000):
        alpha = rnd.randrange(2, 400)
        beta = rnd.randrange(1, alpha)
        v = rnd.getrandbits(rnd.randrange(1, 500))
        got = pa_core.extract_window(LimbVec.from_int(v), alpha, beta)
        assert pa_core.bits_to_int(got) == reference.window_reference(v, alpha, beta)
        assert got.size == beta


@settings(max_examples=200)
@given(st.integers(min_value=0, max_value=2**300), st.integers(min_value=2, max_value=300), st.data())
def test_iter_window_matches_extract(v, alpha, data):
    beta = data.draw(st.integers(min_value=1, max_value=alpha - 1))
    lv = LimbVec.from_int(v)
    streamed = np.concatenate(list(pa_core.iter_window(lv, alpha, beta)))
    assert streamed.tolist() == pa_core.extract_window(lv, alpha, beta).tolist()


# ---------- end to end ----------

def test_zero_input_zero_key():
    p = PaParams.from_seed(521, 8, 256, 0, b"z")
    p = PaParams(521, 8, 256, 0, p.a, p.b, 0)
    key = pa_core.compress(p, bytes(-(-521 * 8 // 8)))
    assert key.size == 256 and not key.any()


@pytest.mark.parametrize("gamma,k,r,s", [(13, 4, 5, 2), (61, 8, 32, 8), (521, 8, 256, 100)])
def test_pipeline_matches_reference(gamma, k, r, s, rng):
    for i in range(100):
        p = _params(gamma, k, r, s, seed=i.to_bytes(4, "little"))
        material = rng.bytes(-(-gamma * (k + 6) // 8))
        got = pa_core.compress(p, material)
        assert got.tolist() == reference.compress_reference(p, material).tolist()


def test_rejected_block_replaced_from_stream():
    gamma, k = 13, 2
    p = _params(gamma, k, 5)
    blocks = [2**13 - 1, 100, 2**13 - 1, 200]
    stream = sum(b << (gamma * i) for i, b in enumerate(blocks))
    material = stream.to_bytes(-(-gamma * 4 // 8), "little")
    report = pa_core.run_compression(p, material)
    assert report.rejected_blocks == 2
    assert report.blocks_read == 4
    assert report.input_bits == 4 * gamma
    want = reference.mh_reference(p.b, p.c, reference.mmh_reference(p.a, [100, 200], gamma), gamma, 5)
    assert report.key_bits.tolist() == _bits_of(want, 5).tolist()


def test_insufficient_material():
    p = _params(13, 2, 5)
    all_ones = (2**26 - 1).to_bytes(4, "little")
    with pytest.raises(InsufficientMaterialError):
        pa_core.compress(p, all_ones)
    with pytest.raises(InsufficientMaterialError):
        pa_core.compress(p, b"\x00")


@pytest.mark.slow
def test_production_shape_run(rng):
    p = PaParams.from_seed(756839, 3, 100_000, 100, b"production")
    material = rng.bytes(-(-756839 * 4 // 8))
    report = pa_core.run_compression(p, material)
    assert report.key_bits.size == 100_000
    assert report.input_bits >= 3 * 756839


def test_universality_gamma_5():
    p = 31
    table = np.array([[pa_core.mmh(PaParams(5, 1, 1, 0, (a,), 1, 0), [x]).to_int() for x in range(p)]
                      for a in range(p)])
    for x, x2 in itertools.combinations(range(p), 2):
        collisions = int(np.sum(table[:, x] == table[:, x2]))
        assert collisions / p <= 1 / p


# ---------- session state machine ----------

def test_session_happy_path():
    p = _params(13, 3, 5)
    s = PaSession(p).start()
    for x in (5, 6, 7):
        assert s.feed(x).accepted
    key = s.finalize()
    assert key.tolist() == reference.compress_reference(
        p, sum(x << (13 * i) for i, x in enumerate((5, 6, 7))).to_bytes(5, "little")).tolist()
    frames = list(s.iter_output())
    assert np.concatenate(frames).tolist() == key.tolist()
    assert s.state is SessionState.IDLE
    assert s.history == [
        SessionState.IDLE, SessionState.MMH,
        SessionState.MMH_COUNT, SessionState.MMH,
        SessionState.MMH_COUNT, SessionState.MMH,
        SessionState.MMH_COUNT, SessionState.MH,
        SessionState.OUTPUT, SessionState.IDLE,
    ]


def test_session_streams_limb_frames():
    p = _params(61, 2, 32, 8)
    s = PaSession(p).start()
    s.feed(123456789)
    s.feed(2**60 + 17)
    key = s.finalize()
    frames = list(s.iter_output())
    # alpha - beta = 29: frame 1 drops its low 5 bits, frame 2 stops at bit 60.
    assert [f.size for f in frames] == [19, 13]
    assert np.concatenate(frames).tolist() == key.tolist()
    assert s.state is SessionState.IDLE

def test_session_rejected_block_keeps_count():
    p = _params(13, 2, 5)
    s = PaSession(p).start()
    verdict = s.feed(2**13 - 1)
    assert verdict.reason is BlockReason.ALL_ONES_REJECTED
    assert s.cnt == 0 and s.state is SessionState.MMH and s.rejected == 1


def test_session_illegal_operations():
    p = _params(13, 2, 5)
    s = PaSession(p)
    with pytest.raises(SessionStateError):
        s.feed(1)
    with pytest.raises(SessionStateError):
        s.finalize()
    s.start()
    with pytest.raises(SessionStateError):
        s.start()
    s.feed(1)
    with pytest.raises(SessionStateError):
        s.finalize()
    with pytest.raises(SessionStateError):
        s.reset()


def test_session_model_check_small_traces():
    # Every trace of up to 6 operations: cnt moves once per accepted block,
    # Mh is unreachable before cnt == k and transitions stay on the chart.
    k = 2
    p = _params(5, k, 1)
    allowed = {
        SessionState.IDLE: {SessionState.MMH},
        SessionState.MMH: {SessionState.MMH_COUNT},
        SessionState.MMH_COUNT: {SessionState.MMH, SessionState.MH},
        SessionState.MH: {SessionState.OUTPUT},
        SessionState.OUTPUT: {SessionState.IDLE},
    }
    ops = ["start", "accept", "reject", "finalize", "reset"]
    for n in range(1, 7):
        for trace in itertools.product(ops, repeat=n):
            s = PaSession(p)
            for op in trace:
                before = s.cnt
                try:
                    if op == "start":
                        s.start()
                    elif op == "accept":
                        s.feed(3)
                        assert s.cnt == before + 1
                    elif op == "reject":
                        s.feed(31)
                        assert s.cnt == before
                    elif op == "finalize":
                        s.finalize()
                    else:
                        s.reset()
                except SessionStateError:
                    pass
                assert s.cnt <= k
                if s.state is SessionState.MH:
                    assert s.cnt == k
            for a, b in zip(s.history, s.history[1:]):
                assert b in allowed[a]
