import numpy as np
import pytest

from stopset.codec import (
    NotDecodableError,
    PacketBatch,
    bob_decode,
    deinterleave,
    descramble,
    encode_batch,
    eve_dof,
    eve_guess_attack,
    gen_scrambler,
    interleave,
    pad_message,
    read_batch,
    received_blocks,
    scramble,
    write_batch,
)
from stopset.decode import ml_decode
from stopset.gf2 import BitMatrix
from stopset.ldpc import EXAMPLE1_IRREGULAR, build_irregular, code_from_matrix
from stopset.stopping import find_acceptable_pattern


@pytest.fixture(scope="module")
def setup(example1_code):
    pattern = find_acceptable_pattern(example1_code.graph, 3)
    return example1_code, pattern, gen_scrambler(example1_code.k, 5)


def test_scrambler_k1():
    s = gen_scrambler(1, 0)
    assert s.S.array.tolist() == [[1]] and s.S_inv.array.tolist() == [[1]]


def test_scrambler_density():
    s = gen_scrambler(500, 1)
    assert abs(s.S_inv.density() - 0.5) <= 0.02
    assert s.S @ s.S_inv == BitMatrix.identity(500)


def test_scramble_roundtrip():
    rng = np.random.default_rng(0)
    s = gen_scrambler(8, 2)
    assert not scramble(np.zeros(8, np.uint8), s).any()
    for _ in range(20):
        m = rng.integers(0, 2, 8, dtype=np.uint8)
        assert np.array_equal(descramble(scramble(m, s), s), m)


def test_single_error_spreads():
    rng = np.random.default_rng(1)
    k = 200
    errs = []
    for seed in range(30):
        s = gen_scrambler(k, seed)
        m = rng.integers(0, 2, k, dtype=np.uint8)
        mp = scramble(m, s)
        mp[rng.integers(k)] ^= 1
        errs.append((descramble(mp, s) != m).sum())
    assert abs(np.mean(errs) / k - 0.5) < 0.05


def test_interleave_layout():
    # labels 10*block + position
    P = np.array([[11, 12, 13, 14], [21, 22, 23, 24]])
    X = interleave(P, 2)
    assert X.tolist() == [[11, 12, 21, 22], [13, 14, 23, 24]]
    assert np.array_equal(deinterleave(X, 2, 2), P)
    assert interleave(P[:1], 4).tolist() == [[11, 12, 13, 14]]


def test_encode_alpha_must_divide(setup):
    code, pattern, s = setup
    bad = next(a for a in range(2, 50) if pattern.n % a)
    with pytest.raises(ValueError):
        encode_batch(np.zeros((1, code.k), np.uint8), code, s, pattern, bad)


def test_bob_roundtrip(setup):
    code, pattern, s = setup
    rng = np.random.default_rng(0)
    M = rng.integers(0, 2, (100, code.k), dtype=np.uint8)
    alpha = min(a for a in range(1, pattern.n + 1) if pattern.n % a == 0 and a > 1)
    batch = encode_batch(M, code, s, pattern, alpha)
    assert batch.packets.shape == (pattern.n // alpha, alpha * 100)
    assert np.array_equal(bob_decode(batch, code, s, pattern), M)


def test_bob_missing_packet(setup):
    code, pattern, s = setup
    batch = encode_batch(np.zeros((2, code.k), np.uint8), code, s, pattern, 1)
    with pytest.raises(NotDecodableError) as e:
        bob_decode(batch.with_erasures([7]), code, s, pattern)
    assert e.value.missing == [7]


def test_pad_message():
    rng = np.random.default_rng(0)
    blocks, nbits = pad_message(np.ones(10, np.uint8), 4, rng)
    assert blocks.shape == (3, 4) and nbits == 10
    assert blocks.reshape(-1)[:10].all()


def test_correct_guess_zero_ber(setup):
    code, pattern, s = setup
    rng = np.random.default_rng(2)
    M = rng.integers(0, 2, (3, code.k), dtype=np.uint8)
    batch = encode_batch(M, code, s, pattern, 1).with_erasures([0, 5, 9])
    B = code.encode(scramble(M, s))
    words = received_blocks(batch, code, pattern)
    guesses = [B[i][ml_decode(code.H, y).free_vars] for i, y in enumerate(words)]
    out = eve_guess_attack(batch, code, s, pattern, guesses, M)
    assert out.ber == 0.0
    assert np.array_equal(out.messages, M)


def test_one_wrong_guess_half_ber(setup):
    code, pattern, s = setup
    rng = np.random.default_rng(3)
    M = rng.integers(0, 2, (20, code.k), dtype=np.uint8)
    batch = encode_batch(M, code, s, pattern, 1).with_erasures(rng.choice(pattern.n, 5, replace=False))
    B = code.encode(scramble(M, s))
    guesses = []
    for i, y in enumerate(received_blocks(batch, code, pattern)):
        g = B[i][ml_decode(code.H, y).free_vars].copy()
        g[0] ^= 1
        guesses.append(g)
    ber = eve_guess_attack(batch, code, s, pattern, guesses, M).block_ber
    assert ((ber > 0.4) & (ber < 0.6)).all()


def test_eve_dof_tight_code():
    # search for an |R| = N - k instance
    for seed in range(200):
        code = build_irregular(200, EXAMPLE1_IRREGULAR, seed=seed)
        p = find_acceptable_pattern(code.graph, seed)
        if len(p.R) == code.redundancy:
            break
    else:
        pytest.skip("no tight instance found")
    s = gen_scrambler(code.k, 0)
    batch = encode_batch(np.zeros((2, code.k), np.uint8), code, s, p, 1).with_erasures([1, 4, 6])
    for blk in eve_dof(batch, code, p):
        assert blk["ml"] == blk["mp"] == 3


def test_batch_file_roundtrip(tmp_path, setup):
    code, pattern, s = setup
    M = np.random.default_rng(4).integers(0, 2, (3, code.k), dtype=np.uint8)
    batch = encode_batch(M, code, s, pattern, 1, payload_bits=1400).with_erasures([2, 3])
    write_batch(tmp_path / "b.bin", batch, {"code_ref": "x"})
    back, meta = read_batch(tmp_path / "b.bin")
    assert meta["code_ref"] == "x" and back.payload_bits == 1400
    assert np.array_equal(back.received, batch.received)
    assert np.array_equal(back.packets[back.received], batch.packets[batch.received])


def test_batch_validation():
    with pytest.raises(ValueError):
        PacketBatch(np.zeros((3, 5), np.uint8), alpha=2, L=2)


def test_tiny_code_roundtrip():
    code = code_from_matrix(BitMatrix([[1, 0, 1, 0, 1, 0, 1], [0, 1, 1, 0, 1, 0, 0], [0, 0, 0, 1, 0, 1, 1]]))
    p = find_acceptable_pattern(code.graph, 0)
    s = gen_scrambler(code.k, 0)
    M = np.random.default_rng(5).integers(0, 2, (4, code.k), dtype=np.uint8)
    assert np.array_equal(bob_decode(encode_batch(M, code, s, p, 1), code, s, p), M)
