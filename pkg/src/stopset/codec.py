"""Scramble, encode, puncture and interleave message blocks into packets, and back."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .decode import ERASED, ErasureWord, guess_complete, ml_decode, mp_decode
from .gf2 import BitMatrix, SingularMatrixError, invert, mod2_matmul
from .ldpc import LdpcCode
from .stopping import PuncturePattern

SCRAMBLER_RETRIES = 1000


class NotDecodableError(RuntimeError):
    """Some packets are missing, so the batch cannot be decoded uniquely."""

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"{len(self.missing)} packet(s) missing: {self.missing[:10]}")


@dataclass(frozen=True, eq=False)
class Scrambler:
    S: BitMatrix
    S_inv: BitMatrix
    seed: int | None = None

    @property
    def k(self) -> int:
        return self.S.rows


def gen_scrambler(k: int, seed: int | None = None) -> Scrambler:
    """Sample uniform k x k binary matrices until one is invertible."""
    if k < 1:
        raise ValueError("k must be at least 1")
    rng = np.random.default_rng(seed)
    for _ in range(SCRAMBLER_RETRIES):
        S = BitMatrix.random(k, k, rng)
        try:
            return Scrambler(S, invert(S), seed)
        except SingularMatrixError:
            continue
    raise RuntimeError(f"no invertible {k}x{k} matrix in {SCRAMBLER_RETRIES} draws")


def scramble(m, s: Scrambler) -> np.ndarray:
    m = np.asarray(m, dtype=np.uint8)
    if m.shape[-1] != s.k:
        raise ValueError(f"message length {m.shape[-1]} != {s.k}")
    return mod2_matmul(m, s.S.array)


def descramble(m_prime, s: Scrambler) -> np.ndarray:
    m_prime = np.asarray(m_prime, dtype=np.uint8)
    if m_prime.shape[-1] != s.k:
        raise ValueError(f"message length {m_prime.shape[-1]} != {s.k}")
    return mod2_matmul(m_prime, s.S_inv.array)


@dataclass(frozen=True, eq=False)
class PacketBatch:
    """``eta`` packets of ``alpha * L`` bits; ``received[i]`` marks packets that arrived."""

    packets: np.ndarray
    alpha: int
    L: int
    received: np.ndarray = None
    payload_bits: int | None = None

    def __post_init__(self):
        p = np.asarray(self.packets, dtype=np.uint8)
        if p.ndim != 2 or p.shape[1] != self.alpha * self.L:
            raise ValueError(f"packets must be eta x {self.alpha * self.L}, got {p.shape}")
        object.__setattr__(self, "packets", p)
        rec = np.ones(len(p), dtype=bool) if self.received is None else np.asarray(self.received, dtype=bool)
        if rec.shape != (len(p),):
            raise ValueError("received mask must have one entry per packet")
        object.__setattr__(self, "received", rec)

    @property
    def eta(self) -> int:
        return len(self.packets)

    @property
    def n(self) -> int:
        return self.eta * self.alpha

    @property
    def missing(self) -> np.ndarray:
        return np.flatnonzero(~self.received)

    def with_erasures(self, erased) -> "PacketBatch":
        rec = self.received.copy()
        rec[np.asarray(erased, dtype=np.int64)] = False
        return replace(self, received=rec)

    def with_received(self, mask) -> "PacketBatch":
        return replace(self, received=np.asarray(mask, dtype=bool))


def pad_message(bits, k: int, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Split a bit string into k-bit blocks, filling the last with random bits."""
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    L = max(1, -(-len(bits) // k))
    out = rng.integers(0, 2, size=L * k, dtype=np.uint8)
    out[: len(bits)] = bits
    return out.reshape(L, k), len(bits)


def interleave(P: np.ndarray, alpha: int) -> np.ndarray:
    """Packet i takes bits i*alpha .. (i+1)*alpha - 1 of every block, block by block."""
    L, n = P.shape
    if n % alpha:
        raise ValueError(f"alpha={alpha} does not divide n={n}")
    eta = n // alpha
    return P.reshape(L, eta, alpha).transpose(1, 0, 2).reshape(eta, L * alpha)


def deinterleave(X: np.ndarray, alpha: int, L: int) -> np.ndarray:
    eta = X.shape[0]
    return X.reshape(eta, L, alpha).transpose(1, 0, 2).reshape(L, eta * alpha)


def puncture(B: np.ndarray, pattern: PuncturePattern) -> np.ndarray:
    return np.asarray(B)[..., pattern.Q]


def encode_batch(M, code: LdpcCode, s: Scrambler, pattern: PuncturePattern, alpha: int, payload_bits=None) -> PacketBatch:
    M = np.atleast_2d(np.asarray(M, dtype=np.uint8))
    if M.shape[1] != code.k:
        raise ValueError(f"blocks must have length k={code.k}, got {M.shape[1]}")
    if s.k != code.k:
        raise ValueError("scrambler and code dimensions differ")
    if pattern.N != code.N:
        raise ValueError("pattern and code blocklengths differ")
    if alpha < 1 or pattern.n % alpha:
        raise ValueError(f"alpha={alpha} does not divide n={pattern.n}")
    B = code.encode(scramble(M, s))
    X = interleave(puncture(B, pattern), alpha)
    return PacketBatch(X, alpha, len(M), payload_bits=payload_bits)


def received_blocks(batch: PacketBatch, code: LdpcCode, pattern: PuncturePattern) -> list[ErasureWord]:
    """Length-N words per block: punctured and missing-packet positions erased."""
    X = batch.packets.astype(np.int8)
    X[~batch.received] = ERASED
    P = deinterleave(X, batch.alpha, batch.L)
    words = np.full((batch.L, code.N), ERASED, dtype=np.int8)
    words[:, pattern.Q] = P
    return [ErasureWord(w) for w in words]


def bob_decode(received: PacketBatch, code: LdpcCode, s: Scrambler, pattern: PuncturePattern) -> np.ndarray:
    """Recover all message blocks; every packet must be present."""
    if len(received.missing):
        raise NotDecodableError(received.missing)
    if received.n != pattern.n:
        raise ValueError(f"batch carries n={received.n} bits per block, pattern has n={pattern.n}")
    out = np.empty((received.L, code.k), dtype=np.uint8)
    for i, y in enumerate(received_blocks(received, code, pattern)):
        res = mp_decode(code.graph, y)
        if not res.resolved:
            raise ValueError("punctured set contains a stopping set; pattern is not acceptable")
        out[i] = code.systematic_bits(res.word.bits())
    return descramble(out, s)


@dataclass(frozen=True, eq=False)
class AttackOutcome:
    messages: np.ndarray
    block_ber: np.ndarray
    dof: np.ndarray
    systematic_missing: np.ndarray

    @property
    def ber(self) -> float:
        return float(self.block_ber.mean())


def eve_guess_attack(received: PacketBatch, code: LdpcCode, s: Scrambler, pattern: PuncturePattern, guesses, truth) -> AttackOutcome:
    """Complete each block with a guess of its ML free variables and measure the damage.

    ``guesses[i]`` covers ``ml_decode(...).free_vars`` of block ``i``.
    """
    words = received_blocks(received, code, pattern)
    if len(guesses) != len(words):
        raise ValueError(f"need one guess per block ({len(words)}), got {len(guesses)}")
    truth = np.atleast_2d(np.asarray(truth, dtype=np.uint8))
    m_hat = np.empty((len(words), code.k), dtype=np.uint8)
    dof = np.empty(len(words), dtype=np.int64)
    sys_missing = np.empty(len(words), dtype=np.int64)
    for i, (y, g) in enumerate(zip(words, guesses)):
        full = guess_complete(code.H, y, g)
        dof[i] = len(np.asarray(g).reshape(-1))
        sys_missing[i] = int((y.symbols[code.systematic_positions] == ERASED).sum())
        m_hat[i] = code.systematic_bits(full.bits())
    m_hat = descramble(m_hat, s)
    ber = (m_hat != truth).mean(axis=1)
    return AttackOutcome(m_hat, ber, dof, sys_missing)


def eve_dof(received: PacketBatch, code: LdpcCode, pattern: PuncturePattern) -> list[dict]:
    """Per-block degrees of freedom seen by an eavesdropper holding ``received``.

    ``effective`` is the smaller of the ML count and the number of systematic
    bits she lacks, since brute-forcing those directly is the alternative attack.
    """
    out = []
    for y in received_blocks(received, code, pattern):
        ml = ml_decode(code.H, y)
        # channel-erased positions are tried first when counting MP supplies
        channel = np.setdiff1d(y.erased, pattern.R)
        mp = mp_decode(code.graph, y, prefer=channel)
        sys_missing = int((y.symbols[code.systematic_positions] == ERASED).sum())
        out.append(
            {
                "ml": ml.dof,
                "mp": mp.dof,
                "stopping_set": len(mp.residual_set),
                "systematic_missing": sys_missing,
                "effective": min(ml.dof, sys_missing),
            }
        )
    return out


# --- batch files ------------------------------------------------------------

_PKT_HEADER = struct.Struct("<III")


def write_batch(path, batch: PacketBatch, header: dict) -> None:
    """Header JSON line, then for each received packet (index, L, alpha) and its bits packed LSB-first."""
    meta = dict(header)
    meta.update(n=batch.n, alpha=batch.alpha, eta=batch.eta, L=batch.L, payload_bits=batch.payload_bits)
    with open(path, "wb") as fh:
        fh.write((json.dumps(meta, sort_keys=True) + "\n").encode())
        for i in np.flatnonzero(batch.received):
            fh.write(_PKT_HEADER.pack(int(i), batch.L, batch.alpha))
            fh.write(np.packbits(batch.packets[i], bitorder="little").tobytes())


def read_batch(path) -> tuple[PacketBatch, dict]:
    raw = Path(path).read_bytes()
    nl = raw.index(b"\n")
    meta = json.loads(raw[:nl])
    alpha, L, eta = meta["alpha"], meta["L"], meta["eta"]
    nbytes = -(-alpha * L // 8)
    packets = np.zeros((eta, alpha * L), dtype=np.uint8)
    received = np.zeros(eta, dtype=bool)
    pos = nl + 1
    while pos < len(raw):
        idx, l_, a_ = _PKT_HEADER.unpack_from(raw, pos)
        if (l_, a_) != (L, alpha):
            raise ValueError(f"packet {idx} header disagrees with batch header")
        pos += _PKT_HEADER.size
        bits = np.unpackbits(np.frombuffer(raw[pos : pos + nbytes], dtype=np.uint8), count=alpha * L, bitorder="little")
        packets[idx] = bits
        received[idx] = True
        pos += nbytes
    return PacketBatch(packets, alpha, L, received, meta.get("payload_bits")), meta
