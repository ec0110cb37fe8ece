"""Monte-Carlo ARQ over packet erasure channels with m receivers and l eavesdroppers.

Every (re)transmission is a broadcast: it continues until all legitimate
receivers hold the packet, and each eavesdropper independently sees each
copy. The coalition holds a packet if any member saw any copy.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .codec import (
    NotDecodableError,
    Scrambler,
    bob_decode,
    encode_batch,
    eve_dof,
    eve_guess_attack,
    received_blocks,
)
from .decode import ml_decode
from .ldpc import LdpcCode
from .stopping import PuncturePattern

MAX_ROUNDS = 10**6
CHUNK = 4096


class RetransmissionLimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChannelTopology:
    deltas: tuple[float, ...]
    epsilons: tuple[float, ...]

    def __post_init__(self):
        d = tuple(float(x) for x in np.atleast_1d(self.deltas))
        e = tuple(float(x) for x in np.atleast_1d(self.epsilons))
        if not d or not e:
            raise ValueError("need at least one receiver and one eavesdropper")
        if any(not 0.0 <= x <= 1.0 for x in d + e):
            raise ValueError("erasure probabilities must lie in [0, 1]")
        if any(x >= 1.0 for x in d):
            raise ValueError("a receiver with erasure probability 1 never completes ARQ")
        object.__setattr__(self, "deltas", d)
        object.__setattr__(self, "epsilons", e)

    @property
    def m(self) -> int:
        return len(self.deltas)

    @property
    def l(self) -> int:
        return len(self.epsilons)


def transmit_packet(topology: ChannelTopology, rng) -> tuple[int, bool]:
    """One packet, round by round. Returns (transmissions W, coalition received)."""
    rng = np.random.default_rng(rng)
    pending = list(range(topology.m))
    seen = False
    w = 0
    while pending:
        w += 1
        if w > MAX_ROUNDS:
            raise RetransmissionLimitError(f"packet not delivered after {MAX_ROUNDS} rounds")
        pending = [i for i in pending if rng.random() < topology.deltas[i]]
        for eps in topology.epsilons:
            if rng.random() >= eps:
                seen = True
    return w, seen


def _substream(seed: int, chunk: int, party: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk, party)))


@dataclass(frozen=True, eq=False)
class PacketDraws:
    W: np.ndarray
    eve_seen: np.ndarray  # packets x eavesdroppers

    @property
    def eve_received(self) -> np.ndarray:
        return self.eve_seen.any(axis=1)


def simulate_packets(topology: ChannelTopology, count: int, seed: int) -> PacketDraws:
    """Vectorised draws for ``count`` packets.

    Streams are keyed by (seed, block of ``CHUNK`` packets, party), so results do
    not depend on how the work is split.
    """
    W = np.empty(count, dtype=np.int64)
    seen = np.empty((count, topology.l), dtype=bool)
    m = topology.m
    for c, start in enumerate(range(0, count, CHUNK)):
        size = min(CHUNK, count - start)
        w = np.ones(size, dtype=np.int64)
        for i, d in enumerate(topology.deltas):
            if d > 0:
                w = np.maximum(w, _substream(seed, c, i).geometric(1.0 - d, size))
        if w.max(initial=0) > MAX_ROUNDS:
            raise RetransmissionLimitError(f"a packet needed more than {MAX_ROUNDS} rounds")
        W[start : start + size] = w
        for j, e in enumerate(topology.epsilons):
            copies = _substream(seed, c, m + j).binomial(w, 1.0 - e)
            seen[start : start + size, j] = copies > 0
    return PacketDraws(W, seen)


@dataclass(frozen=True, eq=False)
class SessionTrace:
    W: np.ndarray
    eve_received: np.ndarray
    alpha: int
    topology: ChannelTopology
    seed: int
    eve_seen: np.ndarray = None

    @property
    def eta(self) -> int:
        return len(self.W)

    @property
    def R_p(self) -> np.ndarray:
        return np.flatnonzero(~self.eve_received)

    @property
    def D(self) -> int:
        return self.alpha * len(self.R_p)

    def summary(self) -> dict:
        return {
            "m": self.topology.m,
            "l": self.topology.l,
            "deltas": list(self.topology.deltas),
            "epsilons": list(self.topology.epsilons),
            "eta": self.eta,
            "alpha": self.alpha,
            "R_p": self.R_p.tolist(),
            "D": self.D,
            "seed": self.seed,
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["packet_index", "W", "eve_received"])
            for i, (wi, r) in enumerate(zip(self.W, self.eve_received)):
                w.writerow([i, int(wi), int(r)])

    def write_summary(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2)
            fh.write("\n")


def run_session(topology: ChannelTopology, eta: int, alpha: int, seed: int) -> SessionTrace:
    if eta < 1:
        raise ValueError("eta must be at least 1")
    draws = simulate_packets(topology, eta, seed)
    return SessionTrace(draws.W, draws.eve_received, alpha, topology, seed, draws.eve_seen)


@dataclass(frozen=True, eq=False)
class E2EOutcome:
    trace: SessionTrace
    receivers_ok: list[bool]
    eve_decoded: bool
    eve_blocks: list[dict] = field(default_factory=list)
    attack_ber: np.ndarray | None = None


def run_e2e(
    topology: ChannelTopology,
    M,
    code: LdpcCode,
    scrambler: Scrambler,
    pattern: PuncturePattern,
    alpha: int,
    seed: int,
    guess_attack: bool = False,
) -> E2EOutcome:
    """Encode ``M``, run ARQ, then decode as every receiver and as the coalition."""
    M = np.atleast_2d(np.asarray(M, dtype=np.uint8))
    batch = encode_batch(M, code, scrambler, pattern, alpha)
    trace = run_session(topology, batch.eta, alpha, seed)
    # ARQ completes for every legitimate receiver, so each holds the full batch
    receivers_ok = [bool(np.array_equal(bob_decode(batch, code, scrambler, pattern), M)) for _ in range(topology.m)]
    eve_batch = batch.with_received(trace.eve_received)
    try:
        eve_msgs = bob_decode(eve_batch, code, scrambler, pattern)
        return E2EOutcome(trace, receivers_ok, bool(np.array_equal(eve_msgs, M)))
    except NotDecodableError:
        pass
    blocks = eve_dof(eve_batch, code, pattern)
    ber = None
    if guess_attack:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1 << 30,)))
        guesses = [rng.integers(0, 2, ml_decode(code.H, y).dof, dtype=np.uint8) for y in received_blocks(eve_batch, code, pattern)]
        ber = eve_guess_attack(eve_batch, code, scrambler, pattern, guesses, M).block_ber
    return E2EOutcome(trace, receivers_ok, False, blocks, ber)
