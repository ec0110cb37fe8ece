"""Experiment drivers used by the command line and the acceptance suite."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import analytics
from .channel import ChannelTopology, simulate_packets
from .codec import descramble, gen_scrambler, scramble
from .decode import ErasureWord, guess_complete, ml_decode, mp_decode
from .ldpc import EXAMPLE1_IRREGULAR, LdpcCode, build_irregular, build_regular
from .stopping import PuncturePattern, find_acceptable_pattern

log = logging.getLogger(__name__)

DEFAULT_GAMMAS = (1, 2, 3, 4, 5, 10, 15, 20, 25, 30, 40, 50, 60, 70, 80, 90, 100, 200, 300, 400)


def child_seed(seed: int, *key: int) -> int:
    """Deterministic 63-bit seed for a sub-task."""
    return int(np.random.SeedSequence(seed, spawn_key=key).generate_state(1, np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class CodeSpec:
    kind: str = "irregular"
    N: int = 1000
    wc: int = 4
    wr: int = 8
    parallel_edges: str | None = None

    def build(self, seed: int) -> LdpcCode:
        if self.kind == "regular":
            return build_regular(self.N, self.wc, self.wr, seed, self.parallel_edges or "repair")
        if self.kind in ("irregular", "example1"):
            return build_irregular(self.N, EXAMPLE1_IRREGULAR, seed, self.parallel_edges or "cancel")
        raise ValueError(f"unknown code kind {self.kind!r}")


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


# --- puncturing-pattern statistics -----------------------------------------


def pattern_sizes(spec: CodeSpec, samples: int, seed: int, patterns_per_code: int = 10, threads: int = 1) -> np.ndarray:
    """|R| from ``samples`` pattern searches, drawing a fresh code every ``patterns_per_code``."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    n_codes = -(-samples // patterns_per_code)

    def one_code(ci):
        code = spec.build(child_seed(seed, 0, ci))
        count = min(patterns_per_code, samples - ci * patterns_per_code)
        return [len(find_acceptable_pattern(code.graph, child_seed(seed, 1, ci, j)).R) for j in range(count)]

    return np.array([s for chunk in _map(one_code, range(n_codes), threads) for s in chunk], dtype=np.int64)


def histogram(sizes: np.ndarray) -> list[tuple[int, int, float]]:
    vals, counts = np.unique(sizes, return_counts=True)
    return [(int(v), int(c), c / len(sizes)) for v, c in zip(vals, counts)]


# --- guessing attack --------------------------------------------------------


@dataclass(frozen=True)
class AttackRecord:
    gamma: int
    trial: int
    code_index: int
    pattern_index: int
    R_size: int
    erased: int
    dof_ml: int
    ber_ml: float
    ber_mp: float


def attack_trial(code: LdpcCode, pattern: PuncturePattern, gamma: int, rng: np.random.Generator):
    """One guessing-attack trial on a single block; returns (erased, ML dof, BER via ML, BER via MP).

    The eavesdropper misses ``gamma + (N - k - |R|)`` transmitted bits, which
    guarantees at least ``gamma`` ML degrees of freedom. The ML path guesses
    the free variables of the erased-bit system, the MP path guesses the
    channel-erased bits and lets peeling fill the punctured ones; in both,
    exactly ``gamma`` guessed bits are wrong.
    """
    s = gen_scrambler(code.k, int(rng.integers(2**62)))
    m = rng.integers(0, 2, code.k, dtype=np.uint8)
    b = code.encode(scramble(m, s))
    slack = code.redundancy - len(pattern.R)
    n_erased = gamma + max(slack, 0)
    if n_erased > pattern.n:
        raise ValueError(f"cannot erase {n_erased} of {pattern.n} transmitted bits")
    channel = rng.choice(pattern.Q, size=n_erased, replace=False)
    y = ErasureWord.from_codeword(b, np.concatenate([pattern.R, channel]))

    ml = ml_decode(code.H, y)
    if ml.dof < gamma:
        return n_erased, ml.dof, None, None
    guess = b[ml.free_vars].copy()
    guess[rng.choice(ml.dof, size=gamma, replace=False)] ^= 1
    full = guess_complete(code.H, y, guess).bits()
    ber_ml = float((descramble(code.systematic_bits(full), s) != m).mean())

    supplied = y.symbols.copy()
    wrong = rng.choice(n_erased, size=gamma, replace=False)
    vals = b[channel].copy()
    vals[wrong] ^= 1
    supplied[channel] = vals
    mp = mp_decode(code.graph, ErasureWord(supplied), strict=False)
    if not mp.resolved:
        raise RuntimeError("punctured set failed to peel; pattern is not acceptable")
    ber_mp = float((descramble(code.systematic_bits(mp.word.bits()), s) != m).mean())
    return n_erased, ml.dof, ber_ml, ber_mp


def attack_sim(
    spec: CodeSpec,
    gammas=DEFAULT_GAMMAS,
    trials: int = 300,
    seed: int = 0,
    pattern_every: int = 10,
    code_every: int = 30,
    min_r_gap: int = 2,
    threads: int = 1,
) -> list[AttackRecord]:
    """Guessing-attack sweep over ``gammas``.

    A new pattern is drawn every ``pattern_every`` trials and whenever the
    code changes; patterns with ``|R| < N - k - min_r_gap`` are redrawn. A
    trial whose ML system has fewer than ``gamma`` free variables is redrawn
    and logged.
    """

    def run_gamma(gi):
        gamma = gammas[gi]
        out = []
        code = pattern = None
        pi = -1
        for t in range(trials):
            new_code = t % code_every == 0
            if new_code:
                code = spec.build(child_seed(seed, gi, 0, t // code_every))
            # a pattern belongs to one code, so a new code forces a new pattern
            if new_code or t % pattern_every == 0:
                pi += 1
                for attempt in range(1000):
                    pattern = find_acceptable_pattern(code.graph, child_seed(seed, gi, 1, pi, attempt))
                    if len(pattern.R) >= code.redundancy - min_r_gap:
                        break
                else:
                    raise RuntimeError(f"no pattern with |R| >= N-k-{min_r_gap} in 1000 draws")
            for attempt in range(100):
                rng = np.random.default_rng(child_seed(seed, gi, 2, t, attempt))
                erased, dof, ber_ml, ber_mp = attack_trial(code, pattern, gamma, rng)
                if ber_ml is not None:
                    break
                log.info("gamma=%d trial=%d: dof %d < gamma, redrawing", gamma, t, dof)
            else:
                raise RuntimeError(f"gamma={gamma} exceeds the available degrees of freedom")
            out.append(
                AttackRecord(gamma, t, t // code_every, pi, len(pattern.R), erased, dof, ber_ml, ber_mp)
            )
        return out

    return [r for chunk in _map(run_gamma, range(len(gammas)), threads) for r in chunk]


def attack_summary(records: list[AttackRecord]) -> list[dict]:
    rows = []
    for gamma in sorted({r.gamma for r in records}):
        sub = [r for r in records if r.gamma == gamma]
        for path in ("ml", "mp"):
            v = np.array([getattr(r, f"ber_{path}") for r in sub])
            rows.append(
                {"gamma": gamma, "path": path, "trials": len(v), "mean": float(v.mean()), "min": float(v.min()), "max": float(v.max())}
            )
    return rows


# --- closed form vs simulation ----------------------------------------------


@dataclass(frozen=True)
class ValidationRow:
    m: int
    l: int
    delta: float
    eps: float
    packets: int
    empirical: float
    closed_form: float
    z: float
    printed_form: float | None
    z_printed: float | None


def _z(emp: float, p: float, n: int) -> float:
    sd = math.sqrt(p * (1 - p) / n)
    if sd == 0:
        return 0.0 if emp == p else math.inf
    return (emp - p) / sd


def validate_point(topology: ChannelTopology, packets: int, seed: int) -> tuple[float, float]:
    emp = float(simulate_packets(topology, packets, seed).eve_received.mean())
    return emp, analytics.pr_ref_general(topology.deltas, topology.epsilons)


def validate_grid(m: int, l: int, grid, packets: int, seed: int) -> list[ValidationRow]:
    """Empirical Pr(R_ef) against the closed form, all parties sharing the grid probabilities."""
    if packets < 10**4:
        raise ValueError("validation needs at least 10^4 packets per point")
    rows = []
    for i, d in enumerate(grid):
        for j, e in enumerate(grid):
            topo = ChannelTopology((d,) * m, (e,) * l)
            emp, p = validate_point(topo, packets, child_seed(seed, m, l, i, j))
            printed = zp = None
            if m > 1:
                printed = analytics.pr_ref_receivers_printed(topo.deltas, math.prod(topo.epsilons))
                # the printed form can leave [0, 1], so scale by the empirical error instead
                zp = (emp - printed) / max(math.sqrt(emp * (1 - emp) / packets), 1.0 / packets)
            rows.append(ValidationRow(m, l, float(d), float(e), packets, emp, p, _z(emp, p, packets), printed, zp))
    return rows
