"""Message-passing (peeling) and maximum-likelihood erasure decoding."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import _peel
from .gf2 import BitMatrix, Gf2Solution, mod2_matmul, solve
from .ldpc import TannerGraph, tanner_graph

ERASED = -1


class ParityError(ValueError):
    """Known symbols violate a parity check: the word is corrupted, not just erased."""


@dataclass(frozen=True, eq=False)
class ErasureWord:
    """Symbols in {0, 1, ERASED}."""

    symbols: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.symbols, dtype=np.int8)
        if s.ndim != 1 or not np.isin(s, (0, 1, ERASED)).all():
            raise ValueError("symbols must be a 1-D vector over {0, 1, -1}")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "symbols", s)

    @classmethod
    def from_codeword(cls, word, erased=()) -> "ErasureWord":
        s = np.asarray(word, dtype=np.int8).copy()
        s[np.asarray(erased, dtype=np.int64)] = ERASED
        return cls(s)

    def __len__(self):
        return len(self.symbols)

    @property
    def known(self) -> np.ndarray:
        return np.flatnonzero(self.symbols != ERASED)

    @property
    def erased(self) -> np.ndarray:
        return np.flatnonzero(self.symbols == ERASED)

    @property
    def complete(self) -> bool:
        return not (self.symbols == ERASED).any()

    def bits(self) -> np.ndarray:
        if not self.complete:
            raise ValueError("word still has erasures")
        return self.symbols.astype(np.uint8)


@dataclass(frozen=True, eq=False)
class DecodeResult:
    """Outcome of one decode.

    For MP, ``residual_set`` is the maximal stopping set left by peeling and
    ``dof`` the number of symbols that had to be supplied to finish peeling
    (``supply_set``). For ML, ``dof`` is the free-variable count of the
    erased-bit system and ``free_vars`` the positions a guess must cover.
    """

    word: ErasureWord
    resolved: bool
    dof: int
    residual_set: np.ndarray
    free_vars: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    supply_set: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


def _graph_arrays(g: TannerGraph):
    return g.check_ptr, g.check_idx, g.var_ptr, g.var_idx


def mp_decode(graph: TannerGraph, y: ErasureWord, strict: bool = True, prefer=None) -> DecodeResult:
    """Peeling decoder.

    ``prefer`` orders the candidates tried first when counting how many
    symbols must be supplied to finish a stalled decode; remaining residual
    positions follow in index order. With ``strict`` a check whose symbols
    are all known but sum to 1 raises :class:`ParityError`.
    """
    if len(y) != graph.var_count:
        raise ValueError(f"word length {len(y)} != {graph.var_count} variables")
    arrays = _graph_arrays(graph)
    values = y.symbols.copy()
    cnt, xr, par = _peel.check_state(graph.check_ptr, graph.check_idx, values)
    if strict:
        bad = np.flatnonzero((cnt == 0) & (par == 1))
        if len(bad):
            raise ParityError(f"known symbols violate check {int(bad[0])}")
    _peel.mp_peel(*arrays, values, cnt, xr, par)
    if strict:
        bad = np.flatnonzero((cnt == 0) & (par == 1))
        if len(bad):
            raise ParityError(f"resolved symbols violate check {int(bad[0])}")
    residual = np.flatnonzero(values == ERASED)
    word = ErasureWord(values)
    if not len(residual):
        return DecodeResult(word, True, 0, residual)
    if prefer is None:
        priority = residual
    else:
        prefer = np.asarray(prefer, dtype=np.int64)
        priority = np.concatenate([prefer, residual])
    supplied = _peel.supply_until_resolved(
        *arrays, values.copy(), cnt.copy(), xr.copy(), par.copy(), priority
    )
    return DecodeResult(word, False, len(supplied), residual, supply_set=supplied)


def min_supply_set(graph: TannerGraph, y: ErasureWord, max_erasures: int = 20) -> np.ndarray:
    """Smallest set of erased positions whose values let peeling finish.

    Exhaustive over subsets of the residual stopping set, so only for small
    instances.
    """
    base = mp_decode(graph, y, strict=False)
    residual = base.residual_set
    if len(residual) > max_erasures:
        raise ValueError(f"{len(residual)} residual erasures exceed the exhaustive limit {max_erasures}")
    for size in range(len(residual) + 1):
        for subset in combinations(residual.tolist(), size):
            s = base.word.symbols.copy()
            s[list(subset)] = 0
            cnt, xr, par = _peel.check_state(graph.check_ptr, graph.check_idx, s)
            _peel.mp_peel(*_graph_arrays(graph), s, cnt, xr, par)
            if not (s == ERASED).any():
                return np.array(subset, dtype=np.int64)
    raise AssertionError("supplying every residual symbol always finishes peeling")


def erased_system(H: BitMatrix, y: ErasureWord) -> tuple[BitMatrix, np.ndarray, np.ndarray]:
    """The erased-bit system ``H_E x_E = H_K y_K`` as (coeff, rhs, erased positions)."""
    if H.cols != len(y):
        raise ValueError(f"H has {H.cols} columns but word length is {len(y)}")
    erased = y.erased
    known = y.known
    rhs = mod2_matmul(H.array[:, known], y.symbols[known].astype(np.uint8))
    return H.columns(erased), rhs, erased


def _ml_solution(H: BitMatrix, y: ErasureWord) -> tuple[Gf2Solution, np.ndarray]:
    coeff, rhs, erased = erased_system(H, y)
    sol = solve(coeff, rhs)
    if not sol.consistent:
        raise ParityError("no codeword agrees with the known symbols")
    return sol, erased


def ml_decode(H: BitMatrix, y: ErasureWord) -> DecodeResult:
    sol, erased = _ml_solution(H, y)
    free_vars = erased[sol.free_cols]
    if sol.free_count == 0:
        s = y.symbols.copy()
        s[erased] = sol.particular
        return DecodeResult(ErasureWord(s), True, 0, np.zeros(0, dtype=np.int64), free_vars)
    # positions fixed regardless of the free variables are still decoded
    s = y.symbols.copy()
    determined = ~sol.dependence.any(axis=1)
    s[erased[sol.pivot_cols[determined]]] = sol.particular[sol.pivot_cols[determined]]
    unresolved = np.flatnonzero(s == ERASED)
    return DecodeResult(ErasureWord(s), False, sol.free_count, unresolved, free_vars)


def guess_complete(H: BitMatrix, y: ErasureWord, guess) -> ErasureWord:
    """Unique codeword matching the known symbols plus a guess of the ML free variables.

    ``guess[i]`` is the value taken by ``ml_decode(H, y).free_vars[i]``.
    """
    sol, erased = _ml_solution(H, y)
    guess = np.asarray(guess, dtype=np.uint8).reshape(-1)
    if len(guess) != sol.free_count:
        raise ValueError(f"guess has {len(guess)} bits but the word has {sol.free_count} degrees of freedom")
    s = y.symbols.copy()
    s[erased] = sol.assign(guess)
    return ErasureWord(s)


def syndrome_ok(H: BitMatrix, word) -> bool:
    return not mod2_matmul(H.array, np.asarray(word, dtype=np.uint8)).any()


def mp_decode_matrix(H: BitMatrix, y: ErasureWord, **kw) -> DecodeResult:
    return mp_decode(tanner_graph(H), y, **kw)
