"""Stopping-set detection and acceptable puncturing patterns."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _peel
from .ldpc import TannerGraph


@dataclass(frozen=True, eq=False)
class PuncturePattern:
    """Punctured positions ``R`` and transmitted positions ``Q`` (both sorted)."""

    R: np.ndarray
    Q: np.ndarray
    seed: int | None = None

    @classmethod
    def from_punctured(cls, R, N: int, seed: int | None = None) -> "PuncturePattern":
        R = np.unique(np.asarray(R, dtype=np.int64))
        if len(R) and (R[0] < 0 or R[-1] >= N):
            raise ValueError("punctured index out of range")
        return cls(R, np.setdiff1d(np.arange(N), R), seed)

    @property
    def n(self) -> int:
        return len(self.Q)

    @property
    def N(self) -> int:
        return len(self.R) + len(self.Q)

    def to_json(self, code_ref: str | None = None) -> dict:
        return {"code_ref": code_ref, "seed": self.seed, "N": self.N, "R": self.R.tolist(), "n": self.n}

    @classmethod
    def from_json(cls, data: dict) -> "PuncturePattern":
        p = cls.from_punctured(data["R"], data["N"], data.get("seed"))
        if p.n != data["n"]:
            raise ValueError(f"pattern file says n={data['n']} but R implies n={p.n}")
        return p

    def save(self, path, code_ref: str | None = None) -> None:
        Path(path).write_text(json.dumps(self.to_json(code_ref)) + "\n")

    @classmethod
    def load(cls, path) -> "PuncturePattern":
        return cls.from_json(json.loads(Path(path).read_text()))


def _arrays(g: TannerGraph):
    return g.check_ptr, g.check_idx, g.var_ptr, g.var_idx


def find_maximal(graph: TannerGraph, A) -> np.ndarray:
    """Largest stopping set contained in ``A`` (sorted; empty if there is none)."""
    members = np.unique(np.asarray(A, dtype=np.int64))
    if not len(members):
        return members
    alive = _peel.peel_set(*_arrays(graph), members, graph.var_count, -1)
    return np.flatnonzero(alive)


def has_stopping_set(graph: TannerGraph, A) -> bool:
    return len(find_maximal(graph, A)) > 0


def is_stopping_set(graph: TannerGraph, S) -> bool:
    """Direct check: every check touching ``S`` touches it at least twice."""
    S = np.asarray(S, dtype=np.int64)
    if not len(S):
        return True
    hits = np.bincount(np.concatenate([graph.var_neighbors(v) for v in S]), minlength=graph.check_count)
    return not (hits == 1).any()


def find_acceptable_pattern(graph: TannerGraph, seed: int | None = None) -> PuncturePattern:
    """Visit variables in a seeded random order, puncturing each one that keeps R stopping-set free."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(graph.var_count).astype(np.int64)
    in_r = _peel.acceptable_pattern(*_arrays(graph), order)
    return PuncturePattern.from_punctured(np.flatnonzero(in_r), graph.var_count, seed)


def verify_acceptable(graph: TannerGraph, pattern: PuncturePattern) -> tuple[bool, int | None]:
    """Check both acceptability conditions; on failure return the offending variable.

    The offender is a member of the stopping set inside ``R`` for the first
    condition, or a transmitted variable whose addition creates no stopping
    set for the second.
    """
    if pattern.N != graph.var_count:
        raise ValueError("pattern and graph disagree on the number of variables")
    inside = find_maximal(graph, pattern.R)
    if len(inside):
        return False, int(inside[0])
    for v in pattern.Q:
        if not has_stopping_set(graph, np.append(pattern.R, v)):
            return False, int(v)
    return True, None
