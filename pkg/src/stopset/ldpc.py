"""LDPC parity-check construction, Tanner graphs and systematic generators."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .gf2 import BitMatrix, independent_rows, mod2_matmul, rref

MAX_REPAIR_ROUNDS = 100
MAX_RESTARTS = 50
ROUNDING_SLACK = 1e-3


class ConstructionError(ValueError):
    """Infeasible code parameters or a construction that could not be completed."""


class RankDeficientError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TannerGraph:
    """Bipartite adjacency between variable and check nodes in CSR form.

    ``check_idx[check_ptr[i]:check_ptr[i + 1]]`` are the variables in check
    ``i``; ``var_idx[var_ptr[j]:var_ptr[j + 1]]`` the checks touching
    variable ``j``.
    """

    var_count: int
    check_count: int
    check_ptr: np.ndarray
    check_idx: np.ndarray
    var_ptr: np.ndarray
    var_idx: np.ndarray

    def check_neighbors(self, i: int) -> np.ndarray:
        return self.check_idx[self.check_ptr[i] : self.check_ptr[i + 1]]

    def var_neighbors(self, j: int) -> np.ndarray:
        return self.var_idx[self.var_ptr[j] : self.var_ptr[j + 1]]

    @property
    def edge_count(self) -> int:
        return len(self.check_idx)

    def var_degrees(self) -> np.ndarray:
        return np.diff(self.var_ptr)

    def check_degrees(self) -> np.ndarray:
        return np.diff(self.check_ptr)

    def to_matrix(self) -> BitMatrix:
        h = np.zeros((self.check_count, self.var_count), dtype=np.uint8)
        rows = np.repeat(np.arange(self.check_count), self.check_degrees())
        h[rows, self.check_idx] = 1
        return BitMatrix(h)


def tanner_graph(H: BitMatrix) -> TannerGraph:
    a = H.array
    rows, cols = np.nonzero(a)  # row-major: grouped by check
    check_ptr = np.zeros(H.rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=H.rows), out=check_ptr[1:])
    vrows, vcols = np.nonzero(a.T)
    var_ptr = np.zeros(H.cols + 1, dtype=np.int64)
    np.cumsum(np.bincount(vrows, minlength=H.cols), out=var_ptr[1:])
    return TannerGraph(
        H.cols,
        H.rows,
        check_ptr,
        cols.astype(np.int64),
        var_ptr,
        vcols.astype(np.int64),
    )


@dataclass(frozen=True)
class DegreeDistribution:
    """Edge-perspective degree fractions, keyed by node degree.

    ``var_edges[d]`` is the fraction of edges attached to degree-``d``
    variable nodes (the coefficient of ``x**(d-1)``); likewise for checks.
    """

    var_edges: dict[int, float]
    check_edges: dict[int, float]

    def __post_init__(self):
        for attr in ("var_edges", "check_edges"):
            dist = getattr(self, attr)
            name = attr.split("_")[0]
            if not dist:
                raise ValueError(f"empty {name} distribution")
            if any(d < 1 for d in dist) or any(c < 0 for c in dist.values()):
                raise ValueError(f"{name} distribution has invalid degrees or negative fractions")
            total = sum(dist.values())
            # tabulated coefficients are rounded; renormalise small slack only
            if abs(total - 1.0) > ROUNDING_SLACK:
                raise ValueError(f"{name} edge fractions sum to {total}, not 1")
            object.__setattr__(self, attr, {int(d): f / total for d, f in sorted(dist.items())})

    @classmethod
    def from_polynomials(cls, var_coeffs, check_coeffs) -> "DegreeDistribution":
        """Build from coefficient lists where entry ``i`` multiplies ``x**i``."""
        v = {i + 1: float(c) for i, c in enumerate(var_coeffs) if c}
        c = {i + 1: float(x) for i, x in enumerate(check_coeffs) if x}
        return cls(v, c)

    def design_rate(self) -> float:
        sv = sum(f / d for d, f in self.var_edges.items())
        sc = sum(f / d for d, f in self.check_edges.items())
        return 1.0 - sc / sv


EXAMPLE1_IRREGULAR = DegreeDistribution(
    {2: 0.32660, 3: 0.11960, 4: 0.18393, 5: 0.36988},
    {6: 0.78555, 7: 0.21445},
)


@dataclass(frozen=True, eq=False)
class LdpcCode:
    """Parity-check matrix plus a systematic generator in the same coordinates.

    ``H`` may carry redundant rows (regular ensembles with even column
    weight always do); ``k`` is ``N - rank(H)``. Message bit ``i`` lands at
    codeword position ``systematic_positions[i]``.
    """

    H: BitMatrix
    G: BitMatrix
    systematic_positions: np.ndarray
    column_permutation: np.ndarray
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.H.cols

    @property
    def k(self) -> int:
        return self.G.rows

    @property
    def redundancy(self) -> int:
        """``N - k``, the rank of ``H``."""
        return self.N - self.k

    @property
    def graph(self) -> TannerGraph:
        g = self.__dict__.get("_graph")
        if g is None:
            g = tanner_graph(self.H)
            object.__setattr__(self, "_graph", g)
        return g

    def encode(self, messages) -> np.ndarray:
        """Codewords for one message (length k) or a stack of them (L x k)."""
        m = np.asarray(messages, dtype=np.uint8)
        if m.shape[-1] != self.k:
            raise ValueError(f"message length {m.shape[-1]} != k={self.k}")
        return mod2_matmul(m, self.G.array)

    def systematic_bits(self, words) -> np.ndarray:
        return np.asarray(words)[..., self.systematic_positions]


def derive_systematic_generator(H: BitMatrix) -> tuple[BitMatrix, np.ndarray, np.ndarray]:
    """Systematic ``G`` with ``G @ H.T == 0``.

    Returns ``(G, systematic_positions, column_permutation)``; the permutation
    lists parity (pivot) columns first, then systematic columns, i.e. the
    column order in which ``H`` reduces to ``[I | A]``. Columns are never
    physically moved.
    """
    red, pivots = rref(H.array)
    r = len(pivots)
    if r < H.rows:
        raise RankDeficientError(
            f"H has rank {r} but {H.rows} rows; {H.rows - r} row(s) are linearly dependent"
        )
    n = H.cols
    systematic = np.setdiff1d(np.arange(n), pivots)
    k = len(systematic)
    g = np.zeros((k, n), dtype=np.uint8)
    g[np.arange(k), systematic] = 1
    # pivot bit = sum of systematic bits in its reduced row
    g[:, pivots] = red[:r][:, systematic].T
    perm = np.concatenate([pivots, systematic]).astype(np.int64)
    return BitMatrix(g), systematic.astype(np.int64), perm


def code_from_matrix(H: BitMatrix, seed: int | None = None, **meta) -> LdpcCode:
    """Wrap ``H`` as a code, deriving ``G`` from an independent row subset."""
    keep = independent_rows(H)
    G, sys_pos, perm = derive_systematic_generator(H.row_subset(keep))
    if G.rows == 0:
        raise ConstructionError("code has dimension 0")
    return LdpcCode(H, G, sys_pos, perm, seed, dict(meta))


# --- socket construction ----------------------------------------------------


def _match_sockets(
    var_deg: np.ndarray, check_deg: np.ndarray, rng: np.random.Generator, parallel_edges: str
) -> np.ndarray:
    """Random socket matching, returned as the binary parity-check array.

    ``parallel_edges="repair"`` swaps the check end of repeated edges until the
    graph is simple; ``"cancel"`` keeps the raw matching and reduces edge
    multiplicities mod 2, as a GF(2) parity-check matrix does.
    """
    n_var, n_chk = len(var_deg), len(check_deg)
    var_sock = np.repeat(np.arange(n_var), var_deg)
    check_sock = np.repeat(np.arange(n_chk), check_deg)
    E = len(var_sock)
    if parallel_edges == "cancel":
        h = np.zeros((n_chk, n_var), dtype=np.int64)
        np.add.at(h, (check_sock[rng.permutation(E)], var_sock), 1)
        return (h & 1).astype(np.uint8)
    if parallel_edges != "repair":
        raise ValueError(f"unknown parallel-edge policy {parallel_edges!r}")
    for _ in range(MAX_RESTARTS):
        chk = check_sock[rng.permutation(E)]
        for _ in range(MAX_REPAIR_ROUNDS):
            key = chk * n_var + var_sock
            _, first, counts = np.unique(key, return_index=True, return_counts=True)
            if (counts == 1).all():
                h = np.zeros((n_chk, n_var), dtype=np.uint8)
                h[chk, var_sock] = 1
                return h
            dup = np.ones(E, dtype=bool)
            dup[first] = False
            for e in np.flatnonzero(dup):
                f = rng.integers(E)
                chk[e], chk[f] = chk[f], chk[e]
    raise ConstructionError(f"could not remove repeated edges after {MAX_RESTARTS} restarts")


def build_regular(N: int, wc: int, wr: int, seed: int | None = None, parallel_edges: str = "repair") -> LdpcCode:
    if N < 1 or wc < 1 or wr < 1:
        raise ConstructionError("N, wc and wr must be positive")
    if (N * wc) % wr:
        raise ConstructionError(f"N*wc = {N * wc} is not divisible by wr = {wr}")
    m = N * wc // wr
    if wr > N or wc > m:
        raise ConstructionError(f"no simple graph with N={N}, wc={wc}, wr={wr}")
    rng = np.random.default_rng(seed)
    h = _match_sockets(np.full(N, wc), np.full(m, wr), rng, parallel_edges)
    return code_from_matrix(BitMatrix(h), seed, kind="regular", wc=wc, wr=wr, parallel_edges=parallel_edges)


def _apportion(total: int, weights: np.ndarray) -> np.ndarray:
    """Largest-remainder integer split of ``total`` proportional to ``weights``."""
    quota = total * weights / weights.sum()
    counts = np.floor(quota).astype(np.int64)
    short = total - counts.sum()
    order = np.argsort(-(quota - counts), kind="stable")
    counts[order[:short]] += 1
    return counts


def degree_counts(N: int, dist: DegreeDistribution) -> tuple[dict[int, int], dict[int, int]]:
    """Integer node counts per degree with equal edge totals on both sides."""
    vd = np.array(sorted(dist.var_edges))
    vf = np.array([dist.var_edges[d] for d in vd])
    cd = np.array(sorted(dist.check_edges))
    cf = np.array([dist.check_edges[d] for d in cd])
    sv = (vf / vd).sum()
    sc = (cf / cd).sum()
    var_n = _apportion(N, vf / vd)
    M = int(round(N * sc / sv))
    if M < 1:
        raise ConstructionError("distribution implies no check nodes")
    chk_n = _apportion(M, cf / cd)
    gap = int((chk_n * cd).sum() - (var_n * vd).sum())
    # move nodes between the lowest variable class and its neighbour; each move shifts the edge total by the degree gap
    if gap and len(vd) > 1:
        step = int(vd[1] - vd[0])
        moves, rem = divmod(abs(gap), step)
        if rem:
            raise ConstructionError(f"cannot balance edge totals (gap {gap}, degree step {step})")
        if gap > 0:
            var_n[0] -= moves
            var_n[1] += moves
        else:
            var_n[0] += moves
            var_n[1] -= moves
    elif gap:
        raise ConstructionError(f"edge totals differ by {gap} with a single variable degree")
    if (var_n < 0).any():
        raise ConstructionError("inconsistent distribution: negative node count after balancing")
    return dict(zip(vd.tolist(), var_n.tolist())), dict(zip(cd.tolist(), chk_n.tolist()))


def build_irregular(
    N: int, dist: DegreeDistribution, seed: int | None = None, parallel_edges: str = "cancel"
) -> LdpcCode:
    var_counts, chk_counts = degree_counts(N, dist)
    rng = np.random.default_rng(seed)
    var_deg = rng.permutation(np.repeat(list(var_counts), list(var_counts.values())))
    chk_deg = rng.permutation(np.repeat(list(chk_counts), list(chk_counts.values())))
    if parallel_edges == "repair" and (var_deg.max() > len(chk_deg) or chk_deg.max() > N):
        raise ConstructionError("degree exceeds the number of nodes on the other side")
    h = _match_sockets(var_deg, chk_deg, rng, parallel_edges)
    return code_from_matrix(BitMatrix(h), seed, kind="irregular", parallel_edges=parallel_edges)


def edge_fractions(graph: TannerGraph) -> tuple[dict[int, float], dict[int, float]]:
    """Empirical edge-perspective degree fractions of a graph."""

    def frac(deg):
        E = deg.sum()
        vals, counts = np.unique(deg[deg > 0], return_counts=True)
        return {int(d): float(d * c / E) for d, c in zip(vals, counts)}

    return frac(graph.var_degrees()), frac(graph.check_degrees())


# --- alist I/O --------------------------------------------------------------


def write_alist(H: BitMatrix, path) -> None:
    g = tanner_graph(H)
    vdeg, cdeg = g.var_degrees(), g.check_degrees()
    lines = [
        f"{H.cols} {H.rows}",
        f"{vdeg.max(initial=0)} {cdeg.max(initial=0)}",
        " ".join(map(str, vdeg)),
        " ".join(map(str, cdeg)),
    ]
    for j in range(H.cols):
        lines.append(" ".join(str(i + 1) for i in g.var_neighbors(j)) or "0")
    for i in range(H.rows):
        lines.append(" ".join(str(j + 1) for j in g.check_neighbors(i)) or "0")
    Path(path).write_text("\n".join(lines) + "\n")


def read_alist(path) -> BitMatrix:
    """Parse an alist file, checking both adjacency halves agree with the degree lists."""
    tokens = [line.split() for line in Path(path).read_text().splitlines()]
    tokens = [t for t in tokens if t]
    n, m = map(int, tokens[0])
    vdeg = list(map(int, tokens[2]))
    cdeg = list(map(int, tokens[3]))
    if len(vdeg) != n or len(cdeg) != m:
        raise ValueError("alist degree lists do not match the header")
    h = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        # zero padding is allowed after the real entries
        nbrs = [int(x) for x in tokens[4 + j] if int(x) > 0]
        if len(nbrs) != vdeg[j]:
            raise ValueError(f"variable {j + 1}: expected {vdeg[j]} neighbours, got {len(nbrs)}")
        h[np.array(nbrs, dtype=np.int64) - 1, j] = 1
    h2 = np.zeros_like(h)
    for i in range(m):
        nbrs = [int(x) for x in tokens[4 + n + i] if int(x) > 0]
        if len(nbrs) != cdeg[i]:
            raise ValueError(f"check {i + 1}: expected {cdeg[i]} neighbours, got {len(nbrs)}")
        h2[i, np.array(nbrs, dtype=np.int64) - 1] = 1
    if not np.array_equal(h, h2):
        raise ValueError("variable and check adjacency lists disagree")
    return BitMatrix(h)
