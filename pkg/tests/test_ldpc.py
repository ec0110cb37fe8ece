import numpy as np
import pytest

from stopset.gf2 import BitMatrix, rank
from stopset.ldpc import (
    EXAMPLE1_IRREGULAR,
    ConstructionError,
    DegreeDistribution,
    RankDeficientError,
    build_irregular,
    build_regular,
    code_from_matrix,
    degree_counts,
    derive_systematic_generator,
    edge_fractions,
    read_alist,
    tanner_graph,
    write_alist,
)


def test_regular_example1_shape():
    code = build_regular(1000, 4, 8, seed=7)
    assert code.H.shape == (500, 1000)
    g = code.graph
    assert (g.var_degrees() == 4).all() and (g.check_degrees() == 8).all()
    # even column weight: the rows of H sum to zero, so one row is redundant
    assert code.k == 1000 - rank(code.H) == 501


def test_regular_small_and_divisibility():
    assert build_regular(8, 2, 4, seed=1).H.shape == (4, 8)
    with pytest.raises(ConstructionError):
        build_regular(12, 3, 5, seed=1)


def test_regular_is_seeded():
    assert build_regular(200, 3, 6, seed=5).H == build_regular(200, 3, 6, seed=5).H
    assert build_regular(200, 3, 6, seed=5).H != build_regular(200, 3, 6, seed=6).H


def test_irregular_example1_fractions():
    code = build_irregular(1000, EXAMPLE1_IRREGULAR, seed=7)
    assert code.H.shape == (500, 1000)
    assert code.k == 500
    vf, cf = edge_fractions(code.graph)
    for target, got in ((EXAMPLE1_IRREGULAR.var_edges, vf), (EXAMPLE1_IRREGULAR.check_edges, cf)):
        for d, f in target.items():
            assert abs(got.get(d, 0.0) - f) < 0.02


def test_irregular_repair_is_simple_graph():
    code = build_irregular(1000, EXAMPLE1_IRREGULAR, seed=3, parallel_edges="repair")
    counts, _ = degree_counts(1000, EXAMPLE1_IRREGULAR)
    degs = code.graph.var_degrees()
    assert {d: int((degs == d).sum()) for d in counts} == counts


def test_degree_counts_balance_edges():
    v, c = degree_counts(1000, EXAMPLE1_IRREGULAR)
    assert sum(v.values()) == 1000 and sum(c.values()) == 500
    assert sum(d * n for d, n in v.items()) == sum(d * n for d, n in c.items())


def test_all_degree_two():
    dist = DegreeDistribution({2: 1.0}, {2: 1.0})
    code = build_irregular(4, dist, seed=0, parallel_edges="repair")
    g = code.graph
    assert (g.var_degrees() == 2).all() and (g.check_degrees() == 2).all()


def test_distribution_validation():
    with pytest.raises(ValueError):
        DegreeDistribution({2: 0.5}, {6: 1.0})
    d = DegreeDistribution.from_polynomials([0, 0.5, 0.5], [0, 0, 0, 0, 0, 1.0])
    assert d.var_edges == {2: 0.5, 3: 0.5}
    assert abs(EXAMPLE1_IRREGULAR.design_rate() - 0.5) < 0.01


def test_generator_fig2(fig2_H):
    G, sys_pos, perm = derive_systematic_generator(fig2_H)
    assert G.shape == (4, 7)
    assert not (G @ fig2_H.T).array.any()
    assert np.array_equal(G.columns(sys_pos).array, np.eye(4, dtype=np.uint8))
    assert sorted(perm.tolist()) == list(range(7))


def test_generator_tiny():
    G, sys_pos, _ = derive_systematic_generator(BitMatrix([[1, 1]]))
    assert G.array.tolist() == [[1, 1]] and len(sys_pos) == 1


def test_generator_rank_deficient():
    with pytest.raises(RankDeficientError):
        derive_systematic_generator(BitMatrix([[1, 1, 0], [1, 1, 0]]))


def test_code_from_rank_deficient_matrix():
    code = code_from_matrix(BitMatrix([[1, 1, 0, 0], [0, 0, 1, 1], [1, 1, 1, 1]]))
    assert code.k == 2
    words = code.encode(np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=np.uint8))
    assert not (words @ code.H.array.T % 2).any()
    assert len({tuple(w) for w in words}) == 4


def test_encode_systematic_roundtrip(example1_code):
    rng = np.random.default_rng(0)
    m = rng.integers(0, 2, (5, example1_code.k), dtype=np.uint8)
    b = example1_code.encode(m)
    assert not (b @ example1_code.H.array.T % 2).any()
    assert np.array_equal(example1_code.systematic_bits(b), m)


def test_tanner_graph(fig2_H):
    g = tanner_graph(fig2_H)
    assert g.check_neighbors(0).tolist() == [0, 2, 4, 6]
    assert g.var_neighbors(2).tolist() == [0, 1]
    assert g.to_matrix() == fig2_H
    assert tanner_graph(BitMatrix.zeros(2, 3)).edge_count == 0


def test_alist_roundtrip(tmp_path, fig2_H):
    code = build_irregular(200, EXAMPLE1_IRREGULAR, seed=2)
    for H in (fig2_H, code.H):
        write_alist(H, tmp_path / "h.alist")
        assert read_alist(tmp_path / "h.alist") == H


def test_alist_rejects_inconsistent(tmp_path, fig2_H):
    write_alist(fig2_H, tmp_path / "h.alist")
    lines = (tmp_path / "h.alist").read_text().splitlines()
    lines[4] = "1 3"  # v1 claims check u3 as well as u1's slot
    (tmp_path / "bad.alist").write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError):
        read_alist(tmp_path / "bad.alist")
