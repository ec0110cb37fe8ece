import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIG2, random_ldpc_matrix
from oracles import codewords, mask_to_set, maximal_stopping_sets
from stopset.decode import (
    ERASED,
    ErasureWord,
    ParityError,
    erased_system,
    guess_complete,
    min_supply_set,
    ml_decode,
    mp_decode,
    syndrome_ok,
)
from stopset.gf2 import BitMatrix, rank
from stopset.ldpc import tanner_graph

# v1=1, v2=0, v3=1, v4=0, v5=1, v6=1, v7=1
FIG2_WORD = np.array([1, 0, 1, 0, 1, 1, 1], dtype=np.uint8)


def test_fig2_word_is_codeword(fig2_H):
    assert syndrome_ok(fig2_H, FIG2_WORD)


def test_mp_fig2_stopping_set(fig2_H):
    y = ErasureWord.from_codeword(FIG2_WORD, [2, 4])
    res = mp_decode(tanner_graph(fig2_H), y)
    assert not res.resolved
    assert res.residual_set.tolist() == [2, 4]
    assert res.dof == 1


def test_mp_no_erasures(fig2_H):
    y = ErasureWord.from_codeword(FIG2_WORD)
    res = mp_decode(tanner_graph(fig2_H), y)
    assert res.resolved and res.dof == 0
    assert np.array_equal(res.word.bits(), FIG2_WORD)


def test_mp_single_erasure(fig2_H):
    y = ErasureWord.from_codeword(FIG2_WORD, [0])
    res = mp_decode(tanner_graph(fig2_H), y)
    assert res.resolved
    assert res.word.symbols[0] == FIG2_WORD[2] ^ FIG2_WORD[4] ^ FIG2_WORD[6]


def test_mp_parity_violation(fig2_H):
    bad = FIG2_WORD.copy()
    bad[1] ^= 1
    with pytest.raises(ParityError):
        mp_decode(tanner_graph(fig2_H), ErasureWord.from_codeword(bad, [0]))
    # peeling through a wrong symbol into a fully known check
    with pytest.raises(ParityError):
        mp_decode(tanner_graph(fig2_H), ErasureWord.from_codeword(bad, [4]))
    res = mp_decode(tanner_graph(fig2_H), ErasureWord.from_codeword(bad, [4]), strict=False)
    assert res.resolved


def test_ml_fig2(fig2_H):
    y = ErasureWord.from_codeword(FIG2_WORD, [2, 4])
    res = ml_decode(fig2_H, y)
    assert res.dof == 1 and not res.resolved
    assert len(res.free_vars) == 1 and res.free_vars[0] in (2, 4)
    assert ml_decode(fig2_H, ErasureWord.from_codeword(FIG2_WORD)).dof == 0


def test_ml_too_many_erasures_not_unique(fig2_code):
    rng = np.random.default_rng(0)
    H = fig2_code.H
    for _ in range(20):
        erased = rng.choice(7, 4, replace=False)
        assert ml_decode(H, ErasureWord.from_codeword(FIG2_WORD, erased)).dof >= 1


def test_guess_complete_fig2(fig2_H):
    y = ErasureWord.from_codeword(FIG2_WORD, [2, 4])
    free = ml_decode(fig2_H, y).free_vars
    right = guess_complete(fig2_H, y, FIG2_WORD[free])
    assert np.array_equal(right.bits(), FIG2_WORD)
    wrong = guess_complete(fig2_H, y, 1 - FIG2_WORD[free]).bits()
    assert syndrome_ok(fig2_H, wrong)
    all_words = codewords(FIG2)
    dmin = min(int(c.sum()) for c in all_words if c.any())
    assert int((wrong != FIG2_WORD).sum()) >= dmin


def test_guess_complete_no_dof(fig2_H):
    y = ErasureWord.from_codeword(FIG2_WORD, [0])
    assert np.array_equal(guess_complete(fig2_H, y, []).bits(), FIG2_WORD)
    with pytest.raises(ValueError):
        guess_complete(fig2_H, y, [1])


def test_erased_system_shape(fig2_H):
    coeff, rhs, erased = erased_system(fig2_H, ErasureWord.from_codeword(FIG2_WORD, [2, 4]))
    assert coeff.shape == (3, 2) and erased.tolist() == [2, 4]
    assert np.array_equal(coeff.array[:, 0], coeff.array[:, 1])


def test_erasure_word_validation():
    with pytest.raises(ValueError):
        ErasureWord(np.array([0, 2, 1]))
    y = ErasureWord(np.array([0, ERASED, 1]))
    assert y.erased.tolist() == [1] and not y.complete
    with pytest.raises(ValueError):
        y.bits()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_mp_matches_stopping_set_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 11))
    H = random_ldpc_matrix(rng, int(rng.integers(2, n)), n)
    g = tanner_graph(BitMatrix(H))
    best = maximal_stopping_sets(H)
    word = codewords(H)[rng.integers(len(codewords(H)))]
    for mask in rng.choice(1 << n, size=40):
        erased = mask_to_set(int(mask), n)
        res = mp_decode(g, ErasureWord.from_codeword(word, erased))
        assert res.residual_set.tolist() == mask_to_set(int(best[mask]), n)
        known = res.word.symbols != ERASED
        assert np.array_equal(res.word.symbols[known], word[known])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ml_dof_is_erased_minus_rank(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 12))
    H = BitMatrix(random_ldpc_matrix(rng, int(rng.integers(2, n)), n))
    words = codewords(H.array)
    word = words[rng.integers(len(words))]
    erased = np.flatnonzero(rng.random(n) < 0.5)
    y = ErasureWord.from_codeword(word, erased)
    res = ml_decode(H, y)
    assert res.dof == len(erased) - rank(H.columns(erased))
    # number of consistent completions is 2**dof
    known = np.setdiff1d(np.arange(n), erased)
    matches = sum(np.array_equal(c[known], word[known]) for c in words)
    assert matches == 2**res.dof
    if res.resolved:
        assert np.array_equal(res.word.bits(), word)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_mp_supply_count_bounds(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 11))
    H = BitMatrix(random_ldpc_matrix(rng, int(rng.integers(2, n)), n))
    g = tanner_graph(H)
    word = codewords(H.array)[0]
    y = ErasureWord.from_codeword(word, np.flatnonzero(rng.random(n) < 0.6))
    mp, ml = mp_decode(g, y), ml_decode(H, y)
    exact = len(min_supply_set(g, y))
    # peeling is weaker than ML; greedy supply is no better than the exhaustive minimum
    assert ml.dof <= exact <= mp.dof
    assert len(mp.supply_set) == mp.dof
