from itertools import permutations

import numpy as np
import pytest

from bivert import CostMatrix, EmbeddingTable, align_words, solve_lsap
from bivert.word_align import render_pairing
from conftest import make_sentence


def table(vectors):
    return EmbeddingTable(np.asarray(vectors, dtype=float))


class TestAlignWords:
    def test_identity_one_token_per_word(self):
        sent = make_sentence(["red", "green", "blue"])
        emb = table([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
        pairing = align_words(sent, sent, emb, emb)
        assert pairing.pairs == ((0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0))
        assert pairing.missing_src == () and pairing.extra_back == ()

    def test_multi_subword_representative(self):
        # one 3-token word vs one 2-token word: 2 token matches, 1 word pair
        src = make_sentence(["inconsequential"], tokens_per_word=[3])
        back = make_sentence(["unimportant"], tokens_per_word=[2])
        src_emb = table([[1.0, 0.0], [0.0, 1.0], [0.7, 0.7]])
        back_emb = table([[0.9, 0.1], [0.1, 0.9]])
        pairing = align_words(src, back, src_emb, back_emb)
        assert len(pairing.pairs) == 1
        ws, wb, rep = pairing.pairs[0]
        assert (ws, wb) == (0, 0)
        assert -1.0 <= rep <= 1.0
        assert pairing.missing_src == () and pairing.extra_back == ()

    def test_unmatched_word_goes_missing(self):
        # 4 src words, 3 back words; src word 3 is near-orthogonal to the rest
        src = make_sentence(["a", "b", "c", "d"])
        back = make_sentence(["x", "y", "z"])
        src_emb = table([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
        back_emb = table([[0.99, 0.1, 0, 0], [0.1, 0.99, 0, 0], [0, 0.1, 0.99, 0]])
        pairing = align_words(src, back, src_emb, back_emb)
        # confirm with the exhaustive token assignment: token 3 never matched
        cost = np.clip(1.0 - src_emb.vectors @ back_emb.vectors.T /
                       np.outer(np.linalg.norm(src_emb.vectors, axis=1),
                                np.linalg.norm(back_emb.vectors, axis=1)), 0, 2)
        best = min(permutations(range(4), 3),
                   key=lambda rows: sum(cost[r, c] for c, r in enumerate(rows)))
        assert 3 not in best
        assert pairing.missing_src == (3,)
        assert pairing.extra_back == ()
        assert len(pairing.pairs) == 3

    def test_majority_vote(self):
        # src word A has 3 tokens: two match back word 1, one matches back word 0
        src = make_sentence(["aaa", "b"], tokens_per_word=[3, 1])
        back = make_sentence(["x", "y"], tokens_per_word=[1, 3])
        src_emb = table([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0.9, 0.4, 0, 0]])
        back_emb = table([[0.9, 0.1, 0, 0.1],
                          [0.1, 1, 0, 0], [0, 0.1, 1, 0], [0, 0, 0.1, 1]])
        pairing = align_words(src, back, src_emb, back_emb)
        # tokens 1 and 2 of word 0 vote for back word 1; token 0 votes back word 0
        pair_map = {ws: wb for ws, wb, _ in pairing.pairs}
        assert pair_map[0] == 1

    def test_conflict_resolved_by_similarity_priority(self):
        # both src words vote for back word 0; the higher-similarity word wins
        src = make_sentence(["p", "q"])
        back = make_sentence(["m"])
        src_emb = table([[1.0, 0.0], [0.8, 0.6]])
        back_emb = table([[1.0, 0.0]])
        pairing = align_words(src, back, src_emb, back_emb)
        assert pairing.pairs == ((0, 0, 1.0),)
        assert pairing.missing_src == (1,)

    def test_losing_vote_makes_back_word_extra(self):
        # back word whose only token match lost its vote ends up extra
        src = make_sentence(["ab"], tokens_per_word=[2])
        back = make_sentence(["x", "y"])
        src_emb = table([[1, 0, 0], [0.9, 0.3, 0]])
        back_emb = table([[1, 0, 0], [0, 0, 1]])
        pairing = align_words(src, back, src_emb, back_emb)
        pair_map = {ws: wb for ws, wb, _ in pairing.pairs}
        assert pair_map == {0: 0}
        assert pairing.extra_back == (1,)

    @pytest.mark.parametrize("seed", range(20))
    def test_partition_property(self, seed):
        rng = np.random.default_rng(seed)
        n_src = int(rng.integers(1, 6))
        n_back = int(rng.integers(1, 6))
        src_counts = [int(rng.integers(1, 4)) for _ in range(n_src)]
        back_counts = [int(rng.integers(1, 4)) for _ in range(n_back)]
        src = make_sentence([f"s{i}" for i in range(n_src)], tokens_per_word=src_counts)
        back = make_sentence([f"b{i}" for i in range(n_back)], tokens_per_word=back_counts)
        src_emb = table(rng.normal(size=(sum(src_counts), 5)))
        back_emb = table(rng.normal(size=(sum(back_counts), 5)))
        pairing = align_words(src, back, src_emb, back_emb)
        assert len(pairing.pairs) + len(pairing.missing_src) == n_src
        assert len(pairing.pairs) + len(pairing.extra_back) == n_back
        assert len({ws for ws, _, _ in pairing.pairs}) == len(pairing.pairs)
        assert len({wb for _, wb, _ in pairing.pairs}) == len(pairing.pairs)
        for _, _, rep in pairing.pairs:
            assert -1.0 <= rep <= 1.0

    @pytest.mark.parametrize("seed", range(10))
    def test_permutation_equivariance(self, seed):
        rng = np.random.default_rng(500 + seed)
        n = int(rng.integers(2, 6))
        src = make_sentence([f"s{i}" for i in range(n)])
        back_words = [f"b{i}" for i in range(n)]
        back = make_sentence(back_words)
        src_emb = table(rng.normal(size=(n, 6)))
        back_vectors = rng.normal(size=(n, 6))
        base = align_words(src, back, src_emb, table(back_vectors))
        perm = rng.permutation(n)
        permuted_back = make_sentence([back_words[p] for p in perm])
        permuted = align_words(src, permuted_back, src_emb, table(back_vectors[perm]))
        # map permuted back indices to original positions and compare
        remapped = {(ws, int(perm[wb])) for ws, wb, _ in permuted.pairs}
        assert remapped == {(ws, wb) for ws, wb, _ in base.pairs}

    @pytest.mark.parametrize("seed", range(10))
    def test_diagonal_dominant_equals_token_assignment(self, seed):
        rng = np.random.default_rng(900 + seed)
        n = int(rng.integers(2, 6))
        base_vectors = np.eye(n) + rng.uniform(0, 0.05, size=(n, n))
        src = make_sentence([f"s{i}" for i in range(n)])
        back = make_sentence([f"b{i}" for i in range(n)])
        src_emb = table(base_vectors)
        back_emb = table(np.eye(n))
        pairing = align_words(src, back, src_emb, back_emb)
        sim = src_emb.vectors @ back_emb.vectors.T
        sim /= np.linalg.norm(src_emb.vectors, axis=1)[:, None]
        token_assignment = solve_lsap(CostMatrix(np.clip(1 - sim, 0, 2)))
        assert {(ws, wb) for ws, wb, _ in pairing.pairs} == set(token_assignment.matches)


def test_render_pairing_format():
    src = make_sentence(["good", "plan", "left"])
    back = make_sentence(["good", "extra"])
    emb_src = table([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    emb_back = table([[1, 0, 0], [0, 1, 0]])
    pairing = align_words(src, back, emb_src, emb_back)
    text = render_pairing(src, back, pairing)
    lines = text.splitlines()
    assert lines[0] == "good\t↔\tgood\t1.000000"
    assert any(line.startswith("MISSING\t") for line in lines)
