import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pipdim.corpus import (
    CooccurrenceCounts,
    TokenStream,
    Vocabulary,
    count_cooccurrences,
    load_counts,
    load_vocabulary,
    save_counts,
    save_vocabulary,
    split_corpus,
    tokenize,
)
from pipdim.errors import CorpusError, FormatError


def _pairs_by_hand(ids, w):
    n = max(ids) + 1
    C = np.zeros((n, n))
    for i, a in enumerate(ids):
        for j, b in enumerate(ids):
            if 0 < abs(i - j) <= w:
                C[a, b] += 1
    return C


class TestTokenize:
    def test_small_sentence(self):
        stream, vocab = tokenize(b"the cat the", max_vocab=10)
        assert vocab.tokens == ("the", "cat")
        assert stream.ids.tolist() == [0, 1, 0]
        assert stream.total_tokens == 3

    def test_empty(self):
        with pytest.raises(CorpusError, match="empty corpus"):
            tokenize(b"")
        with pytest.raises(CorpusError, match="empty corpus"):
            tokenize(b"  \n\t ")

    def test_case_folding(self):
        stream, vocab = tokenize(b"A a A")
        assert vocab.tokens == ("a",)
        assert stream.ids.tolist() == [0, 0, 0]

    def test_invalid_utf8_reports_offset(self):
        with pytest.raises(CorpusError, match="byte offset 4"):
            tokenize(b"abc \xff def")

    def test_ties_broken_lexicographically(self):
        _, vocab = tokenize(b"b a c a b c")
        assert vocab.tokens == ("a", "b", "c")

    def test_oov_tokens_dropped(self):
        # "z" falls outside the top 2; the window closes over the gap
        stream, vocab = tokenize(b"x y z x y", max_vocab=2)
        assert vocab.tokens == ("x", "y")
        assert stream.ids.tolist() == [0, 1, 0, 1]

    def test_min_count(self):
        _, vocab = tokenize(b"a a b", min_count=2)
        assert vocab.tokens == ("a",)

    def test_accepts_str(self):
        _, vocab = tokenize("Hello hello")
        assert vocab.tokens == ("hello",)
        assert vocab.counts.tolist() == [2]


class TestVocabulary:
    def test_rejects_duplicates(self):
        with pytest.raises(CorpusError):
            Vocabulary(("a", "a"), [2, 1])

    def test_rejects_increasing_counts(self):
        with pytest.raises(CorpusError):
            Vocabulary(("a", "b"), [1, 2])

    def test_round_trip(self, tmp_path):
        v = Vocabulary(("the", "cat", "sat"), [5, 2, 2])
        save_vocabulary(v, tmp_path / "v.tsv")
        back = load_vocabulary(tmp_path / "v.tsv")
        assert back.tokens == v.tokens
        assert back.counts.tolist() == [5, 2, 2]

    def test_bad_vocab_line(self, tmp_path):
        p = tmp_path / "v.tsv"
        p.write_text("a\t3\nb 2\n")
        with pytest.raises(FormatError, match=":2:"):
            load_vocabulary(p)


class TestCooccurrence:
    def test_three_tokens_window_one(self):
        C = count_cooccurrences(TokenStream([0, 1, 0]), 2, 1).toarray()
        assert C.tolist() == [[0, 2], [2, 0]]

    def test_single_token(self):
        C = count_cooccurrences(TokenStream([0]), 1, 5)
        assert C.total_pairs == 0

    def test_self_pair(self):
        C = count_cooccurrences(TokenStream([0, 0]), 1, 5).toarray()
        assert C[0, 0] == 2

    def test_zero_window(self):
        with pytest.raises(ValueError):
            count_cooccurrences(TokenStream([0, 1]), 2, 0)

    def test_segments_block_windows(self):
        s = TokenStream([0, 1, 0, 1], segments=[0, 2])
        C = count_cooccurrences(s, 2, 5).toarray()
        assert C.tolist() == [[0, 2], [2, 0]]

    def test_rejects_asymmetric(self):
        import scipy.sparse as sp
        with pytest.raises(CorpusError):
            CooccurrenceCounts(sp.csr_matrix(np.array([[0, 1], [0, 0]])), 1)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(0, 4), min_size=1, max_size=40), st.integers(1, 6))
    def test_matches_brute_force(self, ids, w):
        n = max(ids) + 1
        counts = count_cooccurrences(TokenStream(ids), n, w)
        C = counts.toarray()
        expected = _pairs_by_hand(ids, w)
        np.testing.assert_array_equal(C, expected)
        np.testing.assert_array_equal(C, C.T)
        assert counts.total_pairs == expected.sum()
        np.testing.assert_array_equal(counts.row_marginals, C.sum(axis=1))

    def test_counts_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        counts = count_cooccurrences(TokenStream(rng.integers(0, 7, 300)), 7, 3)
        save_counts(counts, tmp_path / "c.txt")
        back = load_counts(tmp_path / "c.txt")
        assert back.window == 3
        np.testing.assert_array_equal(back.toarray(), counts.toarray())


class TestSplit:
    stream = TokenStream(np.arange(10_000) % 13)

    def _chunks(self, s, L):
        starts = list(s.segments) + [s.total_tokens]
        return [tuple(s.ids[a:b]) for a, b in zip(starts[:-1], starts[1:])]

    def test_ten_chunks(self):
        a, b = split_corpus(self.stream, seed=3)
        assert len(a.segments) == 5 and len(b.segments) == 5
        a2, b2 = split_corpus(self.stream, seed=3)
        np.testing.assert_array_equal(a.ids, a2.ids)
        np.testing.assert_array_equal(b.ids, b2.ids)

    def test_two_chunks(self):
        a, b = split_corpus(TokenStream(np.arange(2000) % 5), seed=0)
        assert a.total_tokens == 1000 and b.total_tokens == 1000

    def test_seed_changes_assignment(self):
        stream = TokenStream(np.arange(40_000))
        a1, _ = split_corpus(stream, seed=1)
        a2, _ = split_corpus(stream, seed=2)
        assert not np.array_equal(a1.ids, a2.ids)

    def test_too_short(self):
        with pytest.raises(CorpusError, match="smaller chunk length"):
            split_corpus(TokenStream([0, 1, 2]), seed=0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 5000), st.integers(1, 400), st.integers(0, 2 ** 32 - 1))
    def test_union_and_balance(self, total, L, seed):
        if -(-total // L) < 2:
            return
        stream = TokenStream(np.arange(total))
        a, b = split_corpus(stream, seed, chunk_length=L)
        assert abs(a.total_tokens - b.total_tokens) <= L
        merged = sorted(self._chunks(a, L) + self._chunks(b, L))
        original = sorted(tuple(stream.ids[i:i + L]) for i in range(0, total, L))
        assert merged == original
