import numpy as np
import pytest
from scipy import stats

from pipdim.errors import FormatError, PipdimError
from pipdim.evaluation import (
    AnalogyTestSet,
    RelatednessTestSet,
    analogy_accuracy,
    load_analogy,
    load_relatedness,
    relatedness_correlation,
)
from pipdim.perturbation import haar_orthogonal

VOCAB = ("king", "queen", "man", "woman", "apple")


def unit(deg):
    return [np.cos(np.radians(deg)), np.sin(np.radians(deg))]


class TestRelatedness:
    E = np.array([unit(0), unit(10), unit(40), unit(90), unit(170)])

    def _cos(self, i, j):
        return float(self.E[i] @ self.E[j])

    def test_perfect_agreement(self):
        pairs = [(0, 1), (0, 2), (1, 3), (2, 4)]
        ts = RelatednessTestSet("t", tuple((VOCAB[i], VOCAB[j], self._cos(i, j)) for i, j in pairs))
        r = relatedness_correlation(self.E, VOCAB, ts)
        assert r.correlation == pytest.approx(1.0)
        assert r.coverage == 1.0

    def test_reversed(self):
        pairs = [(0, 1), (0, 2), (1, 3), (2, 4)]
        ts = RelatednessTestSet("t", tuple((VOCAB[i], VOCAB[j], -self._cos(i, j)) for i, j in pairs))
        assert relatedness_correlation(self.E, VOCAB, ts).correlation == pytest.approx(-1.0)

    def test_three_pairs_by_hand(self):
        # cosines: (king, queen) = cos 10, (king, woman) = cos 90, (man, apple) = cos 130
        # model ranks 3, 2, 1; human ranks 3, 1, 2 -> rho = 1 - 6 * 2 / (3 * 8) = 0.5
        ts = RelatednessTestSet("t", (("king", "queen", 9.0), ("king", "woman", 1.0), ("man", "apple", 2.0)))
        assert relatedness_correlation(self.E, VOCAB, ts).correlation == pytest.approx(0.5)

    def test_oov_excluded(self):
        ts = RelatednessTestSet("t", (("king", "queen", 3.0), ("king", "man", 2.0),
                                      ("man", "apple", 1.0), ("king", "zebra", 5.0)))
        r = relatedness_correlation(self.E, VOCAB, ts)
        assert r.pairs_used == 3 and r.coverage == 0.75

    def test_zero_coverage(self):
        ts = RelatednessTestSet("t", (("x", "y", 1.0), ("y", "z", 2.0)))
        with pytest.raises(PipdimError, match="no test pair"):
            relatedness_correlation(self.E, VOCAB, ts)

    def test_zero_norm_counted(self):
        E = self.E.copy()
        E[4] = 0
        ts = RelatednessTestSet("t", (("king", "queen", 3.0), ("king", "man", 2.0),
                                      ("man", "woman", 1.5), ("man", "apple", 1.0)))
        r = relatedness_correlation(E, VOCAB, ts)
        assert r.zero_norm_skipped == 1 and r.pairs_used == 3

    def test_pearson(self):
        ts = RelatednessTestSet("t", (("king", "queen", 3.0), ("king", "man", 2.5), ("man", "apple", 0.0)))
        r = relatedness_correlation(self.E, VOCAB, ts, method="pearson")
        cos = [self._cos(0, 1), self._cos(0, 2), self._cos(2, 4)]
        assert r.correlation == pytest.approx(stats.pearsonr(cos, [3.0, 2.5, 0.0])[0])

    def test_invariances(self):
        rng = np.random.default_rng(0)
        E = rng.standard_normal((5, 4))
        ts = RelatednessTestSet("t", (("king", "queen", 3.0), ("king", "man", 2.0),
                                      ("man", "apple", 1.0), ("woman", "apple", 0.5)))
        base = relatedness_correlation(E, VOCAB, ts).correlation
        U = haar_orthogonal(4, rng=rng)
        assert relatedness_correlation(E @ U, VOCAB, ts).correlation == pytest.approx(base, abs=1e-10)
        assert relatedness_correlation(3.5 * E, VOCAB, ts).correlation == pytest.approx(base, abs=1e-10)

    def test_needs_two_records(self):
        with pytest.raises(ValueError):
            RelatednessTestSet("t", (("a", "b", 1.0),))
        with pytest.raises(ValueError):
            RelatednessTestSet("t", (("a", "b", 1.0), ("a", "c", float("nan"))))


class TestAnalogy:
    # king - man + woman lands exactly on queen
    E = np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-1.0, 0.2, 0.3]])

    def test_parallelogram(self):
        ts = AnalogyTestSet("t", (("man", "king", "woman", "queen"), ("woman", "queen", "man", "king")))
        for method in ("3cosadd", "3cosmul"):
            a = analogy_accuracy(self.E, VOCAB, ts, method=method)
            assert a.accuracy == 1.0 and a.coverage == 1.0

    def test_oov_excluded(self):
        ts = AnalogyTestSet("t", (("man", "king", "woman", "queen"), ("man", "king", "girl", "princess")))
        a = analogy_accuracy(self.E, VOCAB, ts)
        assert a.questions_used == 1 and a.coverage == 0.5 and a.accuracy == 1.0

    def test_question_words_never_predicted(self):
        # b - a + c is closest to c itself here, but c is excluded
        E = np.array([[1.0, 0.0], [1.0, 0.01], [0.0, 1.0], [0.1, 1.0], [-1.0, -1.0]])
        ts = AnalogyTestSet("t", (("king", "queen", "man", "woman"),))
        assert analogy_accuracy(E, VOCAB, ts).accuracy == 1.0

    def test_zero_coverage(self):
        with pytest.raises(PipdimError):
            analogy_accuracy(self.E, VOCAB, AnalogyTestSet("t", (("a", "b", "c", "d"),)))

    def test_unitary_invariance(self):
        rng = np.random.default_rng(1)
        E = rng.standard_normal((5, 3))
        ts = AnalogyTestSet("t", tuple((a, b, c, d) for a, b, c, d in [
            ("man", "king", "woman", "queen"), ("king", "man", "apple", "woman"),
            ("apple", "queen", "man", "king")]))
        U = haar_orthogonal(3, rng=rng)
        assert analogy_accuracy(E, VOCAB, ts).accuracy == analogy_accuracy(E @ U, VOCAB, ts).accuracy

    def test_distinct_words_required(self):
        with pytest.raises(ValueError):
            AnalogyTestSet("t", (("a", "a", "b", "c"),))


class TestLoaders:
    def test_relatedness_file(self, tmp_path):
        p = tmp_path / "ws.tsv"
        p.write_text("# comment\nWord 1\tWord 2\tHuman (mean)\nTiger\tcat\t7.35\nbook\tpaper\t7.46\n")
        ts = load_relatedness(p)
        assert ts.records == (("tiger", "cat", 7.35), ("book", "paper", 7.46))

    def test_relatedness_bad_score(self, tmp_path):
        p = tmp_path / "ws.tsv"
        p.write_text("a\tb\t1\nc\td\tx\n")
        with pytest.raises(FormatError, match=":2:"):
            load_relatedness(p)

    def test_analogy_file(self, tmp_path):
        p = tmp_path / "q.txt"
        p.write_text(": capital\nAthens Greece Baghdad Iraq\n: family\nboy girl brother sister\n")
        assert load_analogy(p).records == (("athens", "greece", "baghdad", "iraq"),
                                           ("boy", "girl", "brother", "sister"))

    def test_analogy_bad_line(self, tmp_path):
        p = tmp_path / "q.txt"
        p.write_text("a b c\n")
        with pytest.raises(FormatError, match="4 words"):
            load_analogy(p)
