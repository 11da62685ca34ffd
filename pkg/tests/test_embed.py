import numpy as np
import pytest

from pipdim.corpus import Vocabulary
from pipdim.embed import export_embedding, factorize_embedding, import_embedding
from pipdim.errors import FormatError
from pipdim.perturbation import EmbeddingMatrix, haar_orthogonal, pip_loss, svd


def random_symmetric(seed, n=12):
    A = np.random.default_rng(seed).standard_normal((n, n))
    return A + A.T


class TestFactorize:
    def test_diagonal(self):
        E = factorize_embedding(np.diag([4.0, 1.0]), 1, 0.5)
        np.testing.assert_allclose(E.vectors[:, 0], [2.0, 0.0])
        assert E.provenance == "trained" and E.alpha == 0.5

    def test_alpha_zero_orthonormal(self):
        E = factorize_embedding(random_symmetric(0), 5, 0.0)
        np.testing.assert_allclose(E.vectors.T @ E.vectors, np.eye(5), atol=1e-8)

    def test_alpha_one_full(self):
        M = random_symmetric(1)
        E = factorize_embedding(M, 12, 1.0).vectors
        f = svd(M)
        target = (f.U * f.D ** 2) @ f.U.T
        assert np.linalg.norm(E @ E.T - target) <= 1e-8 * np.linalg.norm(M) ** 2

    def test_k_bounds(self):
        with pytest.raises(ValueError):
            factorize_embedding(np.eye(3), 4, 0.5)
        with pytest.raises(ValueError):
            factorize_embedding(np.eye(3), 0, 0.5)

    def test_rank_warning(self):
        E = factorize_embedding(np.diag([2.0, 1.0, 0.0]), 3, 0.5)
        assert "numerical rank 2" in E.info["warning"]

    def test_nesting(self):
        M = random_symmetric(2)
        small = factorize_embedding(M, 4, 0.5).vectors
        big = factorize_embedding(M, 5, 0.5).vectors
        np.testing.assert_allclose(np.abs(big[:, :4]), np.abs(small), atol=1e-10)

    def test_sign_convention(self):
        E = factorize_embedding(random_symmetric(3), 6, 0.0).vectors
        idx = np.argmax(np.abs(E), axis=0)
        assert np.all(E[idx, np.arange(6)] > 0)

    def test_rotation_leaves_pip_unchanged(self):
        E = factorize_embedding(random_symmetric(4), 6, 0.5).vectors
        U = haar_orthogonal(6, rng=0)
        assert pip_loss(E, E @ U) <= 1e-10 * np.linalg.norm(E) ** 2


class TestTextFormat:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        E = EmbeddingMatrix(rng.standard_normal((5, 3)))
        vocab = Vocabulary(("a", "b", "c", "d", "e"), [5, 4, 3, 2, 1])
        export_embedding(E, vocab, tmp_path / "e.txt")
        back, tokens = import_embedding(tmp_path / "e.txt")
        assert tokens == vocab.tokens
        assert np.max(np.abs(back.vectors - E.vectors)) <= 1e-8
        assert (tmp_path / "e.txt").read_text().splitlines()[0] == "5 3"

    def test_empty_vocabulary(self, tmp_path):
        with pytest.raises(FormatError):
            export_embedding(np.zeros((0, 2)), [], tmp_path / "e.txt")

    def test_dimension_mismatch_names_line(self, tmp_path):
        p = tmp_path / "e.txt"
        p.write_text("2 3\na 1 2 3\nb 1 2 3 4\n")
        with pytest.raises(FormatError, match=r"e\.txt:3: dimension mismatch"):
            import_embedding(p)

    def test_malformed_header(self, tmp_path):
        p = tmp_path / "e.txt"
        p.write_text("two three\n")
        with pytest.raises(FormatError, match="header"):
            import_embedding(p)

    def test_duplicate_token(self, tmp_path):
        p = tmp_path / "e.txt"
        p.write_text("2 1\na 1\na 2\n")
        with pytest.raises(FormatError, match="duplicate"):
            import_embedding(p)
        with pytest.raises(FormatError, match="duplicate"):
            export_embedding(np.ones((2, 1)), ["x", "x"], p)

    def test_row_count(self, tmp_path):
        p = tmp_path / "e.txt"
        p.write_text("3 1\na 1\nb 2\n")
        with pytest.raises(FormatError, match="declares 3 rows"):
            import_embedding(p)
