import numpy as np
import pytest

from snce.codebook import (Codebook, CodebookError, Metric, distances, distances_batch, grid_axis, grid_codebook,
                           quantize, quantize_batch, random_codebook)


class TestMetric:
    def test_parse_aliases(self):
        assert Metric.parse('l2') is Metric.L2_SQUARED
        assert Metric.parse('dot') is Metric.NEG_DOT
        assert Metric.parse('COSINE') is Metric.NEG_COSINE
        assert Metric.parse('neg_dot') is Metric.NEG_DOT

    def test_parse_unknown(self):
        with pytest.raises(CodebookError, match='Unknown metric'):
            Metric.parse('manhattan')

    def test_pair_values(self):
        assert Metric.L2_SQUARED([0, 0], [1, 1]) == 2.0
        assert Metric.NEG_DOT([1, 2], [3, 4]) == -11.0
        assert Metric.NEG_COSINE([1, 0], [2, 0]) == pytest.approx(-1.0)


class TestCodebook:
    def test_vectors_are_read_only_float32(self, three_codes):
        assert three_codes.vectors.dtype == np.float32
        assert (three_codes.K, three_codes.D) == (3, 2)
        with pytest.raises(ValueError):
            three_codes.vectors[0, 0] = 5.0

    @pytest.mark.parametrize('vectors', [np.zeros(3), np.zeros((0, 2)), [[0.0, np.nan]], [[np.inf, 0.0]]])
    def test_rejects_bad_vectors(self, vectors):
        with pytest.raises(CodebookError):
            Codebook(vectors)

    def test_rejects_zero_vector_under_cosine(self):
        with pytest.raises(CodebookError, match='Zero-norm'):
            Codebook([[0.0, 0.0], [1.0, 0.0]], Metric.NEG_COSINE)

    def test_equality(self, three_codes):
        same = Codebook(three_codes.vectors.copy(), Metric.L2_SQUARED)
        assert same == three_codes
        assert Codebook(three_codes.vectors, Metric.NEG_DOT) != three_codes


class TestDistances:
    def test_l2(self):
        codebook = Codebook([[0.0, 0.0], [1.0, 1.0]])
        assert distances(codebook, [1.0, 0.0]).tolist() == [1.0, 1.0]
        assert distances(codebook, [0.0, 0.0]).tolist() == [0.0, 2.0]

    def test_neg_dot(self):
        codebook = Codebook([[1.0, 0.0], [0.0, 1.0]], Metric.NEG_DOT)
        assert distances(codebook, [2.0, 3.0]).tolist() == [-2.0, -3.0]

    def test_neg_cosine(self):
        codebook = Codebook([[1.0, 0.0], [0.0, 1.0]], Metric.NEG_COSINE)
        np.testing.assert_allclose(distances(codebook, [1.0, 1.0]), [-1 / np.sqrt(2)] * 2, rtol=1e-12)

    def test_zero_latent_under_cosine(self):
        codebook = Codebook([[1.0, 0.0], [0.0, 1.0]], Metric.NEG_COSINE)
        with pytest.raises(CodebookError):
            distances(codebook, [0.0, 0.0])

    def test_dimension_mismatch(self, three_codes):
        with pytest.raises(CodebookError, match='D=2'):
            distances(three_codes, [0.0, 0.0, 0.0])

    def test_non_finite_latent(self, three_codes):
        with pytest.raises(CodebookError):
            distances(three_codes, [np.nan, 0.0])

    def test_batch_matches_rows(self, grid, rng):
        latents = rng.uniform(-5, 5, size=(7, 2))
        batch = distances_batch(grid, latents)
        assert batch.shape == (7, grid.K)
        for row, z in zip(batch, latents):
            np.testing.assert_array_equal(row, distances(grid, z))


class TestQuantize:
    def test_exact_tie_goes_to_lowest_index(self):
        codebook = Codebook([[-1.0, 0.0], [1.0, 0.0]])
        assert quantize(codebook, [0.0, 0.0]) == 0

    def test_code_quantizes_to_itself(self, grid):
        for k in (0, 17, 1234, grid.K - 1):
            assert quantize(grid, grid.vectors[k]) == k

    def test_appending_a_farther_code_changes_nothing(self, three_codes):
        z = [0.3, 0.2]
        bigger = Codebook(np.vstack([three_codes.vectors, [[9.0, 9.0]]]))
        assert quantize(bigger, z) == quantize(three_codes, z)

    def test_grid_matches_brute_force(self, grid):
        z = np.array([-2.03, 0.04])
        brute = int(np.argmin(((grid.vectors.astype(np.float64) - z) ** 2).sum(axis=1)))
        assert quantize(grid, z) == brute

    def test_batch(self, grid, rng):
        latents = rng.uniform(-5, 5, size=(20, 2))
        assert quantize_batch(grid, latents).tolist() == [quantize(grid, z) for z in latents]


class TestGrid:
    def test_default_grid_layout(self, grid):
        assert grid.K == 2500
        assert grid.vectors[0].tolist() == [-5.0, -5.0]
        assert grid.vectors[-1].tolist() == [5.0, 5.0]
        # x varies fastest
        assert grid.vectors[1, 0] - grid.vectors[0, 0] == pytest.approx(10.0 / 49, abs=1e-6)
        assert grid.vectors[1, 1] == grid.vectors[0, 1]
        assert grid.vectors[50].tolist() == pytest.approx([-5.0, -5.0 + 10.0 / 49], abs=1e-6)

    def test_smallest_grid(self):
        assert grid_codebook(0.0, 1.0, 2).vectors.tolist() == [[0, 0], [1, 0], [0, 1], [1, 1]]

    @pytest.mark.parametrize('lo, hi, n', [(0.0, 1.0, 1), (1.0, 1.0, 5), (2.0, 1.0, 5), (0.0, np.inf, 5), (0.0, 1.0, 2.5)])
    def test_invalid_grid(self, lo, hi, n):
        with pytest.raises(CodebookError):
            grid_axis(lo, hi, n)


def test_random_codebook_is_seeded():
    a = random_codebook(64, 8, Metric.NEG_DOT, seed=3)
    assert a == random_codebook(64, 8, Metric.NEG_DOT, seed=3)
    assert a != random_codebook(64, 8, Metric.NEG_DOT, seed=4)
    assert a.metric is Metric.NEG_DOT
