import numpy as np
import pytest

from snce.losses import OneHot, SequenceBatch, TargetError, ar_sequence_loss, snce_target, soft_xent
from snce.masked import MaskedSequence, elbo_expectation_check, elbo_snce_loss, forward_mask
from snce.neighbor import log_neighbor_distribution


class TestForwardMask:
    def test_everything_masked_at_t_one(self):
        seq = forward_mask(np.arange(50), 1.0, seed=0)
        assert seq.masked_count == 50
        assert not seq.visible.any()

    def test_nearly_nothing_masked_at_tiny_t(self):
        assert forward_mask(np.arange(100), 1e-12, seed=0).masked_count == 0

    def test_masking_rate(self):
        L, t = 10 ** 6, 0.3
        count = forward_mask(np.zeros(L, dtype=int), t, seed=4).masked_count
        assert abs(count / L - t) <= 3 * np.sqrt(t * (1 - t) / L)

    def test_seeded(self):
        a = forward_mask(np.arange(200), 0.5, seed=7)
        b = forward_mask(np.arange(200), 0.5, seed=7)
        assert np.array_equal(a.visible, b.visible)
        assert np.array_equal(a.clean, np.arange(200))

    @pytest.mark.parametrize('t', [0.0, -0.5, 1.5, float('nan')])
    def test_invalid_time(self, t):
        with pytest.raises(ValueError):
            forward_mask(np.arange(5), t, seed=0)

    def test_empty_sequence(self):
        with pytest.raises(ValueError):
            forward_mask(np.array([], dtype=int), 0.5, seed=0)


class TestElboLoss:
    def test_no_masked_positions(self, rng):
        seq = MaskedSequence(clean=[1, 2, 3], visible=[True, True, True], t=0.5)
        report = elbo_snce_loss(rng.normal(size=(3, 4)), seq, [OneHot(1), OneHot(2), OneHot(3)])
        assert report.loss == 0.0
        assert report.masked_count == 0
        assert not report.grad.any()

    def test_all_masked_at_t_one_is_the_sequence_loss(self, rng):
        clean = [0, 3, 1, 2]
        logits = rng.normal(size=(4, 5))
        seq = MaskedSequence(clean=clean, visible=[False] * 4, t=1.0)
        report = elbo_snce_loss(logits, seq, [OneHot(y) for y in clean])
        ar = ar_sequence_loss(logits, SequenceBatch(clean))

        assert report.loss == pytest.approx(ar.loss, abs=1e-12)
        np.testing.assert_allclose(report.grad, ar.grad_logits, atol=1e-15)

    def test_neighbor_targets_at_half_time(self, grid, unit, rng):
        clean = [10, 500, 1200, 2400]
        targets = [snce_target(grid, grid.vectors[y], unit) for y in clean]
        logits = rng.normal(size=(4, grid.K))
        seq = MaskedSequence(clean=clean, visible=[True, False, True, False], t=0.5)
        report = elbo_snce_loss(logits, seq, targets)

        first, third = soft_xent(logits[1], targets[1]), soft_xent(logits[3], targets[3])
        assert report.loss == pytest.approx((first.loss + third.loss) / (0.5 * 4), abs=1e-12)
        np.testing.assert_allclose(report.grad[1], first.grad_logits / 2.0, atol=1e-15)
        assert not report.grad[[0, 2]].any()
        assert report.masked_count == 2

    def test_shape_mismatch(self, rng):
        seq = MaskedSequence(clean=[1, 2], visible=[False, False], t=0.5)
        with pytest.raises(TargetError):
            elbo_snce_loss(rng.normal(size=(3, 4)), seq, [OneHot(1), OneHot(2)])

    def test_visibility_shape(self):
        with pytest.raises(ValueError):
            MaskedSequence(clean=[1, 2], visible=[True], t=0.5)


class TestElboExpectation:
    def test_single_position(self, grid, unit, rng):
        logits = rng.normal(size=(1, grid.K))
        result = elbo_expectation_check([100], logits, grid, unit, 10, seed=0)
        assert result.analytic == pytest.approx(soft_xent(logits[0], snce_target(grid, grid.vectors[100], unit)).loss,
                                                abs=1e-12)

    def test_model_equal_to_targets_gives_entropy(self, grid, unit):
        clean = [3, 700, 1900]
        logits = np.stack([log_neighbor_distribution(grid, grid.vectors[y], unit) for y in clean])
        result = elbo_expectation_check(clean, logits, grid, unit, 10, seed=0)

        entropies = []
        for row in logits:
            q = np.exp(row)
            entropies.append(-np.sum(q[q > 0] * row[q > 0]))
        assert result.analytic == pytest.approx(np.mean(entropies), abs=1e-10)

    def test_monte_carlo_mean_is_unbiased(self, grid, unit, rng):
        clean = rng.integers(grid.K, size=8)
        logits = rng.normal(size=(8, grid.K))
        result = elbo_expectation_check(clean, logits, grid, unit, 20000, seed=0)
        assert abs(result.mc_mean - result.analytic) <= 3 * result.stderr

    def test_threads_do_not_change_results(self, grid, unit, rng):
        clean = rng.integers(grid.K, size=4)
        logits = rng.normal(size=(4, grid.K))
        serial = elbo_expectation_check(clean, logits, grid, unit, 50, seed=2)
        threaded = elbo_expectation_check(clean, logits, grid, unit, 50, seed=2, threads=4)
        assert serial == threaded

    def test_explicit_latents(self, grid, unit, rng):
        clean = [0, 1]
        latents = np.array([[0.3, 0.3], [-1.0, 2.0]])
        logits = rng.normal(size=(2, grid.K))
        result = elbo_expectation_check(clean, logits, grid, unit, 5, seed=0, latents=latents)
        expected = np.mean([soft_xent(h, snce_target(grid, z, unit)).loss for h, z in zip(logits, latents)])
        assert result.analytic == pytest.approx(expected, abs=1e-12)

    def test_token_out_of_range(self, grid, unit, rng):
        with pytest.raises(TargetError):
            elbo_expectation_check([grid.K], rng.normal(size=(1, grid.K)), grid, unit, 5, seed=0)
