""" Toy training loop, run reports and the MLP gradient check """

from dataclasses import dataclass
import logging

import numpy as np

from snce.codebook import grid_codebook, quantize
from snce.config import Objective, to_dict
from snce.losses import OneHot, Smoothed, soft_xent
from snce.neighbor import neighbor_targets, sample_neighbor_tokens
from snce.process import log_method
from snce.process.seeding import generator, BATCH, VERIFY
from snce.softmax import softmax
from .mixture import discretized_truth, grid_quantize_points, sample_mixture
from .mlp import MlpModel, make_optimizer

SUPPORT_THRESHOLD = 1e-4
PROBABILITY_FLOOR = 1e-12


class DivergenceError(ArithmeticError):
    def __init__(self, step, loss):
        self.step = step
        self.loss = loss
        super(DivergenceError, self).__init__('Training diverged at step {} (loss {})'.format(step, loss))


@dataclass
class ToyRunReport:
    config: object
    learned: np.ndarray
    metrics: dict
    loss_curve: list
    training_tokens: np.ndarray
    learned_point: np.ndarray = None

    @property
    def label(self):
        return self.config.label

    @property
    def seed(self):
        return self.config.seed

    def to_dict(self):
        return {
            'label': self.label,
            'seed': self.seed,
            'config': to_dict(self.config),
            'metrics': self.metrics,
            'learned_point': None if self.learned_point is None else self.learned_point.tolist(),
            'loss_curve': [[step, loss] for step, loss in self.loss_curve],
        }


def toy_metrics(learned, truth, training_tokens, threshold=SUPPORT_THRESHOLD, floor=PROBABILITY_FLOOR):
    """
    KL(truth || learned) with learned floored at `floor`, total variation,
    the count of tokens above `threshold`, and the learned mass sitting on
    tokens seen in training
    """
    learned = np.asarray(learned, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    support = truth > 0

    return {
        'kl_to_truth': float(np.sum(truth[support] * (np.log(truth[support]) - np.log(np.maximum(learned[support], floor))))),
        'tv_to_truth': float(0.5 * np.sum(np.abs(truth - learned))),
        'support_size_at_threshold': int(np.count_nonzero(learned > threshold)),
        'empirical_fit_mass': float(np.sum(learned[np.unique(training_tokens)])),
    }


class ToyTrainer(object):
    """
    Trains the constant-input MLP on one toy configuration. The input never
    changes, so every sample sees the same output and a minibatch loss only
    depends on the mean of its targets.
    """
    def __init__(self, config, data=None):
        self.logger = logging.getLogger('snce.toy.ToyTrainer')
        self.config = config

        grid = config.grid
        self.codebook = grid_codebook(grid.lo, grid.hi, grid.n_per_axis)
        self.data = sample_mixture(config.mixture, config.n_samples, config.seed) if data is None \
            else np.asarray(data, dtype=np.float64)
        self.tokens = grid_quantize_points(grid, self.data)
        self.targets = self._targets()
        self.draws = self._draws() if self.objective is Objective.STOCHASTIC_QUANTIZATION else None

    @property
    def objective(self):
        return self.config.objective

    @property
    def out_dim(self):
        return self.codebook.K if self.objective.categorical else 2

    def _targets(self):
        """
        Per-sample supervision, computed once: dense K-vectors for the
        categorical objectives, raw points for L2
        """
        K = self.codebook.K
        if self.objective is Objective.CE:
            return np.stack([OneHot(int(y)).weights(K) for y in self.tokens])
        if self.objective is Objective.LABEL_SMOOTHING:
            return np.stack([Smoothed(int(y), self.config.epsilon).weights(K) for y in self.tokens])
        if self.objective in (Objective.SNCE, Objective.STOCHASTIC_QUANTIZATION):
            temp = self.config.temperature.temperature()
            return np.stack([q.probs for q in neighbor_targets(self.codebook, self.data, temp)])

        return self.data

    def _draws(self):
        """
        One token per sample and training step, drawn from q(z) on a SAMPLE
        stream keyed by the sample index
        """
        temp = self.config.temperature.temperature()
        steps, seed = self.config.steps, self.config.seed
        return np.stack([sample_neighbor_tokens(self.codebook, z, temp, steps, seed, stream=(i,))
                         for i, z in enumerate(self.data)])

    def batch_target(self, batch, step=None):
        """
        Mean categorical target of a minibatch. Stochastic quantization
        replaces q with a one-hot on the token drawn for `step`; without a
        step it falls back to q, the expectation of those draws.
        """
        if self.draws is None or step is None:
            return self.targets[batch].mean(axis=0)

        counts = np.bincount(self.draws[batch, step - 1], minlength=self.codebook.K)
        return counts / len(batch)

    def model(self):
        return MlpModel(self.config.mlp, self.out_dim, self.config.seed)

    def _loss_grad_out(self, out, batch, step=None):
        if self.objective.categorical:
            report = soft_xent(out, self.batch_target(batch, step))
            return report.loss, report.grad_logits

        points = self.targets[batch]
        loss = float(np.mean(np.sum((out - points) ** 2, axis=1)))
        return loss, 2.0 * (out - points.mean(axis=0))

    def loss_and_grad(self, model, batch, step=None):
        """
        (loss, parameter gradients); (nan, None) once the output is non-finite
        """
        out, cache = model.forward()
        if not np.all(np.isfinite(out)):
            return float('nan'), None

        loss, grad_out = self._loss_grad_out(out, batch, step)
        return loss, model.backward(grad_out, cache)

    def loss_at(self, model, batch):
        """
        Loss plus the activation pattern it was computed under
        """
        out, cache = model.forward()
        return self._loss_grad_out(out, batch)[0], model.pattern(cache)

    def batches(self):
        n = len(self.data)
        size = self.config.batch_size
        if size is None or size == n:
            everything = np.arange(n)
            while True:
                yield everything

        rng = generator(self.config.seed, BATCH)
        while True:
            yield np.sort(rng.choice(n, size=size, replace=False))

    @log_method('Training toy model', 'Training complete')
    def train(self):
        config = self.config
        self.logger.info('Objective {} on {} samples, K={}, {} steps'.format(
            config.label, len(self.data), self.codebook.K, config.steps))

        model = self.model()
        optimizer = make_optimizer(model.params, config.optimizer)
        batches = self.batches()

        curve = []
        for step in range(1, config.steps + 1):
            loss, grads = self.loss_and_grad(model, next(batches), step)
            if grads is None or not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads):
                raise DivergenceError(step, loss)

            curve.append((step, loss))
            optimizer.step(model.params, grads)
            if step % 500 == 0:
                self.logger.debug('step {} loss {:.6f}'.format(step, loss))

        return self.report(model, curve)

    def report(self, model, curve):
        out, _ = model.forward()
        if not np.all(np.isfinite(out)):
            raise DivergenceError(len(curve), float('nan'))

        point = None
        if self.objective.categorical:
            learned = softmax(out)
        else:
            point = out.copy()
            learned = np.zeros(self.codebook.K)
            learned[quantize(self.codebook, point)] = 1.0

        truth = discretized_truth(self.config.mixture, self.config.grid)
        metrics = toy_metrics(learned, truth, self.tokens)
        if point is not None:
            metrics['distance_to_data_mean'] = float(np.linalg.norm(point - self.data.mean(axis=0)))

        return ToyRunReport(config=self.config, learned=learned, metrics=metrics, loss_curve=curve,
                            training_tokens=self.tokens, learned_point=point)


def train_toy(config):
    return ToyTrainer(config).train()

def gradient_check_mlp(config, n_params_probed=50, step=1e-4):
    """
    Max relative deviation between backprop and central differences on the
    full batch at initialization. Probes are drawn among parameters whose
    gradient is at least 1e-3 of the largest one; probes whose perturbation
    flips a ReLU are redrawn, since the loss has a kink there.
    """
    logger = logging.getLogger('snce.toy.gradient_check')
    trainer = ToyTrainer(config)
    model = trainer.model()
    batch = np.arange(len(trainer.data))

    _, grads = trainer.loss_and_grad(model, batch)
    analytic = np.concatenate([g.ravel() for g in grads])
    scale = np.max(np.abs(analytic))
    if scale == 0:
        return 0.0

    _, reference_pattern = trainer.loss_at(model, batch)
    candidates = np.flatnonzero(np.abs(analytic) >= 1e-3 * scale)
    order = generator(config.seed, VERIFY, 1).permutation(candidates)

    worst, probed, skipped = 0.0, 0, 0
    for index in order:
        if probed >= n_params_probed:
            break

        which, pos = model.locate(int(index))
        param = model.params[which]
        original = param.flat[pos]

        param.flat[pos] = original + step
        plus, plus_pattern = trainer.loss_at(model, batch)
        param.flat[pos] = original - step
        minus, minus_pattern = trainer.loss_at(model, batch)
        param.flat[pos] = original

        if plus_pattern != reference_pattern or minus_pattern != reference_pattern:
            skipped += 1
            continue

        numeric = (plus - minus) / (2.0 * step)
        a = analytic[index]
        worst = max(worst, abs(a - numeric) / max(abs(a), abs(numeric)))
        probed += 1

    logger.info('Probed {} of {} candidate parameters ({} below 1e-3 of the largest gradient excluded, '
                '{} skipped at ReLU kinks), max relative deviation {:.3e}'.format(
                    probed, len(candidates), analytic.size - len(candidates), skipped, worst))
    return worst
