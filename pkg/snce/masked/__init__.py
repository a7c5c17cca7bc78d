""" Absorbing-state masked diffusion: forward masking and the weighted ELBO loss

At time t every position is replaced by the mask symbol independently with
probability t. The training loss scores masked positions only, weights them
by 1/t and divides by the sequence length:

    loss = 1/(t L) * sum_i I{position i masked} * xent(target_i, p_theta(. | y^t))
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging
import math

import numpy as np

from snce.losses import TargetError, snce_target, soft_xent
from snce.process.seeding import generator, MASK, TRIAL

logger = logging.getLogger('snce.masked')

# lower end of t in the Monte Carlo check, bounds the 1/t variance
T_FLOOR = 1e-3


@dataclass(frozen=True)
class MaskedSequence:
    clean: np.ndarray
    visible: np.ndarray
    t: float

    def __post_init__(self):
        clean = np.asarray(self.clean, dtype=np.int64)
        visible = np.asarray(self.visible, dtype=bool)
        if clean.ndim != 1 or clean.size == 0:
            raise ValueError('Clean sequence must be a nonempty vector')
        if visible.shape != clean.shape:
            raise ValueError('Visibility mask has shape {} but the sequence has length {}'.format(
                visible.shape, clean.size))
        _check_time(self.t)

        object.__setattr__(self, 'clean', clean)
        object.__setattr__(self, 'visible', visible)

    @property
    def masked(self):
        return ~self.visible

    @property
    def masked_count(self):
        return int(np.count_nonzero(~self.visible))


@dataclass(frozen=True)
class ElboReport:
    loss: float
    grad: np.ndarray
    masked_count: int


@dataclass(frozen=True)
class ElboExpectation:
    mc_mean: float
    stderr: float
    analytic: float


def _check_time(t):
    if not (math.isfinite(t) and 0 < t <= 1):
        raise ValueError('Diffusion time t must lie in (0, 1], got {}'.format(t))

def _mask_at(clean, t, rng):
    return MaskedSequence(clean=clean, visible=~(rng.random(len(clean)) < t), t=t)

def forward_mask(clean, t, seed):
    """
    Mask each position independently with probability t
    """
    _check_time(t)
    clean = np.asarray(clean, dtype=np.int64)
    if clean.ndim != 1 or clean.size == 0:
        raise ValueError('Clean sequence must be a nonempty vector')

    return _mask_at(clean, t, generator(seed, MASK))

def elbo_snce_loss(model_logits, seq, targets):
    """
    1/t weighted cross entropy over masked positions, per-token normalized.
    Rows at visible positions get zero gradient.
    """
    L = seq.clean.size
    logits = np.asarray(model_logits, dtype=np.float64)
    if logits.ndim != 2 or logits.shape[0] != L:
        raise TargetError('Expected {} rows of logits, got shape {}'.format(L, logits.shape))
    if len(targets) != L:
        raise TargetError('Expected {} targets, got {}'.format(L, len(targets)))

    scale = 1.0 / (seq.t * L)
    grad = np.zeros_like(logits)
    losses = []
    for i in np.flatnonzero(seq.masked):
        report = soft_xent(logits[i], targets[i])
        losses.append(report.loss)
        grad[i] = scale * report.grad_logits

    return ElboReport(loss=float(np.sum(losses)) * scale if losses else 0.0, grad=grad, masked_count=seq.masked_count)

def _trial(clean, logits, targets, seed, trial):
    rng = generator(seed, TRIAL, trial)
    # U(T_FLOOR, 1]
    t = 1.0 - rng.uniform(0.0, 1.0 - T_FLOOR)
    return elbo_snce_loss(logits, _mask_at(clean, t, rng), targets).loss

def elbo_expectation_check(clean, logits, codebook, temp, n_trials, seed, latents=None, threads=None):
    """
    Monte Carlo mean of the masked loss over t ~ U(T_FLOOR, 1] and Bernoulli(t)
    masks, against the unmasked mean position loss it estimates. Neighbor
    targets come from `latents`, or from the code vectors of `clean` when no
    latents are given.
    """
    clean = np.asarray(clean, dtype=np.int64)
    if clean.ndim != 1 or clean.size == 0:
        raise ValueError('Clean sequence must be a nonempty vector')
    if int(n_trials) != n_trials or n_trials < 1:
        raise ValueError('n_trials must be a positive integer, got {}'.format(n_trials))
    if np.any((clean < 0) | (clean >= codebook.K)):
        raise TargetError('Token indices must lie in [0, {})'.format(codebook.K))

    latents = codebook.vectors[clean] if latents is None else np.asarray(latents, dtype=np.float64)
    targets = [snce_target(codebook, z, temp) for z in latents]
    analytic = float(np.mean([soft_xent(h, q).loss for h, q in zip(np.asarray(logits, dtype=np.float64), targets)]))

    run = lambda trial: _trial(clean, logits, targets, seed, trial)
    if not threads or threads <= 1:
        samples = np.array([run(i) for i in range(int(n_trials))])
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            samples = np.array(list(pool.map(run, range(int(n_trials)))))

    stderr = float(np.std(samples, ddof=1) / np.sqrt(samples.size)) if samples.size > 1 else 0.0
    logger.debug('ELBO check over {} trials: mc={} analytic={}'.format(samples.size, samples.mean(), analytic))

    return ElboExpectation(mc_mean=float(np.mean(samples)), stderr=stderr, analytic=analytic)
