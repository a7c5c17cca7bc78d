""" Cross-entropy loss family over model logits

The library minimizes loss = -J. For a target weight vector w and logits h,

    loss = -sum_k w_k log softmax(h)_k
    d loss / d h_k = softmax(h)_k - w_k

which is the negative of the ascent direction w - p for J. One-hot,
label-smoothed and stochastic-neighbor targets only differ in w.
"""

from abc import ABCMeta, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from snce.neighbor import NeighborDistribution, neighbor_distribution
from snce.softmax import log_softmax

DISTRIBUTION_TOL = 1e-9


class TargetError(ValueError):
    pass


class Target(metaclass=ABCMeta):
    """
    Base class for supervision targets
    """
    @abstractmethod
    def weights(self, K):
        """
        Materialized weight vector w of length K
        """


@dataclass(frozen=True)
class OneHot(Target):
    index: int

    def weights(self, K):
        _check_index(self.index, K)
        w = np.zeros(K)
        w[self.index] = 1.0
        return w


@dataclass(frozen=True)
class Smoothed(Target):
    index: int
    epsilon: float

    def weights(self, K):
        return label_smoothing_weights(self.index, self.epsilon, K)


@dataclass(frozen=True, eq=False)
class Neighbor(Target):
    dist: NeighborDistribution

    def weights(self, K):
        if self.dist.size != K:
            raise TargetError('Neighbor target covers {} tokens but the logits have {}'.format(self.dist.size, K))
        return self.dist.to_dense()


class TargetKind(Enum):
    ONE_HOT = 'one_hot'
    SMOOTHED = 'smoothed'
    NEIGHBOR = 'neighbor'


@dataclass(frozen=True)
class LossReport:
    loss: float
    grad_logits: np.ndarray


@dataclass(frozen=True)
class SequenceBatch:
    tokens: np.ndarray
    latents: np.ndarray = None
    target_kind: TargetKind = TargetKind.ONE_HOT
    epsilon: float = 0.0

    def __post_init__(self):
        tokens = np.asarray(self.tokens, dtype=np.int64)
        if tokens.ndim != 1 or tokens.size == 0:
            raise TargetError('Sequence tokens must be a nonempty vector')
        object.__setattr__(self, 'tokens', tokens)

        if self.latents is not None:
            latents = np.asarray(self.latents, dtype=np.float64)
            if latents.ndim != 2 or latents.shape[0] != tokens.size:
                raise TargetError('Latents must be an L x D matrix with L={}, got shape {}'.format(
                    tokens.size, latents.shape))
            object.__setattr__(self, 'latents', latents)
        elif self.target_kind is TargetKind.NEIGHBOR:
            raise TargetError('Neighbor targets need latents')

    def targets(self, codebook=None, temp=None):
        """
        One Target per position
        """
        K = codebook.K if codebook is not None else None
        if K is not None and np.any((self.tokens < 0) | (self.tokens >= K)):
            raise TargetError('Token indices must lie in [0, {})'.format(K))

        if self.target_kind is TargetKind.ONE_HOT:
            return [OneHot(int(y)) for y in self.tokens]
        if self.target_kind is TargetKind.SMOOTHED:
            return [Smoothed(int(y), self.epsilon) for y in self.tokens]

        if codebook is None or temp is None:
            raise TargetError('Neighbor targets need a codebook and a temperature')
        return [snce_target(codebook, z, temp) for z in self.latents]


def _check_index(index, K):
    if int(index) != index or not 0 <= index < K:
        raise TargetError('Target token {} is outside [0, {})'.format(index, K))

def _logits(logits):
    h = np.asarray(logits, dtype=np.float64)
    if h.ndim != 1 or h.size == 0:
        raise TargetError('Logits must be a nonempty vector, got shape {}'.format(h.shape))
    if not np.all(np.isfinite(h)):
        raise TargetError('Logits must be finite')

    return h

def as_distribution(q, K=None):
    """
    Dense probability vector from a NeighborDistribution or an array
    """
    w = q.to_dense() if isinstance(q, NeighborDistribution) else np.asarray(q, dtype=np.float64)
    if w.ndim != 1:
        raise TargetError('Target must be a vector, got shape {}'.format(w.shape))
    if K is not None and w.size != K:
        raise TargetError('Target has length {} but the logits have {}'.format(w.size, K))
    if not np.all(np.isfinite(w)) or np.any(w < 0) or abs(math.fsum(w) - 1.0) > DISTRIBUTION_TOL:
        raise TargetError('Target is not a probability distribution')

    return w

def label_smoothing_weights(index, epsilon, K):
    """
    1 - epsilon on the labelled token, epsilon / (K - 1) everywhere else
    """
    _check_index(index, K)
    if not 0 <= epsilon < 1:
        raise TargetError('Label smoothing epsilon must lie in [0, 1), got {}'.format(epsilon))
    if epsilon > 0 and K < 2:
        raise TargetError('Label smoothing needs K >= 2')

    w = np.full(K, epsilon / (K - 1) if K > 1 else 0.0)
    w[index] = 1.0 - epsilon
    return w

def soft_xent(logits, target):
    """
    Cross entropy of softmax(logits) against the target weights, with the
    analytic logit gradient p - w
    """
    h = _logits(logits)
    w = target.weights(h.size) if isinstance(target, Target) else target
    w = as_distribution(w, h.size)

    logp = log_softmax(h)
    support = w > 0
    loss = -float(np.dot(w[support], logp[support]))

    return LossReport(loss=loss, grad_logits=np.exp(logp) - w)

def snce_target(codebook, z, temp):
    return Neighbor(neighbor_distribution(codebook, z, temp))

def _rows(model_logits, L):
    logits = np.asarray(model_logits, dtype=np.float64)
    if logits.ndim != 2 or logits.shape[0] != L:
        raise TargetError('Expected {} rows of logits, got shape {}'.format(L, logits.shape))

    return logits

def per_position(logits, targets, threads=None):
    """
    soft_xent for every row, in row order
    """
    pairs = list(zip(logits, targets))
    if not threads or threads <= 1:
        return [soft_xent(h, t) for h, t in pairs]

    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(lambda p: soft_xent(*p), pairs))

def ar_sequence_loss(model_logits, batch, codebook=None, temp=None, threads=None):
    """
    Mean over positions of the per-position cross entropy. Row i of
    `model_logits` must already be conditioned on tokens before i.
    The gradient is that of the mean, so each row is scaled by 1/L.
    """
    L = batch.tokens.size
    logits = _rows(model_logits, L)
    if codebook is not None and logits.shape[1] != codebook.K:
        raise TargetError('Logits have {} columns but the codebook has K={}'.format(logits.shape[1], codebook.K))

    reports = per_position(logits, batch.targets(codebook, temp), threads)
    losses = np.array([r.loss for r in reports])
    grad = np.stack([r.grad_logits for r in reports]) / L

    return LossReport(loss=float(np.sum(losses) / L), grad_logits=grad)


from .oracles import (ce_reward, kl_decomposition_check, mc_snce_estimate, policy_gradient_check,
                      snce_reward, KLDecomposition, MonteCarloEstimate)
