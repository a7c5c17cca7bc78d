""" Stochastic-neighbor target distributions over a codebook

q_k(z) = exp(-d(z, v_k) / 2 tau^2) / sum_j exp(-d(z, v_j) / 2 tau^2)

The temperature is parameterized by tau, but all arithmetic divides by the
single denominator `two_tau_sq`. A Temperature may also be built from that
denominator directly, so tau=0.71 (2 tau^2 = 1.0082) and 2 tau^2 = 1.00 are
both expressible.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy.stats import entropy

from snce.codebook import distances
from snce.process.seeding import generator, SAMPLE
from snce.softmax import log_softmax, naive_softmax

logger = logging.getLogger('snce.neighbor')

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class Temperature:
    tau: float
    two_tau_sq: float = None

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError('tau must be a positive finite number, got {}'.format(self.tau))

        if self.two_tau_sq is None:
            object.__setattr__(self, 'two_tau_sq', 2.0 * self.tau * self.tau)
        elif not (math.isfinite(self.two_tau_sq) and self.two_tau_sq > 0):
            raise ValueError('two_tau_sq must be a positive finite number, got {}'.format(self.two_tau_sq))

    @classmethod
    def from_two_tau_sq(cls, two_tau_sq):
        """
        Temperature for a given denominator 2 tau^2. The denominator is stored
        as given and is the authoritative value; tau = sqrt(two_tau_sq / 2) is
        derived and 2 * tau**2 may differ from it in the last ulp.
        """
        two_tau_sq = float(two_tau_sq)
        if not (math.isfinite(two_tau_sq) and two_tau_sq > 0):
            raise ValueError('two_tau_sq must be a positive finite number, got {}'.format(two_tau_sq))

        return cls(tau=math.sqrt(two_tau_sq / 2.0), two_tau_sq=two_tau_sq)


class NeighborDistribution(object):
    """
    Probability vector over K tokens. Dense when `indices` is None,
    otherwise sparse with strictly increasing token indices.
    """
    def __init__(self, probs, size=None, indices=None):
        probs = np.asarray(probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError('Neighbor probabilities must be a nonempty vector')

        if indices is None:
            size = probs.size if size is None else int(size)
            if size != probs.size:
                raise ValueError('Dense distribution of length {} declared with size {}'.format(probs.size, size))
        else:
            indices = np.asarray(indices, dtype=np.int64)
            if indices.shape != probs.shape:
                raise ValueError('Sparse distribution needs one index per probability')
            if size is None:
                raise ValueError('Sparse distribution needs the vocabulary size')
            if np.any(np.diff(indices) <= 0):
                raise ValueError('Sparse indices must be strictly increasing')
            if indices[0] < 0 or indices[-1] >= size:
                raise ValueError('Sparse indices must lie in [0, {})'.format(size))

        if not np.all(np.isfinite(probs)) or np.any(probs < 0) or np.any(probs > 1):
            raise ValueError('Neighbor probabilities must lie in [0, 1]')
        if abs(math.fsum(probs) - 1.0) > NORMALIZATION_TOL:
            raise ValueError('Neighbor probabilities sum to {}, not 1'.format(math.fsum(probs)))

        self.probs = probs
        self.indices = indices
        self.size = int(size)

    @property
    def is_sparse(self):
        return self.indices is not None

    def to_dense(self):
        if not self.is_sparse:
            return self.probs

        dense = np.zeros(self.size)
        dense[self.indices] = self.probs
        return dense

    def items(self):
        indices = self.indices if self.is_sparse else np.arange(self.size)
        return list(zip(indices.tolist(), self.probs.tolist()))

    def argmax(self):
        i = int(np.argmax(self.probs))
        return int(self.indices[i]) if self.is_sparse else i

    def __repr__(self):
        return 'NeighborDistribution(size={}, {})'.format(
            self.size, 'sparse M={}'.format(len(self.probs)) if self.is_sparse else 'dense')


@dataclass(frozen=True)
class BandwidthResult:
    sigma: float
    achieved_perplexity: float
    iterations: int


def neighbor_logits(d, temp):
    logits = -np.asarray(d, dtype=np.float64) / temp.two_tau_sq
    if not np.all(np.isfinite(logits)):
        raise ValueError('Non-finite neighbor logit; distances or temperature out of range')

    return logits

def log_neighbor_from_distances(d, temp):
    return log_softmax(neighbor_logits(d, temp))

def log_neighbor_distribution(codebook, z, temp):
    """
    log q(z), length K, without exponentiating unshifted values
    """
    return log_neighbor_from_distances(distances(codebook, z), temp)

def neighbor_distribution(codebook, z, temp):
    return NeighborDistribution(np.exp(log_neighbor_distribution(codebook, z, temp)))

def reference_distribution(d, temp):
    """
    Direct two-pass evaluation of q, the oracle for the chunked path
    """
    return naive_softmax(-np.asarray(d, dtype=np.float64) / temp.two_tau_sq)

def nearest(d, M):
    """
    Indices of the M smallest distances, ties to the lowest index, ascending
    """
    d = np.asarray(d)
    K = d.size
    if int(M) != M or not 1 <= M <= K:
        raise ValueError('M must lie in [1, {}], got {}'.format(K, M))
    if M == K:
        return np.arange(K)

    kth = np.partition(d, M - 1)[M - 1]
    below = np.flatnonzero(d < kth)
    ties = np.flatnonzero(d == kth)[:M - below.size]

    return np.sort(np.concatenate([below, ties]))

def topk_from_distances(d, temp, M):
    keep = nearest(d, M)
    probs = np.exp(log_softmax(neighbor_logits(np.asarray(d)[keep], temp)))

    return NeighborDistribution(probs, size=len(d), indices=keep)

def neighbor_distribution_topk(codebook, z, temp, M):
    """
    Neighbor weights of the M nearest codes, renormalized over the survivors
    """
    return topk_from_distances(distances(codebook, z), temp, M)

def neighbor_targets(codebook, latents, temp, topk=None, threads=None):
    """
    One distribution per latent row, in input order
    """
    if topk is None:
        fn = lambda z: neighbor_distribution(codebook, z, temp)
    else:
        fn = lambda z: neighbor_distribution_topk(codebook, z, temp, topk)

    latents = np.asarray(latents, dtype=np.float64)
    if not threads or threads <= 1:
        return [fn(z) for z in latents]

    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(fn, latents))

def sample_categorical(probs, n, rng):
    """
    Inverse-CDF draws; zero-probability tokens are never returned
    """
    probs = np.asarray(probs, dtype=np.float64)
    cdf = np.cumsum(probs)
    u = rng.random(int(n)) * cdf[-1]

    return np.minimum(np.searchsorted(cdf, u, side='right'), probs.size - 1)

def sample_neighbor_tokens(codebook, z, temp, n, seed, topk=None, stream=()):
    """
    Stochastic quantization: n tokens drawn from q(z), or from its top-M
    truncation. `stream` extends the SAMPLE key so several latents can draw
    under one seed without sharing uniforms.
    """
    if n < 1:
        raise ValueError('n must be >= 1, got {}'.format(n))

    rng = generator(seed, SAMPLE, *stream)
    if topk is None:
        return sample_categorical(neighbor_distribution(codebook, z, temp).probs, n, rng)

    q = neighbor_distribution_topk(codebook, z, temp, topk)
    return q.indices[sample_categorical(q.probs, n, rng)]

def perplexity(probs):
    """
    2 ** H(p) with H in bits
    """
    return float(2.0 ** entropy(np.asarray(probs, dtype=np.float64), base=2))

def calibrate_bandwidth(distances, target_perplexity, tol=1e-5, max_iter=100):
    """
    Binary search for the bandwidth sigma of a pairwise neighbor
    distribution p_j ~ exp(-d_j / 2 sigma^2) whose perplexity matches
    `target_perplexity`. `distances` excludes the self term.
    """
    d = np.asarray(distances, dtype=np.float64)
    if d.ndim != 1 or d.size < 2:
        raise ValueError('Bandwidth calibration needs at least 2 distances')
    if not np.all(np.isfinite(d)):
        raise ValueError('Distances must be finite')
    if not 1 < target_perplexity <= d.size:
        raise ValueError('Target perplexity {} is unreachable with {} neighbors; it must lie in (1, {}]'.format(
            target_perplexity, d.size, d.size))
    if max_iter < 1:
        raise ValueError('max_iter must be >= 1')

    d = d - d.min()

    # beta = 1 / (2 sigma^2); perplexity falls as beta grows
    beta, lo, hi = 1.0, 0.0, np.inf
    achieved, iterations = None, 0
    while iterations < max_iter:
        evaluated = beta
        achieved = perplexity(np.exp(log_softmax(-d * beta)))
        iterations += 1

        if abs(achieved - target_perplexity) <= tol:
            break

        if achieved > target_perplexity:
            lo = beta
            beta = beta * 2.0 if hi == np.inf else (beta + hi) / 2.0
        else:
            hi = beta
            beta = (beta + lo) / 2.0

    logger.debug('Bandwidth search stopped after {} iterations at perplexity {}'.format(iterations, achieved))
    return BandwidthResult(sigma=math.sqrt(1.0 / (2.0 * evaluated)), achieved_perplexity=achieved, iterations=iterations)
