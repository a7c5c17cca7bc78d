""" Equivalence oracles for the soft cross-entropy objective """

from collections import namedtuple

import numpy as np
from scipy.special import entr

from snce.neighbor import sample_categorical
from snce.process.seeding import generator, SAMPLE
from snce.softmax import log_softmax
from . import _logits, as_distribution, soft_xent

MonteCarloEstimate = namedtuple('MonteCarloEstimate', ['estimate', 'stderr'])
KLDecomposition = namedtuple('KLDecomposition', ['kl', 'xent', 'entropy'])


def mc_snce_estimate(logits, q, n_samples, seed):
    """
    Sample tokens y ~ q and average the one-hot cross entropy -log p(y).
    Its expectation is the soft cross entropy against q.
    """
    h = _logits(logits)
    q = as_distribution(q, h.size)
    if int(n_samples) != n_samples or n_samples < 1:
        raise ValueError('n_samples must be a positive integer, got {}'.format(n_samples))

    n = int(n_samples)
    tokens = sample_categorical(q, n, generator(seed, SAMPLE))
    freq = np.bincount(tokens, minlength=h.size) / n

    losses = -log_softmax(h)
    estimate = float(np.dot(freq, losses))
    if n == 1:
        return MonteCarloEstimate(estimate, 0.0)

    variance = float(np.dot(freq, (losses - estimate) ** 2)) * n / (n - 1)
    return MonteCarloEstimate(estimate, float(np.sqrt(variance / n)))

def kl_decomposition_check(logits, q):
    """
    KL(q || softmax(h)), H(q, softmax(h)) and H(q), each summed directly
    """
    h = _logits(logits)
    q = as_distribution(q, h.size)
    logp = log_softmax(h)
    support = q > 0

    kl = float(np.sum(q[support] * (np.log(q[support]) - logp[support])))
    xent = -float(np.dot(q[support], logp[support]))
    return KLDecomposition(kl=kl, xent=xent, entropy=float(np.sum(entr(q))))

def ce_reward(token, target_token):
    """
    Reward of the one-hot objective: 1 for the quantized token, else 0
    """
    return 1.0 if int(token) == int(target_token) else 0.0

def snce_reward(token, q, p):
    """
    Reward of the neighbor objective, q_a / p_a
    """
    return float(q[token] / p[token])

def policy_gradient_check(logits, q):
    """
    Max deviation between the on-policy gradient E_{a~p}[r(a) grad log p(a)]
    with r = q/p, and the ascent direction -grad of the soft cross entropy.
    Each term p_a * r(a) is summed as q_a, so tokens whose probability
    underflows to zero still contribute.
    """
    h = _logits(logits)
    q = as_distribution(q, h.size)
    p = np.exp(log_softmax(h))
    K = h.size

    policy = np.zeros(K)
    for a in np.flatnonzero(q > 0):
        score = -p.copy()
        score[a] += 1.0
        policy += q[a] * score

    return float(np.max(np.abs(policy - (-soft_xent(h, q).grad_logits))))
