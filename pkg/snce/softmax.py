""" Max-shifted softmax over large vocabularies """

import numpy as np
from scipy.special import logsumexp as _logsumexp

CHUNK = 65536


def logsumexp(x, chunk=CHUNK):
    """
    log(sum(exp(x))) for a 1-D vector, reduced chunk by chunk so no
    intermediate holds more than `chunk` exponentials
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError('logsumexp needs a nonempty vector, got shape {}'.format(x.shape))

    if x.size <= chunk:
        return float(_logsumexp(x))

    partial = np.array([_logsumexp(x[i:i + chunk]) for i in range(0, x.size, chunk)])
    return float(_logsumexp(partial))

def log_softmax(x, chunk=CHUNK):
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError('Logits must be finite')

    return x - logsumexp(x, chunk)

def softmax(x, chunk=CHUNK):
    return np.exp(log_softmax(x, chunk))

def naive_softmax(x):
    """
    Two passes: max, then exponentiate and divide
    """
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(x - np.max(x))
    return e / np.sum(e)
