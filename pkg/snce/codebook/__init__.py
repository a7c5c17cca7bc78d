""" Codebook, distance metrics and nearest-code quantization """

from enum import IntEnum
from functools import cached_property

import numpy as np

from snce.process.seeding import generator, BENCH


class CodebookError(ValueError):
    pass


class Metric(IntEnum):
    """
    Dissimilarity between a latent and a code. The integer values are the
    metric byte of the codebook file format.
    """
    L2_SQUARED = 0
    NEG_DOT = 1
    NEG_COSINE = 2

    @classmethod
    def parse(cls, name):
        aliases = {'l2': cls.L2_SQUARED, 'dot': cls.NEG_DOT, 'cosine': cls.NEG_COSINE}
        key = str(name).lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls[str(name).upper()]
        except KeyError:
            raise CodebookError('Unknown metric {}. Supported metrics are: {}'.format(
                name, ', '.join(sorted(aliases))))

    def __call__(self, x, y):
        """
        d(x, y) for a pair of vectors
        """
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)

        if self is Metric.L2_SQUARED:
            return float(np.sum((x - y) ** 2))
        if self is Metric.NEG_DOT:
            return -float(np.dot(x, y))

        nx, ny = np.linalg.norm(x), np.linalg.norm(y)
        if nx == 0 or ny == 0:
            raise CodebookError('Negative cosine is undefined for zero vectors')
        return -float(np.dot(x, y)) / (nx * ny)


class Codebook(object):
    """
    K code vectors in D dimensions plus the metric used to compare latents
    with them. Vectors are held as float32 and never mutated; distance
    arithmetic runs in float64.
    """
    def __init__(self, vectors, metric=Metric.L2_SQUARED):
        vectors = np.array(vectors, dtype=np.float32)
        if vectors.ndim != 2:
            raise CodebookError('Codebook vectors must be a K x D matrix, got shape {}'.format(vectors.shape))

        K, D = vectors.shape
        if K < 1 or D < 1:
            raise CodebookError('Codebook needs K >= 1 and D >= 1, got K={} D={}'.format(K, D))
        if not np.all(np.isfinite(vectors)):
            raise CodebookError('Codebook vectors must be finite')

        self.metric = Metric(metric)
        if self.metric is Metric.NEG_COSINE and np.any(np.linalg.norm(vectors.astype(np.float64), axis=1) == 0):
            raise CodebookError('Zero-norm code vector under NEG_COSINE')

        vectors.setflags(write=False)
        self.vectors = vectors

    @property
    def K(self):
        return self.vectors.shape[0]

    @property
    def D(self):
        return self.vectors.shape[1]

    @cached_property
    def _vectors64(self):
        v = self.vectors.astype(np.float64)
        v.setflags(write=False)
        return v

    @cached_property
    def _norms(self):
        return np.linalg.norm(self._vectors64, axis=1)

    def __eq__(self, other):
        if not isinstance(other, Codebook):
            return NotImplemented
        return self.metric is other.metric and np.array_equal(self.vectors, other.vectors)

    def __repr__(self):
        return 'Codebook(K={}, D={}, metric={})'.format(self.K, self.D, self.metric.name)


def _latent(codebook, z):
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.shape[0] != codebook.D:
        raise CodebookError('Latent has shape {} but the codebook has D={}'.format(z.shape, codebook.D))
    if not np.all(np.isfinite(z)):
        raise CodebookError('Latent must be finite')
    if codebook.metric is Metric.NEG_COSINE and not np.any(z):
        raise CodebookError('Zero-norm latent under NEG_COSINE')

    return z

def distances(codebook, z):
    """
    d(z, v_k) for every code, length K
    """
    z = _latent(codebook, z)
    v = codebook._vectors64

    if codebook.metric is Metric.L2_SQUARED:
        d = np.sum((v - z) ** 2, axis=1)
    elif codebook.metric is Metric.NEG_DOT:
        d = -(v @ z)
    else:
        d = -(v @ z) / (codebook._norms * np.linalg.norm(z))

    if not np.all(np.isfinite(d)):
        raise CodebookError('Non-finite distance for latent {}'.format(z))

    return d

def distances_batch(codebook, latents):
    latents = np.asarray(latents, dtype=np.float64)
    if latents.ndim != 2:
        raise CodebookError('Latents must be an L x D matrix, got shape {}'.format(latents.shape))

    return np.stack([distances(codebook, z) for z in latents]) if len(latents) else np.zeros((0, codebook.K))

def quantize(codebook, z):
    """
    Index of the nearest code; exact ties go to the smallest index
    """
    return int(np.argmin(distances(codebook, z)))

def quantize_batch(codebook, latents):
    return np.array([quantize(codebook, z) for z in np.asarray(latents, dtype=np.float64)], dtype=np.int64)

def grid_axis(lo, hi, n_per_axis):
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
        raise CodebookError('Grid bounds need lo < hi, got lo={} hi={}'.format(lo, hi))
    if int(n_per_axis) != n_per_axis or n_per_axis < 2:
        raise CodebookError('Grid needs n_per_axis >= 2, got {}'.format(n_per_axis))

    return np.linspace(lo, hi, int(n_per_axis))

def grid_codebook(lo, hi, n_per_axis):
    """
    n_per_axis**2 codes on an inclusive uniform grid over [lo, hi]^2,
    row-major with x varying fastest
    """
    axis = grid_axis(lo, hi, n_per_axis)
    xs, ys = np.meshgrid(axis, axis)

    return Codebook(np.column_stack([xs.ravel(), ys.ravel()]), Metric.L2_SQUARED)

def random_codebook(K, D, metric=Metric.L2_SQUARED, seed=0):
    if K < 1 or D < 1:
        raise CodebookError('Codebook needs K >= 1 and D >= 1, got K={} D={}'.format(K, D))

    rng = generator(seed, BENCH, 0)
    return Codebook(rng.standard_normal((int(K), int(D)), dtype=np.float32), metric)
