""" Large-codebook target throughput benchmark """

from dataclasses import dataclass, asdict
from time import perf_counter
import logging
import math

import numpy as np

from snce.codebook import Metric, distances_batch, random_codebook
from snce.neighbor import Temperature, neighbor_targets, reference_distribution
from snce.process import log_method
from snce.process.seeding import generator, BENCH

# the float64 working copy of the codebook holds K*D values
MAX_CODEBOOK_VALUES = 1 << 26
MAX_LATENTS = 1 << 20
REFERENCE_K = 4096
BLOCK = 32


@dataclass(frozen=True)
class BenchResult:
    K: int
    D: int
    L: int
    topk: int
    threads: int
    dense_seconds: float
    dense_tokens_per_sec: float
    max_dense_sum_error: float
    topk_seconds: float = None
    topk_tokens_per_sec: float = None
    max_topk_sum_error: float = None
    max_reference_deviation: float = None

    @property
    def passed(self):
        limits = [(self.max_dense_sum_error, 1e-6), (self.max_topk_sum_error, 1e-9),
                  (self.max_reference_deviation, 1e-6)]
        return all(value is None or (math.isfinite(value) and value < limit) for value, limit in limits)

    def to_dict(self):
        return dict(asdict(self), passed=self.passed)


class Benchmark(object):
    def __init__(self, K, D, L, topk=None, threads=None, seed=0, metric=Metric.L2_SQUARED, temp=None):
        self.logger = logging.getLogger('snce.bench.Benchmark')
        if min(K, D, L) < 1:
            raise ValueError('K, D and L must be >= 1')
        if K * D > MAX_CODEBOOK_VALUES or L > MAX_LATENTS:
            raise ValueError('K={} D={} L={} is beyond the supported scale (K*D <= {}, L <= {})'.format(
                K, D, L, MAX_CODEBOOK_VALUES, MAX_LATENTS))
        if topk is not None and not 1 <= topk <= K:
            raise ValueError('topk must lie in [1, K], got {}'.format(topk))

        self.K, self.D, self.L = int(K), int(D), int(L)
        self.topk = topk
        self.threads = threads
        self.temp = temp or Temperature(0.71)

        self.codebook = random_codebook(self.K, self.D, metric, seed)
        self.latents = generator(seed, BENCH, 1).standard_normal((self.L, self.D))

    def _sweep(self, topk):
        """
        Time target computation block by block; returns seconds, the worst
        normalization error and (dense, small K only) the worst deviation
        from the two-pass reference
        """
        elapsed, sum_error, deviation = 0.0, 0.0, None
        compare = topk is None and self.K <= REFERENCE_K

        for start in range(0, self.L, BLOCK):
            block = self.latents[start:start + BLOCK]
            began = perf_counter()
            targets = neighbor_targets(self.codebook, block, self.temp, topk=topk, threads=self.threads)
            elapsed += perf_counter() - began

            sum_error = max([sum_error] + [abs(math.fsum(q.probs) - 1.0) for q in targets])
            if compare:
                deviation = max([deviation or 0.0] + [
                    float(np.max(np.abs(q.probs - reference_distribution(d, self.temp))))
                    for q, d in zip(targets, distances_batch(self.codebook, block))])

        return elapsed, sum_error, deviation

    @log_method('Running target benchmark', 'Benchmark complete')
    def run(self):
        seconds, sum_error, deviation = self._sweep(None)
        result = dict(
            K=self.K, D=self.D, L=self.L, topk=self.topk, threads=self.threads or 1,
            dense_seconds=seconds,
            dense_tokens_per_sec=self.L / seconds if seconds > 0 else float('inf'),
            max_dense_sum_error=sum_error,
            max_reference_deviation=deviation,
        )

        if self.topk is not None:
            seconds, sum_error, _ = self._sweep(self.topk)
            result.update(
                topk_seconds=seconds,
                topk_tokens_per_sec=self.L / seconds if seconds > 0 else float('inf'),
                max_topk_sum_error=sum_error,
            )

        bench = BenchResult(**result)
        self.logger.info('Dense: {:.1f} latents/s; top-M: {}'.format(
            bench.dense_tokens_per_sec,
            'n/a' if bench.topk_tokens_per_sec is None else '{:.1f} latents/s'.format(bench.topk_tokens_per_sec)))
        return bench
