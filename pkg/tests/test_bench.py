import pytest

from snce.bench import Benchmark
from snce.codebook import Metric


def test_small_dense_run():
    result = Benchmark(K=4096, D=8, L=40).run()
    assert result.passed
    assert result.max_dense_sum_error < 1e-6
    assert result.max_reference_deviation < 1e-6
    assert result.topk_seconds is None


def test_topk_run():
    result = Benchmark(K=2048, D=4, L=10, topk=16, threads=2).run()
    assert result.passed
    assert result.max_topk_sum_error < 1e-9
    assert result.to_dict()['passed'] is True
    assert result.threads == 2


def test_no_reference_for_large_codebooks():
    result = Benchmark(K=8192, D=2, L=3).run()
    assert result.max_reference_deviation is None


def test_other_metrics():
    assert Benchmark(K=512, D=16, L=5, metric=Metric.NEG_COSINE).run().passed


@pytest.mark.parametrize('kwargs', [dict(K=0, D=2, L=1), dict(K=1 << 22, D=32, L=1), dict(K=10, D=2, L=1, topk=11),
                                    dict(K=10, D=2, L=(1 << 20) + 1)])
def test_rejects_out_of_range(kwargs):
    with pytest.raises(ValueError):
        Benchmark(**kwargs)
