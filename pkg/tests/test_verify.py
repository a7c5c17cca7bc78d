import pytest

from snce.verify import CHECKS, Verifier
from snce.verify.checks import three_code_fixture

FAST = ['logit_gradient_fd', 'gradient_sum_zero', 'gradient_sign_structure', 'tau_to_zero_one_hot',
        'tau_to_infinity_uniform', 'snce_to_ce_limit', 'monte_carlo_equivalence', 'kl_decomposition_identity',
        'policy_gradient_identity', 'label_smoothing_exact', 'large_codebook_stability', 'chunked_matches_naive',
        'topk_full_matches_dense', 'argmax_matches_quantize', 'shift_invariance']


def test_registry_names():
    assert set(FAST) | {'elbo_unbiased', 'mlp_gradient_fd'} == set(CHECKS)


@pytest.mark.parametrize('name', FAST)
def test_check_passes(name):
    [result] = Verifier(seed=0, only=[name]).run()
    assert result.passed, result
    assert result.value <= result.threshold


@pytest.mark.parametrize('seed', [1, 7])
def test_gradient_checks_pass_for_other_seeds(seed):
    results = Verifier(seed=seed, only=['logit_gradient_fd', 'policy_gradient_identity']).run()
    assert all(r.passed for r in results)


def test_elbo_check():
    [result] = Verifier(seed=0, only=['elbo_unbiased'], threads=4).run()
    assert result.passed


def test_mlp_check():
    [result] = Verifier(seed=0, only=['mlp_gradient_fd']).run()
    assert result.passed


def test_broken_gradient_is_caught():
    [result] = Verifier(break_gradient=True, only=['logit_gradient_fd']).run()
    assert not result.passed
    assert result.value > result.threshold


def test_unknown_check():
    with pytest.raises(ValueError, match='Unknown checks'):
        Verifier(only=['does_not_exist'])


def test_document_and_table():
    results = Verifier(only=['shift_invariance', 'label_smoothing_exact']).run()
    document = Verifier.document(results, 0)
    assert document['passed'] is True
    assert [c['name'] for c in document['checks']] == ['shift_invariance', 'label_smoothing_exact']

    table = Verifier.table(results)
    assert table['status'].tolist() == ['PASS', 'PASS']


def test_raising_check_is_a_failure(monkeypatch):
    def explode(ctx):
        raise RuntimeError('boom')

    monkeypatch.setitem(CHECKS, 'explode', explode)
    [result] = Verifier(only=['explode']).run()
    assert not result.passed
    assert 'boom' in result.detail
    assert Verifier.document([result], 0)['checks'][0]['value'] is None


def test_fixture_distances():
    codebook, z = three_code_fixture()
    assert codebook.K == 3 and z.tolist() == [0.0, 0.0]
