""" Registered property checks """

import numpy as np

from snce.codebook import Codebook, Metric, grid_codebook, quantize, random_codebook
from snce.config import Objective, ToyConfig
from snce.losses import (OneHot, Smoothed, Neighbor, kl_decomposition_check, label_smoothing_weights,
                         mc_snce_estimate, policy_gradient_check, snce_target, soft_xent)
from snce.masked import elbo_expectation_check
from snce.neighbor import (Temperature, log_neighbor_from_distances, neighbor_distribution,
                           reference_distribution, topk_from_distances)
from snce.process.seeding import generator, VERIFY
from snce.softmax import softmax
from snce.toy import gradient_check_mlp
from . import check

UNIT = Temperature.from_two_tau_sq(1.0)


def three_code_fixture():
    """
    Codes (0,0), (1,0), (0,2) seen from the origin: distances 0, 1, 4
    """
    return Codebook([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]], Metric.L2_SQUARED), np.zeros(2)

def finite_difference(fn, x, step=1e-5):
    """
    Central differences of a scalar function, one coordinate at a time
    """
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    for k in range(x.size):
        plus, minus = x.copy(), x.copy()
        plus[k] += step
        minus[k] -= step
        grad[k] = (fn(plus) - fn(minus)) / (2.0 * step)

    return grad

def relative_deviation(analytic, numeric):
    return float(np.max(np.abs(analytic - numeric)) / max(np.max(np.abs(numeric)), 1e-300))

def _targets_for(K, codebook, rng):
    z = rng.uniform(-4.0, 4.0, size=codebook.D)
    y = int(rng.integers(K))
    return [OneHot(y), Smoothed(y, 0.1), snce_target(codebook, z, UNIT)]

def _codebook_of_size(K, seed):
    return grid_codebook(-5.0, 5.0, 50) if K == 2500 else random_codebook(K, 2, Metric.L2_SQUARED, seed)

@check('logit_gradient_fd')
def logit_gradient_fd(ctx):
    rng = generator(ctx.seed, VERIFY, 10)
    worst = 0.0
    for K in (2, 10, 2500):
        codebook = _codebook_of_size(K, ctx.seed)
        for target in _targets_for(K, codebook, rng):
            h = 2.0 * rng.standard_normal(K)
            analytic = soft_xent(h, target).grad_logits.copy()
            if ctx.break_gradient:
                analytic[0] += 1e-3
            numeric = finite_difference(lambda x: soft_xent(x, target).loss, h)
            worst = max(worst, relative_deviation(analytic, numeric))

    return worst < 1e-5, worst, 1e-5

@check('gradient_sum_zero')
def gradient_sum_zero(ctx):
    rng = generator(ctx.seed, VERIFY, 11)
    worst = 0.0
    for K in (2, 10, 2500):
        codebook = _codebook_of_size(K, ctx.seed)
        for target in _targets_for(K, codebook, rng):
            worst = max(worst, abs(float(np.sum(soft_xent(rng.standard_normal(K), target).grad_logits))))

    return worst < 1e-9, worst, 1e-9

@check('gradient_sign_structure')
def gradient_sign_structure(ctx):
    rng = generator(ctx.seed, VERIFY, 12)
    codebook = grid_codebook(-5.0, 5.0, 50)
    violations = 0
    for _ in range(10):
        h = rng.standard_normal(codebook.K)
        y = int(rng.integers(codebook.K))
        g = soft_xent(h, OneHot(y)).grad_logits
        violations += int(not g[y] < 0) + int(np.count_nonzero(np.delete(g, y) <= 0))

        target = snce_target(codebook, rng.uniform(-4.0, 4.0, size=2), UNIT)
        q, p = target.dist.probs, softmax(h)
        g = soft_xent(h, target).grad_logits
        decided = np.abs(q - p) > 1e-12
        violations += int(np.count_nonzero((g[decided] < 0) != (q[decided] > p[decided])))

    return violations == 0, violations, 0

@check('tau_to_zero_one_hot')
def tau_to_zero_one_hot(ctx):
    codebook = grid_codebook(-5.0, 5.0, 50)
    z = np.array([-2.03, 0.04])
    q = neighbor_distribution(codebook, z, Temperature(1e-3)).probs
    onehot = np.zeros(codebook.K)
    onehot[quantize(codebook, z)] = 1.0
    value = float(np.max(np.abs(q - onehot)))

    return value < 1e-6, value, 1e-6

@check('tau_to_infinity_uniform')
def tau_to_infinity_uniform(ctx):
    codebook = grid_codebook(-5.0, 5.0, 50)
    q = neighbor_distribution(codebook, np.array([-2.03, 0.04]), Temperature(1e6)).probs
    value = float(np.max(np.abs(q - 1.0 / codebook.K)))

    return value < 1e-6, value, 1e-6

@check('snce_to_ce_limit')
def snce_to_ce_limit(ctx):
    rng = generator(ctx.seed, VERIFY, 13)
    codebook = grid_codebook(-5.0, 5.0, 50)
    z = np.array([-2.03, 0.04])
    h = rng.standard_normal(codebook.K)
    snce = soft_xent(h, snce_target(codebook, z, Temperature(1e-3))).loss
    ce = soft_xent(h, OneHot(quantize(codebook, z))).loss
    value = abs(snce - ce)

    return value < 1e-5, value, 1e-5

@check('monte_carlo_equivalence')
def monte_carlo_equivalence(ctx):
    codebook, z = three_code_fixture()
    q = neighbor_distribution(codebook, z, UNIT)
    h = np.array([1.0, 0.0, -1.0])
    mc = mc_snce_estimate(h, q, 100000, ctx.seed)
    sigmas = abs(mc.estimate - soft_xent(h, Neighbor(q)).loss) / mc.stderr

    return sigmas <= 3.0, sigmas, 3.0

@check('kl_decomposition_identity')
def kl_decomposition_identity(ctx):
    rng = generator(ctx.seed, VERIFY, 14)
    codebook, z = three_code_fixture()
    cases = [(np.array([1.0, 0.0, -1.0]), neighbor_distribution(codebook, z, UNIT).probs)]
    cases += [(rng.standard_normal(100), rng.dirichlet(np.ones(100))) for _ in range(5)]

    kl_gap, xent_gap = 0.0, 0.0
    for h, q in cases:
        kl, xent, ent = kl_decomposition_check(h, q)
        kl_gap = max(kl_gap, abs(kl - (xent - ent)))
        xent_gap = max(xent_gap, abs(xent - soft_xent(h, q).loss))

    return kl_gap < 1e-9 and xent_gap <= 1e-12, kl_gap, 1e-9

@check('policy_gradient_identity')
def policy_gradient_identity(ctx):
    rng = generator(ctx.seed, VERIFY, 15)
    codebook, z = three_code_fixture()
    cases = [(np.array([1.0, 0.0, -1.0]), neighbor_distribution(codebook, z, UNIT).probs),
             (np.zeros(2), np.array([1.0, 0.0]))]
    cases += [(rng.standard_normal(100), rng.dirichlet(np.ones(100))) for _ in range(3)]
    worst = max(policy_gradient_check(h, q) for h, q in cases)

    return worst < 1e-10, worst, 1e-10

@check('elbo_unbiased')
def elbo_unbiased(ctx):
    rng = generator(ctx.seed, VERIFY, 16)
    codebook = grid_codebook(-5.0, 5.0, 50)
    clean = rng.integers(codebook.K, size=8)
    logits = rng.standard_normal((8, codebook.K))
    result = elbo_expectation_check(clean, logits, codebook, UNIT, 20000, ctx.seed, threads=ctx.threads)
    sigmas = abs(result.mc_mean - result.analytic) / result.stderr

    return sigmas <= 3.0, sigmas, 3.0

@check('label_smoothing_exact')
def label_smoothing_exact(ctx):
    K = 2500
    worst = 0.0
    for eps in (0.05, 0.1):
        w = label_smoothing_weights(7, eps, K)
        expected = np.full(K, eps / (K - 1))
        expected[7] = 1.0 - eps
        worst = max(worst, float(np.max(np.abs(w - expected))))

    return worst == 0.0, worst, 0.0

@check('large_codebook_stability')
def large_codebook_stability(ctx):
    d = generator(ctx.seed, VERIFY, 17).uniform(0.0, 1e4, size=131072)
    q = np.exp(log_neighbor_from_distances(d, UNIT))
    if not np.all(np.isfinite(q)):
        return False, float('nan'), 1e-6

    value = max(abs(float(np.sum(q)) - 1.0), float(np.max(np.abs(q - reference_distribution(d, UNIT)))))
    return value < 1e-6, value, 1e-6

@check('chunked_matches_naive')
def chunked_matches_naive(ctx):
    d = generator(ctx.seed, VERIFY, 18).uniform(0.0, 1e4, size=4096)
    small = Temperature.from_two_tau_sq(1e3)
    value = float(np.max(np.abs(np.exp(log_neighbor_from_distances(d, small)) - reference_distribution(d, small))))

    return value < 1e-6, value, 1e-6

@check('topk_full_matches_dense')
def topk_full_matches_dense(ctx):
    d = generator(ctx.seed, VERIFY, 19).uniform(0.0, 10.0, size=4096)
    sparse = topk_from_distances(d, UNIT, d.size)
    value = float(np.max(np.abs(sparse.to_dense() - np.exp(log_neighbor_from_distances(d, UNIT)))))

    return value < 1e-12, value, 1e-12

@check('argmax_matches_quantize')
def argmax_matches_quantize(ctx):
    rng = generator(ctx.seed, VERIFY, 20)
    codebook = grid_codebook(-5.0, 5.0, 50)
    mismatches = sum(int(neighbor_distribution(codebook, z, UNIT).argmax() != quantize(codebook, z))
                     for z in rng.uniform(-5.0, 5.0, size=(200, 2)))

    return mismatches == 0, mismatches, 0

@check('shift_invariance')
def shift_invariance(ctx):
    d = generator(ctx.seed, VERIFY, 21).uniform(0.0, 10.0, size=2500)
    value = float(np.max(np.abs(np.exp(log_neighbor_from_distances(d + 123.0, UNIT))
                                - np.exp(log_neighbor_from_distances(d, UNIT)))))

    return value < 1e-12, value, 1e-12

@check('mlp_gradient_fd')
def mlp_gradient_fd(ctx):
    worst = 0.0
    for objective in (Objective.SNCE, Objective.CE, Objective.L2_REGRESSION):
        worst = max(worst, gradient_check_mlp(ToyConfig(objective=objective, seed=ctx.seed), n_params_probed=50))

    return worst < 1e-4, worst, 1e-4
