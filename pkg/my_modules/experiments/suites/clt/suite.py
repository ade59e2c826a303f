"""
经验混合矩矩阵的中心极限定理

每次重复计算 Delta = sqrt(k)(Sigma_hat - Sigma_nk)；每个元素的均值与 0 相差不超过
4 个标准误，Var(Delta_11) 与真值 Cov(theta_1^2, theta_1^2) 相差不超过 15%。
"""

import logging
import math

import numpy as np

from my_modules.core.errors import DomainError
from my_modules.core.extremes import empirical_moment_matrix, extract_exceedances
from my_modules.experiments.base import BaseSuite
from my_modules.experiments.oracle import compute_oracle
from my_modules.experiments.reports import Check, VerificationReport
from my_modules.simulation.models import ModelSpec, sample_model
from my_modules.simulation.rng import RngStream

logger = logging.getLogger(__name__)

MEAN_Z_BOUND = 4.0
VARIANCE_RTOL = 0.15
MIN_REPLICATES = 500


def clt_deviations(spec, n, k, replicates, truth, seed):
    """每次重复的 sqrt(k)(Sigma_hat - Sigma_nk)，形状 (replicates, d, d)"""
    target = truth.sigma_nk.matrix
    root_k = math.sqrt(k)
    deviations = np.empty((replicates, spec.d, spec.d))
    for r in range(replicates):
        data = sample_model(RngStream(seed, r), spec, n)
        sigma = empirical_moment_matrix(extract_exceedances(data, k))
        deviations[r] = root_k * (sigma.matrix - target)
    return deviations


def verify_clt(spec, n, k, replicates, truth, seed, min_replicates=MIN_REPLICATES):
    if replicates < min_replicates:
        raise DomainError(f'need at least {min_replicates} replicates, got {replicates}')
    if truth.cov4 is None:
        raise DomainError('oracle has no fourth-moment covariance for this dimension')
    deviations = clt_deviations(spec, n, k, replicates, truth, seed)

    rows, cols = np.triu_indices(spec.d)
    entries = deviations[:, rows, cols]
    means = entries.mean(axis=0)
    sds = entries.std(axis=0, ddof=1)
    se = sds / math.sqrt(replicates)
    with np.errstate(divide='ignore', invalid='ignore'):
        z = np.where(se > 0, np.abs(means) / se, np.where(means == 0, 0.0, np.inf))
    worst_z = float(np.max(z))

    variance = float(np.var(deviations[:, 0, 0], ddof=1))
    expected = float(truth.cov4[0, 0, 0, 0])
    relative = variance / expected - 1.0 if expected > 0 else math.inf

    logger.info('[Clt] max |mean|/se = %.3f, Var(Delta_11) = %.5g vs %.5g', worst_z, variance, expected)
    checks = (
        Check('entry_mean_z', worst_z, 0.0, MEAN_Z_BOUND),
        Check('variance_11_relative_error', relative, -VARIANCE_RTOL, VARIANCE_RTOL),
    )
    diagnostics = {'variance_11': variance, 'cov4_1111': expected, 'n': n, 'k': k, 'replicates': replicates}
    return VerificationReport('clt', checks, diagnostics)


class CltSuite(BaseSuite):
    suite_id = 'clt'
    default_settings = {
        'family': 'dirichlet',
        'd': 4,
        'p': 2,
        'alpha': 1.0,
        'noise_sigma': 0.0,
        'n': 100000,
        'k': 200,
        'replicates': 1000,
        'oracle_mc_size': 1000000,
        'oracle_limit_size': 4000000,
    }

    def run(self, seed):
        s = self.settings
        spec = ModelSpec(family=s['family'], d=s['d'], p=s['p'], alpha=s['alpha'], noise_sigma=s['noise_sigma'])
        truth = compute_oracle(spec, s['k'] / s['n'], s['oracle_mc_size'], RngStream(seed, 1 << 32),
                               limit_size=s['oracle_limit_size'])
        return verify_clt(spec, s['n'], s['k'], s['replicates'], truth, seed)


def register_suite():
    return {
        'id': 'clt',
        'name': 'CLT',
        'description': '经验混合矩矩阵的中心极限定理（均值与方差）',
        'class': CltSuite,
    }
