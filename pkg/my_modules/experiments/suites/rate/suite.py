"""
超额风险的收敛速度与 PCA 投影的极限

对每个 k 收集 PCA 投影相对真值 Sigma_nk 的平均超额风险，把 log(均值) 对 log(k)
回归，斜率须在 [-1.25, -0.75] 内。在最大的 k 上，k * 平均超额风险与
E||sqrt(k)(Pi_hat - Pi*)||^2 须与各自的高斯极限相差不超过 20%。
"""

import logging
import math

import numpy as np
from scipy.stats import linregress

from my_modules.core.errors import DomainError
from my_modules.core.extremes import empirical_moment_matrix, extract_exceedances
from my_modules.core.linalg import hs_norm
from my_modules.core.pca import excess_risk, fit_pca, limit_excess_risk, limit_projection_deviation, make_frame
from my_modules.experiments.base import BaseSuite
from my_modules.experiments.oracle import compute_oracle, gaussian_limit_draws
from my_modules.experiments.reports import Check, VerificationReport
from my_modules.simulation.models import ModelSpec, sample_model
from my_modules.simulation.rng import RngStream

logger = logging.getLogger(__name__)

SLOPE_BAND = (-1.25, -0.75)
LIMIT_RTOL = 0.2
LIMIT_DRAWS = 20000
# 重复实验占用流 0..replicates-1，高斯抽样用远高于它们的流
LIMIT_STREAM = 1 << 40


def excess_risk_curve(spec, n, k_grid, replicates, truth, seed, p):
    """每个 k 的平均超额风险与平均 k||Pi_hat - Pi*||^2"""
    optimal = fit_pca(truth.sigma_nk, p).projection.matrix
    risk = np.zeros(len(k_grid))
    deviation = np.zeros(len(k_grid))
    for r in range(replicates):
        data = sample_model(RngStream(seed, r), spec, n)
        for i, k in enumerate(k_grid):
            projection = fit_pca(empirical_moment_matrix(extract_exceedances(data, k)), p).projection
            risk[i] += excess_risk(truth.sigma_nk, projection, p)
            deviation[i] += k * hs_norm(projection.matrix - optimal) ** 2
    return risk / replicates, deviation / replicates


def gaussian_limit_means(truth, p, draws, rng):
    """U ~ N(0, Cov) 下的 E[limit_excess_risk(U)] 与 E||W_p(U)||^2"""
    frame = make_frame(truth.sigma_nk.matrix, p)
    samples = gaussian_limit_draws(truth.cov4, draws, rng)
    risk = np.mean([limit_excess_risk(u, frame, p) for u in samples])
    deviation = np.mean([hs_norm(limit_projection_deviation(u, frame, p)) ** 2 for u in samples])
    return float(risk), float(deviation)


def verify_excess_rate(spec, n, k_grid, replicates, truth, seed, p=None, limit_draws=LIMIT_DRAWS):
    """
    Args:
        spec: 模拟数据的 ModelSpec
        n: 每次重复的样本量
        k_grid: 至少跨一个数量级的预算
        replicates: 样本个数
        truth: OracleTruth（含 cov4）
        seed: 基础种子
        p: 投影秩（默认 spec.p），须是 Sigma_nk 的简单分割
    """
    p = p or spec.p
    k_grid = tuple(sorted(int(k) for k in k_grid))
    if len(k_grid) < 2 or k_grid[-1] < 10 * k_grid[0]:
        raise DomainError(f'k grid must span at least one decade, got {k_grid}')
    if truth.cov4 is None:
        raise DomainError('oracle has no fourth-moment covariance for this dimension')

    mean_risk, mean_deviation = excess_risk_curve(spec, n, k_grid, replicates, truth, seed, p)
    if np.any(mean_risk <= 0):
        raise DomainError(f'degenerate regression: mean excess risk {mean_risk.tolist()}')
    fit = linregress(np.log(k_grid), np.log(mean_risk))

    limit_risk, limit_deviation = gaussian_limit_means(truth, p, limit_draws, RngStream(seed, LIMIT_STREAM))
    k_max = k_grid[-1]
    risk_error = k_max * mean_risk[-1] / limit_risk - 1.0 if limit_risk > 0 else math.inf
    deviation_error = mean_deviation[-1] / limit_deviation - 1.0 if limit_deviation > 0 else math.inf

    logger.info('[Rate] slope %.4f +- %.4f; k*risk %.5g vs %.5g', fit.slope, fit.stderr,
                k_max * mean_risk[-1], limit_risk)
    checks = (
        Check('log_log_slope', float(fit.slope), *SLOPE_BAND),
        Check('scaled_risk_vs_gaussian_limit', risk_error, -LIMIT_RTOL, LIMIT_RTOL),
        Check('projection_deviation_vs_gaussian_limit', deviation_error, -LIMIT_RTOL, LIMIT_RTOL),
    )
    diagnostics = {
        'k_grid': k_grid,
        'mean_excess_risk': mean_risk.tolist(),
        'slope_ci': (float(fit.slope - 1.96 * fit.stderr), float(fit.slope + 1.96 * fit.stderr)),
        'limit_excess_risk': limit_risk,
        'limit_projection_deviation': limit_deviation,
    }
    return VerificationReport('rate', checks, diagnostics)


class RateSuite(BaseSuite):
    suite_id = 'rate'
    default_settings = {
        'family': 'dirichlet',
        'd': 4,
        'p': 2,
        'alpha': 1.0,
        'noise_sigma': 0.0,
        'projection_rank': 1,
        'n': 1600,
        'k_grid': (50, 100, 200, 400, 800),
        'replicates': 1000,
        'oracle_mc_size': 1000000,
        'oracle_limit_size': 2000000,
        'limit_draws': LIMIT_DRAWS,
    }

    def run(self, seed):
        s = self.settings
        spec = ModelSpec(family=s['family'], d=s['d'], p=s['p'], alpha=s['alpha'], noise_sigma=s['noise_sigma'])
        k_max = max(s['k_grid'])
        truth = compute_oracle(spec, k_max / s['n'], s['oracle_mc_size'], RngStream(seed, 1 << 32),
                               limit_size=s['oracle_limit_size'])
        return verify_excess_rate(spec, s['n'], s['k_grid'], s['replicates'], truth, seed,
                                  p=s['projection_rank'], limit_draws=s['limit_draws'])


def register_suite():
    return {
        'id': 'rate',
        'name': 'Excess-risk rate',
        'description': '超额风险的 k^{-1} 收敛速度与投影的高斯极限',
        'class': RateSuite,
    }
