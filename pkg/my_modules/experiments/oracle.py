#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Oracle（真值）计算

    - t_nk: 半径的 (1-k/n) 分位数（与估计量相同的次序统计量定义）
    - Σ_nk: 半径超过 t_nk 时 ΘΘᵀ 的条件期望
    - Σ∞、四个泛函的真值、Cov∞(θᵢθⱼ, θₗθₘ): 由精确角极限分布的加权抽样得到
    - 标准误差: 分 20 批计算

模型数据分两遍生成（每批使用固定的子流）：第一遍只收集半径求分位数，
第二遍累加超阈值的外积，内存只与批大小有关。无噪声的 Dirichlet 族角度与
半径独立，此时 Σ_nk = Σ∞ 且 t_nk = (k/n)^{-1/α}，直接使用极限抽样。
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from my_modules.core.errors import DomainError
from my_modules.core.extremes import DiscreteAngularMeasure, MomentMatrix, threshold_select
from my_modules.core.functionals import FUNCTIONAL_NAMES, default_functional_params, evaluate_functionals
from my_modules.core.linalg import symmetric_eigh
from my_modules.simulation.models import sample_limit_angles, sample_model

logger = logging.getLogger(__name__)

ORACLE_BATCHES = 20
MIN_MC_SIZE = 100_000
MIN_EXCEEDANCES = 1_000
COV4_MAX_DIM = 16


@dataclass(frozen=True)
class OracleTruth:
    spec: object
    k_over_n: float
    t_nk: float
    sigma_inf: MomentMatrix
    sigma_nk: MomentMatrix
    functional_truths: dict
    cov4: Optional[np.ndarray]
    mc_size: int
    se: dict = field(default_factory=dict)

    def cov4_matrix(self):
        """Cov∞ as a d² x d² matrix (row index i*d+j, column index l*d+m)."""
        if self.cov4 is None:
            raise DomainError('fourth-moment covariance was not computed for this dimension')
        d = self.sigma_inf.d
        return self.cov4.reshape(d * d, d * d)

    def to_rows(self):
        rows = [{'quantity': 't_nk', 'value': self.t_nk, 'se': math.nan}]
        for name in FUNCTIONAL_NAMES:
            rows.append({'quantity': f'functional_{name}', 'value': self.functional_truths[name],
                         'se': self.se['functionals'][name]})
        return rows


def _batch_sizes(total, batches):
    base, extra = divmod(total, batches)
    return [base + (1 if b < extra else 0) for b in range(batches)]


def _weighted_moments(angles, weights):
    weighted = angles * weights[:, None]
    return weighted.T @ angles, float(np.sum(weights))


def _limit_pass(rng, spec, sizes, prm, with_cov4):
    d = spec.d
    second = np.zeros((d, d))
    fourth = np.zeros((d * d, d * d)) if with_cov4 else None
    total_weight = 0.0
    batch_sigma, batch_functionals = [], {name: [] for name in FUNCTIONAL_NAMES}
    offset = len(sizes)
    for b, size in enumerate(sizes):
        angles, weights = sample_limit_angles(rng.child(offset + b), spec, size)
        moment, mass = _weighted_moments(angles, weights)
        second += moment
        total_weight += mass
        batch_sigma.append(moment / mass)
        measure = DiscreteAngularMeasure(angles, weights / mass, size)
        for name, value in evaluate_functionals(measure, prm).items():
            batch_functionals[name].append(value)
        if with_cov4:
            outer = (angles[:, :, None] * angles[:, None, :]).reshape(size, d * d)
            fourth += (outer * weights[:, None]).T @ outer
        logger.debug('[Oracle] limit batch %d/%d done', b + 1, len(sizes))

    sigma_inf = second / total_weight
    sigma_inf = 0.5 * (sigma_inf + sigma_inf.T)
    cov4 = None
    if with_cov4:
        flat = fourth / total_weight - np.outer(sigma_inf.ravel(), sigma_inf.ravel())
        cov4 = (0.5 * (flat + flat.T)).reshape(d, d, d, d)
    root_b = math.sqrt(len(sizes))
    se = {
        'sigma_inf': np.std(np.array(batch_sigma), axis=0, ddof=1) / root_b,
        'functionals': {name: float(np.std(v, ddof=1) / root_b) for name, v in batch_functionals.items()},
    }
    functionals = {name: float(np.mean(v)) for name, v in batch_functionals.items()}
    return sigma_inf, cov4, functionals, se


def _exceedance_pass(rng, spec, sizes, m):
    radii = np.concatenate([sample_model(rng.child(b), spec, size).radii() for b, size in enumerate(sizes)])
    t_nk = threshold_select(radii, m)
    del radii

    d = spec.d
    total = np.zeros((d, d))
    count = 0
    batch_sigma = []
    for b, size in enumerate(sizes):
        values = sample_model(rng.child(b), spec, size).values
        norms = np.linalg.norm(values, axis=1)
        mask = norms > t_nk
        angles = values[mask] / norms[mask, None]
        moment = angles.T @ angles
        total += moment
        count += angles.shape[0]
        if angles.shape[0]:
            batch_sigma.append(moment / angles.shape[0])
    if count < MIN_EXCEEDANCES:
        raise DomainError(f'only {count} exceedances above t_nk; need at least {MIN_EXCEEDANCES}')
    sigma_nk = total / count
    sigma_nk = 0.5 * (sigma_nk + sigma_nk.T)
    se = np.std(np.array(batch_sigma), axis=0, ddof=1) / math.sqrt(len(batch_sigma))
    return t_nk, sigma_nk, count, se


def compute_oracle(spec, k_over_n, mc_size, rng, limit_size=None, prm=None):
    """
    计算模型在给定 k/n 下的真值

    Args:
        spec: ModelSpec
        k_over_n: 超阈值比例，0 < k/n < 1
        mc_size: 模型数据的 Monte Carlo 样本量（>= 1e5）
        rng: RngStream，批 b 使用子流 b（模型数据）与 20+b（极限抽样）
        limit_size: 极限抽样的样本量，默认等于 mc_size
        prm: 泛函参数，默认 default_functional_params(spec)

    Returns:
        OracleTruth
    """
    if not 0.0 < k_over_n < 1.0:
        raise DomainError(f'k/n must lie in (0, 1), got {k_over_n}')
    if mc_size < MIN_MC_SIZE:
        raise DomainError(f'mc_size must be at least {MIN_MC_SIZE}, got {mc_size}')
    m = int(round(k_over_n * mc_size))
    if m < MIN_EXCEEDANCES:
        raise DomainError(f'k/n={k_over_n} leaves {m} exceedances out of {mc_size}; need {MIN_EXCEEDANCES}')
    prm = prm or default_functional_params(spec)
    limit_size = limit_size or mc_size
    with_cov4 = spec.d <= COV4_MAX_DIM

    sigma_inf, cov4, functionals, se = _limit_pass(
        rng, spec, _batch_sizes(limit_size, ORACLE_BATCHES), prm, with_cov4)

    if spec.family != 'gumbel' and spec.noise_sigma == 0:
        t_nk = k_over_n ** (-1.0 / spec.alpha)
        sigma_nk = MomentMatrix(sigma_inf, limit_size, limit_size)
        se['sigma_nk'] = se['sigma_inf']
        logger.info('[Oracle] %s noise-free: Sigma_nk taken from %d limit draws', spec.family, limit_size)
    else:
        t_nk, matrix, count, se_nk = _exceedance_pass(rng, spec, _batch_sizes(mc_size, ORACLE_BATCHES), m)
        sigma_nk = MomentMatrix(matrix, count, count)
        se['sigma_nk'] = se_nk
        logger.info('[Oracle] %s: t_nk=%.6g from %d draws, %d exceedances', spec.family, t_nk, mc_size, count)

    return OracleTruth(
        spec=spec,
        k_over_n=k_over_n,
        t_nk=float(t_nk),
        sigma_inf=MomentMatrix(sigma_inf, limit_size, limit_size),
        sigma_nk=sigma_nk,
        functional_truths=functionals,
        cov4=cov4,
        mc_size=mc_size,
        se=se,
    )


def gaussian_limit_draws(cov4, size, rng):
    """
    抽取协方差为 Cov∞ 的对称高斯矩阵 U

    Args:
        cov4: d x d x d x d 协方差数组
        size: 抽样个数
        rng: RngStream

    Returns:
        ndarray: size x d x d，每个矩阵对称
    """
    cov4 = np.asarray(cov4, dtype=float)
    d = cov4.shape[0]
    if cov4.shape != (d, d, d, d):
        raise DomainError(f'cov4 must have shape (d, d, d, d), got {cov4.shape}')
    flat = cov4.reshape(d * d, d * d)
    eigen = symmetric_eigh(0.5 * (flat + flat.T))
    # 对称矩阵的协方差是奇异的，微小的负特征值来自舍入
    root = eigen.eigenvectors * np.sqrt(np.maximum(eigen.eigenvalues, 0.0))
    draws = (rng.standard_normal((size, d * d)) @ root.T).reshape(size, d, d)
    return 0.5 * (draws + np.transpose(draws, (0, 2, 1)))
