#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
投影维数选择模块

选择规则：
    p̂ = min{ p ≤ d : Σ_{i≤p} λ̂ᵢ > τ + k^{-1/2} z_β σ̂ₚ }
其中 σ̂ₚ² 是超阈值角度投影平方范数的经验方差（只对超阈值观测求和）。
没有任何 p 满足严格不等式时（只可能是 p=d 处的舍入误差），强制 p̂ = d。
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from my_modules.core.errors import DomainError
from my_modules.core.linalg import symmetric_eigh

logger = logging.getLogger(__name__)

# Abramowitz & Stegun 26.2.23
_AS_NUM = (2.515517, 0.802853, 0.010328)
_AS_DEN = (1.432788, 0.189269, 0.001308)
_NEWTON_STEPS = 3
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _rational_approximation(t):
    c, d = _AS_NUM, _AS_DEN
    numerator = (c[2] * t + c[1]) * t + c[0]
    denominator = ((d[2] * t + d[1]) * t + d[0]) * t + 1.0
    return t - numerator / denominator


def normal_quantile(beta):
    """
    标准正态分布的 β 分位数

    先用有理逼近得到初值（误差约 4.5e-4），再对正向 CDF 做 Newton 修正。

    Args:
        beta: 概率，0 < beta < 1

    Returns:
        float: z_β
    """
    if not 0.0 < beta < 1.0:
        raise DomainError(f'beta must lie in (0, 1), got {beta}')
    if beta == 0.5:
        return 0.0
    if beta < 0.5:
        x = -_rational_approximation(math.sqrt(-2.0 * math.log(beta)))
    else:
        x = _rational_approximation(math.sqrt(-2.0 * math.log(1.0 - beta)))
    for _ in range(_NEWTON_STEPS):
        density = _INV_SQRT_2PI * math.exp(-0.5 * x * x)
        if density == 0.0:
            break
        x -= (float(ndtr(x)) - beta) / density
    return x


@dataclass(frozen=True)
class DimensionRow:
    p: int
    captured: float
    sigma_hat: float
    threshold: float

    @property
    def accepted(self):
        return self.captured > self.threshold


@dataclass(frozen=True)
class DimensionSelection:
    """
    维数选择结果

    per_p 保存每个候选 p 的 (captured, σ̂ₚ, 判定阈值)，decide() 可以在
    不重新计算 σ̂ₚ 的情况下换一个 τ 重新判定。
    """
    p_hat: int
    tau: float
    beta: float
    k: int
    z_beta: float
    per_p: tuple

    @property
    def d(self):
        return len(self.per_p)

    def decide(self, tau):
        """用新的 τ 重新计算 p̂"""
        if not 0.0 < tau < 1.0:
            raise DomainError(f'tau must lie in (0, 1), got {tau}')
        scale = self.z_beta / math.sqrt(self.k)
        for row in self.per_p:
            if row.captured > tau + scale * row.sigma_hat:
                return row.p
        return self.d

    def to_rows(self):
        return [
            {'p': row.p, 'captured': row.captured, 'sigma_hat': row.sigma_hat,
             'threshold': row.threshold, 'accepted': int(row.accepted)}
            for row in self.per_p
        ]


def _squared_norm_variance(squared_norms, captured, k):
    residual = squared_norms - captured
    return float(np.sum(residual * residual) / (k - 1))


def sigma_hat_p(sample, fit):
    """
    σ̂ₚ：超阈值角度在 V̂ 上投影平方范数的经验标准差

    Args:
        sample: AngularSample（k >= 2）
        fit: PcaFit

    Returns:
        float: 非负的 σ̂ₚ
    """
    if sample.k < 2:
        raise DomainError(f'need k >= 2 to estimate a variance, got {sample.k}')
    angles = sample.angles
    squared_norms = np.einsum('ij,jk,ik->i', angles, fit.projection.matrix, angles)
    return math.sqrt(_squared_norm_variance(squared_norms, fit.captured, sample.k))


def select_dimension(sample, sigma, tau, beta):
    """
    数据驱动的投影维数 p̂

    Args:
        sample: 用于拟合的超阈值样本（k̃ 个）
        sigma: 对应的经验混合矩矩阵
        tau: 捕获比例目标，0 < tau < 1
        beta: 正态分位数的水平，0 < beta < 1

    Returns:
        DimensionSelection
    """
    if not 0.0 < tau < 1.0:
        raise DomainError(f'tau must lie in (0, 1), got {tau}')
    if not 0.0 < beta < 1.0:
        raise DomainError(f'beta must lie in (0, 1), got {beta}')
    k = sample.k
    if k < 2:
        raise DomainError(f'need k >= 2 to select a dimension, got {k}')

    eigen = symmetric_eigh(sigma.matrix)
    z_beta = normal_quantile(beta)
    scale = z_beta / math.sqrt(k)
    captured = np.cumsum(eigen.eigenvalues)
    # 每个角度投影到前 p 个特征向量后的范数平方，所有 p 一次算出
    coords = sample.angles @ eigen.eigenvectors
    partial_norms = np.cumsum(coords * coords, axis=1)

    rows = []
    p_hat = None
    d = eigen.dim
    for p in range(1, d + 1):
        sd = math.sqrt(_squared_norm_variance(partial_norms[:, p - 1], captured[p - 1], k))
        row = DimensionRow(p, float(captured[p - 1]), sd, tau + scale * sd)
        rows.append(row)
        if p_hat is None and row.accepted:
            p_hat = p
    if p_hat is None:
        logger.debug('[Dimension] no p passed the strict test, forcing p_hat=d=%d', d)
        p_hat = d
    logger.debug('[Dimension] k=%d tau=%.3g beta=%.3g -> p_hat=%d', k, tau, beta, p_hat)
    return DimensionSelection(p_hat, tau, beta, k, z_beta, tuple(rows))
