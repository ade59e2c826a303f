#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
模拟模型模块

三个模型族：
    - gumbel: 前 p 个坐标服从 logistic（Gumbel 连接函数）极值分布，Fréchet(α) 边缘，
      其余坐标为 0；正稳定混合构造（Kanter 公式）
    - dirichlet: 前 p 个坐标 = Pareto(α) 半径 × Dirichlet 角度（欧氏归一化）
    - dirichlet_rotated: 在 dirichlet 基础上，每个观测在随机平面（一个轴取自前 p 个，
      一个取自后 d-p 个）内做随机角度的 Givens 旋转
最后对每个坐标加上 |N(0, σ²)| 噪声。

sample_limit_angles 从无噪声模型的精确角极限分布抽样（带权重），供 oracle 使用。
"""

import logging
import math
from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from my_modules.core.errors import DomainError
from my_modules.core.extremes import DataMatrix

logger = logging.getLogger(__name__)

DEFAULT_NOISE_SIGMA = 1.0
DEFAULT_THETA = 2.0
DEFAULT_DIRICHLET_PARAM = 3.0
DEFAULT_ROTATION_BOUND = math.pi / 10

_TINY = np.finfo(float).tiny


class ModelSpec(BaseModel):
    """
    模型参数

    Args:
        family: gumbel / dirichlet / dirichlet_rotated
        d: 维数
        p: 支撑维数，1 <= p < d
        alpha: 尾指数
        theta: Gumbel 依赖参数 ϑ >= 1
        dirichlet_params: Dirichlet 参数（默认 p 个 3）
        noise_sigma: 噪声标准差
        rotation_angle_bound: 旋转角上界（弧度）
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    family: Literal['gumbel', 'dirichlet', 'dirichlet_rotated']
    d: int = Field(ge=2)
    p: int = Field(ge=1)
    alpha: float = Field(default=1.0, gt=0)
    theta: float = Field(default=DEFAULT_THETA, ge=1.0)
    dirichlet_params: Optional[Tuple[float, ...]] = None
    noise_sigma: float = Field(default=DEFAULT_NOISE_SIGMA, ge=0.0)
    rotation_angle_bound: float = Field(default=DEFAULT_ROTATION_BOUND, ge=0.0)

    @field_validator('dirichlet_params', mode='before')
    @classmethod
    def _split_params(cls, value):
        if isinstance(value, str):
            value = [item for item in value.split(',') if item.strip()]
        return value

    @model_validator(mode='after')
    def _check_ranges(self):
        if self.p >= self.d:
            raise ValueError(f'p must be smaller than d, got p={self.p}, d={self.d}')
        if self.dirichlet_params is not None:
            if len(self.dirichlet_params) != self.p:
                raise ValueError(f'dirichlet_params needs {self.p} values, got {len(self.dirichlet_params)}')
            if min(self.dirichlet_params) <= 0:
                raise ValueError('dirichlet_params must be positive')
        return self

    def params(self):
        if self.dirichlet_params is None:
            return np.full(self.p, DEFAULT_DIRICHLET_PARAM)
        return np.asarray(self.dirichlet_params, dtype=float)

    def as_config(self):
        """扁平的 key=value 字典（键不带 model. 前缀）"""
        out = {
            'family': self.family,
            'd': str(self.d),
            'p': str(self.p),
            'alpha': repr(self.alpha),
            'noise_sigma': repr(self.noise_sigma),
        }
        if self.family == 'gumbel':
            out['theta'] = repr(self.theta)
        else:
            out['dirichlet_params'] = ','.join(repr(float(x)) for x in self.params())
        if self.family == 'dirichlet_rotated':
            out['rotation_angle_bound'] = repr(self.rotation_angle_bound)
        return out


def frechet_quantile(u, alpha):
    """Fréchet(α) 分位数 (-log u)^{-1/α}"""
    u = np.maximum(np.asarray(u, dtype=float), _TINY)
    return (-np.log(u)) ** (-1.0 / alpha)


def sample_frechet(rng, alpha, n):
    if not alpha > 0:
        raise DomainError(f'alpha must be positive, got {alpha}')
    return frechet_quantile(rng.uniform(size=n), alpha)


def _positive_stable(rng, index, n):
    """Kanter 表示：Laplace 变换为 exp(-t^index) 的正稳定变量"""
    u = rng.uniform(size=n, low=0.0, high=math.pi)
    w = rng.standard_exponential(n)
    u = np.maximum(u, _TINY)
    with np.errstate(divide='ignore', invalid='ignore'):
        head = np.sin(index * u) / np.sin(u) ** (1.0 / index)
        tail = (np.sin((1.0 - index) * u) / w) ** ((1.0 - index) / index)
    return head * tail


def _half_normal(rng, shape, sigma):
    return np.abs(sigma * rng.standard_normal(shape))


def apply_noise(rng, data, sigma):
    """每个坐标加上独立的 |N(0, σ²)|"""
    if sigma < 0:
        raise DomainError(f'noise sigma must be nonnegative, got {sigma}')
    values = data.values if isinstance(data, DataMatrix) else np.asarray(data, dtype=float)
    if sigma == 0:
        return DataMatrix(values)
    return DataMatrix(values + _half_normal(rng, values.shape, sigma))


def sample_gumbel_model(rng, spec, n):
    """
    Gumbel 连接函数模型

    S 为指数 1/ϑ 的正稳定变量，Z_j = (S/E_j)^{1/ϑ} 为单位 Fréchet 且联合分布为
    logistic 极值分布，X_j = Z_j^{1/α}。ϑ=1 时 S ≡ 1，各坐标独立。
    """
    if spec.family != 'gumbel':
        raise DomainError(f'expected a gumbel spec, got {spec.family}')
    index = 1.0 / spec.theta
    s = _positive_stable(rng, index, n)
    e = np.maximum(rng.standard_exponential((n, spec.p)), _TINY)
    z = (s[:, None] / e) ** index
    values = np.zeros((n, spec.d))
    values[:, :spec.p] = z ** (1.0 / spec.alpha)
    return apply_noise(rng, values, spec.noise_sigma)


def sample_dirichlet(rng, params, size=None):
    """
    Gamma 比值法抽取 Dirichlet 向量

    Args:
        rng: RngStream
        params: 正参数
        size: None 返回一个向量，否则返回 size 行
    """
    params = np.asarray(params, dtype=float)
    if np.any(params <= 0):
        raise DomainError('dirichlet parameters must be positive')
    shape = params.shape if size is None else (size, params.size)
    g = rng.standard_gamma(np.broadcast_to(params, shape))
    return g / np.sum(g, axis=-1, keepdims=True)


def _random_plane_rotations(rng, spec, n):
    i = rng.integers(0, spec.p, size=n)
    j = rng.integers(spec.p, spec.d, size=n)
    phi = rng.uniform(size=n, low=-spec.rotation_angle_bound, high=spec.rotation_angle_bound)
    return i, j, phi


def _rotate_rows(values, i, j, phi):
    rows = np.arange(values.shape[0])
    c, s = np.cos(phi), np.sin(phi)
    xi, xj = values[rows, i].copy(), values[rows, j].copy()
    values[rows, i] = c * xi - s * xj
    values[rows, j] = s * xi + c * xj
    return values


def _dirichlet_angles(rng, spec, n):
    w = sample_dirichlet(rng, spec.params(), size=n)
    return w / np.linalg.norm(w, axis=1)[:, None]


def sample_dirichlet_model(rng, spec, n):
    """
    Dirichlet 角度 × Pareto 半径模型

    抽样顺序固定为：角度、半径、噪声、旋转；旋转界为 0 时与无旋转模型逐位相同。
    """
    if spec.family not in ('dirichlet', 'dirichlet_rotated'):
        raise DomainError(f'expected a dirichlet spec, got {spec.family}')
    angles = _dirichlet_angles(rng, spec, n)
    radius = (1.0 - rng.uniform(size=n)) ** (-1.0 / spec.alpha)
    values = np.zeros((n, spec.d))
    values[:, :spec.p] = radius[:, None] * angles
    noise = _half_normal(rng, values.shape, spec.noise_sigma) if spec.noise_sigma > 0 else None
    if spec.family == 'dirichlet_rotated':
        values = _rotate_rows(values, *_random_plane_rotations(rng, spec, n))
    if noise is not None:
        values = values + noise
    return DataMatrix(values)


MODEL_FAMILIES = {
    'gumbel': sample_gumbel_model,
    'dirichlet': sample_dirichlet_model,
    'dirichlet_rotated': sample_dirichlet_model,
}


def sample_model(rng, spec, n):
    if n < 0:
        raise DomainError(f'sample size must be nonnegative, got {n}')
    data = MODEL_FAMILIES[spec.family](rng, spec, n)
    logger.debug('[Models] sampled %d x %d from %s', data.n, data.d, spec.family)
    return data


def _gumbel_simplex_angles(rng, spec, size):
    # logistic 模型的 l1 谱测度：按大小偏倚选出的坐标 j 取 Gamma(1 - 1/theta)，
    # 其余 V = E^{-1/theta}（归一化常数相消）
    p = spec.p
    j = rng.integers(0, p, size=size)
    if spec.theta == 1.0:
        omega = np.zeros((size, p))
        omega[np.arange(size), j] = 1.0
        return omega
    e = rng.standard_exponential((size, p))
    e[np.arange(size), j] = rng.standard_gamma(1.0 - 1.0 / spec.theta, size)
    log_v = -np.log(np.maximum(e, _TINY)) / spec.theta
    log_v -= np.max(log_v, axis=1, keepdims=True)
    v = np.exp(log_v)
    return v / np.sum(v, axis=1, keepdims=True)


def sample_limit_angles(rng, spec, size):
    """
    从无噪声模型的角极限测度抽样

    Returns:
        tuple: (angles, weights)，angles 为 size x d 的单位向量，
        期望用 Σ w f(Θ) / Σ w 计算（dirichlet 族权重恒为 1）
    """
    values = np.zeros((size, spec.d))
    if spec.family == 'gumbel':
        omega = _gumbel_simplex_angles(rng, spec, size)
        powered = omega ** (1.0 / spec.alpha)
        norms = np.linalg.norm(powered, axis=1)
        values[:, :spec.p] = powered / norms[:, None]
        weights = norms ** spec.alpha
        return values, weights

    values[:, :spec.p] = _dirichlet_angles(rng, spec, size)
    if spec.family == 'dirichlet_rotated':
        values = _rotate_rows(values, *_random_plane_rotations(rng, spec, size))
    return values, np.ones(size)
