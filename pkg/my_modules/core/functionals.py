#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
角测度估计与尾部泛函

模块概述：
    - pca_angular_measure: 在 k̃ 个最大观测上拟合 PCA 子空间（可选自动选维数），
      把 k 个最大观测投影到该子空间后重新归一化作为原子，每个原子权重 1/k
    - functional_i ~ functional_iv: 四个尾部概率，作用在任意离散角测度上
    - rank_frechet_standardize: 实际数据的边缘标准化（秩 → 单位 Fréchet）
    - 角测度 CSV 读写

约定：
    被积函数 (ii)-(iv) 中负坐标先截断为 0 再取幂；(iii) 的分母对全部 d 个坐标取最大值；
    投影为零的原子连同其权重一起删除，不重新分配质量。
"""

import csv
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import rankdata

from my_modules.core.dimension import select_dimension
from my_modules.core.errors import DataFormatError, DomainError
from my_modules.core.extremes import (
    DataMatrix,
    DiscreteAngularMeasure,
    empirical_moment_matrix,
    extract_exceedances,
    is_number,
)
from my_modules.core.pca import fit_pca

logger = logging.getLogger(__name__)

FUNCTIONAL_NAMES = ('i', 'ii', 'iii', 'iv')

# 模拟研究使用的 t_(i)，键为 (模型族, d, p)
_STUDY_THRESHOLDS = {
    ('dirichlet', 10, 2): 0.65,
    ('gumbel', 10, 2): 0.7,
    ('dirichlet', 100, 5): 0.4,
    ('gumbel', 100, 5): 0.44,
}


@dataclass(frozen=True)
class TailFunctionalParams:
    """
    尾部泛函参数

    Args:
        alpha: 尾指数 α > 0
        p_model: 泛函 (i)(ii) 中的 p
        t_i: 泛函 (i) 的阈值，0 < t_i < p^{-1/2}
    """
    alpha: float
    p_model: int
    t_i: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f'alpha must be positive, got {self.alpha}')
        if self.p_model < 1:
            raise DomainError(f'p_model must be at least 1, got {self.p_model}')
        if not 0.0 < self.t_i < self.p_model ** -0.5:
            raise DomainError(f't_i must lie in (0, {self.p_model ** -0.5:.6g}), got {self.t_i}')


@dataclass(frozen=True)
class EstimatorConfig:
    """
    角测度估计器配置

    p 为 None 时按 (tau, beta) 自动选择维数。k_tilde 个最大观测用于拟合子空间，
    k 个最大观测构成测度。
    """
    k: int
    k_tilde: int
    p: Optional[int] = None
    tau: float = 0.95
    beta: float = 0.95

    @property
    def auto(self):
        return self.p is None

    def validate(self, n, d):
        if not 1 <= self.k_tilde <= self.k <= n - 1:
            raise DomainError(
                f'need 1 <= k_tilde <= k <= n-1, got k_tilde={self.k_tilde}, k={self.k}, n={n}')
        if self.auto:
            if self.k_tilde < 2:
                raise DomainError('automatic dimension selection needs k_tilde >= 2')
            if not (0.0 < self.tau < 1.0 and 0.0 < self.beta < 1.0):
                raise DomainError(f'tau and beta must lie in (0, 1), got {self.tau}, {self.beta}')
        elif not 1 <= self.p <= d:
            raise DomainError(f'p must lie in [1, {d}], got {self.p}')


def _positive_part(x):
    return np.maximum(x, 0.0)


def pca_angular_measure(data, cfg):
    """
    PCA 投影后的角测度估计

    Args:
        data: DataMatrix
        cfg: EstimatorConfig

    Returns:
        DiscreteAngularMeasure（dimension 为实际使用的 p，dropped 为删除的原子数）
    """
    cfg.validate(data.n, data.d)
    fit_sample = extract_exceedances(data, cfg.k_tilde)
    fit_sigma = empirical_moment_matrix(fit_sample)
    if cfg.auto:
        p = select_dimension(fit_sample, fit_sigma, cfg.tau, cfg.beta).p_hat
    else:
        p = cfg.p

    sample = fit_sample if cfg.k == cfg.k_tilde else extract_exceedances(data, cfg.k)
    weight = 1.0 / cfg.k
    if p == data.d:
        atoms = sample.angles
        return DiscreteAngularMeasure(atoms, np.full(sample.count, weight), cfg.k, dimension=p)

    projection = fit_pca(fit_sigma, p).projection.matrix
    projected = sample.angles @ projection
    norms = np.linalg.norm(projected, axis=1)
    keep = norms > 0.0
    dropped = int(sample.count - np.count_nonzero(keep))
    if sample.count and not keep.any():
        raise DomainError('every exceedance projects to zero on the fitted subspace')
    if dropped:
        logger.debug('[Functionals] dropped %d atoms with zero projection (mass %.4g)', dropped, dropped * weight)
    atoms = projected[keep] / norms[keep, None]
    return DiscreteAngularMeasure(atoms, np.full(atoms.shape[0], weight), cfg.k, dropped=dropped, dimension=p)


def functional_i(measure, prm):
    """H{x : mean of the first p coordinates > t_i}"""
    if measure.size == 0:
        return 0.0
    head_mean = np.mean(measure.atoms[:, :prm.p_model], axis=1)
    return float(np.sum(measure.weights[head_mean > prm.t_i]))


def functional_ii(measure, prm):
    """∫ ((min_{j<=p} x_j)^α - (max_{j>p} x_j)^α)^+ H(dx)"""
    if measure.size == 0:
        return 0.0
    powered = _positive_part(measure.atoms) ** prm.alpha
    head = np.min(powered[:, :prm.p_model], axis=1)
    tail = powered[:, prm.p_model:]
    tail_max = np.max(tail, axis=1) if tail.shape[1] else np.zeros(measure.size)
    return float(np.sum(measure.weights * _positive_part(head - tail_max)))


def functional_iii(measure, prm):
    """∫ (x_1)^α H(dx) / ∫ (max_{j<=d} x_j)^α H(dx)"""
    powered = _positive_part(measure.atoms) ** prm.alpha
    denominator = float(np.sum(measure.weights * np.max(powered, axis=1))) if measure.size else 0.0
    if denominator <= 0.0:
        raise DomainError('functional (iii) has a zero denominator')
    return float(np.sum(measure.weights * powered[:, 0])) / denominator


def functional_iv(measure, prm):
    """∫ (min_{j<=d} x_j)^α H(dx)"""
    if measure.size == 0:
        return 0.0
    powered = _positive_part(measure.atoms) ** prm.alpha
    return float(np.sum(measure.weights * np.min(powered, axis=1)))


FUNCTIONALS = {
    'i': functional_i,
    'ii': functional_ii,
    'iii': functional_iii,
    'iv': functional_iv,
}


def evaluate_functionals(measure, prm):
    """四个泛函一次算完，返回 {'i': ..., 'ii': ..., 'iii': ..., 'iv': ...}"""
    return {name: FUNCTIONALS[name](measure, prm) for name in FUNCTIONAL_NAMES}


def default_functional_params(spec):
    """模拟研究中使用的泛函参数；α 取模型的尾指数"""
    group = 'gumbel' if spec.family == 'gumbel' else 'dirichlet'
    t_i = _STUDY_THRESHOLDS.get((group, spec.d, spec.p), 0.9 / math.sqrt(spec.p))
    return TailFunctionalParams(alpha=spec.alpha, p_model=spec.p, t_i=t_i)


def rank_frechet_standardize(data):
    """
    边缘秩标准化到单位 Fréchet 分布

    每列替换为 -1/log(rank/(n+1))，并列按输入顺序打破。
    """
    values = data.values
    n = values.shape[0]
    if n < 2:
        raise DomainError(f'need at least 2 observations to standardize, got {n}')
    constant = [j + 1 for j in range(values.shape[1]) if np.all(values[:, j] == values[0, j])]
    if constant:
        raise DomainError(f'constant columns cannot be rank-standardized: {constant}')
    ranks = rankdata(values, method='ordinal', axis=0)
    return DataMatrix(-1.0 / np.log(ranks / (n + 1.0)))


def write_measure_csv(path, measure):
    """一行一个原子：d 个坐标列加一个 weight 列"""
    d = measure.atoms.shape[1]
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow([f'x{j + 1}' for j in range(d)] + ['weight'])
        for atom, weight in zip(measure.atoms, measure.weights):
            writer.writerow([f'{x:.17g}' for x in atom] + [f'{weight:.17g}'])


def read_measure_csv(path, k=None):
    """
    读取 write_measure_csv 写出的角测度

    Args:
        path: 文件路径
        k: 超阈值预算；为 None 时由最大权重 1/k 推出
    """
    atoms, weights = [], []
    with open(path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header or header[-1].strip() != 'weight':
            raise DataFormatError('measure file must start with a header ending in "weight"', row=1)
        width = len(header)
        for line_no, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != width:
                raise DataFormatError(f'expected {width} columns, found {len(record)}', row=line_no)
            try:
                row = [float(cell) for cell in record]
            except ValueError:
                bad = next(i for i, cell in enumerate(record) if not is_number(cell))
                raise DataFormatError(f'cannot parse {record[bad]!r}', row=line_no, column=bad + 1)
            atoms.append(row[:-1])
            weights.append(row[-1])
    weights = np.array(weights, dtype=float)
    if k is None:
        if not weights.size or weights.max() <= 0:
            raise DataFormatError('cannot infer k from an empty or massless measure')
        k = int(round(1.0 / weights.max()))
    atoms = np.array(atoms, dtype=float).reshape(len(weights), width - 1)
    return DiscreteAngularMeasure(atoms, weights, k)
