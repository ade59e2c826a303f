#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
超阈值（peaks-over-threshold）模块

模块概述：
    从原始观测中提取极端观测的角度部分，构造经验混合矩矩阵、经验风险和
    经验角测度。所有角度都用欧氏范数归一化到单位球面上，即 ω(x) = 1/‖x‖。

主要功能：
    - 极坐标变换与半径阈值选择（第 k+1 大的次序统计量）
    - 严格超过阈值的观测提取（除数始终为 k）
    - 经验混合矩矩阵 Σ̂ = (1/k) Σ ΘΘᵀ 与经验风险 ⟨Σ̂, Π⟩
    - 经验角测度（每个原子权重 1/k）
    - CSV 数据读写（错误信息包含行列号）
"""

import csv
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from my_modules.core.errors import DataFormatError, DomainError, ShapeError
from my_modules.core.linalg import hs_inner

logger = logging.getLogger(__name__)

UNIT_NORM_TOL = 1e-12


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class DataMatrix:
    """
    n x d 原始观测矩阵

    模拟器允许输出 n=0 的空矩阵（只写表头）；分析操作自己检查 n。
    """
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 2:
            raise ShapeError(f'data must be two-dimensional, got shape {values.shape}')
        if values.shape[1] < 2:
            raise ShapeError(f'data needs d >= 2 columns, got {values.shape[1]}')
        if not np.all(np.isfinite(values)):
            bad = sorted(set(np.argwhere(~np.isfinite(values))[:, 0].tolist()))
            raise DomainError(f'non-finite entries in rows {bad[:10]}')
        object.__setattr__(self, 'values', values)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    def radii(self):
        return np.linalg.norm(self.values, axis=1)

    def zero_rows(self):
        return np.flatnonzero(self.radii() == 0.0).tolist()


@dataclass(frozen=True)
class AngularSample:
    """严格超过阈值的观测：角度、半径与原始行号（按行号递增排列）"""
    threshold: float
    k: int
    angles: np.ndarray
    radii: np.ndarray
    rows: np.ndarray

    def __post_init__(self):
        angles = _frozen(self.angles)
        radii = _frozen(self.radii)
        object.__setattr__(self, 'angles', angles)
        object.__setattr__(self, 'radii', radii)
        object.__setattr__(self, 'rows', np.asarray(self.rows, dtype=int))
        if self.k < 1:
            raise DomainError('exceedance budget k must be at least 1')
        if angles.ndim != 2 or angles.shape[0] != radii.shape[0]:
            raise ShapeError('angles and radii do not match')
        if angles.shape[0] > self.k:
            raise DomainError(f'{angles.shape[0]} exceedances stored for budget k={self.k}')
        if radii.size and np.min(radii) <= self.threshold:
            raise DomainError('stored radius does not exceed the threshold')
        if angles.size and np.max(np.abs(np.linalg.norm(angles, axis=1) - 1.0)) > UNIT_NORM_TOL:
            raise DomainError('angles are not unit vectors')

    @property
    def count(self):
        return self.angles.shape[0]

    @property
    def d(self):
        return self.angles.shape[1]


@dataclass(frozen=True)
class MomentMatrix:
    """经验（或理论）混合矩矩阵，count 为参与平均的超阈值个数"""
    matrix: np.ndarray
    k: int
    count: Optional[int] = None

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f'moment matrix must be square, got {m.shape}')
        if np.max(np.abs(m - m.T), initial=0.0) > 1e-12:
            raise DomainError('moment matrix is not symmetric')
        object.__setattr__(self, 'matrix', m)

    @property
    def d(self):
        return self.matrix.shape[0]

    def trace(self):
        return float(np.trace(self.matrix))


@dataclass(frozen=True)
class DiscreteAngularMeasure:
    """
    加权原子构成的角测度

    dropped 记录因投影为零而删除的原子个数（对应的质量不再分配），
    dimension 记录构造时使用的投影维数（未知时为 None）。
    """
    atoms: np.ndarray
    weights: np.ndarray
    k: int
    dropped: int = 0
    dimension: Optional[int] = field(default=None)

    def __post_init__(self):
        atoms = _frozen(self.atoms)
        weights = _frozen(self.weights)
        if atoms.ndim != 2 or atoms.shape[0] != weights.shape[0]:
            raise ShapeError('atoms and weights do not match')
        if np.any(weights < 0):
            raise DomainError('weights must be nonnegative')
        if atoms.size and np.max(np.abs(np.linalg.norm(atoms, axis=1) - 1.0)) > UNIT_NORM_TOL:
            raise DomainError('atoms are not unit vectors')
        object.__setattr__(self, 'atoms', atoms)
        object.__setattr__(self, 'weights', weights)

    @property
    def size(self):
        return self.atoms.shape[0]

    def total_mass(self):
        return float(np.sum(self.weights))

    def mass_deficit(self):
        return self.dropped / self.k


def polar_transform(x):
    """
    极坐标变换 T(x) = (‖x‖, x/‖x‖)

    Args:
        x: 非零向量

    Returns:
        tuple: (半径, 单位角向量)
    """
    x = np.asarray(x, dtype=float)
    radius = float(np.linalg.norm(x))
    if radius == 0.0:
        raise DomainError('angle of the zero vector is undefined')
    return radius, x / radius


def threshold_select(radii, k):
    """
    返回半径中第 k+1 大的值 t̂ₙ,ₖ

    Args:
        radii: 长度为 n 的半径
        k: 超阈值个数，1 <= k <= n-1
    """
    radii = np.asarray(radii, dtype=float).ravel()
    n = radii.size
    if not 1 <= k <= n - 1:
        raise DomainError(f'k must lie in [1, n-1] = [1, {n - 1}], got {k}')
    position = n - k - 1
    return float(np.partition(radii, position)[position])


def extract_exceedances(data, k):
    """
    提取半径严格大于 t̂ₙ,ₖ 的观测

    Args:
        data: DataMatrix
        k: 超阈值预算

    Returns:
        AngularSample，半径有并列时个数可能少于 k
    """
    zero = data.zero_rows()
    if zero:
        raise DomainError(f'zero observations have no angle: rows {zero[:20]}')
    radii = data.radii()
    threshold = threshold_select(radii, k)
    rows = np.flatnonzero(radii > threshold)
    if rows.size < k:
        logger.debug('[Extremes] ties at threshold: %d strict exceedances for k=%d', rows.size, k)
    angles = data.values[rows] / radii[rows, None]
    return AngularSample(threshold=threshold, k=k, angles=angles, radii=radii[rows], rows=rows)


def empirical_moment_matrix(sample):
    """Σ̂ = (1/k) Σ ΘΘᵀ，对已存的超阈值观测求和，除数始终是 k"""
    angles = sample.angles
    m = angles.T @ angles / sample.k
    return MomentMatrix(0.5 * (m + m.T), sample.k, sample.count)


def empirical_risk(sigma, projection):
    """M̂(Π) = ⟨Σ̂, Π⟩ = (1/k) Σ Θᵀ Π Θ."""
    if sigma.d != projection.dim:
        raise ShapeError(f'moment matrix is {sigma.d}x{sigma.d}, projection {projection.dim}x{projection.dim}')
    return hs_inner(sigma.matrix, projection.matrix)


def reconstruction_error(sigma, projection):
    """(1/k) Σ ‖Θ − ΠΘ‖² = trace(Σ̂) − M̂(Π)."""
    return sigma.trace() - empirical_risk(sigma, projection)


def empirical_angular_measure(sample):
    weights = np.full(sample.count, 1.0 / sample.k)
    return DiscreteAngularMeasure(sample.angles, weights, sample.k, dimension=sample.d)


def hill_estimator(radii, k):
    """Hill 估计的尾指数 α（用最大的 k 个半径）"""
    radii = np.sort(np.asarray(radii, dtype=float))[::-1]
    if not 1 <= k < radii.size:
        raise DomainError(f'k must lie in [1, {radii.size - 1}]')
    logs = np.log(radii[:k] / radii[k])
    return float(1.0 / np.mean(logs))


def is_number(text):
    """text 能否解析为浮点数"""
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_data_csv(path):
    """
    读取观测 CSV 文件

    格式：表头可选，每行一个观测，逗号分隔，小数点。

    Returns:
        DataMatrix

    Raises:
        DataFormatError: 解析失败（带行列号）、列数不一致或存在零行
    """
    rows = []
    width = None
    with open(path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.reader(f)
        for line_no, record in enumerate(reader, start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            cells = [cell.strip() for cell in record]
            if line_no == 1 and not all(is_number(c) for c in cells):
                logger.debug('[Extremes] header detected in %s: %s', path, cells)
                width = len(cells)
                continue
            if width is None:
                width = len(cells)
            if len(cells) != width:
                raise DataFormatError(f'expected {width} columns, found {len(cells)}', row=line_no)
            parsed = []
            for col_no, cell in enumerate(cells, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise DataFormatError(f'cannot parse {cell!r} as a number', row=line_no, column=col_no)
            rows.append((line_no, parsed))

    if width is not None and width < 2:
        raise DataFormatError(f'need at least 2 columns, found {width}')
    values = np.array([r for _, r in rows], dtype=float).reshape(len(rows), width or 0)
    if values.size and not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        raise DataFormatError('non-finite value', row=rows[bad[0]][0], column=int(bad[1]) + 1)
    zero = [rows[i][0] for i in np.flatnonzero(np.linalg.norm(values, axis=1) == 0.0)] if values.size else []
    if zero:
        raise DataFormatError(f'zero observations (angle undefined) at rows {zero[:20]}')
    logger.info('[Extremes] loaded %d observations of dimension %d from %s', values.shape[0], values.shape[1], path)
    return DataMatrix(values)


def write_data_csv(path, values):
    """写出 n x d 观测矩阵，表头 x1..xd，17 位有效数字"""
    values = np.asarray(values, dtype=float)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow([f'x{j + 1}' for j in range(values.shape[1])])
        for row in values:
            writer.writerow([f'{x:.17g}' for x in row])
