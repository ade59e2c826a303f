"""
PCA 所需的稠密对称矩阵线性代数。

矩阵一律是 float64 的 numpy 数组。特征分解用循环 Jacobi 方法，按循环赛顺序
安排坐标对，每一轮同时旋转 d/2 个互不相交的坐标对，行列更新全部向量化。
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from my_modules.core.errors import DomainError, ShapeError

logger = logging.getLogger(__name__)

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
TIE_TOL = 1e-12
DEFAULT_GAP_TOL = 1e-8
EXPM_TAYLOR_ORDER = 12


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SymmetricEigen:
    """特征值降序排列，特征向量按列对应且正交归一"""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'eigenvalues', _frozen(self.eigenvalues))
        object.__setattr__(self, 'eigenvectors', _frozen(self.eigenvectors))

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


@dataclass(frozen=True)
class EigenClusters:
    """
    数值上相等的特征值分组。

    boundaries 为 N_1 < ... < N_m = d（N_0 = 0 省略），cluster_values 为各组均值
    mu_1 > ... > mu_m。
    """
    boundaries: tuple
    cluster_values: tuple

    @property
    def count(self):
        return len(self.boundaries)

    def ranges(self):
        """各组的下标范围 (start, stop)，从 0 开始、左闭右开"""
        starts = (0,) + self.boundaries[:-1]
        return list(zip(starts, self.boundaries))

    def cluster_of(self, p):
        """满足 N_{J-1} < p <= N_J 的组号 J（从 1 开始）"""
        for j, boundary in enumerate(self.boundaries, start=1):
            if p <= boundary:
                return j
        raise DomainError(f'index {p} beyond dimension {self.boundaries[-1]}')

    def is_boundary(self, p):
        return p in self.boundaries


@dataclass(frozen=True)
class ProjectionMatrix:
    """正交投影矩阵，构造时校验对称、幂等与迹"""
    matrix: np.ndarray
    rank: int

    def __post_init__(self):
        m = _frozen(self.matrix)
        object.__setattr__(self, 'matrix', m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f'projection must be square, got shape {m.shape}')
        if np.max(np.abs(m - m.T), initial=0.0) > 1e-10:
            raise DomainError('projection matrix is not symmetric')
        if np.max(np.abs(m @ m - m), initial=0.0) > 1e-9:
            raise DomainError('projection matrix is not idempotent')
        if abs(np.trace(m) - self.rank) > 1e-9:
            raise DomainError(f'projection trace {np.trace(m):.12g} differs from rank {self.rank}')

    @property
    def dim(self):
        return self.matrix.shape[0]

    def complement(self):
        return ProjectionMatrix(np.eye(self.dim) - self.matrix, self.dim - self.rank)


def _check_square(m, name='matrix'):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f'{name} must be square, got shape {m.shape}')
    if not np.all(np.isfinite(m)):
        raise DomainError(f'{name} has non-finite entries')
    return m


def _round_robin(d):
    """坐标对的循环赛安排：d-1 轮（d 为奇数时 d 轮），每轮的坐标对互不相交，合起来覆盖全部坐标对"""
    m = d + (d % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < d and b < d:
                pairs.append((min(a, b), max(a, b)))
        if pairs:
            rounds.append((np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_norm(a):
    off = a - np.diag(np.diag(a))
    return math.sqrt(float(np.sum(off * off)))


def _canonical_order(values, vectors):
    # 符号：第一个超过容差的分量为正
    for i in range(vectors.shape[1]):
        col = vectors[:, i]
        lead = np.flatnonzero(np.abs(col) > TIE_TOL)
        if lead.size and col[lead[0]] < 0:
            vectors[:, i] = -col

    order = list(np.argsort(-values, kind='stable'))
    result = []
    group = [order[0]]
    for idx in order[1:]:
        if abs(values[group[-1]] - values[idx]) <= TIE_TOL:
            group.append(idx)
        else:
            result.extend(sorted(group, key=lambda c: tuple(-vectors[:, c])))
            group = [idx]
    result.extend(sorted(group, key=lambda c: tuple(-vectors[:, c])))
    return values[result], vectors[:, result]


def symmetric_eigh(s):
    """
    用循环 Jacobi 扫描做对称矩阵的特征分解

    Args:
        s: d x d 对称数组

    Returns:
        SymmetricEigen，特征值非增
    """
    s = _check_square(s, 'symmetric input')
    scale = np.max(np.abs(s), initial=0.0)
    if np.max(np.abs(s - s.T), initial=0.0) > 1e-12 * max(scale, np.finfo(float).tiny):
        raise DomainError('input matrix is not symmetric')
    d = s.shape[0]
    a = 0.5 * (s + s.T)
    v = np.eye(d)
    if d == 1:
        return SymmetricEigen(np.diag(a).copy(), v)

    tol = JACOBI_TOL * np.linalg.norm(a)
    off = _off_norm(a)
    rounds = _round_robin(d)
    sweeps = 0
    while off > tol and sweeps < JACOBI_MAX_SWEEPS:
        sweeps += 1
        for p_idx, q_idx in rounds:
            apq = a[p_idx, q_idx]
            active = apq != 0.0
            if not active.any():
                continue
            with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
                tau = (a[q_idx, q_idx] - a[p_idx, p_idx]) / (2.0 * apq)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            t = np.where(active & np.isfinite(t), t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            sn = t * c

            col_p, col_q = a[:, p_idx].copy(), a[:, q_idx].copy()
            a[:, p_idx] = c * col_p - sn * col_q
            a[:, q_idx] = sn * col_p + c * col_q
            row_p, row_q = a[p_idx, :].copy(), a[q_idx, :].copy()
            a[p_idx, :] = c[:, None] * row_p - sn[:, None] * row_q
            a[q_idx, :] = sn[:, None] * row_p + c[:, None] * row_q
            a[p_idx, q_idx] = 0.0
            a[q_idx, p_idx] = 0.0

            vec_p, vec_q = v[:, p_idx].copy(), v[:, q_idx].copy()
            v[:, p_idx] = c * vec_p - sn * vec_q
            v[:, q_idx] = sn * vec_p + c * vec_q

        new_off = _off_norm(a)
        if new_off >= off:
            # 已到舍入误差下限
            off = new_off
            break
        off = new_off

    logger.debug('[Jacobi] d=%d sweeps=%d off=%.3e', d, sweeps, off)
    values, vectors = _canonical_order(np.diag(a).copy(), v)
    return SymmetricEigen(values, vectors)


def top_p_projection(eigen, p):
    """前 p 个特征向量张成空间上的投影"""
    d = eigen.dim
    if not 1 <= p <= d:
        raise DomainError(f'p must lie in [1, {d}], got {p}')
    if p == d:
        return ProjectionMatrix(np.eye(d), d)
    head = eigen.eigenvectors[:, :p]
    return ProjectionMatrix(head @ head.T, p)


def cluster_eigenvalues(eigenvalues, gap_tol=DEFAULT_GAP_TOL):
    """
    把相邻差不超过 gap_tol 的特征值合并成组

    Args:
        eigenvalues: 非增序列
        gap_tol: 正的绝对容差

    Returns:
        EigenClusters
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if gap_tol <= 0:
        raise DomainError('gap_tol must be positive')
    if lam.ndim != 1 or lam.size == 0:
        raise ShapeError('eigenvalues must be a non-empty vector')
    if np.any(np.diff(lam) > TIE_TOL):
        raise DomainError('eigenvalues must be sorted in non-increasing order')

    boundaries = []
    values = []
    start = 0
    for i in range(1, lam.size + 1):
        if i == lam.size or lam[i - 1] - lam[i] > gap_tol:
            boundaries.append(i)
            values.append(float(np.mean(lam[start:i])))
            start = i
    return EigenClusters(tuple(boundaries), tuple(values))


def hs_inner(a, b):
    """Hilbert-Schmidt 内积 tr(A B^T)"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeError(f'shape mismatch {a.shape} vs {b.shape}')
    return float(np.sum(a * b))


def hs_norm(a):
    return math.sqrt(hs_inner(a, a))


def expm(m):
    """
    矩阵指数：截断 Taylor 级数加缩放平方。

    平方次数为 ceil(log2(max(1, ||M||_1))) + 3，Taylor 阶数为 EXPM_TAYLOR_ORDER。
    """
    m = _check_square(m, 'expm input')
    d = m.shape[0]
    norm1 = np.linalg.norm(m, 1) if d else 0.0
    squarings = math.ceil(math.log2(max(1.0, norm1))) + 3
    scaled = m / (2.0 ** squarings)

    coeffs = [1.0]
    for i in range(EXPM_TAYLOR_ORDER):
        coeffs.append(coeffs[-1] / (i + 1))
    identity = np.eye(d)
    result = identity * coeffs[-1]
    for c in reversed(coeffs[:-1]):
        result = scaled @ result + identity * c
    for _ in range(squarings):
        result = result @ result
    return result


def givens_rotation(d, i, j, phi):
    """单位阵，只在坐标 (i, j) 上换成旋转块 [[cos, -sin], [sin, cos]]"""
    if i == j:
        raise DomainError('rotation axes must differ')
    if not (0 <= i < d and 0 <= j < d):
        raise DomainError(f'axes ({i}, {j}) out of range for dimension {d}')
    g = np.eye(d)
    c, s = math.cos(phi), math.sin(phi)
    g[i, i] = c
    g[j, j] = c
    g[i, j] = -s
    g[j, i] = s
    return g
