"""
极值 PCA：经验投影与最优投影、超额风险，以及最优投影附近的局部几何。

反对称矩阵与交叉块矩阵之间的映射都在框架的特征基下计算：记 M~ = V^T M V，
秩一块 Pi_i M Pi_j 就是元素 M~[i, j]，所以对 i <= p < j 的加权二重和化为与一个
只在右上块非零的权重矩阵做 Hadamard 积。
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from my_modules.core.errors import DegenerateSplitError, DomainError, ShapeError
from my_modules.core.linalg import (
    DEFAULT_GAP_TOL,
    ProjectionMatrix,
    cluster_eigenvalues,
    expm,
    hs_inner,
    symmetric_eigh,
    top_p_projection,
)

logger = logging.getLogger(__name__)

SPLIT_TOL = 1e-10
SKEW_TOL = 1e-12
BLOCK_TOL = 1e-10


@dataclass(frozen=True)
class PcaFit:
    eigen: object
    p: int
    projection: ProjectionMatrix
    captured: float

    @property
    def d(self):
        return self.eigen.dim

    def captured_fractions(self):
        """特征值的累积和，每个候选维数一项"""
        return np.cumsum(self.eigen.eigenvalues)


@dataclass(frozen=True)
class SkewMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f'skew matrix must be square, got {m.shape}')
        scale = max(1.0, np.max(np.abs(m), initial=0.0))
        if np.max(np.abs(m + m.T), initial=0.0) > SKEW_TOL * scale:
            raise DomainError('matrix is not skew-symmetric')
        m = 0.5 * (m - m.T)
        m.setflags(write=False)
        object.__setattr__(self, 'matrix', m)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __add__(self, other):
        return SkewMatrix(self.matrix + _skew_array(other))

    def scaled(self, c):
        return SkewMatrix(c * self.matrix)


@dataclass(frozen=True)
class EigenFrame:
    """
    极限（或经验）矩矩阵在秩 p 处分割的特征结构

    pi_star 投影到前 p 个特征向量，pi_perp 投影到其余部分。分割必须非退化：
    lambda_p - lambda_{p+1} > SPLIT_TOL。
    """
    matrix: np.ndarray
    eigen: object
    clusters: object
    p: int
    pi_star: ProjectionMatrix = field(init=False)
    pi_perp: ProjectionMatrix = field(init=False)

    def __post_init__(self):
        d = self.eigen.dim
        if not 1 <= self.p < d:
            raise DomainError(f'split rank p must lie in [1, {d - 1}], got {self.p}')
        lam = self.eigen.eigenvalues
        gap = lam[self.p - 1] - lam[self.p]
        if gap <= SPLIT_TOL:
            raise DegenerateSplitError(
                f'no eigenvalue gap at p={self.p}: lambda_p - lambda_(p+1) = {gap:.3e}')
        matrix = np.array(self.matrix, dtype=float)
        matrix.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)
        pi_star = top_p_projection(self.eigen, self.p)
        object.__setattr__(self, 'pi_star', pi_star)
        object.__setattr__(self, 'pi_perp', pi_star.complement())

    @property
    def dim(self):
        return self.eigen.dim

    @property
    def eigenvalues(self):
        return self.eigen.eigenvalues

    def to_eigenbasis(self, m):
        v = self.eigen.eigenvectors
        return v.T @ m @ v

    def from_eigenbasis(self, m):
        v = self.eigen.eigenvectors
        return v @ m @ v.T


def make_frame(matrix, p, gap_tol=DEFAULT_GAP_TOL):
    """对称矩阵（通常是 Sigma_inf）在秩 p 处分割的框架"""
    eigen = symmetric_eigh(matrix)
    clusters = cluster_eigenvalues(eigen.eigenvalues, gap_tol)
    return EigenFrame(np.asarray(matrix, dtype=float), eigen, clusters, p)


def frame_from_fit(fit, sigma=None, gap_tol=DEFAULT_GAP_TOL):
    """以拟合得到的 PCA 投影为中心的经验框架（基点 Pi_hat）"""
    clusters = cluster_eigenvalues(fit.eigen.eigenvalues, gap_tol)
    matrix = fit.eigen.reconstruct() if sigma is None else sigma.matrix
    return EigenFrame(matrix, fit.eigen, clusters, fit.p)


def fit_pca(sigma, p):
    eigen = symmetric_eigh(sigma.matrix)
    projection = top_p_projection(eigen, p)
    captured = float(np.sum(eigen.eigenvalues[:p]))
    return PcaFit(eigen, p, projection, captured)


def cluster_projections(eigen, clusters):
    """每个特征值组一个投影，全部相加为单位阵"""
    if not clusters.boundaries or clusters.boundaries[-1] != eigen.dim:
        raise DomainError(f'cluster boundaries {clusters.boundaries} do not end at d={eigen.dim}')
    v = eigen.eigenvectors
    result = []
    for start, stop in clusters.ranges():
        if stop <= start:
            raise DomainError(f'empty cluster ({start}, {stop})')
        block = v[:, start:stop]
        result.append(ProjectionMatrix(block @ block.T, stop - start))
    return result


def excess_risk(sigma_truth, projection, p):
    """<Sigma, Pi*> - <Sigma, Pi_hat>，Pi* 为 sigma_truth 的最优秩 p 投影"""
    if projection.rank != p:
        raise DomainError(f'projection has rank {projection.rank}, expected {p}')
    optimal = fit_pca(sigma_truth, p).projection
    return hs_inner(sigma_truth.matrix, optimal.matrix) - hs_inner(sigma_truth.matrix, projection.matrix)


def _skew_array(a):
    if isinstance(a, SkewMatrix):
        return a.matrix
    return SkewMatrix(a).matrix


def _symmetric_array(u, name='U'):
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ShapeError(f'{name} must be square, got {u.shape}')
    scale = max(1.0, np.max(np.abs(u), initial=0.0))
    if np.max(np.abs(u - u.T), initial=0.0) > BLOCK_TOL * scale:
        raise DomainError(f'{name} is not symmetric')
    return u


def _check_dim(frame, m):
    if m.shape != (frame.dim, frame.dim):
        raise ShapeError(f'expected {frame.dim}x{frame.dim}, got {m.shape}')


def _check_restricted(frame, a):
    scale = max(1.0, np.linalg.norm(a))
    ps, pp = frame.pi_star.matrix, frame.pi_perp.matrix
    inner = max(np.linalg.norm(ps @ a @ ps), np.linalg.norm(pp @ a @ pp))
    if inner > BLOCK_TOL * scale:
        raise DomainError(f'skew matrix has diagonal-block mass {inner:.3e}; project it first')


def _check_cross_block(frame, b):
    scale = max(1.0, np.linalg.norm(b))
    leak = max(np.linalg.norm(frame.pi_perp.matrix @ b), np.linalg.norm(b @ frame.pi_star.matrix))
    if leak > BLOCK_TOL * scale:
        raise DomainError(f'matrix is not of the form Pi* B Pi_perp (leak {leak:.3e})')


def _split_weights(frame, fn):
    lam = frame.eigenvalues
    p = frame.p
    w = np.zeros((frame.dim, frame.dim))
    w[:p, p:] = fn(lam[:p, None] - lam[None, p:])
    return w


def project_to_restricted_skew(b, frame):
    """Pi_perp B Pi* + Pi* B Pi_perp."""
    b = _skew_array(b)
    _check_dim(frame, b)
    ps, pp = frame.pi_star.matrix, frame.pi_perp.matrix
    return SkewMatrix(pp @ b @ ps + ps @ b @ pp)


def random_frame(rng, d, p, min_gap=0.05):
    """V diag(lambda) V^T 的框架：特征值均匀抽取，V 近似 Haar 分布，且 lambda_p - lambda_{p+1} >= min_gap"""
    lam = np.sort(rng.uniform(size=d))[::-1]
    gap = lam[p - 1] - lam[p]
    if gap < min_gap:
        lam[:p] += min_gap - gap
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    q = q * np.where(np.diag(r) < 0, -1.0, 1.0)
    sigma = (q * lam) @ q.T
    return make_frame(0.5 * (sigma + sigma.T), p)


def random_restricted_skew(frame, rng, scale=1.0):
    """投影到限制类上的高斯反对称矩阵，乘以 scale"""
    g = rng.standard_normal((frame.dim, frame.dim))
    return project_to_restricted_skew(SkewMatrix(scale * 0.5 * (g - g.T)), frame)


def local_projection(frame, a, k):
    """
    e^{-A/sqrt(k)} Pi* e^{A/sqrt(k)}

    frame 可以是极限框架，也可以是 frame_from_fit 给出的经验框架。
    """
    if k < 1:
        raise DomainError(f'k must be at least 1, got {k}')
    a = _skew_array(a)
    _check_dim(frame, a)
    q = expm(a / math.sqrt(k))
    m = q.T @ frame.pi_star.matrix @ q
    return ProjectionMatrix(0.5 * (m + m.T), frame.p)


def local_projection_expansion(frame, a, k):
    """local_projection 关于 k^{-1/2} 的二阶 Taylor 展开"""
    if k < 1:
        raise DomainError(f'k must be at least 1, got {k}')
    a = _skew_array(a)
    _check_dim(frame, a)
    ps = frame.pi_star.matrix
    a2 = a @ a
    first = ps @ a - a @ ps
    second = 0.5 * (ps @ a2 + a2 @ ps) - a @ ps @ a
    return ps + first / math.sqrt(k) + second / k


def s_lambda(a, frame):
    """S(A) = sum_{i<=p<j} sqrt(lambda_i - lambda_j) Pi_i A Pi_j."""
    a = _skew_array(a)
    _check_dim(frame, a)
    _check_restricted(frame, a)
    w = _split_weights(frame, np.sqrt)
    return frame.from_eigenbasis(w * frame.to_eigenbasis(a))


def t_lambda(b, frame):
    """T(B) = sum_{i<=p<j} Pi_i B Pi_j / sqrt(lambda_i - lambda_j)."""
    b = np.asarray(b, dtype=float)
    _check_dim(frame, b)
    w = _split_weights(frame, lambda gap: 1.0 / np.sqrt(gap))
    return frame.from_eigenbasis(w * frame.to_eigenbasis(b))


def tbar_lambda(b, frame):
    """T(B) - T(B)^T，即 s_lambda 在限制反对称类上的逆"""
    b = np.asarray(b, dtype=float)
    _check_dim(frame, b)
    _check_cross_block(frame, b)
    t = t_lambda(b, frame)
    return SkewMatrix(t - t.T)


def local_maximizer(u, frame):
    """A* = sum_{i<=p<j} (Pi_i U Pi_j - Pi_j U Pi_i) / (lambda_i - lambda_j)."""
    u = _symmetric_array(u)
    _check_dim(frame, u)
    w = _split_weights(frame, lambda gap: 1.0 / gap)
    half = w * frame.to_eigenbasis(u)
    return SkewMatrix(frame.from_eigenbasis(half - half.T))


def limit_risk_value(frame, a):
    """<Sigma, A^2 (Pi* - Pi_perp)>，局部理论风险的极限"""
    a = _skew_array(a)
    _check_dim(frame, a)
    return hs_inner(frame.matrix, a @ a @ (frame.pi_star.matrix - frame.pi_perp.matrix))


def limit_process_value(u, frame, a):
    """2<U, Pi* A> + <Sigma, A^2 (Pi* - Pi_perp)>."""
    u = _symmetric_array(u)
    a = _skew_array(a)
    _check_dim(frame, u)
    return 2.0 * hs_inner(u, frame.pi_star.matrix @ a) + limit_risk_value(frame, a)


def _cluster_gap_weights(frame, p):
    clusters = frame.clusters
    if not clusters.is_boundary(p) or p >= frame.dim:
        raise DegenerateSplitError(
            f'p={p} is not an interior cluster boundary (boundaries {clusters.boundaries})')
    mu = np.empty(frame.dim)
    for (start, stop), value in zip(clusters.ranges(), clusters.cluster_values):
        mu[start:stop] = value
    gaps = mu[:p, None] - mu[None, p:]
    if np.min(gaps) <= 0:
        raise DegenerateSplitError('cluster values are not strictly decreasing across the split')
    w = np.zeros((frame.dim, frame.dim))
    w[:p, p:] = 1.0 / gaps
    return w


def limit_projection_deviation(u, frame, p):
    """
    给定 sqrt(k)(Sigma_hat - Sigma) 的高斯极限 U 时 sqrt(k)(Pi_hat - Pi*) 的极限

    W_p = sum_{j<=J_p} sum_{l>J_p} (Pi_{W_l} U Pi_{W_j} + Pi_{W_j} U Pi_{W_l}) / (mu_j - mu_l)
    """
    u = _symmetric_array(u)
    _check_dim(frame, u)
    w = _cluster_gap_weights(frame, p)
    cross = w * frame.to_eigenbasis(u)
    result = frame.from_eigenbasis(cross + cross.T)
    return 0.5 * (result + result.T)


def limit_excess_risk(u, frame, p):
    """sum_{j<=J_p} sum_{m>J_p} ||Pi_{W_j} U Pi_{W_m}||^2 / (mu_j - mu_m)."""
    u = _symmetric_array(u)
    _check_dim(frame, u)
    w = _cluster_gap_weights(frame, p)
    ut = frame.to_eigenbasis(u)
    return float(np.sum(w * ut * ut))


def excess_risk_bound(eigenvalues, p, k):
    """
    超额风险上界的确定性部分

    对 1 <= i <= p < j <= d+1 取最小值：
        (1/(lambda_{i-1} - lambda_{p+1}) + 1/(lambda_p - lambda_j)) / k + lambda_i - lambda_{j-1}
    其中 lambda_0 = +inf，lambda_{d+1} = -inf。分母非正的 (i, j) 对取 +inf。
    """
    lam = np.asarray(eigenvalues, dtype=float)
    d = lam.size
    if not 1 <= p < d:
        raise DomainError(f'p must lie in [1, {d - 1}], got {p}')
    if k <= 0:
        raise DomainError('k must be positive')

    def value(idx):
        return lam[idx - 1]

    best = math.inf
    for i in range(1, p + 1):
        if i == 1:
            first = 0.0
        else:
            den = value(i - 1) - value(p + 1)
            first = 1.0 / den if den > 0 else math.inf
        for j in range(p + 1, d + 2):
            if j == d + 1:
                second = 0.0
            else:
                den = value(p) - value(j)
                second = 1.0 / den if den > 0 else math.inf
            bound = (first + second) / k + value(i) - value(j - 1)
            best = min(best, bound)
    return float(best)


def excess_risk_bound_coarse(eigenvalues, p, k, clusters):
    """1/k + min(k^{-1/2}, lambda_{N_{J_p - 1} + 1} - lambda_{N_{J_p}})."""
    lam = np.asarray(eigenvalues, dtype=float)
    if not 1 <= p < lam.size:
        raise DomainError(f'p must lie in [1, {lam.size - 1}], got {p}')
    j = clusters.cluster_of(p)
    start, stop = clusters.ranges()[j - 1]
    spread = lam[start] - lam[stop - 1]
    return 1.0 / k + min(1.0 / math.sqrt(k), float(spread))
