"""
角测度估计量的 RMSE 研究与维数频率检查

第 r 次重复从 RngStream(seed, r) 抽样，表中每个数只取决于 (seed, 配置)。
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from my_modules.core.dimension import select_dimension
from my_modules.core.errors import ConfigError, DomainError
from my_modules.core.extremes import empirical_angular_measure, empirical_moment_matrix, extract_exceedances
from my_modules.core.functionals import (
    FUNCTIONAL_NAMES,
    EstimatorConfig,
    default_functional_params,
    evaluate_functionals,
    pca_angular_measure,
)
from my_modules.simulation.models import sample_model
from my_modules.simulation.rng import RngStream

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StudySettings:
    """估计量除数据与 k 之外需要的全部参数"""
    spec: object
    prm: object
    truths: dict
    k_tilde: int
    p_fixed: int
    tau: float = 0.95
    beta: float = 0.95


def _direct(data, k, settings):
    measure = empirical_angular_measure(extract_exceedances(data, k))
    return evaluate_functionals(measure, settings.prm), None


def _pca_estimator(alternative, auto):
    def estimate(data, k, settings):
        k_tilde = settings.k_tilde if alternative else k
        cfg = EstimatorConfig(k=k, k_tilde=k_tilde, p=None if auto else settings.p_fixed,
                              tau=settings.tau, beta=settings.beta)
        measure = pca_angular_measure(data, cfg)
        return evaluate_functionals(measure, settings.prm), measure.dimension
    return estimate


def _truth(data, k, settings):
    return dict(settings.truths), None


ESTIMATORS = {
    'direct': {'name': 'direct empirical measure', 'function': _direct, 'uses_k_tilde': False},
    'pca': {'name': 'PCA measure, fixed p', 'function': _pca_estimator(False, False), 'uses_k_tilde': False},
    'pca_auto': {'name': 'PCA measure, selected p', 'function': _pca_estimator(False, True), 'uses_k_tilde': False},
    'pca_alt': {'name': 'PCA measure fitted on k_tilde, fixed p', 'function': _pca_estimator(True, False),
                'uses_k_tilde': True},
    'pca_alt_auto': {'name': 'PCA measure fitted on k_tilde, selected p', 'function': _pca_estimator(True, True),
                     'uses_k_tilde': True},
    'truth': {'name': 'truth plugged in', 'function': _truth, 'uses_k_tilde': False},
}


def check_estimators(names):
    unknown = [name for name in names if name not in ESTIMATORS]
    if unknown:
        raise ConfigError(f'unknown estimators {unknown}; valid names: {", ".join(ESTIMATORS)}')


@dataclass
class RmseTable:
    spec: object
    n: int
    k_grid: tuple
    k_tilde: int
    replicates: int
    estimators: tuple
    truths: dict
    rmse: dict = field(default_factory=dict)
    mean_p_hat: dict = field(default_factory=dict)
    p_hit_rate: dict = field(default_factory=dict)

    def curve(self, estimator, functional):
        return self.rmse[(estimator, functional)]

    def to_rows(self):
        rows = []
        for estimator in self.estimators:
            for functional in FUNCTIONAL_NAMES:
                for k, value in zip(self.k_grid, self.rmse[(estimator, functional)]):
                    rows.append({'estimator': estimator, 'functional': functional, 'k': k,
                                 'rmse': value, 'truth': self.truths[functional]})
        return rows

    def dimension_rows(self):
        rows = []
        for estimator in self.estimators:
            if estimator not in self.mean_p_hat:
                continue
            for k, mean_p, hit in zip(self.k_grid, self.mean_p_hat[estimator], self.p_hit_rate[estimator]):
                rows.append({'estimator': estimator, 'k': k, 'mean_p_hat': mean_p, 'hit_rate': hit})
        return rows


def rmse_study(spec, n, k_grid, k_tilde, replicates, estimators, truths, seed,
               tau=0.95, beta=0.95, prm=None, p_fixed=None):
    """
    每个估计量、每个 k 下泛函 (i)-(iv) 的 RMSE

    Args:
        spec: ModelSpec
        n: 每次重复的样本量
        k_grid: 超阈值预算
        k_tilde: 替代估计量拟合子空间所用的预算
        replicates: 模拟样本个数
        estimators: ESTIMATORS 中的名字
        truths: {'i': ..., 'ii': ..., 'iii': ..., 'iv': ...}
        seed: 基础种子，第 r 次重复使用流 r
        p_fixed: 固定维数估计量的维数（默认 spec.p）

    Returns:
        RmseTable
    """
    k_grid = tuple(int(k) for k in k_grid)
    estimators = tuple(estimators)
    if not k_grid or not estimators:
        raise ConfigError('k grid and estimator list must be nonempty')
    check_estimators(estimators)
    if replicates < 1:
        raise ConfigError(f'replicates must be at least 1, got {replicates}')
    if max(k_grid) > n - 1 or min(k_grid) < 1:
        raise ConfigError(f'every k must lie in [1, n-1] = [1, {n - 1}], got {k_grid}')
    if any(ESTIMATORS[e]['uses_k_tilde'] for e in estimators) and not 1 <= k_tilde <= min(k_grid):
        raise ConfigError(f'k_tilde must lie in [1, min(k)] = [1, {min(k_grid)}], got {k_tilde}')
    missing = [name for name in FUNCTIONAL_NAMES if name not in truths]
    if missing:
        raise ConfigError(f'truth values missing for functionals {missing}')

    settings = StudySettings(
        spec=spec,
        prm=prm or default_functional_params(spec),
        truths=dict(truths),
        k_tilde=k_tilde,
        p_fixed=p_fixed or spec.p,
        tau=tau,
        beta=beta,
    )
    shape = (len(k_grid),)
    squared = {(e, f): np.zeros(shape) for e in estimators for f in FUNCTIONAL_NAMES}
    p_sum = {e: np.zeros(shape) for e in estimators}
    p_hits = {e: np.zeros(shape) for e in estimators}
    tracks_dimension = set()

    for r in range(replicates):
        data = sample_model(RngStream(seed, r), spec, n)
        for ki, k in enumerate(k_grid):
            for e in estimators:
                values, dimension = ESTIMATORS[e]['function'](data, k, settings)
                for f in FUNCTIONAL_NAMES:
                    squared[(e, f)][ki] += (values[f] - settings.truths[f]) ** 2
                if dimension is not None and e.endswith('_auto'):
                    tracks_dimension.add(e)
                    p_sum[e][ki] += dimension
                    p_hits[e][ki] += dimension == spec.p
        if (r + 1) % 50 == 0:
            logger.debug('[RmseStudy] %d/%d replicates', r + 1, replicates)

    table = RmseTable(spec, n, k_grid, k_tilde, replicates, estimators, settings.truths)
    for key, total in squared.items():
        table.rmse[key] = [math.sqrt(x / replicates) for x in total]
    for e in estimators:
        if e in tracks_dimension:
            table.mean_p_hat[e] = [x / replicates for x in p_sum[e]]
            table.p_hit_rate[e] = [x / replicates for x in p_hits[e]]
    logger.info('[RmseStudy] %s d=%d p=%d: %d replicates x %d budgets done',
                spec.family, spec.d, spec.p, replicates, len(k_grid))
    return table


def dimension_frequencies(spec, n, k, tau, beta, replicates, seed):
    """
    各次重复选出的维数的分布

    Returns:
        dict: {p_hat: 重复次数占比}，按 p_hat 排序
    """
    if replicates < 1:
        raise DomainError(f'replicates must be at least 1, got {replicates}')
    counts = Counter()
    for r in range(replicates):
        data = sample_model(RngStream(seed, r), spec, n)
        sample = extract_exceedances(data, k)
        selection = select_dimension(sample, empirical_moment_matrix(sample), tau, beta)
        counts[selection.p_hat] += 1
    return {p: counts[p] / replicates for p in sorted(counts)}
