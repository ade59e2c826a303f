"""
局部参数化二阶展开的余项阶数

r(k) = ||local_projection - local_projection_expansion||_HS 必须按 k^{-3/2} 衰减：
r(k) k^{3/2} 在整个 k 网格上的变化不超过 2 倍，且 r(k) <= 10 ||A||^3 k^{-3/2}。
"""

import logging
import math

from my_modules.core.errors import DomainError
from my_modules.core.linalg import hs_norm
from my_modules.core.pca import local_projection, local_projection_expansion, random_frame, random_restricted_skew
from my_modules.experiments.base import BaseSuite
from my_modules.experiments.reports import Check, VerificationReport
from my_modules.simulation.rng import RngStream

logger = logging.getLogger(__name__)

MAX_SKEW_NORM = 5.0
RATIO_BAND = 2.0
CUBIC_CONSTANT = 10.0
# 低于此值的余项只是舍入噪声
NEGLIGIBLE_REMAINDER = 1e-14


def remainder_curve(frame, a, k_grid):
    return [hs_norm(local_projection(frame, a, k).matrix - local_projection_expansion(frame, a, k))
            for k in k_grid]


def verify_local_expansion(frame, a_set, k_grid):
    """
    Args:
        frame: EigenFrame
        a_set: ||A||_HS <= 5 的反对称矩阵
        k_grid: 递增的超阈值预算

    Returns:
        VerificationReport，含 r(k) k^{3/2} 的最大波动与最大三次常数
    """
    worst_ratio = 1.0
    worst_constant = 0.0
    for a in a_set:
        norm = hs_norm(a.matrix)
        if norm > MAX_SKEW_NORM:
            raise DomainError(f'skew matrix norm {norm:.3g} exceeds {MAX_SKEW_NORM}')
        curve = remainder_curve(frame, a, k_grid)
        if max(curve) < NEGLIGIBLE_REMAINDER:
            continue
        scaled = [r * k ** 1.5 for r, k in zip(curve, k_grid)]
        worst_ratio = max(worst_ratio, max(scaled) / min(scaled) if min(scaled) > 0 else math.inf)
        worst_constant = max(worst_constant, max(scaled) / norm ** 3)

    logger.info('[LocalExpansion] %d matrices: spread %.4f, cubic constant %.4f',
                len(a_set), worst_ratio, worst_constant)
    checks = (
        Check('scaled_remainder_spread', worst_ratio, 1.0, RATIO_BAND),
        Check('cubic_constant', worst_constant, 0.0, CUBIC_CONSTANT),
    )
    return VerificationReport('local-expansion', checks, {'k_grid': tuple(k_grid), 'matrices': len(a_set)})


class LocalExpansionSuite(BaseSuite):
    suite_id = 'local-expansion'
    default_settings = {
        'd': 6,
        'p': 2,
        'matrices': 20,
        'max_norm': 2.0,
        'k_grid': (1000, 10000, 100000),
    }

    def run(self, seed):
        s = self.settings
        rng = RngStream(seed, 0)
        frame = random_frame(rng, s['d'], s['p'])
        a_set = []
        for _ in range(s['matrices']):
            a = random_restricted_skew(frame, rng)
            target = s['max_norm'] * rng.uniform(low=0.25, high=1.0)
            a_set.append(a.scaled(target / hs_norm(a.matrix)))
        return verify_local_expansion(frame, a_set, s['k_grid'])


def register_suite():
    return {
        'id': 'local-expansion',
        'name': 'Local expansion',
        'description': '局部参数化二阶展开的余项阶数 k^{-3/2}',
        'class': LocalExpansionSuite,
    }
