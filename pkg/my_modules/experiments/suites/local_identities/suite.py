"""
局部风险几何的精确代数恒等式，在随机框架上检查

每次试验检查：tbar(s(A)) = A；<Sigma, A^2(Pi* - Pi_perp)> = -||s(A)||^2；
<U, Pi* A> = <t(U), s(A)>；闭式极大点等于 tbar(t(U))，不差于随机对手，
且取到 ||t(U)||^2。
"""

import logging
import math

import numpy as np

from my_modules.core.linalg import hs_inner, hs_norm
from my_modules.core.pca import (
    SkewMatrix,
    limit_process_value,
    limit_risk_value,
    local_maximizer,
    random_frame,
    random_restricted_skew,
    s_lambda,
    t_lambda,
    tbar_lambda,
)
from my_modules.experiments.base import BaseSuite
from my_modules.experiments.reports import Check, VerificationReport
from my_modules.simulation.rng import RngStream

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-10
MAXIMIZER_SLACK = 1e-9


def _relative_gap(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


def _matrix_gap(a, b):
    return float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))


def _random_symmetric(rng, d):
    g = rng.standard_normal((d, d))
    return 0.5 * (g + g.T)


def verify_local_identities(d, p, trials, rng, competitors=20, zero_u_every=0):
    """
    Args:
        d: 维数，或在各次试验间轮换的维数序列
        p: 分割秩；None 表示每次在 [1, d-1] 中均匀抽取
        trials: 随机框架个数
        rng: RngStream
        competitors: 每次试验中极大点的随机对手个数
        zero_u_every: 每隔 n 次试验取 U = 0（0 表示不用）
    """
    dims = tuple(d) if isinstance(d, (list, tuple)) else (d,)
    worst = {'inverse': 0.0, 'risk_identity': 0.0, 'pairing': 0.0, 'maximizer_formula': 0.0, 'maximum_value': 0.0}
    min_margin = math.inf

    for trial in range(trials):
        dim = dims[trial % len(dims)]
        split = p if p is not None else int(rng.integers(1, dim))
        frame = random_frame(rng, dim, split)
        a = random_restricted_skew(frame, rng)
        if zero_u_every and trial % zero_u_every == 0:
            u = np.zeros((dim, dim))
        else:
            u = _random_symmetric(rng, dim)

        s_a = s_lambda(a, frame)
        worst['inverse'] = max(worst['inverse'], _matrix_gap(tbar_lambda(s_a, frame).matrix, a.matrix))

        lhs = limit_risk_value(frame, a)
        worst['risk_identity'] = max(worst['risk_identity'], _relative_gap(lhs, -hs_norm(s_a) ** 2))

        t_u = t_lambda(u, frame)
        pairing = hs_inner(u, frame.pi_star.matrix @ a.matrix)
        worst['pairing'] = max(worst['pairing'], _relative_gap(pairing, hs_inner(t_u, s_a)))

        a_star = local_maximizer(u, frame)
        worst['maximizer_formula'] = max(
            worst['maximizer_formula'], _matrix_gap(a_star.matrix, tbar_lambda(t_u, frame).matrix))

        best = limit_process_value(u, frame, a_star)
        worst['maximum_value'] = max(worst['maximum_value'], _relative_gap(best, hs_norm(t_u) ** 2))

        for c in range(competitors):
            b = random_restricted_skew(frame, rng)
            if c % 2 == 0:
                candidate = SkewMatrix(a_star.matrix + rng.uniform(low=0.01, high=0.5) * b.matrix)
            else:
                candidate = b.scaled(rng.uniform(low=0.1, high=3.0))
            margin = best - limit_process_value(u, frame, candidate)
            min_margin = min(min_margin, margin / max(1.0, abs(best)))

    checks = tuple(Check(name, value, 0.0, IDENTITY_TOL) for name, value in worst.items())
    if competitors:
        checks += (Check('maximizer_beats_competitors', min_margin, -MAXIMIZER_SLACK, math.inf),)
    logger.info('[LocalIdentities] %d trials, worst identity error %.3e', trials, max(worst.values()))
    return VerificationReport('local-identities', checks, {'trials': trials, 'dimensions': dims})


class LocalIdentitiesSuite(BaseSuite):
    suite_id = 'local-identities'
    default_settings = {
        'dims': (3, 4, 5, 6, 7, 8),
        'trials': 1000,
        'competitors': 20,
        'zero_u_every': 100,
    }

    def run(self, seed):
        s = self.settings
        return verify_local_identities(s['dims'], None, s['trials'], RngStream(seed, 0),
                                       competitors=s['competitors'], zero_u_every=s['zero_u_every'])


def register_suite():
    return {
        'id': 'local-identities',
        'name': 'Local identities',
        'description': '局部参数化的代数恒等式（逆映射、风险恒等式、极大点公式）',
        'class': LocalIdentitiesSuite,
    }
