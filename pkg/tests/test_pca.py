import math

import numpy as np
import pytest

from my_modules.core.errors import DegenerateSplitError, DomainError
from my_modules.core.extremes import (
    DataMatrix,
    MomentMatrix,
    empirical_moment_matrix,
    empirical_risk,
    extract_exceedances,
)
from my_modules.core.linalg import ProjectionMatrix, cluster_eigenvalues, hs_inner, hs_norm, symmetric_eigh
from my_modules.core.pca import (
    SkewMatrix,
    cluster_projections,
    excess_risk,
    excess_risk_bound,
    excess_risk_bound_coarse,
    fit_pca,
    frame_from_fit,
    limit_excess_risk,
    limit_process_value,
    limit_projection_deviation,
    limit_risk_value,
    local_maximizer,
    local_projection,
    local_projection_expansion,
    make_frame,
    project_to_restricted_skew,
    random_restricted_skew,
    s_lambda,
    t_lambda,
    tbar_lambda,
)


def _random_symmetric(frame, seed):
    g = np.random.default_rng(seed).standard_normal((frame.dim, frame.dim))
    return 0.5 * (g + g.T)


def test_fit_pca_on_diagonal_moments():
    fit = fit_pca(MomentMatrix(np.diag([0.3, 0.6, 0.1]), 100), 2)
    assert np.allclose(fit.projection.matrix, np.diag([1.0, 1.0, 0.0]), atol=1e-14)
    assert fit.captured == pytest.approx(0.9)
    assert np.allclose(fit.captured_fractions(), [0.6, 0.9, 1.0])


def test_excess_risk_is_zero_at_optimum_and_positive_elsewhere():
    sigma = MomentMatrix(np.diag([0.6, 0.3, 0.1]), 100)
    assert excess_risk(sigma, fit_pca(sigma, 1).projection, 1) == pytest.approx(0.0, abs=1e-15)
    other = ProjectionMatrix(np.diag([0.0, 0.0, 1.0]), 1)
    assert excess_risk(sigma, other, 1) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        excess_risk(sigma, other, 2)


def test_degenerate_split_is_rejected():
    with pytest.raises(DegenerateSplitError):
        make_frame(np.diag([0.5, 0.5, 0.0]), 1)
    with pytest.raises(DomainError):
        make_frame(np.diag([0.5, 0.3, 0.2]), 3)


def test_frame_from_fit_uses_empirical_eigenvectors():
    sigma = MomentMatrix(np.diag([0.6, 0.3, 0.1]), 50)
    frame = frame_from_fit(fit_pca(sigma, 2), sigma)
    assert np.allclose(frame.pi_star.matrix, fit_pca(sigma, 2).projection.matrix)
    assert np.allclose(frame.matrix, sigma.matrix)


def test_restricted_projection_is_idempotent(frame, rng):
    a = random_restricted_skew(frame, rng)
    again = project_to_restricted_skew(a, frame)
    assert np.allclose(again.matrix, a.matrix, atol=1e-14)
    ps = frame.pi_star.matrix
    assert hs_norm(ps @ a.matrix @ ps) < 1e-12


def test_skew_matrix_validation():
    with pytest.raises(DomainError):
        SkewMatrix(np.eye(2))
    a = SkewMatrix(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert np.allclose((a + a).matrix, a.scaled(2.0).matrix)


def test_s_lambda_rejects_unrestricted_skew(frame):
    g = np.random.default_rng(1).standard_normal((frame.dim, frame.dim))
    with pytest.raises(DomainError):
        s_lambda(SkewMatrix(g - g.T), frame)


def test_local_identities(frame, rng):
    u = _random_symmetric(frame, 11)
    for _ in range(20):
        a = random_restricted_skew(frame, rng)
        s = s_lambda(a, frame)
        assert np.allclose(tbar_lambda(s, frame).matrix, a.matrix, atol=1e-10)
        assert limit_risk_value(frame, a) == pytest.approx(-hs_norm(s) ** 2, abs=1e-10)
        pairing = hs_inner(u, frame.pi_star.matrix @ a.matrix)
        assert pairing == pytest.approx(hs_inner(t_lambda(u, frame), s), abs=1e-10)

    a_star = local_maximizer(u, frame)
    assert np.allclose(a_star.matrix, tbar_lambda(t_lambda(u, frame), frame).matrix, atol=1e-10)
    best = limit_process_value(u, frame, a_star)
    assert best == pytest.approx(hs_norm(t_lambda(u, frame)) ** 2, abs=1e-10)
    for _ in range(20):
        other = a_star + random_restricted_skew(frame, rng, scale=0.3)
        assert limit_process_value(u, frame, other) <= best + 1e-12


def test_local_projection_and_expansion(frame, rng):
    a = random_restricted_skew(frame, rng)
    zero = SkewMatrix(np.zeros((frame.dim, frame.dim)))
    assert np.allclose(local_projection(frame, zero, 10).matrix, frame.pi_star.matrix)
    assert local_projection(frame, a, 100).rank == frame.p
    previous = None
    for k in (1e3, 1e4, 1e5):
        remainder = hs_norm(local_projection(frame, a, k).matrix - local_projection_expansion(frame, a, k))
        scaled = remainder * k ** 1.5
        assert scaled <= 10.0 * hs_norm(a.matrix) ** 3
        if previous is not None:
            assert 0.5 <= scaled / previous <= 2.0
        previous = scaled
    with pytest.raises(DomainError):
        local_projection(frame, a, 0)


def test_projection_deviation_matches_finite_difference(frame):
    u = _random_symmetric(frame, 7)
    eps = 1e-7
    perturbed = MomentMatrix(frame.matrix + eps * u, 1)
    derivative = (fit_pca(perturbed, frame.p).projection.matrix - frame.pi_star.matrix) / eps
    assert np.allclose(derivative, limit_projection_deviation(u, frame, frame.p), atol=1e-3)


def test_limit_excess_risk_matches_second_order(frame):
    u = _random_symmetric(frame, 8)
    eps = 1e-5
    sigma = MomentMatrix(frame.matrix, 1)
    projection = fit_pca(MomentMatrix(frame.matrix + eps * u, 1), frame.p).projection
    observed = excess_risk(sigma, projection, frame.p) / eps ** 2
    assert observed == pytest.approx(limit_excess_risk(u, frame, frame.p), rel=5e-3)


def test_limit_maps_need_a_cluster_boundary():
    frame = make_frame(np.diag([0.5, 0.3, 0.3 - 1e-9, 0.1]), 1)
    u = np.eye(4)
    with pytest.raises(DegenerateSplitError):
        limit_excess_risk(u, frame, 2)
    assert limit_excess_risk(u, frame, 1) == 0.0


def test_excess_risk_bound_simple_split():
    lam = [0.6, 0.3, 0.1]
    assert excess_risk_bound(lam, 1, 100) == pytest.approx(1.0 / (0.3 * 100))
    assert excess_risk_bound([0.6, 0.4], 1, 100) == pytest.approx(0.05)
    assert excess_risk_bound(lam, 1, 1e12) < 1e-10


def test_excess_risk_bound_with_tied_split():
    lam = [0.5, 0.5, 0.0]
    # the pair (1, 2) has a zero denominator and is skipped in favour of (1, 3)
    assert excess_risk_bound(lam, 1, 100) == pytest.approx(2.0 / 100)
    clusters = cluster_eigenvalues(lam)
    assert excess_risk_bound_coarse(lam, 1, 100, clusters) == pytest.approx(0.01)
    spread = [0.5, 0.45, 0.0]
    coarse = excess_risk_bound_coarse(spread, 1, 10000, cluster_eigenvalues(spread, gap_tol=0.1))
    assert coarse == pytest.approx(1e-4 + 0.01)
    assert math.isfinite(excess_risk_bound(spread, 1, 10))


def test_cluster_projections_resolve_the_identity():
    q, _ = np.linalg.qr(np.random.default_rng(4).standard_normal((6, 6)))
    lam = np.array([0.4, 0.4, 0.1, 0.05, 0.05, 0.0])
    eigen = symmetric_eigh((q * lam) @ q.T)
    clusters = cluster_eigenvalues(eigen.eigenvalues, gap_tol=1e-8)
    assert clusters.boundaries == (2, 3, 5, 6)
    projections = cluster_projections(eigen, clusters)
    assert [p.rank for p in projections] == [2, 1, 2, 1]
    total = sum(p.matrix for p in projections)
    assert np.max(np.abs(total - np.eye(6))) <= 1e-12
    for a, first in enumerate(projections):
        for b, second in enumerate(projections):
            if a != b:
                assert np.max(np.abs(first.matrix @ second.matrix)) <= 1e-12
    # within a cluster the projection does not depend on the basis chosen
    block = q[:, :2]
    assert np.allclose(projections[0].matrix, block @ block.T, atol=1e-10)


def test_cluster_projections_need_full_boundaries():
    eigen = symmetric_eigh(np.diag([0.5, 0.3, 0.2]))
    with pytest.raises(DomainError):
        cluster_projections(eigen, cluster_eigenvalues([0.5, 0.3]))


@pytest.mark.parametrize('p', [1, 2, 3])
def test_fitted_projection_maximizes_empirical_risk(p):
    g = np.random.default_rng(30 + p)
    values = np.abs(g.standard_normal((400, 5))) * g.pareto(1.0, size=(400, 1))
    sigma = empirical_moment_matrix(extract_exceedances(DataMatrix(values), 60))
    best = empirical_risk(sigma, fit_pca(sigma, p).projection)
    for _ in range(500):
        basis, _ = np.linalg.qr(g.standard_normal((5, p)))
        other = ProjectionMatrix(basis @ basis.T, p)
        assert empirical_risk(sigma, other) <= best + 1e-12
