import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import kendalltau, kstest

from my_modules.core.errors import DomainError
from my_modules.core.linalg import givens_rotation
from my_modules.simulation.models import (
    ModelSpec,
    _random_plane_rotations,
    _rotate_rows,
    apply_noise,
    frechet_quantile,
    sample_dirichlet,
    sample_frechet,
    sample_limit_angles,
    sample_model,
)
from my_modules.simulation.rng import RngStream, entropy_seed


def test_rng_streams_are_reproducible_and_independent():
    a = RngStream(7, 3).standard_normal(5)
    assert np.array_equal(a, RngStream(7, 3).standard_normal(5))
    assert not np.array_equal(a, RngStream(7, 4).standard_normal(5))
    assert not np.array_equal(a, RngStream(8, 3).standard_normal(5))
    # children live below their parent and never coincide with top-level streams
    assert not np.array_equal(RngStream(7, 0).child(3).standard_normal(5), a)
    assert np.array_equal(RngStream(7, 0).child(3).standard_normal(5), RngStream(7, 0, (3,)).standard_normal(5))
    with pytest.raises(DomainError):
        RngStream(-1)
    assert 0 <= entropy_seed() < 2 ** 64


def test_model_spec_validation():
    spec = ModelSpec(family='dirichlet', d=5, p=2, dirichlet_params='1.5, 2')
    assert spec.dirichlet_params == (1.5, 2.0)
    assert spec.as_config()['dirichlet_params'] == '1.5,2.0'
    assert 'theta' not in spec.as_config()
    for bad in (dict(family='gumbel', d=3, p=3), dict(family='dirichlet', d=4, p=2, dirichlet_params='1'),
                dict(family='dirichlet', d=4, p=2, dirichlet_params='1,-1'), dict(family='normal', d=4, p=2),
                dict(family='gumbel', d=4, p=2, theta=0.5), dict(family='gumbel', d=4, p=2, colour='red')):
        with pytest.raises(ValidationError):
            ModelSpec(**bad)


def test_model_spec_parses_config_strings():
    spec = ModelSpec.model_validate({'family': 'gumbel', 'd': '10', 'p': '2', 'alpha': '2', 'theta': '2'})
    assert (spec.d, spec.p, spec.alpha, spec.theta) == (10, 2, 2.0, 2.0)
    assert ModelSpec.model_validate(spec.as_config()) == spec


def test_frechet_quantile():
    assert frechet_quantile(math.exp(-1.0), 2.0) == pytest.approx(1.0)
    assert frechet_quantile(math.exp(-1.0 / 8.0), 1.0 / 3.0) == pytest.approx(2.0 ** 9)


def test_same_seed_same_sample():
    spec = ModelSpec(family='dirichlet_rotated', d=6, p=2)
    first = sample_model(RngStream(11, 0), spec, 50).values
    assert np.array_equal(first, sample_model(RngStream(11, 0), spec, 50).values)
    assert sample_model(RngStream(11, 0), spec, 0).values.shape == (0, 6)


def test_gumbel_model_marginals_and_dependence():
    spec = ModelSpec(family='gumbel', d=4, p=2, theta=2.0, noise_sigma=0.0)
    values = sample_model(RngStream(5), spec, 4000).values
    assert kstest(values[:, 0], lambda x: np.exp(-1.0 / np.maximum(x, 1e-300))).pvalue > 1e-3
    # logistic dependence: Kendall's tau = 1 - 1/theta
    assert kendalltau(values[:, 0], values[:, 1]).statistic == pytest.approx(0.5, abs=0.05)
    assert np.all(values[:, 2:] == 0.0)


def test_gumbel_theta_one_is_independent():
    spec = ModelSpec(family='gumbel', d=3, p=2, theta=1.0, noise_sigma=0.0)
    values = sample_model(RngStream(6), spec, 4000).values
    assert abs(kendalltau(values[:, 0], values[:, 1]).statistic) < 0.05


def test_gumbel_noise_columns_are_light_tailed():
    spec = ModelSpec(family='gumbel', d=10, p=2, alpha=2.0, noise_sigma=1.0)
    values = sample_model(RngStream(9), spec, 2000).values
    tail = values[:, 2:]
    assert np.all(tail >= 0.0)
    assert tail.max() < 7.0
    assert values[:, :2].max() > 20.0


def test_dirichlet_model_radius_is_pareto():
    spec = ModelSpec(family='dirichlet', d=5, p=3, alpha=1.5, noise_sigma=0.0)
    data = sample_model(RngStream(4), spec, 3000)
    assert np.all(data.values[:, 3:] == 0.0)
    assert kstest(data.radii(), lambda r: 1.0 - np.maximum(r, 1.0) ** -1.5).pvalue > 1e-3


def test_rotation_bound_zero_reproduces_plain_model():
    plain = ModelSpec(family='dirichlet', d=6, p=2, noise_sigma=0.5)
    rotated = ModelSpec(family='dirichlet_rotated', d=6, p=2, noise_sigma=0.5, rotation_angle_bound=0.0)
    assert np.array_equal(sample_model(RngStream(2), plain, 100).values,
                          sample_model(RngStream(2), rotated, 100).values)
    tilted = ModelSpec(family='dirichlet_rotated', d=6, p=2, noise_sigma=0.0)
    values = sample_model(RngStream(2), tilted, 100).values
    assert np.any(values[:, 2:] != 0.0)
    # one plane per observation: a single trailing coordinate moves
    assert np.all(np.count_nonzero(values[:, 2:], axis=1) <= 1)


def test_sample_dirichlet_moments(rng):
    w = sample_dirichlet(rng, [1.0, 2.0, 3.0], size=20000)
    assert np.allclose(w.sum(axis=1), 1.0)
    assert np.allclose(w.mean(axis=0), [1 / 6, 2 / 6, 3 / 6], atol=0.01)
    with pytest.raises(DomainError):
        sample_dirichlet(rng, [1.0, 0.0])


def test_limit_angles_are_unit_vectors_with_positive_weights(rng):
    for spec in (ModelSpec(family='gumbel', d=5, p=3, alpha=2.0),
                 ModelSpec(family='dirichlet_rotated', d=5, p=3)):
        angles, weights = sample_limit_angles(rng, spec, 1000)
        assert np.allclose(np.linalg.norm(angles, axis=1), 1.0)
        assert np.all(weights > 0)
    angles, weights = sample_limit_angles(rng, ModelSpec(family='gumbel', d=3, p=2, theta=1.0), 100)
    # theta = 1 puts all mass on the axes
    assert np.all(np.sort(angles[:, :2], axis=1)[:, 0] == 0.0)
    assert np.allclose(weights, 1.0)


def test_apply_noise(rng):
    with pytest.raises(DomainError):
        apply_noise(rng, np.ones((2, 2)), -1.0)
    assert np.array_equal(apply_noise(rng, np.ones((2, 2)), 0.0).values, np.ones((2, 2)))


def test_sample_frechet_tail():
    x = sample_frechet(RngStream(21), 1.0, 200_000)
    assert np.all(x > 0)
    assert np.mean(x > 10.0) == pytest.approx(1.0 - math.exp(-0.1), abs=0.004)
    # alpha rescales the exponent: P(X > 10) = 1 - exp(-10^-2)
    y = sample_frechet(RngStream(21), 2.0, 200_000)
    assert np.mean(y > 10.0) == pytest.approx(1.0 - math.exp(-0.01), abs=0.002)
    for alpha in (0.0, -1.0):
        with pytest.raises(DomainError):
            sample_frechet(RngStream(21), alpha, 10)


def test_row_rotations_match_givens_matrices():
    spec = ModelSpec(family='dirichlet_rotated', d=6, p=2)
    rng = RngStream(22)
    values = np.abs(rng.standard_normal((50, 6)))
    i, j, phi = _random_plane_rotations(rng, spec, 50)
    rotated = _rotate_rows(values.copy(), i, j, phi)
    for r in range(50):
        expected = givens_rotation(6, int(i[r]), int(j[r]), float(phi[r])) @ values[r]
        assert np.allclose(rotated[r], expected, atol=1e-14)
    assert np.allclose(np.linalg.norm(rotated, axis=1), np.linalg.norm(values, axis=1))
