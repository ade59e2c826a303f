import math

import numpy as np
import pytest
from scipy.stats import kendalltau

from my_modules.core.errors import DataFormatError, DomainError
from my_modules.core.extremes import DataMatrix, DiscreteAngularMeasure
from my_modules.core.functionals import (
    EstimatorConfig,
    TailFunctionalParams,
    default_functional_params,
    evaluate_functionals,
    functional_iii,
    pca_angular_measure,
    rank_frechet_standardize,
    read_measure_csv,
    write_measure_csv,
)
from my_modules.simulation.models import ModelSpec, sample_model


def _measure(atoms, k):
    atoms = np.asarray(atoms, dtype=float)
    atoms = atoms / np.linalg.norm(atoms, axis=1)[:, None]
    return DiscreteAngularMeasure(atoms, np.full(atoms.shape[0], 1.0 / k), k)


def test_functionals_on_hand_built_measure():
    s = 1.0 / math.sqrt(2.0)
    measure = _measure([[1.0, 1.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 1.0]], 4)
    prm = TailFunctionalParams(alpha=1.0, p_model=2, t_i=0.6)
    values = evaluate_functionals(measure, prm)
    c = 1.0 / math.sqrt(3.0)
    # head means: s, 0.5, c; only s exceeds 0.6
    assert values['i'] == pytest.approx(0.25)
    # (min head - max tail)^+: s, 0, 0
    assert values['ii'] == pytest.approx(s / 4)
    # x_1 is the largest coordinate of every atom
    assert values['iii'] == pytest.approx(1.0)
    assert values['iv'] == pytest.approx(c / 4)


def test_functional_iii_uses_alpha_and_rejects_zero_denominator():
    measure = _measure([[1.0, 2.0], [2.0, 1.0]], 2)
    prm = TailFunctionalParams(alpha=2.0, p_model=1, t_i=0.5)
    a, b = 1.0 / math.sqrt(5.0), 2.0 / math.sqrt(5.0)
    assert functional_iii(measure, prm) == pytest.approx((a * a + b * b) / (2 * b * b))
    empty = DiscreteAngularMeasure(np.zeros((0, 2)), np.zeros(0), 5)
    with pytest.raises(DomainError):
        functional_iii(empty, prm)


def test_negative_coordinates_are_clamped():
    measure = _measure([[1.0, -1.0, 0.5]], 1)
    prm = TailFunctionalParams(alpha=0.5, p_model=1, t_i=0.1)
    values = evaluate_functionals(measure, prm)
    assert values['iv'] == 0.0
    assert values['ii'] > 0.0


def test_params_validation():
    with pytest.raises(DomainError):
        TailFunctionalParams(alpha=1.0, p_model=2, t_i=0.8)
    with pytest.raises(DomainError):
        TailFunctionalParams(alpha=0.0, p_model=2, t_i=0.5)


def test_default_params_follow_study_table():
    assert default_functional_params(ModelSpec(family='dirichlet', d=10, p=2)).t_i == 0.65
    assert default_functional_params(ModelSpec(family='gumbel', d=10, p=2, alpha=2.0)).alpha == 2.0
    assert default_functional_params(ModelSpec(family='dirichlet_rotated', d=100, p=5)).t_i == 0.4
    assert default_functional_params(ModelSpec(family='dirichlet', d=6, p=4)).t_i == pytest.approx(0.45)


def test_pca_measure_on_noiseless_subspace_model(rng):
    spec = ModelSpec(family='dirichlet', d=6, p=2, noise_sigma=0.0)
    data = sample_model(rng, spec, 2000)
    measure = pca_angular_measure(data, EstimatorConfig(k=100, k_tilde=100, p=None))
    assert measure.dimension == 2
    assert measure.size == 100 and measure.dropped == 0
    assert measure.total_mass() == pytest.approx(1.0)
    assert np.allclose(measure.atoms[:, 2:], 0.0, atol=1e-10)
    prm = default_functional_params(spec)
    assert evaluate_functionals(measure, prm)['iv'] == 0.0


def test_pca_measure_fixed_p_equal_to_d_keeps_raw_angles(rng):
    data = DataMatrix(np.abs(rng.standard_normal((300, 3))) + 0.1)
    measure = pca_angular_measure(data, EstimatorConfig(k=30, k_tilde=10, p=3))
    assert measure.dimension == 3
    assert measure.size == 30


@pytest.mark.parametrize('p', [2, None])
def test_pca_measure_is_scale_invariant(rng, p):
    data = sample_model(rng, ModelSpec(family='dirichlet', d=5, p=2), 1000)
    cfg = EstimatorConfig(k=80, k_tilde=20, p=p)
    base = pca_angular_measure(data, cfg)
    for c in (0.25, 3.7):
        scaled = pca_angular_measure(DataMatrix(c * data.values), cfg)
        assert scaled.dimension == base.dimension
        assert scaled.size == base.size
        assert np.max(np.abs(scaled.atoms - base.atoms)) <= 1e-10
        assert np.array_equal(scaled.weights, base.weights)


def test_estimator_config_validation():
    with pytest.raises(DomainError):
        EstimatorConfig(k=10, k_tilde=20).validate(100, 3)
    with pytest.raises(DomainError):
        EstimatorConfig(k=10, k_tilde=1).validate(100, 3)
    with pytest.raises(DomainError):
        EstimatorConfig(k=10, k_tilde=5, p=4).validate(100, 3)
    EstimatorConfig(k=10, k_tilde=1, p=2).validate(100, 3)


def test_rank_standardization_is_unit_frechet_and_keeps_order(rng):
    values = np.exp(rng.standard_normal((400, 3)))
    standardized = rank_frechet_standardize(DataMatrix(values)).values
    for j in range(3):
        assert kendalltau(values[:, j], standardized[:, j]).statistic == pytest.approx(1.0)
    # P(Z <= z) = exp(-1/z) at the empirical ranks
    sorted_column = np.sort(standardized[:, 0])
    assert np.allclose(np.exp(-1.0 / sorted_column), np.arange(1, 401) / 401.0)
    with pytest.raises(DomainError):
        rank_frechet_standardize(DataMatrix(np.ones((5, 2))))


def test_measure_csv_infers_k(tmp_path):
    measure = _measure([[1.0, 2.0], [3.0, 1.0]], 8)
    path = tmp_path / 'measure.csv'
    write_measure_csv(path, measure)
    loaded = read_measure_csv(path)
    assert loaded.k == 8
    assert np.array_equal(loaded.atoms, measure.atoms)
    assert read_measure_csv(path, k=10).k == 10


def test_measure_csv_reports_bad_cell(tmp_path):
    path = tmp_path / 'measure.csv'
    path.write_text('theta1,theta2,weight\n0.6,0.8,0.1\n1,x,0.1\n', encoding='utf-8')
    with pytest.raises(DataFormatError) as info:
        read_measure_csv(path)
    assert info.value.row == 3
    assert info.value.column == 2
