import numpy as np
import pytest

from my_modules.core.errors import DataFormatError, DomainError, ShapeError
from my_modules.core.extremes import (
    DataMatrix,
    empirical_angular_measure,
    empirical_moment_matrix,
    empirical_risk,
    extract_exceedances,
    hill_estimator,
    polar_transform,
    read_data_csv,
    reconstruction_error,
    threshold_select,
    write_data_csv,
)
from my_modules.core.linalg import ProjectionMatrix


def test_polar_transform():
    x = np.array([3.0, 4.0, 0.0])
    radius, angle = polar_transform(x)
    assert radius == 5.0
    assert np.allclose(angle * radius, x, atol=1e-12)
    with pytest.raises(DomainError):
        polar_transform(np.zeros(3))


def test_threshold_select_is_k_plus_first_largest():
    radii = [5.0, 1.0, 4.0, 2.0, 3.0]
    assert threshold_select(radii, 2) == 3.0
    assert threshold_select(radii, 4) == 1.0
    for k in (0, 5):
        with pytest.raises(DomainError):
            threshold_select(radii, k)


def test_extract_exceedances_keeps_k_largest_in_row_order():
    values = np.array([[1.0, 0.0], [0.0, 6.0], [3.0, 4.0], [0.0, 2.0], [7.0, 0.0]])
    sample = extract_exceedances(DataMatrix(values), 2)
    assert sample.threshold == 5.0
    assert sample.rows.tolist() == [1, 4]
    assert sample.count == 2
    assert np.all(sample.radii > sample.threshold)
    assert np.allclose(np.linalg.norm(sample.angles, axis=1), 1.0)


def test_ties_at_threshold_give_fewer_exceedances():
    values = np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 2.0], [3.0, 0.0]])
    sample = extract_exceedances(DataMatrix(values), 2)
    assert sample.count == 1
    sigma = empirical_moment_matrix(sample)
    # divisor stays k
    assert sigma.trace() == pytest.approx(0.5)
    assert empirical_angular_measure(sample).total_mass() == pytest.approx(0.5)


@pytest.mark.parametrize('c', [0.25, 4.0, 3.7])
def test_exceedances_are_scale_invariant(c):
    g = np.random.default_rng(17)
    values = np.abs(g.standard_normal((300, 4))) * g.pareto(1.0, size=(300, 1)) + 0.01
    base = extract_exceedances(DataMatrix(values), 40)
    scaled = extract_exceedances(DataMatrix(c * values), 40)
    assert np.array_equal(scaled.rows, base.rows)
    assert scaled.threshold == pytest.approx(c * base.threshold, rel=1e-14)
    assert np.max(np.abs(scaled.angles - base.angles)) <= 1e-14


def test_threshold_select_ignores_order():
    radii = np.random.default_rng(18).pareto(1.0, size=500)
    for seed in range(5):
        shuffled = np.random.default_rng(seed).permutation(radii)
        for k in (1, 37, 250, 499):
            assert threshold_select(shuffled, k) == threshold_select(radii, k)


def test_zero_rows_are_rejected():
    data = DataMatrix(np.array([[1.0, 2.0], [0.0, 0.0], [3.0, 1.0]]))
    assert data.zero_rows() == [1]
    with pytest.raises(DomainError, match='rows \\[1\\]'):
        extract_exceedances(data, 1)


def test_data_matrix_shape_checks():
    assert DataMatrix(np.zeros((0, 3))).n == 0
    with pytest.raises(ShapeError):
        DataMatrix(np.ones((4, 1)))
    with pytest.raises(DomainError):
        DataMatrix(np.array([[1.0, np.inf]]))


def test_moment_matrix_and_risk_decomposition(rng):
    values = np.abs(rng.standard_normal((500, 4))) + 0.01
    sample = extract_exceedances(DataMatrix(values), 50)
    sigma = empirical_moment_matrix(sample)
    assert sigma.trace() == pytest.approx(1.0)
    assert np.allclose(sigma.matrix, sigma.matrix.T)
    proj = ProjectionMatrix(np.diag([1.0, 1.0, 0.0, 0.0]), 2)
    risk = empirical_risk(sigma, proj)
    assert risk == pytest.approx(np.mean(np.sum(sample.angles[:, :2] ** 2, axis=1)))
    assert risk + reconstruction_error(sigma, proj) == pytest.approx(sigma.trace())


def test_hill_estimator_recovers_pareto_index(rng):
    radii = (1.0 - rng.uniform(size=20000)) ** (-1.0 / 2.0)
    assert hill_estimator(radii, 2000) == pytest.approx(2.0, rel=0.1)
    with pytest.raises(DomainError):
        hill_estimator(radii[:10], 10)


def test_data_csv_round_trip(tmp_path, rng):
    values = rng.uniform(size=(7, 3), low=0.1, high=10.0)
    path = tmp_path / 'data.csv'
    write_data_csv(path, values)
    assert path.read_text(encoding='utf-8').splitlines()[0] == 'x1,x2,x3'
    assert np.array_equal(read_data_csv(path).values, values)


def test_read_csv_without_header(tmp_path):
    path = tmp_path / 'plain.csv'
    path.write_text('1,2\n3,4\n', encoding='utf-8')
    assert read_data_csv(path).values.tolist() == [[1.0, 2.0], [3.0, 4.0]]


@pytest.mark.parametrize('text, row, column', [
    ('x1,x2\n1,2\n3,abc\n', 3, 2),
    ('1,2\n3,4,5\n', 2, None),
])
def test_read_csv_reports_location(tmp_path, text, row, column):
    path = tmp_path / 'bad.csv'
    path.write_text(text, encoding='utf-8')
    with pytest.raises(DataFormatError) as info:
        read_data_csv(path)
    assert info.value.row == row
    assert info.value.column == column


def test_read_csv_names_zero_rows(tmp_path):
    path = tmp_path / 'zero.csv'
    path.write_text('x1,x2\n1,2\n0,0\n3,4\n', encoding='utf-8')
    with pytest.raises(DataFormatError, match='rows \\[3\\]'):
        read_data_csv(path)
