import pytest
import numpy as np

from bipartite.errors import dimensionError, preconditionError
from bipartite.hamiltonian import build_hamiltonian, solve_spectrum
from bipartite.objects import *

grid = grid1D(0.0, 1.0, 128)
well = solve_spectrum(build_hamiltonian(grid), 3)
psi1, psi2, psi3 = well.states


testcases = [
    ((0.0, 1.0, 5), 0.25),
    ((-10.0, 10.0, 512), 20 / 511),
    ((2.0, 3.0, 3), 0.5)
]

@pytest.mark.parametrize("case,expected", testcases)
def test_grid_spacing(case, expected):
    assert grid1D(*case).spacing == pytest.approx(expected, rel=1e-15)


testcases = [
    ((0.0, 1.0, 2), "n_points ≥ 3"),
    ((1.0, 1.0, 10), "x_max must exceed x_min"),
    ((1.0, 0.0, 10), "x_max must exceed x_min")
]

@pytest.mark.parametrize("case,expected", testcases)
def test_grid_invariants(case, expected):
    with pytest.raises(preconditionError, match=expected):
        grid1D(*case)


testcases = [
    (dict(hbar=0.0), "hbar"),
    (dict(mass=-1.0), "mass")
]

@pytest.mark.parametrize("case,expected", testcases)
def test_constants_positive(case, expected):
    with pytest.raises(preconditionError, match=expected):
        physicalConstants(**case)


def test_field_normalization():
    raw = scalarField(grid, np.sin(np.pi * grid.points) * 3)
    assert not raw.normalized
    psi = raw.normalize()
    assert psi.normalized
    assert abs(psi.normSquared - 1) <= 1e-10
    with pytest.raises(preconditionError):
        scalarField(grid, np.zeros(grid.nPoints)).normalize()


def test_field_length_mismatch():
    with pytest.raises(dimensionError):
        scalarField(grid, np.zeros(grid.nPoints - 1))


def test_field_is_read_only():
    values = np.sin(np.pi * grid.points)
    psi = scalarField(grid, values)
    values[5] = 100.0
    assert psi.values[5] != 100.0
    with pytest.raises(ValueError):
        psi.values[5] = 1.0


testcases = [
    ((psi1, psi1), 1.0),
    ((psi1, psi2), 0.0),
    ((psi2, psi3), 0.0),
    ((psi1, psi1.with_values(1j * psi1.values)), 1j)
]

@pytest.mark.parametrize("case,expected", testcases)
def test_inner_product(case, expected):
    assert abs(inner_product(*case) - expected) <= 1e-10


def test_inner_product_conjugate_symmetric():
    rng = np.random.default_rng(3)
    f = scalarField(grid, rng.normal(size=grid.nPoints) + 1j * rng.normal(size=grid.nPoints))
    g = scalarField(grid, rng.normal(size=grid.nPoints) + 1j * rng.normal(size=grid.nPoints))
    assert abs(inner_product(f, g) - inner_product(g, f).conjugate()) <= 1e-12
    assert inner_product(f, f).imag == 0
    assert inner_product(f, f).real > 0


def test_inner_product_grid_mismatch():
    other = scalarField(grid1D(0.0, 2.0, 128), psi1.values)
    with pytest.raises(dimensionError):
        inner_product(psi1, other)


testcases = [
    ((psi1, psi1), {'normalized': True, 'hermitian': True}),
    ((psi2, psi2), {'normalized': True, 'hermitian': True}),
    ((psi1, psi2), {'normalized': True, 'hermitian': False})
]

@pytest.mark.parametrize("case,expected", testcases)
def test_kernel_from_product_flags(case, expected):
    Psi = kernel_from_product(*case)
    assert Psi.normalized == expected['normalized']
    assert Psi.hermitian == expected['hermitian']


def test_kernel_from_zero_field():
    zero = scalarField(grid, np.zeros(grid.nPoints))
    Psi = kernel_from_product(zero, psi1)
    assert np.all(Psi.values == 0)
    assert Psi.normSquared == 0


def test_hermiticity_defect():
    assert hermiticity_defect(kernel_from_product(psi1, psi1)) <= 1e-12
    mixed = kernel_from_product(psi1, psi2)
    defect = hermiticity_defect(mixed)
    assert defect > 0.1
    assert hermiticity_defect(mixed.with_values(-mixed.values)) == pytest.approx(defect, rel=1e-12)
    assert hermiticity_defect(mixed.with_values(mixed.values.conj().T)) == pytest.approx(defect, rel=1e-12)


testcases = [
    (1.0, 0.0),
    (-1.0, 0.0),
    (np.exp(0.7j), 2 * np.sin(0.7))
]

@pytest.mark.parametrize("case,expected", testcases)
def test_hermiticity_defect_phase(case, expected):
    Psi = kernel_from_product(psi1, psi1)
    scale = np.max(np.abs(Psi.values))
    assert hermiticity_defect(Psi.with_values(case * Psi.values)) == pytest.approx(expected * scale, abs=1e-12)


testcases = [
    (coefficientMatrix([[1.0]]), lambda: np.outer(psi1.values, psi1.values.conj())),
    (coefficientMatrix(np.full((2, 2), 0.5)),
     lambda: np.outer(psi1.values + psi2.values, (psi1.values + psi2.values).conj()) / 2),
    (coefficientMatrix(np.eye(2) / np.sqrt(2)),
     lambda: (np.outer(psi1.values, psi1.values.conj()) + np.outer(psi2.values, psi2.values.conj())) / np.sqrt(2))
]

@pytest.mark.parametrize("case,expected", testcases)
def test_kernel_from_coefficients(case, expected):
    Psi = kernel_from_coefficients(case, well.states[:case.dim])
    assert np.max(np.abs(Psi.values - expected())) <= 1e-10
    assert Psi.hermitian
    assert abs(Psi.normSquared - case.weight) <= 1e-8


def test_kernel_from_coefficients_non_hermitian():
    c = coefficientMatrix([[0.0, 1.0], [0.0, 0.0]])
    assert not c.hermitian
    assert not kernel_from_coefficients(c, [psi1, psi2]).hermitian


def test_kernel_from_coefficients_checks_basis():
    skewed = scalarField(grid, psi2.values + 0.1 * psi1.values).normalize()
    with pytest.raises(preconditionError, match=r"pair \(0, 1\)"):
        kernel_from_coefficients(coefficientMatrix(np.eye(2) / np.sqrt(2)), [psi1, skewed])
    with pytest.raises(dimensionError):
        kernel_from_coefficients(coefficientMatrix(np.eye(3) / np.sqrt(3)), [psi1, psi2])


testcases = [
    (np.zeros((2, 3)), dimensionError),
    (np.zeros((0, 0)), dimensionError)
]

@pytest.mark.parametrize("case,expected", testcases)
def test_coefficient_matrix_shape(case, expected):
    with pytest.raises(expected):
        coefficientMatrix(case)


def test_kernel_shape():
    with pytest.raises(dimensionError):
        kernelField(grid, np.zeros((grid.nPoints, grid.nPoints - 1)))
