import warnings

import pytest
import networkx
import numpy as np

from bipartite.analysis import *
from bipartite.errors import preconditionError, truncationWarning, zeroProbabilityError
from bipartite.hamiltonian import build_hamiltonian, potentialSpec, solve_spectrum
from bipartite.objects import (coefficientMatrix, grid1D, inner_product, kernelField,
                               scalarField, kernel_from_coefficients, kernel_from_product)

grid = grid1D(0.0, 1.0, 128)
h = build_hamiltonian(grid)
well = solve_spectrum(h, 8)
psi1, psi2 = well.states[:2]
E = well.energies

Psi_W = kernel_from_coefficients(coefficientMatrix(np.full((2, 2), 0.5)), [psi1, psi2])
Psi_P = kernel_from_coefficients(coefficientMatrix(np.eye(2) / np.sqrt(2)), [psi1, psi2])


def random_kernel(rng, n=grid.nPoints):
    values = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Psi = kernelField(grid, values)
    return Psi.with_values(values / np.sqrt(Psi.normSquared))


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)


testcases = [
    (kernel_from_product(psi1, psi1), 0.0),
    (Psi_W, 0.0),
    (Psi_P, np.log(2))
]

@pytest.mark.parametrize("case,expected", testcases)
def test_entropy_both_routes(case, expected):
    schmidt = entropy(case)
    reduced = von_neumann_entropy(reduced_density(case))
    assert abs(schmidt - expected) <= 1e-9
    assert abs(reduced - expected) <= 1e-9
    assert abs(schmidt - reduced) <= 1e-8


def test_particle_entropy_oracle():
    # brute force: 2x2 reduced density of the particle-like coefficients
    a = np.eye(2) / np.sqrt(2)
    rho = a @ a.conj().T
    eigenvalues = np.linalg.eigvalsh(rho)
    oracle = -np.sum(eigenvalues * np.log(eigenvalues))
    assert oracle == pytest.approx(np.log(2), abs=1e-12)
    assert oracle != pytest.approx(0.5 * np.log(2), abs=1e-3)
    assert entropy(Psi_P) == pytest.approx(oracle, abs=1e-9)
    assert von_neumann_entropy(rho) == pytest.approx(oracle, abs=1e-12)


def test_schmidt_decomposition():
    rng = np.random.default_rng(4)
    Psi = random_kernel(rng)
    d = schmidt_decompose(Psi)
    assert abs(np.sum(d.weights) - 1) <= 1e-8
    assert np.all(np.diff(d.coefficients) <= 0)
    assert np.all(d.coefficients > 1e-12 * d.coefficients[0])
    assert np.max(np.abs(d.reconstruct().values - Psi.values)) <= 1e-8
    for modes in (d.leftModes, d.rightModes):
        gram = np.array([[inner_product(f, g) for g in modes[:6]] for f in modes[:6]])
        assert np.max(np.abs(gram - np.eye(6))) <= 1e-8


testcases = [
    (kernel_from_product(psi1, psi1), 1),
    (Psi_W, 1),
    (Psi_P, 2),
    (kernel_from_coefficients(coefficientMatrix(np.eye(3) / np.sqrt(3)), well.states[:3]), 3)
]

@pytest.mark.parametrize("case,expected", testcases)
def test_schmidt_rank(case, expected):
    assert schmidt_decompose(case).rank == expected


def test_schmidt_requires_normalized():
    with pytest.raises(preconditionError):
        schmidt_decompose(kernel_from_product(psi1, psi1.with_values(2 * psi1.values)))


def test_entropy_routes_agree_on_random_kernels():
    rng = np.random.default_rng(12)
    for _ in range(5):
        Psi = random_kernel(rng)
        S = entropy(Psi)
        assert abs(S - von_neumann_entropy(reduced_density(Psi, 'x'))) <= 1e-8
        assert abs(S - von_neumann_entropy(reduced_density(Psi, 'y'))) <= 1e-8


testcases = ['x', 'y']

@pytest.mark.parametrize("case", testcases)
def test_reduced_density_invariants(case):
    rng = np.random.default_rng(13)
    rho = reduced_density(random_kernel(rng), case)
    assert rho.hermitian
    assert rho.positive
    assert abs(rho.trace - 1) <= 1e-8


def test_reduced_density_side():
    with pytest.raises(preconditionError):
        reduced_density(Psi_W, 'z')


def test_position_density():
    d = position_density(Psi_W)
    assert abs(d.total - 1) <= 1e-8
    assert np.max(np.abs(d.values - np.abs(psi1.values + psi2.values) ** 2 / 2)) <= 1e-8
    rotated = position_density(Psi_W.with_values(np.exp(1.1j) * Psi_W.values))
    assert np.max(np.abs(rotated.values - d.values)) <= 1e-12
    particle = position_density(Psi_P)
    assert np.max(np.abs(particle.values - (np.abs(psi1.values) ** 2 + np.abs(psi2.values) ** 2) / 2)) <= 1e-8


def test_expectation_consistency():
    rng = np.random.default_rng(17)
    n = grid.nPoints
    for _ in range(50):
        values = rng.normal(size=n) + 1j * rng.normal(size=n)
        values[0] = values[-1] = 0
        psi = scalarField(grid, values).normalize()
        O = gridObservable.from_matrix(grid, random_hermitian(rng, n))
        reference = (np.vdot(psi.values, O.dense @ psi.values) * grid.spacing).real
        assert abs(expectation(kernel_from_product(psi, psi), O) - reference) <= 1e-8


ground = kernel_from_product(psi1, psi1)

testcases = [
    ((ground, gridObservable.identity(grid)), 1.0),
    ((ground, gridObservable.position(grid)), 0.5),
    ((ground, gridObservable.hamiltonian(h)), E[0]),
    ((ground, gridObservable.potential_energy(h)), 0.0),
    ((Psi_P, gridObservable.identity(grid)), 1.0),
    ((Psi_P, gridObservable.hamiltonian(h)), 0.5 * (E[0] + E[1]))
]

@pytest.mark.parametrize("case,expected", testcases)
def test_expectation(case, expected):
    Psi, observable = case
    assert expectation(Psi, observable) == pytest.approx(expected, abs=1e-8)


def test_expectation_rejects_non_hermitian():
    skew = np.zeros((grid.nPoints, grid.nPoints))
    skew[1, 2] = 1.0
    with pytest.raises(preconditionError, match="not Hermitian"):
        expectation(Psi_W, gridObservable.from_matrix(grid, skew))
    with pytest.raises(preconditionError):
        gridObservable(grid, 'empty')


def test_observable_from_function():
    O = gridObservable.from_function(grid, lambda x: x ** 2, 'x2')
    Psi = kernel_from_product(psi1, psi1)
    reference = np.sum(grid.points ** 2 * np.abs(psi1.values) ** 2) * grid.spacing
    assert expectation(Psi, O) == pytest.approx(reference, rel=1e-12)


testcases = [
    (kernel_from_product(well.states[2], well.states[2]), lambda c: abs(c[2, 2] - 1) <= 1e-8 and np.sum(np.abs(c) ** 2) - 1 <= 1e-8),
    (Psi_W, lambda c: np.max(np.abs(c[:2, :2] - 0.5)) <= 1e-8 and np.max(np.abs(c[2:])) <= 1e-8)
]

@pytest.mark.parametrize("case,expected", testcases)
def test_eigenbasis_coefficients(case, expected):
    c = eigenbasis_coefficients(case, well)
    assert expected(c.entries)
    assert c.hermitian


def test_eigenbasis_round_trip():
    rng = np.random.default_rng(9)
    c = coefficientMatrix(random_hermitian(rng, 8)).normalize()
    Psi = kernel_from_coefficients(c, well.states)
    back = eigenbasis_coefficients(Psi, well)
    assert np.max(np.abs(back.entries - c.entries)) <= 1e-8
    assert np.max(np.abs(kernel_from_coefficients(back, well.states).values - Psi.values)) <= 1e-8


def test_truncation_warning():
    Psi = kernel_from_product(well.states[5], well.states[5])
    with pytest.warns(truncationWarning) as record:
        c = eigenbasis_coefficients(Psi, well, 3)
    assert record[0].message.deficit == pytest.approx(1.0, abs=1e-8)
    assert c.weight <= 1e-8
    with warnings.catch_warnings():
        warnings.simplefilter('error')
        eigenbasis_coefficients(Psi, well, 6)


def test_single_transition():
    entries = np.zeros((3, 3))
    entries[2, 0] = 1.0
    report = transition_probabilities(coefficientMatrix(entries), well)
    assert report.probabilities[0] == 1.0
    assert report.energyShifts[0] == pytest.approx(E[2] - E[0], rel=1e-14)
    assert report.weightedShifts[0] == pytest.approx(E[2] - E[0], rel=1e-14)


def test_wave_block_transitions():
    c = coefficientMatrix(np.full((2, 2), 0.5))
    report = transition_probabilities(c, well)
    assert np.allclose(report.probabilities, [0.5, 0.5], atol=1e-15)
    assert report.energyShifts[0] == pytest.approx((E[1] - E[0]) / 2, rel=1e-12)
    assert report.energyShifts[1] == pytest.approx((E[0] - E[1]) / 2, rel=1e-12)
    assert report.weightedShifts[0] == pytest.approx((E[1] - E[0]) / 4, rel=1e-12)
    assert energy_shift(c, well, 1) == pytest.approx((E[0] - E[1]) / 2, rel=1e-12)
    assert abs(report.expectedShift) <= 1e-9


def test_transition_bookkeeping():
    rng = np.random.default_rng(2024)
    for sample in range(100):
        dim = 1 + sample % 8
        c = coefficientMatrix(random_hermitian(rng, dim)).normalize()
        report = transition_probabilities(c, well)
        assert np.all(report.probabilities >= 0)
        assert abs(report.total - 1) <= 1e-10
        assert abs(report.expectedShift) <= 1e-9
        brute = sum(abs(c.entries[n, m]) ** 2 * (E[n] - E[m]) for n in range(dim) for m in range(dim))
        assert abs(brute) <= 1e-9


testcases = [
    ((kernel_from_product(psi2, psi2), 1), (1.0, 0.0)),
    ((Psi_W, 0), (0.5, (E[1] - E[0]) / 2)),
    ((Psi_P, 1), (0.5, 0.0))
]

@pytest.mark.parametrize("case,expected", testcases)
def test_collapse(case, expected):
    Psi, m = case
    collapsed, p, shift = collapse(Psi, well, m)
    assert p == pytest.approx(expected[0], abs=1e-8)
    assert shift == pytest.approx(expected[1], abs=1e-8 * E[1])
    state = well.states[m]
    assert np.max(np.abs(collapsed.values - np.outer(state.values, state.values.conj()))) <= 1e-12
    assert entropy(collapsed) <= 1e-12
    assert hermiticity_defect(collapsed) <= 1e-12


def test_collapse_zero_probability():
    with pytest.raises(zeroProbabilityError):
        collapse(Psi_W, well, 4)


def test_coefficient_entropy_matches_kernel():
    rng = np.random.default_rng(31)
    c = coefficientMatrix(random_hermitian(rng, 4)).normalize()
    assert coefficient_entropy(c) == pytest.approx(entropy(kernel_from_coefficients(c, well.states[:4])), abs=1e-8)


def test_random_hermitian_coefficients():
    c = random_hermitian_coefficients(4, np.random.default_rng(1))
    assert c.hermitian and c.normalized
    again = random_hermitian_coefficients(4, np.random.default_rng(1))
    assert np.array_equal(c.entries, again.entries)


def test_transition_graph():
    c = coefficientMatrix(np.full((2, 2), 0.5))
    graph = transition_graph(c, well)
    assert isinstance(graph, networkx.DiGraph)
    assert set(graph.nodes) == {0, 1}
    assert graph.nodes[0]['probability'] == pytest.approx(0.5)
    assert graph.edges[1, 0]['weight'] == pytest.approx(0.25)
    assert graph.edges[1, 0]['gap'] == pytest.approx(E[1] - E[0])
    assert graph.number_of_edges() == 4
    diagonal = transition_graph(coefficientMatrix(np.eye(2) / np.sqrt(2)), well)
    assert sorted(diagonal.edges) == [(0, 0), (1, 1)]
