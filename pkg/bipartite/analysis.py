import logging
import warnings

import attr
import networkx
import numpy as np
import scipy.linalg

from . import rules
from .errors import (dimensionError, numericError, preconditionError,
                     truncationWarning, zeroProbabilityError)
from .objects import (coefficientMatrix, densityField, frozen_array, frozen_real_array,
                      kernelField, scalarField, check_same_grid,
                      hermiticity_defect, kernel_from_product)

log = logging.getLogger(__name__)

SIDES = ('x', 'y')


def entropy_from_weights(weights):
    '''
    Shannon form -sum w ln w of a set of weights, with 0 ln 0 = 0.

    Parameters
    ----------
    weights : array_like
        Non-negative weights (mu_n^2 or density eigenvalues)

    Returns
    -------
    float
        Entropy, clipped at zero
    '''
    w = np.asarray(weights, dtype=float)
    w = w[w > 0]
    return max(0.0, float(-np.sum(w * np.log(w))))


# Analysis objects
#     - schmidtDecomposition
#     - reducedDensity
#     - transitionReport
#     - gridObservable

@attr.s(frozen=True, eq=False, repr=False)
class schmidtDecomposition:
    """
    Psi(x, y) = sum mu_n left_n(x) right_n*(y) with orthonormal mode sets
    and descending positive coefficients.

    Attributes
    ----------
    coefficients : numpy.ndarray
        mu_n, descending, all above rules.SCHMIDT_CUTOFF * mu_1
    leftModes : [scalarField]
    rightModes : [scalarField]
    rank : int
    """
    coefficients = attr.ib(converter=frozen_real_array)
    leftModes = attr.ib()
    rightModes = attr.ib()
    rank = attr.ib(init=False)

    @rank.default
    def compute_rank(self):
        return len(self.coefficients)

    @property
    def weights(self):
        return self.coefficients ** 2

    def reconstruct(self):
        """
        reconstruct()

        Sum the retained Schmidt terms back into a kernelField.
        """
        left = np.column_stack([mode.values for mode in self.leftModes])
        right = np.column_stack([mode.values for mode in self.rightModes])
        return kernelField(self.leftModes[0].grid, (left * self.coefficients) @ right.conj().T)

    def __repr__(self):
        return 'schmidtDecomposition(rank={}, mu={})'.format(self.rank, np.array2string(self.coefficients[:4], precision=6))


@attr.s(frozen=True, eq=False, repr=False)
class reducedDensity:
    """
    Reduced density of a bipartite kernel, one argument traced out.

    values holds the kernel rho(x_i, x_j); the operator that is traced and
    diagonalised is matrix = values * spacing.

    Attributes
    ----------
    grid : grid1D
    side : str
        'x' or 'y', the argument that is kept
    values : numpy.ndarray
    trace : float
    hermiticityDefect : float
    minEigenvalue : float
    """
    grid = attr.ib()
    side = attr.ib()
    values = attr.ib(converter=frozen_array)
    trace = attr.ib(init=False)
    hermiticityDefect = attr.ib(init=False)
    minEigenvalue = attr.ib(init=False)

    @side.validator
    def check_side(self, attribute, value):
        if value not in SIDES:
            raise preconditionError("side must be 'x' or 'y', got '{}'".format(value))

    @property
    def matrix(self):
        return self.values * self.grid.spacing

    @trace.default
    def compute_trace(self):
        return float(np.real(np.trace(self.matrix)))

    @hermiticityDefect.default
    def compute_defect(self):
        return hermiticity_defect(self.matrix)

    @minEigenvalue.default
    def compute_min_eigenvalue(self):
        return float(np.min(self.eigenvalues()))

    def eigenvalues(self):
        """
        eigenvalues()

        Ascending eigenvalues of the Hermitian part of matrix.
        """
        m = self.matrix
        return scipy.linalg.eigvalsh(0.5 * (m + m.conj().T))

    @property
    def hermitian(self):
        return self.hermiticityDefect <= rules.STRUCTURAL_TOL

    @property
    def positive(self):
        return self.minEigenvalue >= -rules.STRUCTURAL_TOL

    def __repr__(self):
        return 'reducedDensity(side={}, trace={:.12g})'.format(self.side, self.trace)


@attr.s(frozen=True, eq=False, repr=False)
class transitionReport:
    """
    Level bookkeeping of a coefficient matrix.

    Attributes
    ----------
    energies : numpy.ndarray
        E_m of the levels covered by the matrix
    probabilities : numpy.ndarray
        p_m = sum_n |c[n, m]|^2
    weightedShifts : numpy.ndarray
        sum_n |c[n, m]|^2 (E_n - E_m)
    energyShifts : numpy.ndarray
        Energy change given the outcome m, weightedShifts / p_m, zero where
        p_m vanishes
    expectedShift : float
        sum_m p_m energyShifts[m]
    """
    energies = attr.ib(converter=frozen_real_array)
    probabilities = attr.ib(converter=frozen_real_array)
    weightedShifts = attr.ib(converter=frozen_real_array)
    energyShifts = attr.ib(converter=frozen_real_array)
    expectedShift = attr.ib(converter=float)

    @property
    def total(self):
        return float(np.sum(self.probabilities))

    def __repr__(self):
        return 'transitionReport(levels={}, total={:.12g}, expectedShift={:.3e})'.format(
            len(self.probabilities), self.total, self.expectedShift)


@attr.s(frozen=True, eq=False, repr=False)
class gridObservable:
    """
    Operator acting on fields sampled on a grid.

    Functions of position are stored by their diagonal; anything else as a
    dense matrix.

    Attributes
    ----------
    grid : grid1D
    name : str
    diagonal : numpy.ndarray, optional
    dense : numpy.ndarray, optional
    """
    grid = attr.ib()
    name = attr.ib(default='observable')
    diagonal = attr.ib(default=None, converter=attr.converters.optional(frozen_array))
    dense = attr.ib(default=None, converter=attr.converters.optional(frozen_array))

    def __attrs_post_init__(self):
        n = self.grid.nPoints
        if (self.diagonal is None) == (self.dense is None):
            raise preconditionError("gridObservable needs exactly one of diagonal or dense")
        if self.diagonal is not None and self.diagonal.shape != (n,):
            raise dimensionError("Observable diagonal has shape {}, grid has {} points".format(self.diagonal.shape, n))
        if self.dense is not None and self.dense.shape != (n, n):
            raise dimensionError("Observable has shape {}, expected ({}, {})".format(self.dense.shape, n, n))

    @classmethod
    def identity(cls, grid):
        return cls(grid, 'identity', diagonal=np.ones(grid.nPoints))

    @classmethod
    def position(cls, grid):
        return cls(grid, 'position', diagonal=grid.points)

    @classmethod
    def from_function(cls, grid, func, name='function'):
        """
        from_function(grid, func, name='function')

        Multiplication operator by func(x) evaluated on the grid points.
        """
        return cls(grid, name, diagonal=func(grid.points))

    @classmethod
    def from_matrix(cls, grid, matrix, name='matrix'):
        return cls(grid, name, dense=matrix)

    @classmethod
    def potential_energy(cls, h):
        potential = h.potential
        if potential is None:
            return cls(h.grid, 'potential', diagonal=np.zeros(h.grid.nPoints))
        return cls(h.grid, 'potential', diagonal=potential.evaluate(h.grid, h.constants))

    @classmethod
    def hamiltonian(cls, h):
        return cls(h.grid, 'hamiltonian', dense=h.dense())

    @property
    def scale(self):
        values = self.diagonal if self.diagonal is not None else self.dense
        return float(np.max(np.abs(values)))

    @property
    def hermiticityDefect(self):
        if self.diagonal is not None:
            return float(np.max(np.abs(self.diagonal.imag)))
        return hermiticity_defect(self.dense)

    @property
    def hermitian(self):
        return self.hermiticityDefect <= rules.STRUCTURAL_TOL * max(1.0, self.scale)

    def apply(self, values):
        """
        apply(values)

        O acting on the first axis of values (a field or the x argument of
        a kernel).
        """
        if self.diagonal is not None:
            return self.diagonal.reshape((-1,) + (1,) * (values.ndim - 1)) * values
        return self.dense @ values

    def __repr__(self):
        return 'gridObservable(name={}, nPoints={})'.format(self.name, self.grid.nPoints)


def require_normalized(Psi, operation):
    if not Psi.normalized:
        raise preconditionError("{} needs a normalized kernel (|Psi|^2 = {:.12g})".format(operation, Psi.normSquared))


def schmidt_decompose(Psi):
    '''
    Schmidt decomposition of a normalized kernel.

    The singular value decomposition of the quadrature weighted matrix
    Psi * spacing gives mu_n directly; singular vectors are rescaled by
    1/sqrt(spacing) so the modes are orthonormal under inner_product.

    Parameters
    ----------
    Psi : kernelField

    Returns
    -------
    schmidtDecomposition

    Raises
    ------
    preconditionError
        Psi is not normalized.
    numericError
        The SVD did not converge with either LAPACK driver.
    '''
    require_normalized(Psi, 'schmidt_decompose')
    matrix = Psi.matrix
    try:
        u, s, vh = scipy.linalg.svd(matrix, lapack_driver='gesdd', check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        log.debug("gesdd failed ({}), retrying with gesvd".format(exc))
        try:
            u, s, vh = scipy.linalg.svd(matrix, lapack_driver='gesvd', check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise numericError("SVD of {0}x{0} kernel did not converge: {1}".format(Psi.grid.nPoints, exc))

    rank = int(np.sum(s > rules.SCHMIDT_CUTOFF * s[0]))
    scale = 1 / np.sqrt(Psi.grid.spacing)
    left = [scalarField(Psi.grid, u[:, n] * scale) for n in range(rank)]
    right = [scalarField(Psi.grid, vh[n].conj() * scale) for n in range(rank)]
    return schmidtDecomposition(s[:rank], left, right)


def entropy(Psi):
    '''
    Entanglement entropy S = -sum mu_n^2 ln mu_n^2 over the Schmidt
    coefficients of a normalized kernel.

    Parameters
    ----------
    Psi : kernelField

    Returns
    -------
    float
    '''
    return entropy_from_weights(schmidt_decompose(Psi).weights)


def reduced_density(Psi, side='x'):
    '''
    Trace out one argument of a normalized kernel.

    rho_x(x_i, x_j) = sum_k Psi(x_i, y_k) Psi*(x_j, y_k) * spacing
    rho_y(y_i, y_j) = sum_k Psi(x_k, y_i) Psi*(x_k, y_j) * spacing

    Parameters
    ----------
    Psi : kernelField
    side : str
        Argument kept, 'x' or 'y'

    Returns
    -------
    reducedDensity
    '''
    require_normalized(Psi, 'reduced_density')
    values = Psi.values
    h = Psi.grid.spacing
    if side == 'x':
        rho = values @ values.conj().T * h
    elif side == 'y':
        rho = values.T @ values.conj() * h
    else:
        raise preconditionError("side must be 'x' or 'y', got '{}'".format(side))
    return reducedDensity(Psi.grid, side, rho)


def von_neumann_entropy(density):
    '''
    -Tr rho ln rho from the eigenvalues of a positive semidefinite matrix.

    Eigenvalues at the round-off floor (eps * size * largest) are dropped.

    Parameters
    ----------
    density : reducedDensity or numpy.ndarray

    Returns
    -------
    float
    '''
    if isinstance(density, reducedDensity):
        values = density.eigenvalues()
    else:
        matrix = np.asarray(density)
        values = scipy.linalg.eigvalsh(0.5 * (matrix + matrix.conj().T))
    floor = np.finfo(float).eps * len(values) * max(float(np.max(values)), 0.0)
    return entropy_from_weights(values[values > floor])


def coefficient_entropy(c):
    '''
    Entropy of the kernel sum c[n, m] psi_n(x) psi_m*(y) over an orthonormal
    basis, computed from the singular values of c alone.

    Parameters
    ----------
    c : coefficientMatrix
        Normalized

    Returns
    -------
    float
    '''
    if not c.normalized:
        raise preconditionError("coefficient_entropy needs a normalized matrix (weight {:.12g})".format(c.weight))
    s = scipy.linalg.svdvals(c.entries)
    s = s[s > rules.SCHMIDT_CUTOFF * s[0]]
    return entropy_from_weights(s ** 2)


def expectation(Psi, observable):
    '''
    <O>_Psi = Tr[rho^dagger O rho] with rho = Psi * spacing.

    Parameters
    ----------
    Psi : kernelField
        Normalized
    observable : gridObservable
        Hermitian

    Returns
    -------
    float

    Raises
    ------
    preconditionError
        Psi is not normalized or the observable is not Hermitian.
    '''
    require_normalized(Psi, 'expectation')
    check_same_grid(Psi, observable)
    if not observable.hermitian:
        raise preconditionError("Observable '{}' is not Hermitian (defect {:.3e})".format(
            observable.name, observable.hermiticityDefect))
    matrix = Psi.matrix
    value = np.vdot(matrix, observable.apply(matrix))
    if abs(value.imag) > rules.STRUCTURAL_TOL * max(1.0, abs(value.real)):
        log.debug("Expectation of '{}' has imaginary part {:.3e}".format(observable.name, value.imag))
    return float(value.real)


def position_density(Psi):
    '''
    d(x_i) = sum_j |Psi(x_i, y_j)|^2 * spacing, the diagonal of rho_x.

    Parameters
    ----------
    Psi : kernelField

    Returns
    -------
    densityField
    '''
    require_normalized(Psi, 'position_density')
    return densityField(Psi.grid, np.sum(np.abs(Psi.values) ** 2, axis=1) * Psi.grid.spacing)


def eigenbasis_coefficients(Psi, spectrum, k=None):
    '''
    Expand a kernel in the first k eigenfunctions,
    c[n, m] = sum psi_n*(x) Psi(x, y) psi_m(y) * spacing^2.

    Emits a truncationWarning when the captured weight sum |c|^2 is below
    rules.CAPTURE_THRESHOLD.

    Parameters
    ----------
    Psi : kernelField
    spectrum : spectrum
    k : int, optional
        Number of levels, defaults to spectrum.count

    Returns
    -------
    coefficientMatrix
    '''
    require_normalized(Psi, 'eigenbasis_coefficients')
    check_same_grid(Psi, spectrum)
    k = spectrum.count if k is None else k
    if not 1 <= k <= spectrum.count:
        raise preconditionError("Cannot expand in {} levels, spectrum holds {}".format(k, spectrum.count))

    basis = spectrum.basis(k)
    c = coefficientMatrix(basis.conj().T @ Psi.values @ basis * Psi.grid.spacing ** 2)
    if c.weight < rules.CAPTURE_THRESHOLD:
        deficit = 1.0 - c.weight
        message = "Expansion in {} levels captures weight {:.6f}, deficit {:.3e}".format(k, c.weight, deficit)
        log.warning(message)
        warnings.warn(truncationWarning(message, deficit), stacklevel=2)
    return c


def transition_probabilities(c, spectrum):
    '''
    Level probabilities p_m = sum_n |c[n, m]|^2 and the energy changes
    attached to each outcome.

    weightedShifts[m] is sum_n |c[n, m]|^2 (E_n - E_m); energyShifts[m]
    divides it by p_m, so a single entry c[n, m] = 1 gives E_n - E_m.

    Parameters
    ----------
    c : coefficientMatrix
        Normalized
    spectrum : spectrum
        Supplies E_0 ... E_{dim-1}

    Returns
    -------
    transitionReport
    '''
    if not c.normalized:
        raise preconditionError("transition_probabilities needs a normalized matrix (weight {:.12g})".format(c.weight))
    if c.dim > spectrum.count:
        raise dimensionError("Coefficient matrix dim {} exceeds {} retained levels".format(c.dim, spectrum.count))

    energies = np.array(spectrum.energies[:c.dim])
    w = np.abs(c.entries) ** 2
    probabilities = w.sum(axis=0)
    weighted = np.sum(w * (energies[:, None] - energies[None, :]), axis=0)
    occupied = probabilities > rules.ZERO_PROBABILITY
    shifts = np.zeros_like(weighted)
    shifts[occupied] = weighted[occupied] / probabilities[occupied]
    expected = float(np.sum(probabilities * shifts))
    return transitionReport(energies, probabilities, weighted, shifts, expected)


def energy_shift(c, spectrum, m):
    '''
    Energy change attached to outcome m, transition_probabilities(c,
    spectrum).energyShifts[m].
    '''
    report = transition_probabilities(c, spectrum)
    if not 0 <= m < c.dim:
        raise preconditionError("Level {} outside the {} levels of the coefficient matrix".format(m, c.dim))
    return float(report.energyShifts[m])


def collapse(Psi, spectrum, m, k=None):
    '''
    Collapse of Psi onto level m.

    Parameters
    ----------
    Psi : kernelField
    spectrum : spectrum
    m : int
        0-based level index
    k : int, optional
        Levels used for the expansion, defaults to spectrum.count

    Returns
    -------
    (kernelField, float, float)
        psi_m(x) psi_m*(y), p_m and the energy shift for outcome m

    Raises
    ------
    zeroProbabilityError
        p_m <= rules.ZERO_PROBABILITY
    '''
    c = eigenbasis_coefficients(Psi, spectrum, k)
    if not 0 <= m < c.dim:
        raise preconditionError("Level {} outside the {} expanded levels".format(m, c.dim))
    report = transition_probabilities(c.normalize(), spectrum)
    p = float(report.probabilities[m])
    if p <= rules.ZERO_PROBABILITY:
        raise zeroProbabilityError("Level {} has probability {:.3e}, cannot collapse onto it".format(m, p))
    state = spectrum.states[m]
    return kernel_from_product(state, state), p, float(report.energyShifts[m])


def random_hermitian_coefficients(dim, rng):
    '''
    Random normalized Hermitian coefficient matrix with Gaussian entries.

    Parameters
    ----------
    dim : int
    rng : numpy.random.Generator

    Returns
    -------
    coefficientMatrix
    '''
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return coefficientMatrix(0.5 * (a + a.conj().T)).normalize()


def transition_graph(c, spectrum):
    '''
    Level transition graph of a coefficient matrix.

    Nodes are levels carrying energy, probability and shift; an edge
    n -> m carries weight |c[n, m]|^2, the share of outcome m fed by
    level n. Negligible edges are left out.

    Parameters
    ----------
    c : coefficientMatrix
    spectrum : spectrum

    Returns
    -------
    networkx.DiGraph
    '''
    report = transition_probabilities(c, spectrum)
    graph = networkx.DiGraph()
    for m in range(c.dim):
        graph.add_node(m, energy=float(report.energies[m]), probability=float(report.probabilities[m]),
                       shift=float(report.energyShifts[m]))

    w = np.abs(c.entries) ** 2
    for n in range(c.dim):
        for m in range(c.dim):
            if w[n, m] > rules.ZERO_PROBABILITY:
                graph.add_edge(n, m, weight=float(w[n, m]), gap=float(report.energies[n] - report.energies[m]))
    return graph
