import logging

import attr
import numpy as np
import scipy.linalg

from . import rules
from .errors import dimensionError, numericError, preconditionError
from .objects import (frozen_real_array, physicalConstants, scalarField,
                      check_same_grid, orthonormality_defect, stack_fields)

log = logging.getLogger(__name__)

POTENTIAL_KINDS = ('infinite_well', 'harmonic', 'double_well', 'tabulated')


@attr.s(frozen=True, eq=False)
class potentialSpec:
    """
    Potential energy U(x) of the particle.

    Every kind lives inside hard walls at the grid ends, so 'infinite_well'
    is simply U = 0.

    Attributes
    ----------
    kind : str
        One of POTENTIAL_KINDS
    omega : float
        Angular frequency of 'harmonic', U = m omega^2 x^2 / 2
    barrierHeight : float
        Height of the central barrier of 'double_well'
    barrierHalfWidth : float
        Half width of the central barrier of 'double_well'
    values : numpy.ndarray, optional
        U per grid point for 'tabulated'
    offset : float
        Constant added to every kind
    """
    kind = attr.ib(default='infinite_well')
    omega = attr.ib(default=1.0, converter=float)
    barrierHeight = attr.ib(default=0.0, converter=float)
    barrierHalfWidth = attr.ib(default=0.0, converter=float)
    values = attr.ib(default=None, repr=False, converter=attr.converters.optional(frozen_real_array))
    offset = attr.ib(default=0.0, converter=float)

    @kind.validator
    def check_kind(self, attribute, value):
        if value not in POTENTIAL_KINDS:
            raise preconditionError("Unknown potential '{}', expected one of {}".format(value, ', '.join(POTENTIAL_KINDS)))

    @omega.validator
    def check_omega(self, attribute, value):
        if self.kind == 'harmonic' and not value > 0:
            raise preconditionError("harmonic potential needs omega > 0, got {}".format(value))

    @barrierHeight.validator
    def check_height(self, attribute, value):
        if self.kind == 'double_well' and value < 0:
            raise preconditionError("double_well needs barrier_height ≥ 0, got {}".format(value))

    @values.validator
    def check_values(self, attribute, value):
        if self.kind == 'tabulated' and value is None:
            raise preconditionError("tabulated potential needs values")

    def evaluate(self, grid, constants):
        """
        evaluate(grid, constants)

        Sample U on the grid.

        Parameters
        ----------
        grid : grid1D
        constants : physicalConstants

        Returns
        -------
        numpy.ndarray

        Raises
        ------
        dimensionError
            Tabulated values do not match the grid.
        preconditionError
            Barrier does not fit inside the grid.
        """
        x = grid.points
        if self.kind == 'infinite_well':
            u = np.zeros_like(x)
        elif self.kind == 'harmonic':
            u = 0.5 * constants.mass * self.omega ** 2 * x ** 2
        elif self.kind == 'double_well':
            if not 0 < self.barrierHalfWidth < grid.length / 2:
                raise preconditionError(
                    "double_well needs 0 < barrier_half_width < {}, got {}".format(grid.length / 2, self.barrierHalfWidth))
            u = np.where(np.abs(x - grid.center) < self.barrierHalfWidth, self.barrierHeight, 0.0)
        else:
            if self.values.shape != (grid.nPoints,):
                raise dimensionError("Tabulated potential has {} values, grid has {} points".format(self.values.size, grid.nPoints))
            u = np.array(self.values)
        return u + self.offset


@attr.s(frozen=True, eq=False, repr=False)
class discreteHamiltonian:
    """
    Second order finite difference Hamiltonian with hard walls.

    The operator is the real symmetric tridiagonal matrix acting on the
    interior points; amplitudes at both ends are pinned to zero.

    Attributes
    ----------
    grid : grid1D
    constants : physicalConstants
    diagonal : numpy.ndarray
        hbar^2 / (m spacing^2) + U(x_i) per grid point
    offDiagonal : float
        -hbar^2 / (2 m spacing^2)
    potential : potentialSpec, optional
    """
    grid = attr.ib()
    constants = attr.ib()
    diagonal = attr.ib(converter=frozen_real_array)
    offDiagonal = attr.ib(converter=float)
    potential = attr.ib(default=None)

    @diagonal.validator
    def check_diagonal(self, attribute, value):
        if value.shape != (self.grid.nPoints,):
            raise dimensionError("Diagonal has shape {}, grid has {} points".format(value.shape, self.grid.nPoints))

    @property
    def size(self):
        """Number of interior unknowns."""
        return self.grid.nPoints - 2

    def bands(self):
        """
        bands()

        Interior diagonal and off-diagonal of the tridiagonal matrix.

        Returns
        -------
        (numpy.ndarray, numpy.ndarray)
        """
        return np.array(self.diagonal[self.grid.interior]), np.full(self.size - 1, self.offDiagonal)

    def dense(self):
        """
        dense()

        Full (nPoints, nPoints) matrix, zero on the wall rows and columns.
        """
        d, e = self.bands()
        matrix = np.zeros((self.grid.nPoints, self.grid.nPoints))
        matrix[self.grid.interior, self.grid.interior] = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
        return matrix

    def shifted(self, energy):
        """
        shifted(energy)

        Same operator plus energy times the identity.
        """
        return discreteHamiltonian(self.grid, self.constants, np.array(self.diagonal) + energy,
                                   self.offDiagonal, self.potential)

    def __repr__(self):
        return 'discreteHamiltonian(nPoints={}, offDiagonal={:.12g})'.format(self.grid.nPoints, self.offDiagonal)


@attr.s(frozen=True, eq=False, repr=False)
class spectrum:
    """
    Lowest eigenpairs of a discreteHamiltonian.

    Attributes
    ----------
    energies : numpy.ndarray
        Ascending eigenvalues E_n
    states : [scalarField]
        Orthonormal eigenfunctions psi_n, first significant component
        real positive
    constants : physicalConstants
    residuals : numpy.ndarray
        |H psi_n - E_n psi_n| per pair
    count : int
    """
    energies = attr.ib(converter=frozen_real_array)
    states = attr.ib()
    constants = attr.ib(factory=physicalConstants)
    residuals = attr.ib(default=None, converter=attr.converters.optional(frozen_real_array))
    count = attr.ib(init=False)

    @count.default
    def compute_count(self):
        return len(self.states)

    @states.validator
    def check_states(self, attribute, value):
        if len(value) != len(self.energies):
            raise dimensionError("{} energies but {} states".format(len(self.energies), len(value)))

    @property
    def grid(self):
        return self.states[0].grid

    def basis(self, k=None):
        """
        basis(k=None)

        The first k eigenfunctions as columns of an (nPoints, k) matrix.
        """
        k = self.count if k is None else k
        return stack_fields(self.states[:k])

    def truncated(self, k):
        if not 1 <= k <= self.count:
            raise preconditionError("Cannot keep {} of {} levels".format(k, self.count))
        residuals = None if self.residuals is None else self.residuals[:k]
        return spectrum(self.energies[:k], self.states[:k], self.constants, residuals)

    def __repr__(self):
        return 'spectrum(count={}, energies={})'.format(self.count, np.array2string(self.energies[:4], precision=6))


def build_hamiltonian(grid, potential=None, constants=None):
    '''
    Discretize H = -hbar^2/(2m) d^2/dx^2 + U(x) on grid.

    Parameters
    ----------
    grid : grid1D
    potential : potentialSpec, optional
        Defaults to the infinite well
    constants : physicalConstants, optional
        Defaults to natural units

    Returns
    -------
    discreteHamiltonian
    '''
    potential = potentialSpec() if potential is None else potential
    constants = physicalConstants() if constants is None else constants
    kinetic = constants.hbar ** 2 / (constants.mass * grid.spacing ** 2)
    u = potential.evaluate(grid, constants)
    return discreteHamiltonian(grid, constants, kinetic + u, -0.5 * kinetic, potential)


def apply_hamiltonian(h, psi):
    '''
    Tridiagonal matrix-vector product H psi.

    Wall values of psi are ignored and the result vanishes on the walls.

    Parameters
    ----------
    h : discreteHamiltonian
    psi : scalarField

    Returns
    -------
    scalarField
    '''
    check_same_grid(h, psi)
    d, _ = h.bands()
    u = psi.values[h.grid.interior]
    hu = d * u
    hu[1:] += h.offDiagonal * u[:-1]
    hu[:-1] += h.offDiagonal * u[1:]
    out = np.zeros(h.grid.nPoints, dtype=complex)
    out[h.grid.interior] = hu
    return scalarField(h.grid, out)


def fix_phase(vector):
    '''
    Flip the sign of a real eigenvector so its first significant component
    (scanning from x_min) is positive.
    '''
    scale = np.max(np.abs(vector))
    if scale == 0:
        return vector
    first = np.flatnonzero(np.abs(vector) > rules.ALGEBRAIC_TOL * scale)[0]
    return -vector if vector[first] < 0 else vector


def degenerate_clusters(energies):
    '''
    Group indices of energies closer than rules.DEGENERACY_TOL * max|E|.

    Returns
    -------
    [[int]]
    '''
    tol = rules.DEGENERACY_TOL * max(np.max(np.abs(energies)), 1.0)
    clusters = [[0]]
    for i in range(1, len(energies)):
        if energies[i] - energies[i - 1] <= tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters


def solve_spectrum(h, k):
    '''
    Lowest k eigenpairs of h.

    Eigenvalues come from bisection and eigenvectors from inverse iteration
    (LAPACK stebz/stein through scipy), which is deterministic for identical
    input.

    Parameters
    ----------
    h : discreteHamiltonian
    k : int
        Number of levels, 1 <= k <= number of interior points

    Returns
    -------
    spectrum

    Raises
    ------
    preconditionError
        k out of range.
    numericError
        Solver failure or eigenpairs failing the residual/orthonormality
        checks.
    '''
    if not 1 <= k <= h.size:
        raise preconditionError("Requested {} levels, grid supports 1 to {}".format(k, h.size))

    d, e = h.bands()
    try:
        energies, vectors = scipy.linalg.eigh_tridiagonal(
            d, e, select='i', select_range=(0, k - 1), lapack_driver='stebz')
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise numericError("Tridiagonal eigensolver failed for k={} on {} points: {}".format(k, h.size, exc))

    for cluster in degenerate_clusters(energies):
        if len(cluster) > 1:
            log.debug("Re-orthonormalizing degenerate levels {}".format(cluster))
            q, _ = np.linalg.qr(vectors[:, cluster])
            vectors[:, cluster] = q
            for i in cluster:
                vectors[:, i] = fix_phase(vectors[:, i])
            leading = [np.flatnonzero(np.abs(vectors[:, i]) > rules.ALGEBRAIC_TOL)[0] for i in cluster]
            order = [cluster[j] for j in np.argsort(leading, kind='stable')]
            vectors[:, cluster] = vectors[:, order]

    states = []
    residuals = []
    for n in range(len(energies)):
        full = np.zeros(h.grid.nPoints)
        full[h.grid.interior] = fix_phase(vectors[:, n]) / np.sqrt(h.grid.spacing)
        state = scalarField(h.grid, full)
        residual = apply_hamiltonian(h, state).values - energies[n] * state.values
        residuals.append(np.sqrt(np.sum(np.abs(residual) ** 2) * h.grid.spacing))
        if residuals[-1] > rules.RESIDUAL_TOL * (1 + abs(energies[n])):
            raise numericError("Level {} residual {:.3e} exceeds tolerance (E={:.12g}, iterations of stein did not converge)".format(
                n, residuals[-1], energies[n]))
        states.append(state)

    defect, pair = orthonormality_defect(states)
    if defect > rules.ALGEBRAIC_TOL:
        raise numericError("Eigenvectors not orthonormal: pair {} deviates by {:.3e}".format(pair, defect))

    log.debug("Solved {} levels on {} points, E_0={:.12g}".format(k, h.grid.nPoints, energies[0]))
    return spectrum(energies, states, h.constants, residuals)


def analytic_levels(potential, grid, constants, k):
    '''
    Closed form energies of the lowest k levels, when one exists.

    infinite_well : E_n = (n+1)^2 pi^2 hbar^2 / (2 m L^2), n = 0, 1, ...
    harmonic      : E_n = (n + 1/2) hbar omega

    Returns
    -------
    numpy.ndarray or None
    '''
    n = np.arange(k)
    if potential.kind == 'infinite_well':
        levels = (n + 1) ** 2 * np.pi ** 2 * constants.hbar ** 2 / (2 * constants.mass * grid.length ** 2)
    elif potential.kind == 'harmonic':
        levels = (n + 0.5) * constants.hbar * potential.omega
    else:
        return None
    return levels + potential.offset
