import logging

import attr
import numpy as np

from . import rules
from .errors import dimensionError, preconditionError

log = logging.getLogger(__name__)


def frozen_array(value, dtype=complex):
    '''
    Copy value into a read-only numpy array.

    Parameters
    ----------
    value : array_like
    dtype : numpy dtype

    Returns
    -------
    numpy.ndarray
        Non writeable copy of value
    '''
    arr = np.array(value, dtype=dtype)
    arr.setflags(write=False)
    return arr


def frozen_real_array(value):
    return frozen_array(value, dtype=float)


def check_same_grid(*fields):
    '''
    Raise dimensionError unless every field lives on the same grid.
    '''
    grids = [field.grid for field in fields]
    for grid in grids[1:]:
        if grid != grids[0]:
            raise dimensionError("Grid mismatch: {} vs {}".format(grids[0], grid))


def stack_fields(fields):
    '''
    Stack scalarFields column-wise into an (nPoints, k) matrix.

    Parameters
    ----------
    fields : [scalarField]

    Returns
    -------
    numpy.ndarray
    '''
    if len(fields) == 0:
        raise preconditionError("Cannot stack an empty list of fields")
    check_same_grid(*fields)
    return np.column_stack([field.values for field in fields])


# Core objects
# Every object here is immutable once built. Flags such as normalized or
# hermitian are measured at construction against the rules tolerances, they
# are never asserted by the caller.
#     - physicalConstants
#     - grid1D
#     - scalarField
#     - densityField
#     - kernelField
#     - coefficientMatrix

@attr.s(frozen=True)
class physicalConstants:
    """
    Physical constants entering the single particle Hamiltonian.

    Natural units (hbar = mass = 1) are the default.

    Attributes
    ----------
    hbar : float
        Reduced Planck constant, > 0
    mass : float
        Particle mass, > 0
    """
    hbar = attr.ib(default=1.0, converter=float)
    mass = attr.ib(default=1.0, converter=float)

    @hbar.validator
    @mass.validator
    def check_positive(self, attribute, value):
        if not value > 0:
            raise preconditionError("{} must be > 0, got {}".format(attribute.name, value))


@attr.s(frozen=True)
class grid1D:
    """
    Uniform grid on [xMin, xMax] including both endpoints.

    Fields vanish on the endpoints (hard walls), so a uniform quadrature
    weight equal to spacing is used at every point.

    Attributes
    ----------
    xMin : float
    xMax : float
    nPoints : int
        Number of points, >= 3
    spacing : float
        (xMax - xMin) / (nPoints - 1)
    """
    xMin = attr.ib(converter=float)
    xMax = attr.ib(converter=float)
    nPoints = attr.ib(converter=int)
    spacing = attr.ib(init=False, eq=False)

    @xMax.validator
    def check_extent(self, attribute, value):
        if not value > self.xMin:
            raise preconditionError("x_max must exceed x_min, got [{}, {}]".format(self.xMin, value))

    @nPoints.validator
    def check_points(self, attribute, value):
        if value < 3:
            raise preconditionError("n_points ≥ 3 required, got {}".format(value))

    @spacing.default
    def compute_spacing(self):
        return (self.xMax - self.xMin) / max(self.nPoints - 1, 1)

    @property
    def points(self):
        return np.linspace(self.xMin, self.xMax, self.nPoints)

    @property
    def length(self):
        return self.xMax - self.xMin

    @property
    def center(self):
        return 0.5 * (self.xMin + self.xMax)

    @property
    def interior(self):
        """Slice selecting the points away from the walls."""
        return slice(1, self.nPoints - 1)


@attr.s(frozen=True, eq=False, repr=False)
class scalarField:
    """
    Complex wave function sampled on a grid1D.

    Attributes
    ----------
    grid : grid1D
    values : numpy.ndarray
        Complex amplitude per grid point (read-only)
    normSquared : float
        sum |psi|^2 * spacing
    normalized : bool
        Whether |normSquared - 1| <= rules.STRUCTURAL_TOL
    """
    grid = attr.ib()
    values = attr.ib(converter=frozen_array)
    normSquared = attr.ib(init=False)
    normalized = attr.ib(init=False)

    @values.validator
    def check_length(self, attribute, value):
        if value.shape != (self.grid.nPoints,):
            raise dimensionError("Field has shape {}, grid has {} points".format(value.shape, self.grid.nPoints))

    @normSquared.default
    def compute_norm(self):
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.spacing)

    @normalized.default
    def check_normalized(self):
        return abs(self.normSquared - 1.0) <= rules.STRUCTURAL_TOL

    @property
    def norm(self):
        return np.sqrt(self.normSquared)

    def normalize(self):
        """
        normalize()

        Return a unit norm copy of this field.

        Raises
        ------
        preconditionError
            If the field is zero.
        """
        if self.normSquared == 0:
            raise preconditionError("Cannot normalize the zero field")
        return scalarField(self.grid, self.values / self.norm)

    def with_values(self, values):
        return scalarField(self.grid, values)

    def __repr__(self):
        return 'scalarField(nPoints={}, normSquared={:.12g})'.format(self.grid.nPoints, self.normSquared)


@attr.s(frozen=True, eq=False, repr=False)
class densityField:
    """
    Real, non-negative density on a grid (position or screen density).

    Attributes
    ----------
    grid : grid1D
    values : numpy.ndarray
    total : float
        sum density * spacing
    """
    grid = attr.ib()
    values = attr.ib(converter=frozen_real_array)
    total = attr.ib(init=False)

    @values.validator
    def check_length(self, attribute, value):
        if value.shape != (self.grid.nPoints,):
            raise dimensionError("Density has shape {}, grid has {} points".format(value.shape, self.grid.nPoints))

    @total.default
    def compute_total(self):
        return float(np.sum(self.values) * self.grid.spacing)

    def __repr__(self):
        return 'densityField(nPoints={}, total={:.12g})'.format(self.grid.nPoints, self.total)


def hermiticity_defect(kernel):
    '''
    Largest pointwise violation of Psi*(x, y) = Psi(y, x).

    Parameters
    ----------
    kernel : kernelField or numpy.ndarray

    Returns
    -------
    float
        max |Psi(x_i, y_j) - Psi*(y_j, x_i)|
    '''
    values = kernel.values if isinstance(kernel, kernelField) else np.asarray(kernel)
    return float(np.max(np.abs(values - values.conj().T)))


@attr.s(frozen=True, eq=False, repr=False)
class kernelField:
    """
    Bipartite wave function Psi(x, y) sampled on grid x grid.

    The matrix property is the quadrature weighted operator Psi * spacing;
    decompositions and traces act on it so that continuum formulas carry
    over to plain matrix algebra.

    Attributes
    ----------
    grid : grid1D
    values : numpy.ndarray
        (nPoints, nPoints) complex amplitudes (read-only)
    normSquared : float
        sum |Psi|^2 * spacing^2
    normalized : bool
    hermiticityDefect : float
    hermitian : bool
        Whether hermiticityDefect <= rules.STRUCTURAL_TOL
    """
    grid = attr.ib()
    values = attr.ib(converter=frozen_array)
    normSquared = attr.ib(init=False)
    normalized = attr.ib(init=False)
    hermiticityDefect = attr.ib(init=False)
    hermitian = attr.ib(init=False)

    @values.validator
    def check_shape(self, attribute, value):
        n = self.grid.nPoints
        if value.shape != (n, n):
            raise dimensionError("Kernel has shape {}, expected ({}, {})".format(value.shape, n, n))

    @normSquared.default
    def compute_norm(self):
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.spacing ** 2)

    @normalized.default
    def check_normalized(self):
        return abs(self.normSquared - 1.0) <= rules.STRUCTURAL_TOL

    @hermiticityDefect.default
    def compute_defect(self):
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            return float('inf')
        return hermiticity_defect(self.values)

    @hermitian.default
    def check_hermitian(self):
        return self.hermiticityDefect <= rules.STRUCTURAL_TOL

    @property
    def matrix(self):
        return self.values * self.grid.spacing

    def with_values(self, values):
        return kernelField(self.grid, values)

    def __repr__(self):
        return 'kernelField(nPoints={}, normSquared={:.12g}, hermitian={})'.format(
            self.grid.nPoints, self.normSquared, self.hermitian)


@attr.s(frozen=True, eq=False, repr=False)
class coefficientMatrix:
    """
    Amplitudes c[n, m] of a kernel in a finite orthonormal basis,
    Psi = sum c[n, m] psi_n(x) psi_m*(y).

    Attributes
    ----------
    entries : numpy.ndarray
        (dim, dim) complex amplitudes (read-only)
    dim : int
    weight : float
        sum |c[n, m]|^2, the captured weight for expansions
    normalized : bool
    hermitian : bool
    """
    entries = attr.ib(converter=frozen_array)
    dim = attr.ib(init=False)
    weight = attr.ib(init=False)
    normalized = attr.ib(init=False)
    hermitian = attr.ib(init=False)

    @entries.validator
    def check_square(self, attribute, value):
        if value.ndim != 2 or value.shape[0] != value.shape[1] or value.shape[0] == 0:
            raise dimensionError("Coefficient matrix must be square and non-empty, got {}".format(value.shape))

    @dim.default
    def compute_dim(self):
        return int(self.entries.shape[0]) if self.entries.ndim else 0

    @weight.default
    def compute_weight(self):
        return float(np.sum(np.abs(self.entries) ** 2))

    @normalized.default
    def check_normalized(self):
        return abs(self.weight - 1.0) <= rules.STRUCTURAL_TOL

    @hermitian.default
    def check_hermitian(self):
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1] or self.entries.size == 0:
            return False
        return hermiticity_defect(self.entries) <= rules.STRUCTURAL_TOL

    def normalize(self):
        if self.weight == 0:
            raise preconditionError("Cannot normalize a zero coefficient matrix")
        return coefficientMatrix(self.entries / np.sqrt(self.weight))

    def __repr__(self):
        return 'coefficientMatrix(dim={}, weight={:.12g}, hermitian={})'.format(self.dim, self.weight, self.hermitian)


def inner_product(f, g):
    '''
    L2 pairing <f, g> = sum conj(f) g * spacing.

    Parameters
    ----------
    f : scalarField
    g : scalarField

    Returns
    -------
    complex
    '''
    check_same_grid(f, g)
    return complex(np.vdot(f.values, g.values) * f.grid.spacing)


def kernel_inner_product(a, b):
    '''
    Double quadrature pairing of two kernels, sum conj(A) B * spacing^2.
    '''
    check_same_grid(a, b)
    return complex(np.vdot(a.values, b.values) * a.grid.spacing ** 2)


def kernel_from_product(psi, phi):
    '''
    Build the product kernel Psi(x, y) = psi(x) phi*(y).

    Parameters
    ----------
    psi : scalarField
    phi : scalarField

    Returns
    -------
    kernelField
    '''
    check_same_grid(psi, phi)
    return kernelField(psi.grid, np.outer(psi.values, phi.values.conj()))


def orthonormality_defect(basis):
    '''
    Worst deviation of the Gram matrix of basis from the identity.

    Parameters
    ----------
    basis : [scalarField]

    Returns
    -------
    (float, (int, int))
        Largest |<psi_n, psi_m> - delta_nm| and the pair where it occurs
    '''
    matrix = stack_fields(basis)
    gram = matrix.conj().T @ matrix * basis[0].grid.spacing
    deviation = np.abs(gram - np.eye(len(basis)))
    n, m = np.unravel_index(np.argmax(deviation), deviation.shape)
    return float(deviation[n, m]), (int(n), int(m))


def kernel_from_coefficients(c, basis):
    '''
    Build Psi = sum c[n, m] psi_n(x) psi_m*(y) from an orthonormal basis.

    Parameters
    ----------
    c : coefficientMatrix
    basis : [scalarField]
        Orthonormal to within rules.ALGEBRAIC_TOL

    Returns
    -------
    kernelField

    Raises
    ------
    dimensionError
        If c.dim differs from the basis size.
    preconditionError
        If the basis is not orthonormal, naming the worst pair.
    '''
    if c.dim != len(basis):
        raise dimensionError("Coefficient matrix has dim {} but basis has {} fields".format(c.dim, len(basis)))
    defect, (n, m) = orthonormality_defect(basis)
    if defect > rules.ALGEBRAIC_TOL:
        raise preconditionError(
            "Basis is not orthonormal: pair ({}, {}) deviates by {:.3e}".format(n, m, defect))
    matrix = stack_fields(basis)
    return kernelField(basis[0].grid, matrix @ c.entries @ matrix.conj().T)
