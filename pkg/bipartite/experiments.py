import logging
import math
from concurrent.futures import ThreadPoolExecutor

import attr
import numpy as np
import scipy.linalg

from . import rules
from .analysis import (coefficient_entropy, entropy_from_weights, position_density,
                       random_hermitian_coefficients, schmidt_decompose)
from .errors import numericError, preconditionError
from .evolution import iterate_bipartite
from .objects import (coefficientMatrix, densityField, grid1D, scalarField,
                      check_same_grid, inner_product, kernel_from_coefficients,
                      kernel_from_product, kernel_inner_product)

log = logging.getLogger(__name__)

# Coherent (fringes) and diagonal (no fringes) ends of the two-slit family
WAVE_COEFFICIENTS = coefficientMatrix(np.full((2, 2), 0.5))
PARTICLE_COEFFICIENTS = coefficientMatrix(np.eye(2) / np.sqrt(2))

# Half width of the localisation window, in units of the packet width
LOCALISATION_WIDTHS = 3.0
LOCALISATION_FRACTION = 0.99
# Screen samples per fringe period
FRINGE_SAMPLES = 64
GAP_STEP_FRACTION = 0.05


def run_parallel(func, items, workers=1):
    '''
    Map func over items, in a thread pool when workers > 1. Results come
    back in input order.
    '''
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


# Experiment objects
#     - twoSlitFamily
#     - dualityPoint
#     - gapMeasurement
#     - boundScan

@attr.s(frozen=True, eq=False)
class twoSlitFamily:
    """
    Two orthonormal slit modes and a 2x2 Hermitian coefficient matrix,
    Psi = sum a[i, j] psi_i(x) psi_j*(y).

    Attributes
    ----------
    mode1 : scalarField
    mode2 : scalarField
    coefficients : coefficientMatrix
        2x2, Hermitian, normalized
    """
    mode1 = attr.ib()
    mode2 = attr.ib()
    coefficients = attr.ib(default=WAVE_COEFFICIENTS)

    @mode2.validator
    def check_modes(self, attribute, value):
        check_same_grid(self.mode1, value)
        overlap = abs(inner_product(self.mode1, value))
        if overlap > rules.ALGEBRAIC_TOL:
            raise preconditionError("Slit modes overlap by {:.3e}".format(overlap))

    @coefficients.validator
    def check_coefficients(self, attribute, value):
        if value.dim != 2:
            raise preconditionError("Two-slit coefficients must be 2x2, got dim {}".format(value.dim))
        if not value.hermitian:
            raise preconditionError("Two-slit coefficients must be Hermitian")
        if not value.normalized:
            raise preconditionError("Two-slit coefficients must be normalized (weight {:.12g})".format(value.weight))

    @property
    def modes(self):
        return [self.mode1, self.mode2]

    def with_coefficients(self, coefficients):
        return twoSlitFamily(self.mode1, self.mode2, coefficients)


@attr.s(frozen=True, eq=False, repr=False)
class dualityPoint:
    """
    One point of a wave-particle duality scan.

    Attributes
    ----------
    lam : float
        Interpolation parameter in [0, 1]
    entropy : float
    visibility : float
        Fringe visibility on the detection screen, in [0, 1]
    density : densityField
        Position density of the kernel at the slits
    """
    lam = attr.ib(converter=float)
    entropy = attr.ib(converter=float)
    visibility = attr.ib(converter=float)
    density = attr.ib(default=None)

    def __repr__(self):
        return 'dualityPoint(lam={:.3g}, entropy={:.6g}, visibility={:.6g})'.format(self.lam, self.entropy, self.visibility)


@attr.s(frozen=True)
class gapMeasurement:
    """
    Energy gap read off the phase of a stationary bipartite state.

    Attributes
    ----------
    n : int
    m : int
    measured : float
        -hbar times the fitted phase slope
    expected : float
        E_n - E_m of the spectrum
    residual : float
        RMS residual of the linear phase fit
    analytic : float, optional
        Closed form gap when the potential has one
    """
    n = attr.ib(converter=int)
    m = attr.ib(converter=int)
    measured = attr.ib(converter=float)
    expected = attr.ib(converter=float)
    residual = attr.ib(converter=float)
    analytic = attr.ib(default=None)

    @property
    def relativeError(self):
        return relative_error(self.measured, self.expected)

    @property
    def analyticError(self):
        if self.analytic is None:
            return None
        return relative_error(self.measured, self.analytic)


@attr.s(frozen=True)
class boundScan:
    """
    Random scan of entropies over normalized Hermitian 2x2 coefficient
    matrices, checked against the entropy of the particle-like matrix.

    Attributes
    ----------
    samples : int
    seed : int
    bound : float
    maxEntropy : float
    violations : int
        Samples above bound + rules.ALGEBRAIC_TOL
    """
    samples = attr.ib(converter=int)
    seed = attr.ib()
    bound = attr.ib(converter=float)
    maxEntropy = attr.ib(converter=float)
    violations = attr.ib(converter=int)


def relative_error(value, reference):
    if reference == 0:
        return abs(value)
    return abs(value - reference) / abs(reference)


def make_two_slit_modes(grid, separation, width):
    '''
    Two Gaussian slit packets at grid.center -/+ separation/2, made
    orthonormal by symmetric (Lowdin) orthonormalization.

    Parameters
    ----------
    grid : grid1D
    separation : float
        Distance between packet centres, > 4 * width
    width : float
        Gaussian width, psi ~ exp(-(x - c)^2 / (2 width^2))

    Returns
    -------
    (scalarField, scalarField)

    Raises
    ------
    preconditionError
        Geometry does not fit the grid, the packets overlap too much, or a
        mode is not localized after orthonormalization.
    '''
    if not width > 0:
        raise preconditionError("Slit width must be > 0, got {}".format(width))
    if not separation > 4 * width:
        raise preconditionError("Slit separation {} must exceed 4 * width = {}".format(separation, 4 * width))

    x = grid.points
    reach = LOCALISATION_WIDTHS * width
    centers = (grid.center - separation / 2, grid.center + separation / 2)
    if centers[0] - reach < grid.xMin or centers[1] + reach > grid.xMax:
        raise preconditionError("Slits at {:.6g}, {:.6g} +/- {:.6g} do not fit in [{}, {}]".format(
            centers[0], centers[1], reach, grid.xMin, grid.xMax))

    raw = []
    for c in centers:
        g = np.exp(-(x - c) ** 2 / (2 * width ** 2))
        g[0] = g[-1] = 0.0
        raw.append(scalarField(grid, g).normalize())

    g = np.column_stack([field.values for field in raw])
    gram = g.conj().T @ g * grid.spacing
    vals, vecs = scipy.linalg.eigh(gram)
    if vals[0] <= rules.ALGEBRAIC_TOL:
        raise preconditionError("Slit packets are linearly dependent (Gram eigenvalue {:.3e})".format(vals[0]))
    inverse_root = vecs @ np.diag(vals ** -0.5) @ vecs.conj().T
    modes = [scalarField(grid, column) for column in (g @ inverse_root).T]
    log.debug("Slit packet overlap {:.3e} before orthonormalization".format(abs(gram[0, 1])))

    overlap = abs(inner_product(*modes))
    if overlap > rules.ALGEBRAIC_TOL:
        raise preconditionError("Slit modes still overlap by {:.3e} after orthonormalization".format(overlap))
    for mode, c in zip(modes, centers):
        inside = np.abs(x - c) <= reach
        fraction = float(np.sum(np.abs(mode.values[inside]) ** 2) * grid.spacing)
        if fraction < LOCALISATION_FRACTION:
            raise preconditionError("Slit mode at {:.6g} holds only {:.4f} of its norm within +/-{:.6g}".format(c, fraction, reach))
    return modes[0], modes[1]


def two_slit_kernel(family):
    '''
    Psi = sum a[i, j] psi_i(x) psi_j*(y) for a twoSlitFamily.

    Returns
    -------
    kernelField
    '''
    return kernel_from_coefficients(family.coefficients, family.modes)


def interpolate_coefficients(lam):
    '''
    Coefficient matrix a(lam) = normalize((1 - lam) a_W + lam a_P) running
    from the wave-like to the particle-like end.
    '''
    if not 0 <= lam <= 1:
        raise preconditionError("Interpolation parameter must lie in [0, 1], got {}".format(lam))
    entries = (1 - lam) * WAVE_COEFFICIENTS.entries + lam * PARTICLE_COEFFICIENTS.entries
    return coefficientMatrix(entries).normalize()


def screen_padding(grid, separation):
    '''
    Zero padding factor giving at least FRINGE_SAMPLES screen points per
    fringe period 2 pi / separation.
    '''
    return max(1, int(math.ceil(FRINGE_SAMPLES * separation / grid.length)))


def screen_grid(grid, padding=1):
    '''
    Wave number grid of the detection screen for a padded transform.
    '''
    n = padding * grid.nPoints
    dk = 2 * np.pi / (n * grid.spacing)
    start = -(n // 2) * dk
    return grid1D(start, start + (n - 1) * dk, n)


def screen_amplitudes(columns, grid, padding=1):
    '''
    Far-field amplitudes fftshift(fft(psi)) * spacing / sqrt(2 pi) of each
    column of an (nPoints, k) array, zero padded to padding * nPoints.
    '''
    n = padding * grid.nPoints
    transformed = np.fft.fft(columns, n=n, axis=0)
    return np.fft.fftshift(transformed, axes=0) * grid.spacing / np.sqrt(2 * np.pi)


def screen_density(Psi, padding=1, decomposition=None):
    '''
    Detection screen density of a kernel: the x argument is propagated to
    the far field and y is traced out.

    With Psi = sum mu_n u_n(x) v_n*(y) the screen density is
    sum mu_n^2 |u~_n(k)|^2, so only the Schmidt modes are transformed.

    Parameters
    ----------
    Psi : kernelField
    padding : int
        Zero padding factor of the transform
    decomposition : schmidtDecomposition, optional
        Reused when already computed for Psi

    Returns
    -------
    densityField
        On the screen_grid, integrating to 1 for a normalized kernel
    '''
    decomposition = schmidt_decompose(Psi) if decomposition is None else decomposition
    modes = np.column_stack([mode.values for mode in decomposition.leftModes])
    amplitudes = screen_amplitudes(modes, Psi.grid, padding)
    values = np.abs(amplitudes) ** 2 @ decomposition.weights
    return densityField(screen_grid(Psi.grid, padding), values)


def mode_screen_density(family, padding=1):
    '''
    Incoherent screen background sum_i A[i, i] |psi~_i(k)|^2 with A = a a^dagger,
    the screen density the family would show without its cross terms.

    Returns
    -------
    densityField
    '''
    grid = family.mode1.grid
    a = family.coefficients.entries
    populations = np.real(np.diag(a @ a.conj().T))
    modes = np.column_stack([mode.values for mode in family.modes])
    amplitudes = screen_amplitudes(modes, grid, padding)
    return densityField(screen_grid(grid, padding), np.abs(amplitudes) ** 2 @ populations)


def fringe_visibility(screen, background):
    '''
    Visibility (max r - min r) / (max r + min r) of the fringe ratio
    r = screen / background over the central half of the screen, ignoring
    points where the background is below rules.SCREEN_FLOOR of its peak.

    Parameters
    ----------
    screen : densityField
    background : densityField

    Returns
    -------
    float

    Raises
    ------
    numericError
        The window holds no usable points or the density vanishes on it.
    '''
    n = screen.grid.nPoints
    window = np.zeros(n, dtype=bool)
    window[n // 4: n - n // 4] = True
    window &= background.values >= rules.SCREEN_FLOOR * np.max(background.values)
    if not np.any(window) or np.max(screen.values[window]) <= 0:
        raise numericError("Screen density vanishes on the fringe window")
    ratio = screen.values[window] / background.values[window]
    high, low = float(np.max(ratio)), float(np.min(ratio))
    return min(1.0, max(0.0, (high - low) / (high + low)))


def duality_point(family, lam, padding=1):
    family = family.with_coefficients(interpolate_coefficients(lam))
    Psi = two_slit_kernel(family)
    decomposition = schmidt_decompose(Psi)
    screen = screen_density(Psi, padding, decomposition)
    visibility = fringe_visibility(screen, mode_screen_density(family, padding))
    return dualityPoint(lam, entropy_from_weights(decomposition.weights), visibility, position_density(Psi))


def duality_scan(mode1, mode2, lambdas, workers=1, padding=None):
    '''
    Entropy and fringe visibility along a(lam) from the wave-like to the
    particle-like end of the two-slit family.

    Parameters
    ----------
    mode1 : scalarField
    mode2 : scalarField
    lambdas : [float]
        Values in [0, 1]
    workers : int
        Threads used across scan points
    padding : int, optional
        Screen padding, derived from the distance between the mode
        centroids when omitted

    Returns
    -------
    [dualityPoint]
        In the order of lambdas
    '''
    bad = [lam for lam in lambdas if not 0 <= lam <= 1]
    if bad:
        raise preconditionError("Interpolation parameters outside [0, 1]: {}".format(bad))
    family = twoSlitFamily(mode1, mode2)
    if padding is None:
        x = mode1.grid.points
        centroids = [np.sum(x * np.abs(mode.values) ** 2) * mode.grid.spacing for mode in family.modes]
        padding = screen_padding(mode1.grid, abs(centroids[1] - centroids[0]))
    log.debug("Duality scan over {} points, screen padding {}".format(len(lambdas), padding))
    return run_parallel(lambda lam: duality_point(family, lam, padding), list(lambdas), workers)


def entropy_bound_scan(samples, seed, dim=2):
    '''
    Check 0 <= S <= S(particle-like) over random normalized Hermitian
    dim x dim coefficient matrices drawn with numpy.random.default_rng(seed).

    Returns
    -------
    boundScan
    '''
    if samples < 1:
        raise preconditionError("Bound scan needs at least one sample, got {}".format(samples))
    rng = np.random.default_rng(seed)
    bound = coefficient_entropy(coefficientMatrix(np.eye(dim) / np.sqrt(dim)))
    found = [coefficient_entropy(random_hermitian_coefficients(dim, rng)) for _ in range(samples)]
    violations = sum(1 for s in found if s > bound + rules.ALGEBRAIC_TOL)
    if violations:
        log.warning("{} of {} samples exceed the entropy bound {:.12g}".format(violations, samples, bound))
    return boundScan(samples, seed, bound, max(found), violations)


def measure_gap(spectrum, pair, h, p, residual_tolerance):
    n, m = pair
    start = kernel_from_product(spectrum.states[n], spectrum.states[m])
    times, overlaps = [], []
    for _, t, values in iterate_bipartite(start, h, p):
        times.append(t)
        overlaps.append(kernel_inner_product(start, start.with_values(values)))

    phase = np.unwrap(np.angle(overlaps))
    slope, intercept = np.polyfit(times, phase, 1)
    residual = float(np.sqrt(np.mean((phase - (slope * np.asarray(times) + intercept)) ** 2)))
    if residual > residual_tolerance:
        raise numericError("Phase fit for levels ({}, {}) has residual {:.3e} above {:.3e}".format(n, m, residual, residual_tolerance))
    measured = -spectrum.constants.hbar * slope
    return gapMeasurement(n, m, measured, spectrum.energies[n] - spectrum.energies[m], residual)


def gap_spectroscopy(spectrum, pairs, h, p, residual_tolerance=rules.PHASE_FIT_RESIDUAL, workers=1):
    '''
    Measure energy gaps from the phase of evolved stationary kernels.

    For each (n, m), psi_n(x) psi_m*(y) is evolved with the bipartite grid
    propagator and the phase of its overlap with the start kernel is fit by
    a straight line; the gap is -hbar times the slope. The Hamiltonian is
    shifted by -E_0 first, which leaves the exact dynamics unchanged and
    makes the discrete phases independent of a constant potential offset.

    Parameters
    ----------
    spectrum : spectrum
    pairs : [(int, int)]
        0-based level pairs
    h : discreteHamiltonian
    p : evolutionParams
        dt <= 0.05 hbar / max gap, and snapshots close enough to unwrap
    residual_tolerance : float
        Largest RMS residual accepted from the phase fit
    workers : int

    Returns
    -------
    [gapMeasurement]
        In the order of pairs

    Raises
    ------
    preconditionError
        Level out of range or time step too coarse for the largest gap.
    numericError
        Phase fit residual above residual_tolerance.
    '''
    check_same_grid(h, spectrum)
    pairs = [tuple(pair) for pair in pairs]
    for n, m in pairs:
        if not (0 <= n < spectrum.count and 0 <= m < spectrum.count):
            raise preconditionError("Pair ({}, {}) outside the {} computed levels".format(n, m, spectrum.count))

    hbar = spectrum.constants.hbar
    widest = max([abs(spectrum.energies[n] - spectrum.energies[m]) for n, m in pairs] + [0.0])
    if widest > 0:
        if p.dt > GAP_STEP_FRACTION * hbar / widest:
            raise preconditionError("dt = {} does not resolve the gap {:.6g}: need dt <= {:.6g}".format(
                p.dt, widest, GAP_STEP_FRACTION * hbar / widest))
        if p.recordEvery * p.dt * widest / hbar >= np.pi:
            raise preconditionError("record_every = {} leaves more than pi of phase between snapshots".format(p.recordEvery))

    gauged = h.shifted(-spectrum.energies[0])
    return run_parallel(lambda pair: measure_gap(spectrum, pair, gauged, p, residual_tolerance), pairs, workers)
