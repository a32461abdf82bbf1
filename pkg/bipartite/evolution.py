import logging

import attr
import numpy as np
import scipy.linalg

from . import rules
from .errors import dimensionError, numericError, preconditionError
from .objects import (coefficientMatrix, kernelField, scalarField,
                      check_same_grid, inner_product)

log = logging.getLogger(__name__)


@attr.s(frozen=True)
class evolutionParams:
    """
    Fixed step time stepping parameters.

    Attributes
    ----------
    dt : float
        Time step, > 0
    nSteps : int
        Number of steps, >= 1
    recordEvery : int
        Snapshot stride, 1 <= recordEvery <= nSteps
    """
    dt = attr.ib(converter=float)
    nSteps = attr.ib(converter=int)
    recordEvery = attr.ib(default=1, converter=int)

    @dt.validator
    def check_dt(self, attribute, value):
        if not value > 0:
            raise preconditionError("dt must be > 0, got {}".format(value))

    @nSteps.validator
    def check_steps(self, attribute, value):
        if value < 1:
            raise preconditionError("n_steps must be ≥ 1, got {}".format(value))

    @recordEvery.validator
    def check_record(self, attribute, value):
        if not 1 <= value <= self.nSteps:
            raise preconditionError("record_every must lie in [1, n_steps={}], got {}".format(self.nSteps, value))

    @property
    def duration(self):
        return self.dt * self.nSteps

    def recorded_steps(self):
        """Step indices at which snapshots are taken, always including 0 and nSteps."""
        steps = list(range(0, self.nSteps + 1, self.recordEvery))
        if steps[-1] != self.nSteps:
            steps.append(self.nSteps)
        return steps


@attr.s(eq=False, repr=False)
class timeSeries:
    """
    Snapshots of an evolution.

    Attributes
    ----------
    times : numpy.ndarray
    states : list
        scalarField or kernelField copies, one per time
    maxStepDrift : float
        Largest change of the norm squared over a single step
    """
    times = attr.ib(converter=np.asarray)
    states = attr.ib()
    maxStepDrift = attr.ib(default=0.0)

    @property
    def final(self):
        return self.states[-1]

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(zip(self.times, self.states))

    def __repr__(self):
        return 'timeSeries(snapshots={}, t_final={:.6g})'.format(len(self.states), self.times[-1])


class cayleyPropagator(object):
    """
    One step Cayley (Crank-Nicolson) propagator
    U = (1 + i dt H / 2hbar)^-1 (1 - i dt H / 2hbar) on the interior points.

    Attributes
    ----------
    hamiltonian : discreteHamiltonian
    dt : float
    """

    def __init__(self, hamiltonian, dt):
        self.hamiltonian = hamiltonian
        self.dt = dt
        d, e = hamiltonian.bands()
        alpha = 0.5j * dt / hamiltonian.constants.hbar
        n = hamiltonian.size

        # banded storage of A = 1 + alpha H for solve_banded((1, 1), ...)
        self.banded = np.zeros((3, n), dtype=complex)
        self.banded[0, 1:] = alpha * e
        self.banded[1, :] = 1 + alpha * d
        self.banded[2, :-1] = alpha * e

        # B = 1 - alpha H
        self.diagonalB = 1 - alpha * d
        self.offB = -alpha * hamiltonian.offDiagonal

    def apply(self, u):
        """
        apply(u)

        Advance interior amplitudes by one step. u may be a vector or a
        matrix whose columns are advanced independently.
        """
        rhs = self.diagonalB.reshape((-1,) + (1,) * (u.ndim - 1)) * u
        rhs[1:] += self.offB * u[:-1]
        rhs[:-1] += self.offB * u[1:]
        try:
            return scipy.linalg.solve_banded((1, 1), self.banded, rhs, check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise numericError("Cayley linear solve failed (n={}, dt={}): {}".format(self.hamiltonian.size, self.dt, exc))

    def apply_both(self, m):
        """
        apply_both(m)

        U m U^dagger for an interior kernel block: one sweep over columns for
        the left action, one over the conjugate transpose for the right.
        """
        half = self.apply(m)
        return self.apply(half.conj().T).conj().T


def check_walls(values, kind):
    """Dirichlet walls hold no amplitude; the propagator only sees the interior."""
    wall = max(np.max(np.abs(values[[0, -1], ...])), np.max(np.abs(values[..., [0, -1]])))
    if wall > rules.STRUCTURAL_TOL:
        raise preconditionError("Initial {} is nonzero on the walls (max |value| = {:.3e})".format(kind, wall))


def iterate_schrodinger(psi0, h, p):
    '''
    Lazily evolve psi0 under H, yielding (step, time, values) at each
    recorded step. The yielded arrays are copies.

    Parameters
    ----------
    psi0 : scalarField
    h : discreteHamiltonian
    p : evolutionParams
    '''
    check_same_grid(psi0, h)
    check_walls(psi0.values, "wave function")
    propagator = cayleyPropagator(h, p.dt)
    interior = h.grid.interior
    u = np.array(psi0.values[interior], dtype=complex)
    record = set(p.recorded_steps())

    for step in range(p.nSteps + 1):
        if step > 0:
            u = propagator.apply(u)
        if step in record:
            values = np.zeros(h.grid.nPoints, dtype=complex)
            values[interior] = u
            yield step, step * p.dt, values


def iterate_bipartite(Psi0, h, p):
    '''
    Lazily evolve the kernel Psi0 under H(x) - H(y), yielding
    (step, time, values) at each recorded step. The yielded arrays are
    copies.

    Parameters
    ----------
    Psi0 : kernelField
    h : discreteHamiltonian
    p : evolutionParams
    '''
    check_same_grid(Psi0, h)
    check_walls(Psi0.values, "kernel")
    propagator = cayleyPropagator(h, p.dt)
    interior = h.grid.interior
    m = np.array(Psi0.values[interior, interior], dtype=complex)
    record = set(p.recorded_steps())

    for step in range(p.nSteps + 1):
        if step > 0:
            m = propagator.apply_both(m)
        if step in record:
            values = np.zeros((h.grid.nPoints, h.grid.nPoints), dtype=complex)
            values[interior, interior] = m
            yield step, step * p.dt, values


def evolve_schrodinger(psi0, h, p):
    '''
    Evolve a normalized wave function under the Schrodinger equation.

    Parameters
    ----------
    psi0 : scalarField
        Normalized initial state
    h : discreteHamiltonian
    p : evolutionParams

    Returns
    -------
    timeSeries
        scalarField snapshots every p.recordEvery steps, including t = 0
        and the final time
    '''
    if not psi0.normalized:
        raise preconditionError("Initial wave function is not normalized (|psi|^2 = {:.12g})".format(psi0.normSquared))
    times, states = [], []
    previous, last = psi0.normSquared, 0
    drift = 0.0
    for step, t, values in iterate_schrodinger(psi0, h, p):
        state = scalarField(h.grid, values)
        if step > 0:
            drift = max(drift, abs(state.normSquared - previous) / (step - last))
        previous, last = state.normSquared, step
        times.append(t)
        states.append(state)
    if drift > rules.STEP_DRIFT_TOL:
        log.warning("Schrodinger norm drift {:.3e} per step exceeds {}".format(drift, rules.STEP_DRIFT_TOL))
    return timeSeries(times, states, drift)


def evolve_bipartite_grid(Psi0, h, p):
    '''
    Evolve a normalized kernel under i hbar dPsi/dt = (H(x) - H(y)) Psi.

    Each step maps Psi to U Psi U^dagger with the Cayley propagator U, so a
    product kernel psi psi* stays the product of the evolved psi.

    Parameters
    ----------
    Psi0 : kernelField
        Normalized initial kernel
    h : discreteHamiltonian
    p : evolutionParams

    Returns
    -------
    timeSeries
        kernelField snapshots
    '''
    if not Psi0.normalized:
        raise preconditionError("Initial kernel is not normalized (|Psi|^2 = {:.12g})".format(Psi0.normSquared))
    times, states = [], []
    previous, last = Psi0.normSquared, 0
    drift = 0.0
    for step, t, values in iterate_bipartite(Psi0, h, p):
        state = kernelField(h.grid, values)
        if step > 0:
            drift = max(drift, abs(state.normSquared - previous) / (step - last))
            if Psi0.hermitian and state.hermiticityDefect > rules.HERMITICITY_DRIFT_TOL:
                log.warning("Hermiticity defect {:.3e} at t={:.6g}".format(state.hermiticityDefect, t))
        previous, last = state.normSquared, step
        times.append(t)
        states.append(state)
    if drift > rules.STEP_DRIFT_TOL:
        log.warning("Bipartite norm drift {:.3e} per step exceeds {}".format(drift, rules.STEP_DRIFT_TOL))
    return timeSeries(times, states, drift)


def evolve_bipartite_spectral(c0, spectrum, t):
    '''
    Exact evolution in the eigenbasis,
    c[n, m](t) = c[n, m](0) exp(-i (E_n - E_m) t / hbar).

    Parameters
    ----------
    c0 : coefficientMatrix
    spectrum : spectrum
    t : float

    Returns
    -------
    coefficientMatrix
    '''
    if c0.dim > spectrum.count:
        raise dimensionError("Coefficient matrix dim {} exceeds {} retained levels".format(c0.dim, spectrum.count))
    energies = spectrum.energies[:c0.dim]
    gaps = energies[:, None] - energies[None, :]
    return coefficientMatrix(c0.entries * np.exp(-1j * gaps * t / spectrum.constants.hbar))


def spectral_schrodinger(psi0, spectrum, t):
    '''
    Exact evolution of psi0 projected on the retained eigenbasis,
    sum <psi_n, psi0> exp(-i E_n t / hbar) psi_n.

    Parameters
    ----------
    psi0 : scalarField
    spectrum : spectrum
    t : float

    Returns
    -------
    scalarField
    '''
    amplitudes = np.array([inner_product(state, psi0) for state in spectrum.states])
    phases = np.exp(-1j * spectrum.energies * t / spectrum.constants.hbar)
    return scalarField(psi0.grid, spectrum.basis() @ (amplitudes * phases))
