import datetime
import logging
import pathlib
import time

import attr
import numpy as np

from . import __version__, format_logger, release_logger, rules
from .analysis import (collapse, eigenbasis_coefficients, entropy, expectation,
                       gridObservable, random_hermitian_coefficients,
                       reduced_density, transition_graph,
                       transition_probabilities, von_neumann_entropy)
from .errors import (bipartiteError, configurationError, dimensionError,
                     numericError, preconditionError)
from .evolution import evolve_bipartite_spectral, iterate_bipartite, iterate_schrodinger
from .experiments import (duality_scan, entropy_bound_scan, gap_spectroscopy,
                          interpolate_coefficients, make_two_slit_modes,
                          screen_padding, two_slit_kernel, twoSlitFamily)
from .hamiltonian import analytic_levels, build_hamiltonian, solve_spectrum
from .objects import (coefficientMatrix, kernelField, scalarField,
                      kernel_from_coefficients, kernel_from_product,
                      orthonormality_defect)
from .output import (format_cell, render_manifest, render_report, write_csv,
                      write_transition_graph)
from .rules import invariantCheck

COMMANDS = ('eigs', 'evolve', 'duality-scan', 'gap-scan', 'collapse-stats')
RNG_NAME = 'numpy.random.PCG64'
GAP_ACCURACY = 5e-3
SPECTRAL_AGREEMENT = 1e-6
PRODUCT_DEVIATION_LIMIT = 1e-6


def exit_code(error):
    '''
    Process exit status for a run error: 0 success, 2 configuration,
    precondition or dimension error, 3 numeric error, 4 I/O error and 1
    for anything unexpected.
    '''
    if error is None:
        return 0
    if isinstance(error, numericError):
        return 3
    if isinstance(error, (configurationError, preconditionError, dimensionError)):
        return 2
    if isinstance(error, OSError):
        return 4
    return 1


def error_line(error):
    '''
    Single machine readable line describing error.
    '''
    message = str(error).replace('"', "'").replace('\n', ' ')
    return 'error: code={} kind={} message="{}"'.format(exit_code(error), type(error).__name__, message)


class bipartiteRun(object):
    """
    One command run over a validated configuration.

    Initialised with a command name and a runConfig. Calling execute()
    performs the command, writes its CSV outputs, the manifest and the
    report into the output directory and returns the exit code.

    Attributes
    ----------
    command : str
        One of COMMANDS
    config : runConfig
    outDir : pathlib.Path
    checks : [invariantCheck]
        Checks made during the run, echoed into the manifest
    outputs : dict
        Output name to file name, relative to outDir
    error : Exception or None
        First failure of the run
    failedRun : int
        Flag if the run failed
    started : str
        ISO timestamp of the start
    wallTime : float
        Seconds spent in execute
    """

    reportRows = 20

    def __init__(self, command, config):
        self.command = command
        self.config = config
        self.outDir = pathlib.Path(config.outputDir)
        self.version = __version__
        self.rngName = RNG_NAME
        self.checks = []
        self.outputs = {}
        self.tableHeader = None
        self.tableRows = []
        self.tableFile = None
        self.error = None
        self.failedRun = 0
        self.started = None
        self.wallTime = 0.0

        self.logger = logging.getLogger(__name__)
        try:
            self.logger = format_logger(self.logger, {'run': command})
        except Exception as e:
            self.logger.exception("Unable to format log. {}".format(e))

    @property
    def status(self):
        return 'failed' if self.failedRun else 'success'

    @property
    def exitCode(self):
        return exit_code(self.error)

    @property
    def errorLine(self):
        return None if self.error is None else error_line(self.error)

    def execute(self):
        """
        execute()

        Run the command. Failures are logged and recorded in error and
        failedRun instead of propagating.

        Returns
        -------
        int
            Exit code
        """
        self.started = datetime.datetime.now().isoformat(timespec='seconds')
        clock = time.perf_counter()

        if self.prepare_output() is not False:
            try:
                getattr(self, 'run_' + self.command.replace('-', '_'))()
            except Exception as e:
                self.fail(e, "run {}".format(self.command))
            else:
                failed = [check.name for check in self.checks if not check.passed and check.severity == 'error']
                if failed:
                    self.fail(numericError("Invariant checks failed: {}".format(', '.join(failed))), "validate results")

            self.wallTime = time.perf_counter() - clock
            self.write_summary()
        else:
            self.wallTime = time.perf_counter() - clock

        release_logger(logging.getLogger(__name__))
        return self.exitCode

    def fail(self, error, action):
        if isinstance(error, bipartiteError):
            self.logger.error("Unable to {}: {}".format(action, error))
        else:
            self.logger.exception("Unable to {}: {}".format(action, error))
        if self.error is None:
            self.error = error
        self.failedRun = 1

    def prepare_output(self):
        """
        prepare_output()

        Create the output directory and attach the run log file to it.
        """
        try:
            self.outDir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            self.fail(e, "create output directory {}".format(self.outDir))
            return False
        try:
            self.logger = format_logger(logging.getLogger(__name__), {'run': self.command}, self.outDir / 'bipartite.log')
        except Exception as e:
            self.logger.exception("Unable to attach log file. {}".format(e))

    def write_summary(self):
        for name, render in (('manifest.txt', render_manifest), ('report.md', render_report)):
            try:
                with open(self.outDir / name, 'w', encoding='utf-8') as f:
                    f.write(render(self))
            except Exception as e:
                self.fail(e, "write {}".format(name))

    def check(self, name, value, limit, comparison='<=', severity='error'):
        result = invariantCheck(name, value, limit, comparison, severity)
        self.checks.append(result)
        return result

    def write_table(self, name, filename, header, rows):
        """
        write_table(name, filename, header, rows)

        Write a CSV into the output directory. The first table written is
        the one shown in the report.
        """
        rows = list(rows)
        write_csv(self.outDir / filename, header, rows)
        self.outputs[name] = filename
        if self.tableHeader is None:
            self.tableHeader = list(header)
            self.tableRows = [[format_cell(v) for v in row] for row in rows]
            self.tableFile = filename

    # Shared building blocks

    def hamiltonian(self):
        return build_hamiltonian(self.config.grid(), self.config.potential(), self.config.constants())

    def spectrum(self, h):
        return solve_spectrum(h, self.config['spectrum.levels'])

    def require_seed(self, reason):
        if self.config.seed is None:
            raise configurationError("{} requires a seed (config key 'seed' or --seed)".format(reason))
        return self.config.seed

    # Commands

    def run_eigs(self):
        """
        run_eigs()

        Lowest spectrum.levels eigenpairs: energies.csv (with closed form
        levels where known) and states.csv.
        """
        grid, potential, constants = self.config.grid(), self.config.potential(), self.config.constants()
        h = self.hamiltonian()
        spec = self.spectrum(h)
        analytic = analytic_levels(potential, grid, constants, spec.count)

        rows = []
        for n in range(spec.count):
            reference = None if analytic is None else float(analytic[n])
            error = None if reference is None else abs(spec.energies[n] - reference) / abs(reference)
            rows.append((n, float(spec.energies[n]), reference, error, float(spec.residuals[n])))
        self.write_table('energies', 'energies.csv', ['level', 'energy', 'analytic', 'relative_error', 'residual'], rows)

        basis = spec.basis()
        self.write_table('states', 'states.csv', ['x'] + ['psi_{}'.format(n) for n in range(spec.count)],
                         ([x] + list(np.real(basis[i])) for i, x in enumerate(grid.points)))

        defect, _ = orthonormality_defect(spec.states)
        self.check('eigs.orthonormality', defect, rules.ALGEBRAIC_TOL)
        self.check('eigs.residual', float(np.max(spec.residuals)),
                   rules.RESIDUAL_TOL * (1 + float(np.max(np.abs(spec.energies)))))
        if analytic is not None:
            self.check('eigs.analytic_error', max(row[3] for row in rows), 1e-2, severity='note')
        self.logger.info("Solved {} levels, E_0 = {:.12g}".format(spec.count, spec.energies[0]))

    def initial_kernel(self, spec):
        grid = spec.grid
        levels = list(self.config['evolve.levels'])
        psi0 = scalarField(grid, np.sum([spec.states[n].values for n in levels], axis=0)).normalize()
        if self.config['evolve.kernel'] == 'product':
            return psi0, kernel_from_product(psi0, psi0)
        c = np.zeros((spec.count, spec.count))
        c[levels, levels] = 1 / np.sqrt(len(levels))
        return psi0, kernel_from_coefficients(coefficientMatrix(c), spec.states)

    def run_evolve(self):
        """
        run_evolve()

        Evolve a bipartite kernel on the grid and record conserved
        quantities per snapshot in evolution.csv. A product kernel is also
        compared against the outer product of the evolved wave function,
        and the final kernel against exact evolution in the eigenbasis.
        """
        h = self.hamiltonian()
        spec = self.spectrum(h)
        grid = h.grid
        p = self.config.evolution()
        psi0, Psi0 = self.initial_kernel(spec)
        product = self.config['evolve.kernel'] == 'product'

        position = gridObservable.position(grid)
        energy = gridObservable.hamiltonian(h)
        schrodinger = iterate_schrodinger(psi0, h, p) if product else None

        rows = []
        final = Psi0
        for step, t, values in iterate_bipartite(Psi0, h, p):
            state = kernelField(grid, values)
            deviation = None
            if schrodinger is not None:
                _, _, phi = next(schrodinger)
                deviation = float(np.max(np.abs(values - np.outer(phi, phi.conj()))))
            rows.append((t, state.normSquared, state.hermiticityDefect, entropy(state),
                         expectation(state, position), expectation(state, energy), deviation))
            final = state
        self.write_table('evolution', 'evolution.csv',
                         ['time', 'norm', 'hermiticity_defect', 'entropy', 'position', 'energy', 'product_deviation'], rows)

        columns = list(zip(*rows))
        self.check('evolve.norm_drift', max(abs(v - columns[1][0]) for v in columns[1]), rules.NORM_DRIFT_TOL)
        self.check('evolve.hermiticity_defect', max(columns[2]), rules.HERMITICITY_DRIFT_TOL)
        self.check('evolve.entropy_drift', max(abs(v - columns[3][0]) for v in columns[3]), rules.ENTROPY_DRIFT_TOL)
        self.check('evolve.energy_drift', max(abs(v - columns[5][0]) for v in columns[5]),
                   rules.ALGEBRAIC_TOL * max(1.0, abs(columns[5][0])), severity='warning')
        if product:
            self.check('evolve.product_deviation', max(columns[6]), PRODUCT_DEVIATION_LIMIT)

        c0 = eigenbasis_coefficients(Psi0, spec)
        exact = kernel_from_coefficients(evolve_bipartite_spectral(c0, spec, p.duration), spec.states)
        self.check('evolve.spectral_agreement', float(np.max(np.abs(exact.values - final.values))),
                   SPECTRAL_AGREEMENT, severity='note')
        self.logger.info("Evolved {} steps of dt = {}".format(p.nSteps, p.dt))

    def run_duality_scan(self):
        """
        run_duality_scan()

        Entropy (both routes) and screen visibility along the two-slit
        family in duality.csv, slit densities per lambda in densities.csv.
        """
        grid = self.config.grid()
        separation, width = self.config['slits.separation'], self.config['slits.width']
        lambdas = list(self.config['duality.lambdas'])
        mode1, mode2 = make_two_slit_modes(grid, separation, width)
        points = duality_scan(mode1, mode2, lambdas, self.config.workers, screen_padding(grid, separation))

        rows = []
        for point in points:
            kernel = two_slit_kernel(twoSlitFamily(mode1, mode2, interpolate_coefficients(point.lam)))
            rows.append((point.lam, point.entropy, von_neumann_entropy(reduced_density(kernel)), point.visibility))
        self.write_table('duality', 'duality.csv', ['lambda', 'entropy', 'entropy_reduced', 'visibility'], rows)
        self.write_table('densities', 'densities.csv', ['x'] + ['density_{:g}'.format(lam) for lam in lambdas],
                         ([x] + [pt.density.values[i] for pt in points] for i, x in enumerate(grid.points)))

        self.check('duality.route_agreement', max(abs(r[1] - r[2]) for r in rows), rules.ALGEBRAIC_TOL)
        if lambdas == sorted(lambdas) and len(lambdas) > 1:
            self.check('duality.entropy_monotone', max(max(0.0, a[1] - b[1]) for a, b in zip(rows, rows[1:])),
                       rules.ALGEBRAIC_TOL, severity='warning')
            self.check('duality.visibility_monotone', max(max(0.0, b[3] - a[3]) for a, b in zip(rows, rows[1:])),
                       rules.ALGEBRAIC_TOL, severity='warning')

        for point in points:
            if point.lam in (0.0, 1.0):
                a, b = mode1.values, mode2.values
                closed = np.abs(a + b) ** 2 / 2 if point.lam == 0 else (np.abs(a) ** 2 + np.abs(b) ** 2) / 2
                name = 'duality.wave_density' if point.lam == 0 else 'duality.particle_density'
                self.check(name, float(np.max(np.abs(point.density.values - closed))), rules.ALGEBRAIC_TOL)

        samples = self.config['duality.bound_samples']
        if samples > 0:
            scan = entropy_bound_scan(samples, self.require_seed('duality.bound_samples > 0'))
            self.check('duality.entropy_bound', scan.maxEntropy, scan.bound + rules.ALGEBRAIC_TOL, severity='warning')
        self.logger.info("Scanned {} interpolation points".format(len(points)))

    def run_gap_scan(self):
        """
        run_gap_scan()

        Measured against expected gaps for every configured pair in gaps.csv.
        """
        grid, potential, constants = self.config.grid(), self.config.potential(), self.config.constants()
        h = self.hamiltonian()
        spec = self.spectrum(h)
        results = gap_spectroscopy(spec, self.config['gaps.pairs'], h, self.config.evolution(),
                                   self.config['gaps.residual_tolerance'], self.config.workers)
        analytic = analytic_levels(potential, grid, constants, spec.count)
        if analytic is not None:
            results = [attr.evolve(g, analytic=float(analytic[g.n] - analytic[g.m])) for g in results]

        rows = [(g.n, g.m, g.measured, g.expected, g.analytic, g.relativeError, g.analyticError, g.residual)
                for g in results]
        self.write_table('gaps', 'gaps.csv', ['n', 'm', 'measured', 'expected', 'analytic', 'relative_error',
                                              'analytic_error', 'residual'], rows)
        self.check('gaps.relative_error', max(g.relativeError for g in results), GAP_ACCURACY, severity='warning')
        if analytic is not None:
            self.check('gaps.analytic_error', max(g.analyticError for g in results), GAP_ACCURACY, severity='warning')
        self.logger.info("Measured {} gaps".format(len(results)))

    def collapse_coefficients(self, spec, rng):
        levels = list(self.config['collapse.levels'])
        size = len(levels)
        kind = self.config['collapse.state']
        if kind == 'wave':
            block = np.full((size, size), 1 / size)
        elif kind == 'particle':
            block = np.eye(size) / np.sqrt(size)
        else:
            block = random_hermitian_coefficients(size, rng).entries
        c = np.zeros((spec.count, spec.count), dtype=complex)
        c[np.ix_(levels, levels)] = block
        return coefficientMatrix(c)

    def run_collapse_stats(self):
        """
        run_collapse_stats()

        Draw collapse.samples outcomes from p_m with the seeded generator
        and compare frequencies and the mean energy shift with the
        transition report. Writes collapse.csv, collapse_summary.csv and
        transitions.json.
        """
        seed = self.require_seed('collapse-stats')
        rng = np.random.default_rng(seed)
        h = self.hamiltonian()
        spec = self.spectrum(h)
        Psi = kernel_from_coefficients(self.collapse_coefficients(spec, rng), spec.states)

        c = eigenbasis_coefficients(Psi, spec).normalize()
        report = transition_probabilities(c, spec)
        p = np.array(report.probabilities)
        samples = self.config['collapse.samples']
        draws = rng.choice(len(p), size=samples, p=p / p.sum())
        counts = np.bincount(draws, minlength=len(p))
        frequencies = counts / samples
        bands = 3 * np.sqrt(p * (1 - np.clip(p, 0, 1)) / samples)
        meanShift = float(np.mean(np.asarray(report.energyShifts)[draws]))

        rows = [(m, float(report.energies[m]), float(p[m]), float(frequencies[m]), float(bands[m]), int(counts[m]),
                 float(report.energyShifts[m]), float(report.weightedShifts[m])) for m in range(len(p))]
        self.write_table('collapse', 'collapse.csv', ['level', 'energy', 'probability', 'frequency', 'band', 'count',
                                                      'shift', 'weighted_shift'], rows)
        write_transition_graph(transition_graph(c, spec), self.outDir / 'transitions.json')
        self.outputs['transitions'] = 'transitions.json'

        spread = np.sqrt(max(float(np.sum(p * np.asarray(report.energyShifts) ** 2)) - report.expectedShift ** 2, 0.0))
        shiftBand = 3 * spread / np.sqrt(samples)
        self.write_table('collapse_summary', 'collapse_summary.csv', ['samples', 'mean_shift', 'expected_shift', 'shift_band'],
                         [(samples, meanShift, float(report.expectedShift), float(shiftBand))])
        self.check('collapse.probability_total', abs(report.total - 1), rules.STRUCTURAL_TOL)
        self.check('collapse.frequency_band', float(np.max(np.abs(frequencies - p) - bands)), 0.0, severity='warning')
        self.check('collapse.mean_shift', abs(meanShift - report.expectedShift), shiftBand, severity='warning')
        if c.hermitian:
            self.check('collapse.expected_shift', abs(report.expectedShift), rules.ALGEBRAIC_TOL * 0.1)

        collapsed, _, _ = collapse(Psi, spec, int(draws[0]))
        self.check('collapse.entropy_after', entropy(collapsed), rules.ALGEBRAIC_TOL)
        self.logger.info("Drew {} collapse outcomes with seed {}".format(samples, seed))


def run_command(name, config, outDir=None, seed=None):
    '''
    Run one command over a configuration.

    Parameters
    ----------
    name : str
        One of COMMANDS
    config : runConfig
    outDir : str or pathlib.Path, optional
        Overrides output_dir
    seed : int, optional
        Overrides seed

    Returns
    -------
    bipartiteRun
        Executed run; its exitCode and errorLine describe the outcome

    Raises
    ------
    configurationError
        Unknown command or invalid override.
    '''
    if name not in COMMANDS:
        raise configurationError("unknown command '{}', expected one of {}".format(name, ', '.join(COMMANDS)))
    overrides = {}
    if outDir is not None:
        overrides['output_dir'] = str(outDir)
    if seed is not None:
        overrides['seed'] = int(seed)
    if overrides:
        config = config.with_overrides(**overrides)
    run = bipartiteRun(name, config)
    run.execute()
    return run
