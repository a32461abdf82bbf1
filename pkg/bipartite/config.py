import logging

import attr
import parsy as ps

from . import parsers
from .errors import bipartiteError, configurationError
from .evolution import evolutionParams
from .hamiltonian import POTENTIAL_KINDS, potentialSpec
from .objects import grid1D, physicalConstants

log = logging.getLogger(__name__)

KERNEL_KINDS = ('product', 'diagonal')
STATE_KINDS = ('wave', 'particle', 'random')


def one_of(choices):
    def check(value):
        if value not in choices:
            return "expected one of {}, got '{}'".format(', '.join(choices), value)
    return check


def at_least(bound, name):
    def check(value):
        if value < bound:
            return "{} ≥ {} required, got {}".format(name, bound, value)
    return check


def positive(name):
    def check(value):
        if not value > 0:
            return "{} must be > 0, got {}".format(name, value)
    return check


def all_at_least(bound, name):
    def check(values):
        flat = [v for item in values for v in (item if isinstance(item, tuple) else (item,))]
        if any(v < bound for v in flat):
            return "{} entries must be ≥ {}, got {}".format(name, bound, format_value(values))
    return check


def unit_interval(values):
    bad = [v for v in values if not 0 <= v <= 1]
    if bad:
        return "lambdas must lie in [0, 1], got {}".format(format_value(tuple(bad)))


@attr.s(frozen=True)
class option:
    """
    One recognised configuration key.

    Attributes
    ----------
    key : str
    parser : parsy.Parser
        Parser for the complete value text
    kind : str
        Type name used in error messages
    default : object
    check : callable, optional
        Returns an error message for a bad value, None otherwise
    """
    key = attr.ib()
    parser = attr.ib(repr=False)
    kind = attr.ib()
    default = attr.ib(default=None)
    check = attr.ib(default=None, repr=False)


OPTIONS = [
    option('potential', parsers.word, 'potential kind', 'infinite_well', one_of(POTENTIAL_KINDS)),
    option('potential.omega', parsers.number, 'float', 1.0, positive('omega')),
    option('potential.barrier_height', parsers.number, 'float', 100.0, at_least(0, 'barrier_height')),
    option('potential.barrier_half_width', parsers.number, 'float', 0.05, positive('barrier_half_width')),
    option('potential.values', parsers.number_list, 'float list', None),
    option('potential.offset', parsers.number, 'float', 0.0),
    option('grid.x_min', parsers.number, 'float', 0.0),
    option('grid.x_max', parsers.number, 'float', 1.0),
    option('grid.n_points', parsers.integer, 'integer', 512, at_least(3, 'n_points')),
    option('constants.hbar', parsers.number, 'float', 1.0, positive('hbar')),
    option('constants.mass', parsers.number, 'float', 1.0, positive('mass')),
    option('evolution.dt', parsers.number, 'float', 0.001, positive('dt')),
    option('evolution.n_steps', parsers.integer, 'integer', 1000, at_least(1, 'n_steps')),
    option('evolution.record_every', parsers.integer, 'integer', 10, at_least(1, 'record_every')),
    option('spectrum.levels', parsers.integer, 'integer', 8, at_least(1, 'levels')),
    option('evolve.levels', parsers.int_list, 'integer list', (0, 1, 2), all_at_least(0, 'evolve.levels')),
    option('evolve.kernel', parsers.word, 'kernel kind', 'product', one_of(KERNEL_KINDS)),
    option('gaps.pairs', parsers.pair_list, 'pair list', ((0, 1), (0, 2), (1, 2)), all_at_least(0, 'gaps.pairs')),
    option('gaps.residual_tolerance', parsers.number, 'float', 1e-6, positive('residual_tolerance')),
    option('duality.lambdas', parsers.number_list, 'float list', tuple(i / 10 for i in range(11)), unit_interval),
    option('duality.bound_samples', parsers.integer, 'integer', 0, at_least(0, 'bound_samples')),
    option('slits.separation', parsers.number, 'float', 0.25, positive('separation')),
    option('slits.width', parsers.number, 'float', 0.02, positive('width')),
    option('collapse.levels', parsers.int_list, 'integer list', (0, 1), all_at_least(0, 'collapse.levels')),
    option('collapse.state', parsers.word, 'state kind', 'wave', one_of(STATE_KINDS)),
    option('collapse.samples', parsers.integer, 'integer', 100000, at_least(1, 'samples')),
    option('seed', parsers.integer, 'unsigned integer', None, at_least(0, 'seed')),
    option('workers', parsers.integer, 'integer', 1, at_least(1, 'workers')),
    option('output_dir', parsers.path, 'path', 'results'),
]

OPTION_INDEX = {opt.key: opt for opt in OPTIONS}


def format_value(value):
    '''
    Render a configuration value the way it is written in a document, floats
    with 17 significant digits.
    '''
    if value is None:
        return 'none'
    if isinstance(value, float):
        return '{:.17g}'.format(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ', '.join('({},{})'.format(*pair) for pair in value)
        return ', '.join(format_value(v) for v in value)
    return str(value)


@attr.s(frozen=True, eq=False)
class runConfig:
    """
    Validated run configuration.

    Attributes
    ----------
    values : dict
        Effective value per key of OPTIONS, defaults included
    lines : dict
        Line number per key given in the document
    """
    values = attr.ib(factory=dict)
    lines = attr.ib(factory=dict, repr=False)

    def __getitem__(self, key):
        return self.values[key]

    @property
    def seed(self):
        return self.values['seed']

    @property
    def workers(self):
        return self.values['workers']

    @property
    def outputDir(self):
        return self.values['output_dir']

    def grid(self):
        return grid1D(self['grid.x_min'], self['grid.x_max'], self['grid.n_points'])

    def constants(self):
        return physicalConstants(self['constants.hbar'], self['constants.mass'])

    def potential(self):
        return potentialSpec(
            kind=self['potential'],
            omega=self['potential.omega'],
            barrierHeight=self['potential.barrier_height'],
            barrierHalfWidth=self['potential.barrier_half_width'],
            values=self['potential.values'],
            offset=self['potential.offset'],
        )

    def evolution(self):
        steps = self['evolution.n_steps']
        every = self['evolution.record_every']
        # the default stride shrinks to fit short runs
        if 'evolution.record_every' not in self.lines:
            every = min(every, steps)
        return evolutionParams(self['evolution.dt'], steps, every)

    def settings(self):
        """
        settings()

        (key, formatted value) for every option, in declaration order.
        """
        return [(opt.key, format_value(self.values[opt.key])) for opt in OPTIONS]

    def line_of(self, *keys):
        return tuple(sorted({self.lines[k] for k in keys if k in self.lines}))

    def with_overrides(self, **overrides):
        """
        with_overrides(**overrides)

        Copy with some values replaced, e.g. from command line flags.
        Dotted keys go through a dict: with_overrides(**{"duality.lambdas": (0.0, 1.0)}).
        """
        values = dict(self.values)
        for k, v in overrides.items():
            if k not in OPTION_INDEX:
                raise configurationError("unknown key '{}'".format(k))
            check = OPTION_INDEX[k].check
            message = None if (check is None or v is None) else check(v)
            if message:
                raise configurationError(message)
            values[k] = v
        return runConfig(values, {k: n for k, n in self.lines.items() if k not in overrides})


def cross_check(config):
    '''
    Checks spanning several keys, and the invariants of the objects the
    configuration builds. Raises configurationError naming the lines of the
    keys involved.
    '''
    for build, keys in ((config.grid, ('grid.x_min', 'grid.x_max', 'grid.n_points')),
                        (config.constants, ('constants.hbar', 'constants.mass')),
                        (config.evolution, ('evolution.dt', 'evolution.n_steps', 'evolution.record_every'))):
        try:
            build()
        except bipartiteError as e:
            raise configurationError(str(e), lines=config.line_of(*keys))

    potential_keys = [opt.key for opt in OPTIONS if opt.key.startswith('potential')]
    try:
        potential = config.potential()
        potential.evaluate(config.grid(), config.constants())
    except bipartiteError as e:
        raise configurationError(str(e), lines=config.line_of('grid.n_points', *potential_keys))
    if config['potential'] != 'tabulated' and config['potential.values'] is not None:
        raise configurationError("potential.values only applies to the tabulated potential",
                                 lines=config.line_of('potential.values'))

    interior = config['grid.n_points'] - 2
    levels = config['spectrum.levels']
    if levels > interior:
        raise configurationError("spectrum.levels = {} exceeds the {} interior grid points".format(levels, interior),
                                 lines=config.line_of('spectrum.levels', 'grid.n_points'))
    for key in ('evolve.levels', 'collapse.levels', 'gaps.pairs'):
        flat = [v for item in config[key] for v in (item if isinstance(item, tuple) else (item,))]
        if max(flat) >= levels:
            raise configurationError("{} refers to level {} but spectrum.levels = {}".format(key, max(flat), levels),
                                     lines=config.line_of(key, 'spectrum.levels'))
    for key in ('evolve.levels', 'collapse.levels'):
        if len(set(config[key])) != len(config[key]):
            raise configurationError("{} lists a level twice".format(key), lines=config.line_of(key))


def parse_config(text):
    '''
    Parse and validate a configuration document.

    Parameters
    ----------
    text : str
        `key = value` lines, `#` comments

    Returns
    -------
    runConfig
        Every option present, defaults filled in

    Raises
    ------
    configurationError
        Unknown or duplicate key, type mismatch or invariant breach, naming
        the offending line(s).
    '''
    values = {opt.key: opt.default for opt in OPTIONS}
    lines = {}

    for item in parsers.parse_document(text):
        if item.key not in OPTION_INDEX:
            raise configurationError("unknown key '{}'".format(item.key), lines=(item.line,))
        if item.key in lines:
            raise configurationError("duplicate key '{}'".format(item.key), lines=(lines[item.key], item.line))
        opt = OPTION_INDEX[item.key]
        try:
            parsed = parsers.parse_value(opt.parser, item.value)
        except ps.ParseError:
            raise configurationError("'{}' expects a {}, got '{}'".format(item.key, opt.kind, item.value), lines=(item.line,))
        if opt.check is not None:
            message = opt.check(parsed)
            if message:
                raise configurationError(message, lines=(item.line,))
        values[item.key] = parsed
        lines[item.key] = item.line

    config = runConfig(values, lines)
    cross_check(config)
    log.debug("Parsed configuration with {} explicit keys".format(len(lines)))
    return config
