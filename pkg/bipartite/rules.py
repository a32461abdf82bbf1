import logging

import attr

log = logging.getLogger(__name__)

# Tolerances
# Structural: shape-level identities (normalization, hermiticity flags)
STRUCTURAL_TOL = 1e-10
# Algebraic: results of decompositions, basis changes, round trips
ALGEBRAIC_TOL = 1e-8
# Eigenpairs
DEGENERACY_TOL = 1e-9
RESIDUAL_TOL = 1e-6
# Schmidt coefficients below SCHMIDT_CUTOFF * mu_1 are dropped
SCHMIDT_CUTOFF = 1e-12
ZERO_PROBABILITY = 1e-14
# Minimum weight an eigenbasis expansion must capture
CAPTURE_THRESHOLD = 0.999
PHASE_FIT_RESIDUAL = 1e-6
# Conservation limits for time stepping
STEP_DRIFT_TOL = 1e-12
NORM_DRIFT_TOL = 1e-10
HERMITICITY_DRIFT_TOL = 1e-9
ENTROPY_DRIFT_TOL = 1e-8
# Background fraction below which screen points are ignored for visibility
SCREEN_FLOOR = 1e-3

SEVERITIES = ('note', 'warning', 'error')


@attr.s
class invariantCheck:
    """
    Outcome of one invariant check made during a run.

    The value is compared against limit with the given comparison. Checks
    are collected by the run layer and echoed into the manifest.

    Attributes
    ----------
    name : str
        Dotted identifier, e.g. 'evolution.norm_drift'
    value : float
    limit : float
    comparison : str
        One of '<=', '>=' or '=='
    severity : str
        One of SEVERITIES, used when the check fails
    passed : bool
    """
    name = attr.ib()
    value = attr.ib(converter=float)
    limit = attr.ib(converter=float)
    comparison = attr.ib(default='<=')
    severity = attr.ib(default='warning')

    @comparison.validator
    def check_comparison(self, attribute, value):
        if value not in ('<=', '>=', '=='):
            raise ValueError("Unknown comparison: {}".format(value))

    @severity.validator
    def check_severity(self, attribute, value):
        if value not in SEVERITIES:
            raise ValueError("Unknown severity: {}".format(value))

    def __attrs_post_init__(self):
        if self.comparison == '<=':
            self.passed = self.value <= self.limit
        elif self.comparison == '>=':
            self.passed = self.value >= self.limit
        else:
            self.passed = self.value == self.limit
        if not self.passed:
            log.warning("Check {} failed: {!r} {} {!r} ({})".format(
                self.name, self.value, self.comparison, self.limit, self.severity))

    @property
    def verdict(self):
        return 'pass' if self.passed else 'fail'
