import pytest
import parsy as ps

from bipartite.config import *
from bipartite.errors import configurationError
from bipartite.parsers import *


testcases = [
    ("grid.n_points = 512", setting(key='grid.n_points', value='512', line=0)),
    ("  potential=harmonic", setting(key='potential', value='harmonic', line=0)),
    ("slits.width = 0.02   # centre to edge", setting(key='slits.width', value='0.02', line=0)),
    ("gaps.pairs = (0,1), (1, 2)", setting(key='gaps.pairs', value='(0,1), (1, 2)', line=0)),
    ("output_dir = results/run 1", setting(key='output_dir', value='results/run 1', line=0))
]

@pytest.mark.parametrize("case,expected", testcases)
def test_assignment_parse(case, expected):
    assert docline.parse(case) == expected


testcases = ["", "   ", "# a comment", "   # indented comment"]

@pytest.mark.parametrize("case", testcases)
def test_blank_parse(case):
    assert docline.parse(case) is None


testcases = [
    (number, "1e-6", 1e-6),
    (number, "-0.5", -0.5),
    (number, "3", 3.0),
    (integer, "512", 512),
    (number_list, "0, 0.5,1", (0.0, 0.5, 1.0)),
    (int_list, "0,1 , 2", (0, 1, 2)),
    (pair_list, "(0,1), (0, 2),(1,2)", ((0, 1), (0, 2), (1, 2))),
    (word, "infinite_well", "infinite_well")
]

@pytest.mark.parametrize("case,expected", [((p, t), e) for p, t, e in testcases])
def test_value_parse(case, expected):
    parser, text = case
    assert parse_value(parser, text) == expected


testcases = [
    (integer, "3.5"),
    (number, "fast"),
    (int_list, ""),
    (pair_list, "(0,1,2)"),
    (pair_list, "0,1")
]

@pytest.mark.parametrize("case", testcases)
def test_value_parse_errors(case):
    parser, text = case
    with pytest.raises(ps.ParseError):
        parse_value(parser, text)


def test_parse_document_lines():
    text = "# header\n\npotential = harmonic\n  grid.n_points = 64 # fine\n"
    assert parse_document(text) == [setting('potential', 'harmonic', 3), setting('grid.n_points', '64', 4)]


def test_parse_document_garbage():
    with pytest.raises(configurationError) as err:
        parse_document("potential = harmonic\nthis is not an assignment\n")
    assert err.value.lines == (2,)
    assert str(err.value).startswith("line 2:")


def test_minimal_config_defaults():
    config = parse_config("potential = infinite_well\ngrid.n_points = 512\ngrid.x_min = 0\ngrid.x_max = 1\n")
    assert config['grid.n_points'] == 512
    assert config['spectrum.levels'] == 8
    assert config['gaps.pairs'] == ((0, 1), (0, 2), (1, 2))
    assert config['duality.lambdas'] == tuple(i / 10 for i in range(11))
    assert config.seed is None
    assert config.workers == 1
    assert config.outputDir == 'results'
    assert config.grid().spacing == pytest.approx(1 / 511)
    assert len(config.settings()) == len(OPTIONS)


def test_sample_config():
    with open('./tests/samples/well.cfg', encoding='utf-8') as f:
        config = parse_config(f.read())
    assert config['seed'] == 7
    assert config.evolution().recordEvery == 20
    assert config.line_of('grid.n_points') == (5,)


testcases = [
    ("grid.n_points = 2", "n_points ≥ 3", (1,)),
    ("grid.n_points = 64\ngrid.n_point = 64", "unknown key 'grid.n_point'", (2,)),
    ("seed = 1\nworkers = 2\nseed = 2", "duplicate key 'seed'", (1, 3)),
    ("grid.n_points = many", "'grid.n_points' expects a integer", (1,)),
    ("potential = square", "expected one of", (1,)),
    ("duality.lambdas = 0, 0.5, 1.5", "lambdas must lie in [0, 1]", (1,)),
    ("grid.x_min = 1\ngrid.x_max = 0", "x_max must exceed x_min", (1, 2)),
    ("evolution.n_steps = 5\nevolution.record_every = 10", "record_every", (1, 2)),
    ("grid.n_points = 8\nspectrum.levels = 7", "exceeds the 6 interior grid points", (1, 2)),
    ("spectrum.levels = 2", "refers to level 2", (1,)),
    ("collapse.levels = 0, 0", "lists a level twice", (1,)),
    ("potential.values = 1, 2, 3", "only applies to the tabulated", (1,)),
    ("potential = tabulated\npotential.values = 0, 0\ngrid.n_points = 5", "Tabulated potential has 2 values", (1, 2, 3)),
    ("constants.hbar = 0", "hbar must be > 0", (1,))
]

@pytest.mark.parametrize("case,expected", [(case, (message, lines)) for case, message, lines in testcases])
def test_config_errors(case, expected):
    message, lines = expected
    with pytest.raises(configurationError) as err:
        parse_config(case)
    assert message in str(err.value)
    assert err.value.lines == lines


def test_duplicate_sample():
    with open('./tests/samples/duplicate.cfg', encoding='utf-8') as f:
        text = f.read()
    with pytest.raises(configurationError, match=r"lines 1, 4: duplicate key 'grid.n_points'"):
        parse_config(text)


def test_default_record_every_shrinks():
    config = parse_config("evolution.n_steps = 4")
    assert config.evolution().recordEvery == 4
    assert parse_config("evolution.n_steps = 40").evolution().recordEvery == 10


def test_overrides():
    config = parse_config("seed = 1\noutput_dir = a")
    changed = config.with_overrides(seed=9, output_dir='b')
    assert changed.seed == 9 and changed.outputDir == 'b'
    assert config.seed == 1
    assert changed.line_of('seed') == ()
    with pytest.raises(configurationError):
        config.with_overrides(seed=-1)
    with pytest.raises(configurationError):
        config.with_overrides(colour='red')


testcases = [
    (0.1, '0.10000000000000001'),
    (((0, 1), (1, 2)), '(0,1), (1,2)'),
    ((0, 1, 2), '0, 1, 2'),
    (None, 'none'),
    ('harmonic', 'harmonic')
]

@pytest.mark.parametrize("case,expected", testcases)
def test_format_value(case, expected):
    assert format_value(case) == expected


def test_settings_round_trip():
    config = parse_config("potential = harmonic\ngrid.x_min = -5\ngrid.x_max = 5\nduality.lambdas = 0, 0.25, 1\nseed = 4")
    text = '\n'.join('{} = {}'.format(k, v) for k, v in config.settings() if v != 'none')
    again = parse_config(text)
    assert again.values == config.values
