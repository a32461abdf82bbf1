import json
import warnings

import pytest
import numpy as np

from bipartite.analysis import transition_graph
from bipartite.hamiltonian import build_hamiltonian, solve_spectrum
from bipartite.objects import coefficientMatrix, grid1D
from bipartite.output import *


testcases = [
    (0.1, '0.10000000000000001'),
    (np.float64(1 / 3), '0.33333333333333331'),
    (2.0, '2'),
    (np.int64(7), '7'),
    (True, 'true'),
    (np.bool_(False), 'false'),
    (None, ''),
    ('wave', 'wave')
]

@pytest.mark.parametrize("case,expected", testcases)
def test_format_cell(case, expected):
    assert format_cell(case) == expected


testcases = [
    ('12', 12),
    ('-3.5e-07', -3.5e-07),
    ('0.10000000000000001', 0.1),
    ('true', 'true'),
    ('', '')
]

@pytest.mark.parametrize("case,expected", testcases)
def test_parse_cell(case, expected):
    assert parse_cell(case) == expected


def test_csv_exact_floats(tmp_path):
    rng = np.random.default_rng(3)
    values = rng.normal(size=(20, 3)) * 10.0 ** rng.integers(-12, 12, size=(20, 3))
    rows = [[i] + list(row) for i, row in enumerate(values)]
    path = write_csv(tmp_path / 'values.csv', ['index', 'a', 'b', 'c'], rows)
    header, back = read_csv(path)
    assert header == ['index', 'a', 'b', 'c']
    assert [r[0] for r in back] == list(range(20))
    assert np.array_equal(np.array([r[1:] for r in back]), values)


def test_csv_row_length(tmp_path):
    with pytest.raises(ValueError, match="Row 1 has 1 cells"):
        write_csv(tmp_path / 'bad.csv', ['a', 'b'], [[1, 2], [3]])


def test_csv_empty_cells(tmp_path):
    path = write_csv(tmp_path / 'gaps.csv', ['n', 'analytic'], [[0, None]])
    with open(path, encoding='utf-8') as f:
        assert f.read() == 'n,analytic\n0,\n'


def test_transition_graph_json(tmp_path):
    spec = solve_spectrum(build_hamiltonian(grid1D(0.0, 1.0, 64)), 2)
    graph = transition_graph(coefficientMatrix(np.full((2, 2), 0.5)), spec)
    with warnings.catch_warnings():
        warnings.simplefilter('error', FutureWarning)
        data = json.loads(transition_graph_json(graph))
    assert sorted(node['id'] for node in data['nodes']) == [0, 1]
    assert 'edges' not in data
    links = data['links']
    assert len(links) == 4
    assert all(link['weight'] == pytest.approx(0.25) for link in links)
    path = write_transition_graph(graph, tmp_path / 'transitions.json')
    with open(path, encoding='utf-8') as f:
        assert f.read() == transition_graph_json(graph)
