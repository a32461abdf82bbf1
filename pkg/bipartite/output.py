import csv
import json
import logging
import importlib.resources as pkg_resources

import jinja2
import networkx
import numpy as np

from . import templates

log = logging.getLogger(__name__)

FLOAT_FORMAT = '.17g'


def format_cell(value):
    '''
    Text of one CSV cell: floats with 17 significant digits, everything
    else through str.
    '''
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ''
    return str(value)


def parse_cell(text):
    '''
    Inverse of format_cell for numbers; other text is returned unchanged.
    '''
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def write_csv(path, header, rows):
    '''
    Write a header row and data rows as comma separated values.

    Parameters
    ----------
    path : pathlib.Path
    header : [str]
    rows : iterable of sequences
        Each row as long as header

    Returns
    -------
    pathlib.Path
    '''
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        count = 0
        for row in rows:
            if len(row) != len(header):
                raise ValueError("Row {} has {} cells, header has {}".format(count, len(row), len(header)))
            writer.writerow([format_cell(v) for v in row])
            count += 1
    log.debug("Wrote {} rows to {}".format(count, path))
    return path


def read_csv(path):
    '''
    Read a file written by write_csv.

    Returns
    -------
    (list, list)
        Header and rows, numeric cells parsed back to int or float
    '''
    with open(path, newline='', encoding='utf-8') as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [[parse_cell(cell) for cell in row] for row in reader]
    return header, rows


def render_template(name, **context):
    template = jinja2.Template(pkg_resources.read_text(templates, name), keep_trailing_newline=True)
    return template.render(**context)


def render_manifest(run):
    '''
    Render the key = value manifest of a finished run.

    Parameters
    ----------
    run : bipartiteRun

    Returns
    -------
    str
    '''
    return render_template('manifest.txt', run=run)


def render_report(run):
    '''
    Render the markdown summary of a finished run.
    '''
    return render_template('report.md', run=run)


def transition_graph_json(graph):
    '''
    Serialise a transition graph with networkx node_link_data. Edges are
    always stored under "links".
    '''
    try:
        data = networkx.readwrite.json_graph.node_link_data(graph, edges='links')
    except TypeError:
        # networkx < 3.4 has no edges keyword and always uses "links"
        data = networkx.readwrite.json_graph.node_link_data(graph)
    return json.dumps(data, indent=2, sort_keys=True)


def write_transition_graph(graph, path):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(transition_graph_json(graph))
    return path
