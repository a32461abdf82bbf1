import attr
import parsy as ps

from .errors import configurationError


# Parsy Objects
# Grammar of the line based `key = value` documents used for run
# configurations and manifests.

# Basic Objects

# Optional whitespace (no newlines)
opspc = ps.regex(r'[ \t]*')

# Common identifiers
eq = ps.string('=')
hsh = ps.string('#')
cmm = ps.string(',')
lb = ps.string('(')
rb = ps.string(')')

# Word: identifier such as a potential kind or a state name
wrd = ps.regex(r'[A-Za-z_][A-Za-z0-9_\-]*')

# Key: dotted identifiers, e.g. grid.n_points
key = ps.regex(r'[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_\-]*)*')

# Value: anything up to an inline comment, surrounding blanks dropped
value = ps.regex(r'[^#\r\n]*').map(str.strip)

# Comment: hash + commentary
comment = hsh >> ps.regex(r'.*')


@attr.s(frozen=True)
class setting:
    """
    One `key = value` line of a document.

    Attributes
    ----------
    key : str
    value : str
        Raw text of the value, unparsed
    line : int
        1-based line number
    """
    key = attr.ib()
    value = attr.ib()
    line = attr.ib(default=0)


# assignment: key, equals sign, raw value, optional trailing comment
assignment = ps.seq(
    key = opspc >> key << opspc + eq + opspc,
    value = value << comment.optional()
).combine_dict(setting)

# blank: empty, whitespace only or comment only line
blank = (opspc + comment.optional().map(lambda x: '')).result(None)

docline = (assignment | blank) << opspc


# Value parsers
# Each parses the complete raw value of one setting.

number = ps.regex(r'[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?').map(float)
integer = ps.regex(r'[-+]?\d+').map(int)
word = wrd
path = ps.regex(r'\S(?:.*\S)?')

sep = opspc + cmm + opspc

number_list = number.sep_by(sep, min=1).map(tuple)
int_list = integer.sep_by(sep, min=1).map(tuple)

# pair: (n, m)
pair = ps.seq(lb + opspc >> integer << sep, integer << opspc + rb).map(tuple)
pair_list = pair.sep_by(sep, min=1).map(tuple)


def parse_document(text):
    '''
    Split a `key = value` document into settings.

    Blank lines and `#` comments are skipped. Duplicate keys are left for
    the caller to judge.

    Parameters
    ----------
    text : str

    Returns
    -------
    [setting]

    Raises
    ------
    configurationError
        A line is neither blank, a comment nor an assignment.
    '''
    settings = []
    for lineNo, raw in enumerate(text.splitlines(), start=1):
        try:
            parsed = docline.parse(raw)
        except ps.ParseError:
            raise configurationError("expected `key = value`, got '{}'".format(raw.strip()), lines=(lineNo,))
        if parsed is not None:
            settings.append(setting(parsed.key, parsed.value, lineNo))
    return settings


def parse_value(parser, text):
    '''
    Run a value parser over the complete text of a value.

    Returns
    -------
    object
        Parsed value

    Raises
    ------
    parsy.ParseError
    '''
    return parser.parse(text)
