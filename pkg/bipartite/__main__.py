import argparse
import pathlib
import sys

from . import __version__
from .config import parse_config
from .errors import configurationError
from .run import COMMANDS, error_line, run_command


def build_parser():
    parser = argparse.ArgumentParser(
        prog='bipartite',
        description='Simulate and analyse bipartite wave functions on a 1D grid.')
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('--config', required=True, help='key = value configuration document')
    parser.add_argument('--out', default=None, help='output directory, overrides output_dir')
    parser.add_argument('--seed', type=int, default=None, help='seed for sampling, overrides seed')
    parser.add_argument('--version', action='version', version='%(prog)s {}'.format(__version__))
    return parser


def main(argv=None):
    '''
    Command line entry point.

    Returns
    -------
    int
        Exit code: 0 success, 2 configuration error, 3 numeric error,
        4 I/O error
    '''
    args = build_parser().parse_args(argv)

    try:
        text = pathlib.Path(args.config).read_text(encoding='utf-8')
    except OSError as e:
        print(error_line(e), file=sys.stderr)
        return 4
    except UnicodeDecodeError as e:
        print(error_line(configurationError("config {} is not valid UTF-8 ({})".format(args.config, e.reason))), file=sys.stderr)
        return 2

    try:
        config = parse_config(text)
        run = run_command(args.command, config, outDir=args.out, seed=args.seed)
    except configurationError as e:
        print(error_line(e), file=sys.stderr)
        return 2

    if run.error is not None:
        print(run.errorLine, file=sys.stderr)
    return run.exitCode


if __name__ == '__main__':
    sys.exit(main())
