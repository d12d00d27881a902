"""Command line front end.

Exit codes: 0 success, 2 invalid input, 3 eavesdropper detected (ITER above --threshold), 4 I/O failure.
All randomness comes from --seed, and --workers never changes an output byte.
"""
import re
import sys
import math
import logging
import argparse
from concurrent.futures import ProcessPoolExecutor

from .__meta__ import version
from .bases import (BasisError, check_dimension, computational_basis, fourier_mub_basis, fourier_mub_pair,
                    hadamard_mub_4, interpolated_g_basis, random_haar_basis, rotation_basis_2d, rotation_pair_2d,
                    BasisPair)
from .error_rates import rates_report
from .protocol import ProtocolError, simulate
from .rng import BASIS_KEY, generator
from .search import (FIG1_COLUMNS, FIG3_ALPHA_COLUMNS, FIG3_COLUMNS, TABLE3_COLUMNS, TABLE4_COLUMNS, SearchConfig,
                     fig1_scatter, fig3_alpha_overlay, fig3_scatter, iter_ceiling, mub_scan, table3_row)
from .serialize import (FormatError, basis_to_dict, dump_basis, dumps, load_basis, write_csv, write_json,
                        write_records)


__all__ = ['EXIT_OK', 'EXIT_USAGE', 'EXIT_DETECTED', 'EXIT_IO', 'CommandError', 'RunConfig', 'parse_angle',
           'create_parser', 'main', 'cmd_simulate', 'cmd_rates', 'cmd_table3', 'cmd_table4', 'cmd_fig1', 'cmd_fig3',
           'cmd_export_basis']


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DETECTED = 3
EXIT_IO = 4

LOG_FORMAT = '%(asctime)s [%(levelname)s] [%(name)s] %(message)s'

# Flags that only steer how a run is executed or where it is written, never what it computes
NOT_ECHOED = ('workers', 'out', 'records', 'alpha_out', 'verbosity', 'progress', 'func')


class CommandError(Exception):
    """Invalid command line input. Carries the process exit code."""

    def __init__(self, message, exit_code=EXIT_USAGE):
        super().__init__(message)
        self.exit_code = exit_code


class RunConfig(object):
    """Parsed command line values of one run."""

    def __init__(self, args):
        self.args = args
        self.subcommand = args.subcommand

    def __getattr__(self, item):
        try:
            return getattr(self.__dict__['args'], item)
        except (KeyError, AttributeError):
            raise AttributeError(item)

    def as_dict(self):
        """Return the values echoed into output headers, verbatim as parsed."""
        return {k: v for k, v in sorted(vars(self.args).items()) if k not in NOT_ECHOED}


ANGLE_PI = re.compile(r'^([+-]?(?:\d+\.?\d*|\.\d+)?)\*?pi(?:/(\d+\.?\d*))?$')


def parse_angle(text):
    """Return radians from '0.785', 'pi/4', '3pi/4' or '-2*pi/3'."""
    text = str(text).strip().replace(' ', '')
    match = ANGLE_PI.match(text)
    try:
        if match:
            factor = match.group(1)
            factor = float(factor) if factor not in ('', '+', '-') else float(factor + '1')
            divisor = float(match.group(2)) if match.group(2) else 1.0
            value = factor * math.pi / divisor
        else:
            value = float(text)
    except (TypeError, ValueError, ZeroDivisionError):
        raise CommandError('Invalid angle {!r}'.format(text))
    if not math.isfinite(value):
        raise CommandError('Invalid angle {!r}'.format(text))
    return value


def _positive(name, value):
    if value is None or value < 1:
        raise CommandError('--{} must be at least 1, got {}'.format(name.replace('_', '-'), value))
    return value


def _dimension(n):
    try:
        return check_dimension(n)
    except BasisError as err:
        raise CommandError('Invalid --n: {}'.format(err))


def _select_pair(config, n, evan):
    """Return Alice and Bob's pair for simulate."""
    if config.phi is not None:
        if n != 2:
            raise CommandError('--phi needs --n 2')
        return rotation_pair_2d(parse_angle(config.phi))
    if config.hadamard or (evan or '').startswith('alpha:'):
        if n != 4:
            raise CommandError('The real N=4 pair (--hadamard, --evan alpha:<x>) needs --n 4')
        return hadamard_mub_4()
    if config.mub:
        return fourier_mub_pair(n)
    f = random_haar_basis(n, generator(config.seed, BASIS_KEY, 0), label='F')
    return BasisPair(computational_basis(n), f)


def _select_evan(choice, pair, seed):
    """Return Evan's basis from --evan {e|f|alpha:<x>|phi:<x>|haar|file:<path>|none}, None for no Evan."""
    choice = (choice or 'none').strip()
    if choice == 'none':
        return None
    elif choice == 'e':
        return pair.e.relabel('G')
    elif choice == 'f':
        return pair.f.relabel('G')
    elif choice == 'haar':
        return random_haar_basis(pair.n, generator(seed, BASIS_KEY, 1))
    elif choice.startswith('alpha:'):
        return interpolated_g_basis(pair, parse_angle(choice[len('alpha:'):]))
    elif choice.startswith('phi:'):
        if pair.n != 2:
            raise CommandError('--evan phi:<x> needs --n 2')
        return rotation_basis_2d(parse_angle(choice[len('phi:'):]), label='G')
    elif choice.startswith('file:'):
        g = load_basis(choice[len('file:'):])
        if g.n != pair.n:
            raise CommandError('Evan basis file has dimension {} but --n is {}'.format(g.n, pair.n))
        return g
    raise CommandError('Invalid --evan {!r}; use e, f, alpha:<x>, phi:<x>, haar, file:<path> or none'.format(choice))


def _emit(config, text):
    """Write text to --out or stdout."""
    if config.out:
        with open(config.out, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _write_table(config, default_name, columns, rows):
    """Write table rows as CSV (default) or as a JSON document with the config echo."""
    fmt = config.format or 'csv'
    path = config.out or '{}.{}'.format(default_name, fmt)
    if fmt == 'csv':
        write_csv(path, columns, rows)
    else:
        rows = [r if isinstance(r, dict) else dict(zip(columns, r)) for r in rows]
        write_json(path, {'config': config.as_dict(), 'columns': list(columns), 'rows': rows})
    logger.info('Wrote %d rows to %s', len(rows), path)
    return path


def cmd_simulate(config):
    """Run the protocol and write the SimulationSummary. Exit 3 when the ITER exceeds --threshold."""
    n = _dimension(config.n)
    rounds = _positive('rounds', config.rounds)
    workers = _positive('workers', config.workers)
    evan = 'none' if config.no_evan else config.evan
    pair = _select_pair(config, n, evan)
    g = _select_evan(evan, pair, config.seed)

    summary, records = simulate(pair, g, rounds, config.seed, workers=workers, keep_records=bool(config.records),
                                threshold=config.threshold, config=config.as_dict())
    if records is not None:
        write_records(config.records, records, config=config.as_dict())

    if (config.format or 'json') == 'csv':
        data = summary.as_dict()
        data.pop('config')
        columns = sorted(data)
        if config.out:
            write_csv(config.out, columns, [data])
        else:
            sys.stdout.write(','.join(columns) + '\n' + ','.join('' if data[c] is None else str(data[c])
                                                                 for c in columns) + '\n')
    else:
        _emit(config, dumps(summary))

    if summary.eavesdropper_detected:
        logger.warning('Eavesdropper detected: ITER %.6f > threshold %s', summary.empirical_iter, config.threshold)
        return EXIT_DETECTED
    return EXIT_OK


def cmd_rates(config):
    """Print the closed-form ErrorRateReport for basis files --e, --f, --g."""
    validate = not config.no_validate
    e, f, g = (load_basis(path, validate=validate) for path in (config.e, config.f, config.g))
    report = rates_report(e, f, g)
    _emit(config, dumps({'config': config.as_dict(), 'rates': report}))
    return EXIT_OK


def _dimensions(config, default_max):
    if config.n is not None:
        return [_dimension(config.n)]
    n_max = _dimension(config.n_max or default_max)
    return list(range(2, n_max + 1))


def cmd_table3(config):
    """Max-min ITER and QBER over random f and g per dimension."""
    f_samples = SearchConfig.FULL_F_SAMPLES if config.full_scale else config.f_samples
    g_samples = SearchConfig.FULL_G_SAMPLES if config.full_scale else config.g_samples
    _positive('f_samples', f_samples)
    _positive('g_samples', g_samples)
    workers = _positive('workers', config.workers)
    rows = [table3_row(n, f_samples, g_samples, seed=config.seed, workers=workers, progress=config.progress)
            for n in _dimensions(config, 6)]
    _write_table(config, 'table3', TABLE3_COLUMNS, rows)
    return EXIT_OK


def _scan_row(args):
    n, g_samples, seed, include_reference = args
    _, row = mub_scan(n, g_samples, seed, include_reference=include_reference)
    return row


def cmd_table4(config):
    """Minimum ITER over random g against the computational/Fourier pair, next to (n-1)/(2n)."""
    g_samples = SearchConfig.FULL_SCAN_SAMPLES if config.full_scale else config.g_samples
    _positive('g_samples', g_samples)
    workers = _positive('workers', config.workers)
    tasks = [(n, g_samples, config.seed, config.include_reference) for n in _dimensions(config, 8)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(_scan_row, tasks))
    else:
        rows = [_scan_row(task) for task in tasks]
    for row in rows:
        if row.violations:
            logger.warning('n=%d: %d g below the analytic minimum', row.n, len(row.violations))
    _write_table(config, 'table4', TABLE4_COLUMNS, [row.as_row() for row in rows])
    return EXIT_OK


def cmd_fig1(config):
    """Per-f minimum ITER for random f's and the (n-1)/(2n) line."""
    n = _dimension(config.n or 4)
    g_samples = _positive('g_samples', config.g_samples)
    workers = _positive('workers', config.workers)
    if config.f_count < 0:
        raise CommandError('--f-count must not be negative')
    ceiling = iter_ceiling(n)
    rows = [(f_id, value, ceiling) for f_id, value in fig1_scatter(n, config.f_count, g_samples, config.seed,
                                                                   workers=workers, progress=config.progress)]
    _write_table(config, 'fig1', FIG1_COLUMNS, rows)
    return EXIT_OK


def cmd_fig3(config):
    """ITER of random four-dimensional g's against the real N=4 pair, plus the alpha-family overlay."""
    if config.g_count < 0 or config.alpha_count < 0:
        raise CommandError('--g-count and --alpha-count must not be negative')
    _write_table(config, 'fig3', FIG3_COLUMNS, fig3_scatter(config.g_count, config.seed))
    if config.alpha_out:
        write_csv(config.alpha_out, FIG3_ALPHA_COLUMNS, fig3_alpha_overlay(config.alpha_count))
    return EXIT_OK


def cmd_export_basis(config):
    """Write a basis construction to a JSON basis file."""
    kind = config.kind
    n = _dimension(config.n)
    if kind == 'computational':
        basis = computational_basis(n)
    elif kind == 'fourier':
        basis = fourier_mub_basis(n)
    elif kind == 'hadamard-f':
        if n != 4:
            raise CommandError('hadamard-f needs --n 4')
        basis = hadamard_mub_4().f
    elif kind == 'haar':
        basis = random_haar_basis(n, generator(config.seed, BASIS_KEY, 2))
    elif kind.startswith('rotation:'):
        if n != 2:
            raise CommandError('rotation:<phi> needs --n 2')
        basis = rotation_basis_2d(parse_angle(kind[len('rotation:'):]))
    elif kind.startswith('alpha:'):
        if n != 4:
            raise CommandError('alpha:<x> needs --n 4')
        basis = interpolated_g_basis(hadamard_mub_4(), parse_angle(kind[len('alpha:'):]))
    else:
        raise CommandError('Unknown basis kind {!r}'.format(kind))

    if config.label:
        basis = basis.relabel(config.label)
    if config.out:
        dump_basis(basis, config.out)
    else:
        sys.stdout.write(dumps(basis_to_dict(basis)))
    return EXIT_OK


def create_parser():
    """Return the argparse parser with one subparser per command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=0, help='64-bit seed for every random draw.')
    common.add_argument('--workers', type=int, default=1, help='Worker processes. Never changes the output.')
    common.add_argument('--format', choices=['json', 'csv'], default=None, help='Output format.')
    common.add_argument('--out', type=str, default=None, help='Output file.')
    common.add_argument('--verbosity', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], default='WARNING',
                        help='Logging level on stderr.')

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument('--full-scale', action='store_true', help='Use the full-size sample budgets (hours).')
    search.add_argument('--progress', action='store_true', help='Show a progress bar on stderr.')

    P = argparse.ArgumentParser('mubqkd', description='High error-rate QKD with two mutually unbiased bases')
    P.add_argument('--version', action='version', version='%(prog)s ' + version)
    sub = P.add_subparsers(dest='subcommand', metavar='subcommand')
    sub.required = True

    p = sub.add_parser('simulate', parents=[common], help='Monte Carlo run of the protocol.')
    p.add_argument('--n', type=int, default=4, help='Dimension of the photon states.')
    p.add_argument('--rounds', type=int, default=100000, help='Number of photons sent.')
    p.add_argument('--mub', action='store_true', help='Use the computational/Fourier mutually unbiased pair.')
    p.add_argument('--hadamard', action='store_true', help='Use the real N=4 mutually unbiased pair.')
    p.add_argument('--phi', type=str, default=None, help='N=2 pair with f rotated by this angle.')
    p.add_argument('--evan', type=str, default='none', help='e, f, alpha:<x>, phi:<x>, haar, file:<path> or none.')
    p.add_argument('--no-evan', action='store_true', help='Same as --evan none.')
    p.add_argument('--threshold', type=float, default=None, help='Exit 3 when the ITER exceeds this value.')
    p.add_argument('--records', type=str, default=None, help='Write every round as NDJSON to this file.')
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser('rates', parents=[common], help='Closed-form error rates for three basis files.')
    p.add_argument('--e', type=str, required=True, help='Basis file encoding "0".')
    p.add_argument('--f', type=str, required=True, help='Basis file encoding "1".')
    p.add_argument('--g', type=str, required=True, help="Evan's basis file.")
    p.add_argument('--no-validate', action='store_true', help='Accept bases that are not orthonormal.')
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser('table3', parents=[common, search], help='Max-min ITER and QBER over random f and g.')
    p.add_argument('--n', type=int, default=None, help='Single dimension instead of 2..--n-max.')
    p.add_argument('--n-max', type=int, default=6)
    p.add_argument('--f-samples', type=int, default=SearchConfig.DEFAULT_F_SAMPLES)
    p.add_argument('--g-samples', type=int, default=SearchConfig.DEFAULT_G_SAMPLES)
    p.set_defaults(func=cmd_table3)

    p = sub.add_parser('table4', parents=[common, search], help='Minimum ITER for the mutually unbiased pair.')
    p.add_argument('--n', type=int, default=None, help='Single dimension instead of 2..--n-max.')
    p.add_argument('--n-max', type=int, default=8)
    p.add_argument('--g-samples', type=int, default=SearchConfig.DEFAULT_SCAN_SAMPLES)
    p.add_argument('--include-reference', action='store_true', help='Also evaluate g = e.')
    p.set_defaults(func=cmd_table4)

    p = sub.add_parser('fig1', parents=[common, search], help='Per-f minimum ITER scatter.')
    p.add_argument('--n', type=int, default=4)
    p.add_argument('--f-count', type=int, default=SearchConfig.FIG1_F_COUNT)
    p.add_argument('--g-samples', type=int, default=SearchConfig.DEFAULT_G_SAMPLES)
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser('fig3', parents=[common], help='ITER of random four-dimensional g.')
    p.add_argument('--g-count', type=int, default=SearchConfig.FIG3_G_COUNT)
    p.add_argument('--alpha-count', type=int, default=100)
    p.add_argument('--alpha-out', type=str, default=None, help='Also write the alpha-family overlay here.')
    p.set_defaults(func=cmd_fig3)

    p = sub.add_parser('export-basis', parents=[common], help='Write a basis construction to a JSON file.')
    p.add_argument('kind', type=str,
                   help='computational, fourier, hadamard-f, haar, rotation:<phi> or alpha:<x>.')
    p.add_argument('--n', type=int, default=2)
    p.add_argument('--label', choices=['E', 'F', 'G'], default=None)
    p.set_defaults(func=cmd_export_basis)
    return P


def main(argv=None):
    """Run the command line and return the exit code."""
    P = create_parser()
    try:
        args = P.parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else EXIT_USAGE

    logging.basicConfig(level=getattr(logging, args.verbosity), format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger('mubqkd').setLevel(getattr(logging, args.verbosity))
    config = RunConfig(args)
    try:
        return args.func(config)
    except CommandError as err:
        sys.stderr.write('mubqkd {}: {}\n'.format(config.subcommand, err))
        return err.exit_code
    except (BasisError, FormatError, ProtocolError, ValueError) as err:
        sys.stderr.write('mubqkd {}: {}\n'.format(config.subcommand, err))
        return EXIT_USAGE
    except OSError as err:
        sys.stderr.write('mubqkd {}: {}\n'.format(config.subcommand, err))
        return EXIT_IO
