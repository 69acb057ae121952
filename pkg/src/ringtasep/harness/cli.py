"""
Command-line front end.

Every subcommand writes a CSV file (``--out``, standard output by default).
Flags may also be given in a ``key=value`` file passed with ``--config``;
flags on the command line win over the file.

Exit codes: 0 on success, 1 when a tolerance check fails or a numerical
routine gives up, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from ..errors import GridMismatch, RingTasepError
from ..finite_time import one_point_flat, one_point_step
from ..limit_dist import F1, F2, GAUSSIAN_SCALE, TruncationSpec, reference_curve
from ..quadrature import QuadratureSpec
from ..ring_bethe import SystemShape, root_defects, solve_bethe_roots
from ..tasep_sim import THREADS_ENV, SimConfig, ensemble_cdf, simulate_ensemble
from .compare import compare_files
from .csvio import write_csv
from .sweep import converge_sweep

__all__ = ['main', 'build_parser', 'read_config', 'EXIT_OK', 'EXIT_FAIL',
           'EXIT_USAGE']

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def read_config(path) -> dict:
    """
    Parse a ``key=value`` file.  Blank lines and ``#`` comments are skipped;
    dashes in keys are read as underscores.
    """
    out = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise UsageError(f'cannot read config {path}: {exc}') from None
    with fh:
        for n, line in enumerate(fh, 1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise UsageError(f'{path}:{n}: expected key=value, got {line!r}')
            key, value = (s.strip() for s in line.split('=', 1))
            out[key.replace('-', '_')] = value
    return out


def _grid(lo, hi, step):
    if step <= 0:
        raise UsageError('step must be positive')
    if hi < lo:
        raise UsageError('grid maximum is below its minimum')
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(n), 12)


def _shape(L, N):
    try:
        return SystemShape(L, N)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _quad(args, default_nodes=128):
    nodes = args.quad_nodes if args.quad_nodes is not None else default_nodes
    try:
        if args.radius is None:
            return QuadratureSpec(nodes=nodes)
        return QuadratureSpec(nodes=nodes, radius=args.radius)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ===========
# subcommands
# ===========

def cmd_roots(args):
    shape = _shape(args.big_l, args.big_n)
    roots = solve_bethe_roots(shape, args.zhat)
    defects = root_defects(roots)
    sides = ['left'] * roots.left.size + ['right'] * roots.right.size
    branch = np.concatenate([roots.left_index, roots.right_index])
    rows = [(sides[i], int(branch[i]), w.real, w.imag, defects[i])
            for i, w in enumerate(roots.all)]
    write_csv(args.out, ['side', 'branch', 're', 'im', 'residual'], rows)
    return EXIT_OK


def cmd_finite_cdf(args):
    shape = _shape(args.big_l, args.big_n)
    if not 1 <= args.k <= shape.N:
        raise UsageError(f'--k must lie in 1..{shape.N}')
    a = list(range(args.a_min, args.a_max + 1))
    if not a:
        raise UsageError('empty threshold range')
    quad = _quad(args)
    # overflow in hopeless tails is reported below as a warning
    with np.errstate(all='ignore'):
        if args.ic == 'flat':
            if shape.L % shape.N:
                raise UsageError('flat start needs L divisible by N')
            res = one_point_flat(shape.L // shape.N, shape.N, args.k, a, args.t,
                                 quad, auto_radius=args.radius is None)
        else:
            res = one_point_step(shape.L, shape.N, args.k, a, args.t, quad,
                                 auto_radius=args.radius is None)
    rows = [(ai, r.value, r.imag_residue) for ai, r in zip(a, res)]
    write_csv(args.out, ['a', 'prob', 'imag_residue'], rows)
    noisy = sum(not r.noise_floor <= 1e-9 for r in res)
    if noisy:
        print(f'warning: {noisy} thresholds sit in the cancellation-limited '
              'tail (rounding floor above 1e-9 or out of floating-point range)',
              file=sys.stderr)
    ok = all(r.imag_residue <= args.imag_tol for r in res)
    return EXIT_OK if ok else EXIT_FAIL


def _reference(kind, family, x, tau, gamma):
    """Reference curve laid on the same ``x`` grid as the limit law."""
    scale = tau ** (1.0 / 3.0)
    if kind == 'goe':
        return reference_curve('goe', x / scale)
    if kind in ('gue', 'gue2'):
        shift = gamma ** 2 / (4.0 * tau) if family == 'f2' else 0.0
        return reference_curve(kind, (x + shift) / scale)
    return reference_curve('gaussian', (x + tau) / (GAUSSIAN_SCALE * tau ** 0.5))


def cmd_limit_cdf(args):
    if not args.tau > 0:
        raise UsageError('--tau must be positive')
    if not 0.0 < args.radius < 1.0:
        raise UsageError('--radius must lie in (0, 1) for the limit laws')
    x = _grid(args.x_min, args.x_max, args.x_step)
    quad = _quad(args)
    trunc = TruncationSpec(start=args.node_count)
    if args.family == 'f1':
        curve = F1(x, args.tau, quad, trunc)
    else:
        curve = F2(x, args.tau, args.gamma, quad, trunc)
    header = ['x', 'value', 'imag_residue', 'm_used', 'M_used']
    rows = list(curve.rows())
    if args.emit_reference:
        ref = _reference(args.emit_reference, args.family, x, args.tau, args.gamma)
        header.append(args.emit_reference)
        rows = [r + (float(v),) for r, v in zip(rows, ref)]
    write_csv(args.out, header, rows)
    noisy = ~curve.reliable
    if noisy.any():
        print(f'warning: {int(noisy.sum())} grid points sit in the '
              'cancellation-limited tail (rounding floor above 1e-9)',
              file=sys.stderr)
    return EXIT_OK if curve.imag_residue.max() <= args.imag_tol else EXIT_FAIL


def _observable(spec):
    kind, _, arg = spec.partition(':')
    if kind not in ('tagged', 'current'):
        raise UsageError(f'bad observable {spec!r}; use tagged:K or current:M')
    try:
        int(arg)
    except ValueError:
        raise UsageError(f'bad observable {spec!r}') from None
    return spec


def cmd_simulate(args):
    shape = _shape(args.big_l, args.big_n)
    obs = _observable(args.observable)
    if args.samples < 100:
        raise UsageError('--samples must be at least 100')
    if args.ic == 'flat' and shape.L % shape.N:
        raise UsageError('flat start needs L divisible by N')
    cfg = SimConfig(seed=args.seed, samples=args.samples, threads=args.threads)
    result = simulate_ensemble(args.ic, shape, args.t, cfg)
    try:
        values = result.observable(obs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.a_min is not None and args.a_max is not None:
        thr = np.arange(args.a_min, args.a_max + 1)
    else:
        thr = np.arange(values.min(), values.max() + 2)
    table = ensemble_cdf(values, thr)
    write_csv(args.out, ['threshold', 'empirical_prob', 'ci_low', 'ci_high',
                         'samples'], table.rows())
    return EXIT_OK


def cmd_compare(args):
    report = compare_files(args.curve_a, args.curve_b, args.threshold)
    write_csv(args.out, ['ks_statistic', 'sup_pointwise', 'n_points',
                         'threshold', 'verdict'], [report.row()])
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_sweep(args):
    try:
        Ls = [int(v) for v in args.l_values.split(',') if v.strip()]
    except ValueError:
        raise UsageError('--l-values must be a comma-separated list of integers') from None
    if not Ls:
        raise UsageError('--l-values is empty')
    x = _grid(args.x_min, args.x_max, args.x_step)
    family = 'flat' if args.family in ('flat', 'f1') else 'step'
    quad = _quad(args, default_nodes=16)
    try:
        rows = converge_sweep(family, Ls, args.tau, x, args.gamma, args.k,
                              args.d, args.rho, quad,
                              auto_radius=args.radius is None)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_csv(args.out, ['L', 'sup_distance', 'decreasing', 'cancellation'],
              [(r.L, r.sup_distance, r.decreasing, r.cancellation) for r in rows])
    return EXIT_OK if all(r.decreasing for r in rows) else EXIT_FAIL


# ======
# parser
# ======

def _complex(text):
    try:
        return complex(text.replace(' ', ''))
    except ValueError:
        raise argparse.ArgumentTypeError(f'not a complex number: {text!r}') from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='key=value file with default flag values')
    common.add_argument('--out', help='output CSV path (default: standard output)')
    common.add_argument('--threads', type=int, default=None,
                        help=f'worker threads (default: ${THREADS_ENV}, '
                             'then all available)')

    p = argparse.ArgumentParser(
        prog='ringtasep',
        description='Exact and limiting one-point laws of the TASEP on a ring.')
    sub = p.add_subparsers(dest='command', metavar='command')
    sub.required = True

    s = sub.add_parser('roots', parents=[common],
                       help='roots of the Bethe equation for one spectral parameter')
    s.add_argument('--big-l', type=int, required=True, help='ring size L')
    s.add_argument('--big-n', type=int, required=True, help='particle number N')
    s.add_argument('--zhat', type=_complex, required=True,
                   help='normalized spectral parameter, e.g. 0.3+0.2j')
    s.set_defaults(func=cmd_roots)

    s = sub.add_parser('finite-cdf', parents=[common],
                       help='exact P(x_k(t) >= a) for flat or step starts')
    s.add_argument('--ic', choices=['flat', 'step'], required=True)
    s.add_argument('--big-l', type=int, required=True, help='ring size L')
    s.add_argument('--big-n', type=int, required=True, help='particle number N')
    s.add_argument('--k', type=int, default=1, help='tagged particle (default 1)')
    s.add_argument('--t', type=float, required=True, help='time')
    s.add_argument('--a-min', type=int, required=True, help='smallest threshold')
    s.add_argument('--a-max', type=int, required=True, help='largest threshold')
    s.add_argument('--quad-nodes', type=int, default=None,
                   help='starting number of contour nodes (default 128)')
    s.add_argument('--radius', type=float, default=None,
                   help='fixed contour radius in (0, 1) (default: chosen per '
                        'threshold)')
    s.add_argument('--imag-tol', type=float, default=1e-8,
                   help='largest imaginary residue accepted (default 1e-8)')
    s.set_defaults(func=cmd_finite_cdf)

    s = sub.add_parser('limit-cdf', parents=[common],
                       help='crossover distributions F1(x; tau) or F2(x; tau, gamma)')
    s.add_argument('--family', choices=['f1', 'f2'], required=True)
    s.add_argument('--tau', type=float, required=True, help='rescaled time')
    s.add_argument('--gamma', type=float, default=0.0, help='shock phase (f2)')
    s.add_argument('--x-min', type=float, default=-4.0)
    s.add_argument('--x-max', type=float, default=6.0)
    s.add_argument('--x-step', type=float, default=0.1)
    s.add_argument('--quad-nodes', type=int, default=None,
                   help='starting number of contour nodes (default 128)')
    s.add_argument('--radius', type=float, default=0.5,
                   help='contour radius in (0, 1) (default 0.5)')
    s.add_argument('--node-count', type=int, default=12,
                   help='starting half-count m of the kernel node set (default 12)')
    s.add_argument('--emit-reference', choices=['goe', 'gue', 'gue2', 'gaussian'],
                   help='append a reference column on the same grid: '
                        'goe is F_GOE(2^(2/3) x / tau^(1/3)); gue and gue2 are '
                        'F_GUE and its square at (x + gamma^2/(4 tau)) / tau^(1/3); '
                        'gaussian is Phi((x + tau) / (pi^(1/4) 2^(-1/2) tau^(1/2)))')
    s.add_argument('--imag-tol', type=float, default=1e-8,
                   help='largest imaginary residue accepted (default 1e-8)')
    s.set_defaults(func=cmd_limit_cdf)

    s = sub.add_parser('simulate', parents=[common],
                       help='Monte Carlo estimate of P(observable >= threshold)')
    s.add_argument('--ic', choices=['flat', 'step'], required=True)
    s.add_argument('--big-l', type=int, required=True, help='ring size L')
    s.add_argument('--big-n', type=int, required=True, help='particle number N')
    s.add_argument('--t', type=float, required=True, help='time')
    s.add_argument('--observable', default='tagged:1',
                   help='tagged:K (position of particle K) or current:M '
                        '(jumps across bond M, M+1)')
    s.add_argument('--samples', type=int, default=10_000)
    s.add_argument('--seed', type=int, default=0)
    s.add_argument('--a-min', type=int, default=None,
                   help='smallest threshold (default: observed minimum)')
    s.add_argument('--a-max', type=int, default=None,
                   help='largest threshold (default: observed maximum + 1)')
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser('compare', parents=[common],
                       help='sup distance between two curves on a common grid')
    s.add_argument('curve_a', help='first CSV (grid column, value column, ...)')
    s.add_argument('curve_b', help='second CSV')
    s.add_argument('--threshold', type=float, default=0.02,
                   help='largest accepted distance (default 0.02)')
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser('sweep', parents=[common],
                       help='distance of the scaled exact law to F1/F2 as L grows')
    s.add_argument('--family', choices=['flat', 'step', 'f1', 'f2'], required=True)
    s.add_argument('--l-values', default='100,1000',
                   help='comma-separated ring sizes (default 100,1000)')
    s.add_argument('--tau', type=float, default=1.0)
    s.add_argument('--gamma', type=float, default=0.0, help='shock phase (step)')
    s.add_argument('--k', type=int, default=1)
    s.add_argument('--d', type=int, default=2, help='flat spacing, L = d N')
    s.add_argument('--rho', type=float, default=0.5, help='step density N/L')
    s.add_argument('--x-min', type=float, default=-3.0)
    s.add_argument('--x-max', type=float, default=3.0)
    s.add_argument('--x-step', type=float, default=0.25)
    s.add_argument('--quad-nodes', type=int, default=None,
                   help='starting number of contour nodes (default 16)')
    s.add_argument('--radius', type=float, default=None,
                   help='fixed contour radius in (0, 1) for the exact law '
                        '(default: chosen per threshold)')
    s.set_defaults(func=cmd_sweep)
    return p


def _apply_config(parser, argv, args):
    cfg = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in cfg.items():
        act = actions.get(key)
        if act is None or key in ('config', 'help'):
            raise UsageError(f'unknown config key {key!r} for {args.command}')
        if act.type is not None:
            try:
                defaults[key] = act.type(raw)
            except (ValueError, argparse.ArgumentTypeError):
                raise UsageError(f'bad value for {key}: {raw!r}') from None
        else:
            defaults[key] = raw
        if act.choices is not None and defaults[key] not in act.choices:
            raise UsageError(f'{key} must be one of {list(act.choices)}')
        # a required flag supplied by the file is no longer required
        act.required = False
    sub.set_defaults(**defaults)
    args = parser.parse_args(argv)
    missing = [a.option_strings[0] for a in sub._actions
               if a.option_strings and getattr(args, a.dest, None) is None
               and a.dest in _REQUIRED.get(args.command, ())]
    if missing:
        raise UsageError(f'missing required flags: {", ".join(missing)}')
    return args


_REQUIRED = {
    'roots': ('big_l', 'big_n', 'zhat'),
    'finite-cdf': ('ic', 'big_l', 'big_n', 't', 'a_min', 'a_max'),
    'limit-cdf': ('family', 'tau'),
    'simulate': ('ic', 'big_l', 'big_n', 't'),
    'sweep': ('family',),
}


def main(argv=None) -> int:
    """Entry point; returns the exit code."""
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        config_path = _peek_config(argv)
        if config_path is not None:
            # relax required flags so the first pass can find the command
            for sub in parser._subparsers._group_actions[0].choices.values():
                for act in sub._actions:
                    act.required = False
        args = parser.parse_args(argv)
        if args.config:
            args = _apply_config(parser, argv, args)
        if getattr(args, 'threads', None) is None and os.environ.get(THREADS_ENV):
            args.threads = int(os.environ[THREADS_ENV])
        return args.func(args)
    except UsageError as exc:
        print(f'ringtasep: error: {exc}', file=sys.stderr)
        return EXIT_USAGE
    except GridMismatch as exc:
        print(f'ringtasep: grid mismatch: {exc}', file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f'ringtasep: error: {exc}', file=sys.stderr)
        return EXIT_USAGE
    except RingTasepError as exc:
        print(f'ringtasep: {type(exc).__name__}: {exc}', file=sys.stderr)
        return EXIT_FAIL
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE


def _peek_config(argv):
    for i, tok in enumerate(argv):
        if tok == '--config' and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith('--config='):
            return tok.split('=', 1)[1]
    return None
