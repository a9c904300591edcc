#!/usr/bin/env python3
# PYTHON_ARGCOMPLETE_OK
"""CLI for evaluating, checking and sampling the Variance Gamma process."""

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import argcomplete
import numpy as np

from .diagnostics import DEFAULT_ALPHA, run_convergence_study
from .cache import CacheManager
from .errors import DomainError, VgError
from .model import DIVERGENT, VgParams, factor_params, vg_char, vg_density, vg_density_quadrature
from .operators import phillips_symbol, weyl_minus_symbol, weyl_plus_symbol
from .quadrature import QuadConfig
from .residuals import (EquationId, Grid2D, check_beghin_shift, check_drifted_nonlocal,
                        check_phillips_eq, check_space_ode, check_time_nonlocal)
from .sampling import Construction, RngHandle, sample
from .special_fn import Accuracy
from .utils import load_config, parse_float_list, setup_logging, write_csv, write_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_INVALID = 2
EXIT_INTERNAL = 3

DENSITY_TOLERANCE = 1e-8
SYMBOL_TOLERANCE = 1e-12


@dataclass
class RunConfig:
    """Validated command line: everything a command needs besides the config file."""
    command: str
    params: VgParams
    output_format: str
    output_path: Optional[str]
    t_values: List[float]
    x_values: List[float]
    xi_values: List[float]
    n: int
    seed: int
    stream: int
    construction: Construction
    gamma: float
    gamma_ladder: List[float]
    equation: Optional[EquationId]
    puncture: float
    alpha: float
    beghin_t: Optional[float]


def _grid(start: float, stop: float, steps: int, label: str) -> List[float]:
    if steps < 1:
        raise DomainError(f"--{label}-steps must be >= 1, got {steps}")
    if steps == 1:
        return [float(start)]
    return [float(v) for v in np.linspace(start, stop, steps)]


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Turn parsed flags into a RunConfig, raising DomainError on bad input."""
    try:
        params = VgParams(args.a, args.b, args.theta)
        t_values = parse_float_list(args.t_values) if args.t_values else [args.t if args.t is not None else 1.0]
        x_values = (parse_float_list(args.x_values) if args.x_values
                    else _grid(args.x_min, args.x_max, args.x_steps, 'x'))
        ladder = parse_float_list(args.gamma_ladder)
    except ValueError as e:
        raise DomainError(str(e))
    if args.command == 'residual' and not args.x_values:
        x_values = [x for x in x_values if abs(x) >= args.puncture and x != 0.0]
    if args.n < 0:
        raise DomainError(f"--n must be >= 0, got {args.n}")
    if args.command == 'converge' and args.n < 1:
        raise DomainError("--n must be >= 1 for a convergence study")
    if not 0 < args.alpha < 1:
        raise DomainError(f"--alpha must lie in (0, 1), got {args.alpha}")
    if any(not (math.isfinite(t) and t > 0) for t in t_values):
        raise DomainError(f"times must be positive, got {t_values}")
    return RunConfig(
        command=args.command,
        params=params,
        output_format=args.format,
        output_path=args.out,
        t_values=t_values,
        x_values=x_values,
        xi_values=_grid(args.xi_min, args.xi_max, args.xi_steps, 'xi'),
        n=args.n,
        seed=args.seed,
        stream=args.stream,
        construction=Construction(args.construction),
        gamma=args.gamma,
        gamma_ladder=ladder,
        equation=EquationId(args.equation) if args.equation else None,
        puncture=args.puncture,
        alpha=args.alpha,
        beghin_t=args.t if args.t is not None else max(t_values),
    )


def _params_meta(run: RunConfig) -> Dict[str, Any]:
    return {'a': run.params.a, 'b': run.params.b, 'theta': run.params.theta}


def _density_cell(value):
    return 'divergent' if value is DIVERGENT else value


def cmd_density(run: RunConfig, config: Dict[str, Any]):
    """Closed form against quadrature on the (t, x) grid; quadrature only when θ ≠ 0."""
    q = QuadConfig.from_config(config)
    accuracy = Accuracy.from_config(config)
    drifted = run.params.drifted
    columns = ['t', 'x', 'p_quadrature'] if drifted else ['t', 'x', 'p_closed_form', 'p_quadrature', 'abs_diff']
    rows, worst = [], 0.0
    for t in run.t_values:
        for x in run.x_values:
            quad = vg_density_quadrature(run.params, t, x, q)
            row = {'t': t, 'x': x, 'p_quadrature': _density_cell(quad)}
            if not drifted:
                closed = vg_density(run.params, t, x, accuracy)
                row['p_closed_form'] = _density_cell(closed)
                if closed is DIVERGENT or quad is DIVERGENT:
                    diff = 0.0 if closed is quad else math.inf
                else:
                    diff = abs(closed - quad)
                row['abs_diff'] = diff
                worst = max(worst, diff)
            rows.append(row)
    meta = dict(_params_meta(run), command='density', max_abs_diff=worst)
    code = EXIT_OK if drifted or worst <= DENSITY_TOLERANCE else EXIT_TOLERANCE
    return meta, columns, rows, code


def cmd_charfn(run: RunConfig, config: Dict[str, Any]):
    """vg_char with the Phillips symbol and the Weyl symbol sum on a ξ grid."""
    t = run.t_values[0]
    pair = factor_params(run.params)
    clock = run.params.subordinator
    drifted = run.params.drifted
    columns = ['xi', 're', 'im', 'phillips_symbol', 'weyl_symbol_sum']
    if drifted:
        columns.append('weyl_symbol_sum_im')
    rows, worst = [], 0.0
    for xi in run.xi_values:
        value = vg_char(run.params, t, xi)
        weyl = weyl_plus_symbol(pair.gain, xi) + weyl_minus_symbol(pair.loss, xi)
        phillips = phillips_symbol(clock, xi)
        # + 0.0 turns -0.0 into 0.0
        row = {'xi': xi, 're': value.real + 0.0, 'im': value.imag + 0.0,
               'phillips_symbol': phillips + 0.0, 'weyl_symbol_sum': weyl.real + 0.0}
        if drifted:
            row['weyl_symbol_sum_im'] = weyl.imag + 0.0
        else:
            worst = max(worst, abs(weyl.real + phillips))
        rows.append(row)
    meta = dict(_params_meta(run), command='charfn', t=t)
    code = EXIT_OK if worst <= SYMBOL_TOLERANCE else EXIT_TOLERANCE
    return meta, columns, rows, code


def cmd_residual(run: RunConfig, config: Dict[str, Any]):
    """One equation check; exit 0 iff max_rel is within the equation's tolerance."""
    if run.equation is None:
        raise DomainError("--equation is required for the residual command")
    q = QuadConfig.from_config(config)
    if run.equation is EquationId.BEGHIN_SHIFT:
        report = check_beghin_shift(run.params, run.beghin_t, run.x_values)
    else:
        grid = Grid2D(tuple(run.t_values), tuple(run.x_values), run.puncture)
        checks = {
            EquationId.TIME_NONLOCAL: lambda: check_time_nonlocal(run.params, grid, q),
            EquationId.DRIFTED_NONLOCAL: lambda: check_drifted_nonlocal(run.params, grid, q),
            EquationId.SPACE_ODE: lambda: check_space_ode(run.params, grid),
            EquationId.PHILLIPS: lambda: check_phillips_eq(run.params, grid, q),
        }
        report = checks[run.equation]()
    summary = report.summary()
    logger.info("%s: max_abs=%.3g max_rel=%.3g tolerance=%g passed=%s", summary['equation'],
                summary['max_abs'], summary['max_rel'], summary['tolerance'], summary['passed'])
    meta = dict(_params_meta(run), command='residual', **summary)
    meta.update({f"quad_{k}": v for k, v in report.tolerances_used.items()})
    columns = ['t', 'x', 'lhs', 'rhs', 'abs_residual', 'rel_residual', 'failure']
    code = EXIT_OK if report.passed else EXIT_TOLERANCE
    return meta, columns, report.to_rows(), code


def cmd_sample(run: RunConfig, config: Dict[str, Any]):
    """Sampled terminal values with their provenance."""
    gamma = run.gamma if run.construction is Construction.COMPOUND_POISSON else None
    output = sample(run.construction, run.params, run.t_values[0], run.n,
                    RngHandle(run.seed, run.stream), gamma)
    meta = dict(output.metadata(), command='sample')
    rows = [{'value': float(v)} for v in output.values]
    return meta, ['value'], rows, EXIT_OK


def cmd_converge(run: RunConfig, config: Dict[str, Any]):
    """KS distance of compound Poisson samples to the VG law at t/2 along the γ ladder."""
    q = QuadConfig.from_config(config)
    points = int(config.get('diagnostics', {}).get('cdf_grid_points', 4097))
    study = run_convergence_study(run.params, run.t_values[0], run.gamma_ladder, run.n,
                                  RngHandle(run.seed, run.stream), run.alpha, q, points,
                                  CacheManager.from_config(config))
    meta = dict(_params_meta(run), command='converge', t=study.t, target_time=0.5 * study.t,
                n=study.n, seed=run.seed, stream=run.stream, alpha=run.alpha,
                monotone_within_noise=study.is_monotone_within_noise())
    columns = ['gamma', 'rate', 'ks_statistic', 'threshold', 'pass']
    code = EXIT_OK if study.final_pass else EXIT_TOLERANCE
    return meta, columns, study.to_rows(), code


COMMANDS = {
    'density': cmd_density,
    'charfn': cmd_charfn,
    'residual': cmd_residual,
    'sample': cmd_sample,
    'converge': cmd_converge,
}


def _emit(run: RunConfig, meta, columns, rows) -> None:
    stream = open(run.output_path, 'w') if run.output_path else sys.stdout
    try:
        if run.output_format == 'json':
            if run.command == 'sample':
                data: Any = [row['value'] for row in rows]
            else:
                data = [{c: row.get(c) for c in columns} for row in rows]
            write_json(stream, meta, data)
        else:
            write_csv(stream, meta, columns, rows)
    finally:
        if stream is not sys.stdout:
            stream.close()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--a', type=float, default=1.0, help='Shape rate a > 0')
    common.add_argument('--b', type=float, default=1.0, help='Scale b > 0')
    common.add_argument('--theta', type=float, default=0.0, help='Drift θ')
    common.add_argument('--t', type=float, default=None, help='Time (default 1)')
    common.add_argument('--t-values', help='Comma-separated times, overrides --t')
    common.add_argument('--x-min', type=float, default=-2.0)
    common.add_argument('--x-max', type=float, default=2.0)
    common.add_argument('--x-steps', type=int, default=9)
    common.add_argument('--x-values', help='Comma-separated points, overrides the x range')
    common.add_argument('--xi-min', type=float, default=-5.0)
    common.add_argument('--xi-max', type=float, default=5.0)
    common.add_argument('--xi-steps', type=int, default=11)
    common.add_argument('--n', type=int, default=1000, help='Sample size')
    common.add_argument('--seed', type=int, default=42)
    common.add_argument('--stream', type=int, default=0, help='RNG stream index')
    common.add_argument('--construction', choices=[c.value for c in Construction],
                        default=Construction.TIME_CHANGE.value)
    common.add_argument('--gamma', type=float, default=0.01,
                        help='Jump truncation for the compound_poisson construction')
    common.add_argument('--gamma-ladder', default='0.5,0.1,0.02,0.004')
    common.add_argument('--equation', choices=[e.value for e in EquationId])
    common.add_argument('--puncture', type=float, default=0.05,
                        help='Half-width of the excluded zone around x = 0')
    common.add_argument('--alpha', type=float, default=DEFAULT_ALPHA, help='KS significance level')
    common.add_argument('--format', choices=['csv', 'json'], default='csv')
    common.add_argument('--out', help='Output file (default: standard output)')
    common.add_argument('--config', help='Path to config file')
    common.add_argument('--quiet', action='store_true', help='Only log warnings and errors')

    parser = argparse.ArgumentParser(
        description='Variance Gamma densities, equation checks and samplers')
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('density', parents=[common], help='Closed-form vs quadrature density')
    sub.add_parser('charfn', parents=[common], help='Characteristic function and symbols')
    sub.add_parser('residual', parents=[common], help='Residuals of one equation on a grid')
    sub.add_parser('sample', parents=[common], help='Draw VG variates')
    sub.add_parser('converge', parents=[common], help='Compound Poisson convergence study')
    return parser


def _fail(error: Exception, code: int) -> int:
    sys.stderr.write(json.dumps({'error': type(error).__name__, 'message': str(error),
                                 'exit_code': code}) + '\n')
    return code


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    argcomplete.autocomplete(parser)
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        setup_logging(config, silent=args.quiet)
        run = build_run_config(args)
        meta, columns, rows, code = COMMANDS[run.command](run, config)
        _emit(run, meta, columns, rows)
    except VgError as e:
        logger.debug("%s failed", args.command, exc_info=True)
        return _fail(e, e.exit_code)
    except (ValueError, OSError) as e:
        return _fail(e, EXIT_INVALID)
    return code


if __name__ == '__main__':
    sys.exit(main())
