#!/usr/bin/env python3
"""
Yield curves, crossover reports and exact verification for Bell-diagonal
entanglement purification.
Usage:
    python purify.py curve --f-min 0.5 --f-max 1.0 --step 0.01
    python purify.py crossover --f-min 0.5 --f-max 1.0
    python purify.py verify all
    python purify.py table --output table1.csv
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

import pandas as pd

from bell import BellDiagonal
from enumerator import generate_table, write_table_csv
from protocols import (
    BISECT_TOL, DEFAULT_COMPETITORS, DEFAULT_K_MAX, DEFAULT_M_RANGE, PROTOCOLS, YieldAnalyzer
)
from utils import PurificationError, describe_schedule, parse_probabilities, validate_grid
from verification import CHECKS, run_checks

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2


def _protocol_list(text: str) -> List[str]:
    names = [name.strip() for name in text.split(',') if name.strip()]
    unknown = [name for name in names if name not in PROTOCOLS]
    if unknown or not names:
        raise argparse.ArgumentTypeError(
            f"unknown protocol(s) {', '.join(unknown) or '(none given)'}; choose from {', '.join(PROTOCOLS)}"
        )
    return names


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"must not be negative, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Yield analysis for entanglement purification of Bell-diagonal states",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Werner yield curves for every protocol, as CSV
  python purify.py curve --f-min 0.25 --f-max 1.0 --step 0.001 --output curves.csv

  # One general Bell-diagonal state, as JSON
  python purify.py curve --dist 0.8,0.1,0.05,0.05 --format json

  # Where does the 4-pair protocol beat recurrence and block hashing?
  python purify.py crossover --f-min 0.5 --f-max 1.0 --audit winners.csv

  # Regenerate the reference table and closed forms
  python purify.py verify all
        """
    )
    parser.add_argument('--verbose', '-v', action='store_true', help='Log progress to stderr')
    subparsers = parser.add_subparsers(dest='command', required=True)

    def add_grid(sub, f_min=0.25, f_max=1.0, step=0.001):
        sub.add_argument('--f-min', type=float, default=f_min, help=f'Lowest Werner fidelity (default {f_min})')
        sub.add_argument('--f-max', type=float, default=f_max, help=f'Highest Werner fidelity (default {f_max})')
        sub.add_argument('--step', type=float, default=step, help=f'Grid spacing (default {step})')

    def add_analyzer(sub):
        sub.add_argument('--k-max', type=int, default=DEFAULT_K_MAX,
                         help=f'Most recurrence rounds tried (default {DEFAULT_K_MAX})')
        sub.add_argument('--m-min', type=int, default=DEFAULT_M_RANGE[0],
                         help=f'Smallest block size tried (default {DEFAULT_M_RANGE[0]})')
        sub.add_argument('--m-max', type=int, default=DEFAULT_M_RANGE[1],
                         help=f'Largest block size tried (default {DEFAULT_M_RANGE[1]})')

    def add_output(sub):
        sub.add_argument('--format', choices=['csv', 'json'], default='csv', help='Output format')
        sub.add_argument('--output', '-o', type=str, help='Write to this path instead of stdout')

    curve = subparsers.add_parser('curve', help='Yield per protocol over a fidelity grid')
    add_grid(curve)
    add_analyzer(curve)
    add_output(curve)
    curve.add_argument('--protocols', type=_protocol_list, default=list(PROTOCOLS),
                       help=f'Comma-separated subset of {",".join(PROTOCOLS)}')
    curve.add_argument('--dist', type=str, help='Evaluate one state p00,p01,p10,p11 instead of a grid')

    crossover = subparsers.add_parser('crossover', help='Intervals where the 4-pair protocol wins')
    add_grid(crossover)
    add_analyzer(crossover)
    crossover.add_argument('--format', choices=['text', 'json'], default='text', help='Report format')
    crossover.add_argument('--competitors', type=_protocol_list, default=list(DEFAULT_COMPETITORS),
                           help='Protocols the 4-pair protocol must beat (default recurrence,ms)')
    crossover.add_argument('--tol', type=float, default=BISECT_TOL,
                           help=f'Endpoint tolerance in F (default {BISECT_TOL})')
    crossover.add_argument('--audit', type=str, help='Write the per-point winner table to this CSV path')

    verify = subparsers.add_parser('verify', help='Exact checks against the reference results')
    verify.add_argument('target', choices=list(CHECKS) + ['all'], help='What to verify')
    verify.add_argument('--samples', type=_positive_int, help='Random inputs for recurrence/ms checks')
    verify.add_argument('--seed', type=_non_negative_int, default=0, help='Seed for random inputs (default 0)')

    table = subparsers.add_parser('table', help='Dump the 64 passing strings as CSV')
    table.add_argument('--output', '-o', type=str, help='Write to this path instead of stdout')

    threshold = subparsers.add_parser('threshold', help='Lowest Werner fidelity with positive yield')
    add_analyzer(threshold)
    threshold.add_argument('--protocols', type=_protocol_list, default=['hashing', 'recurrence', 'ms', 'ls'],
                           help='Comma-separated protocols')

    return parser


def _analyzer(args, tol: float = BISECT_TOL) -> YieldAnalyzer:
    return YieldAnalyzer(k_max=args.k_max, m_range=(args.m_min, args.m_max), tol=tol)


def _write(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, 'w', newline='') as f:
            f.write(text)
        print(f"✓ Wrote {output}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _frame_text(df: pd.DataFrame, fmt: str, config: Dict[str, Any]) -> str:
    if fmt == 'json':
        payload = {'config': config, 'points': df.to_dict('records')}
        return json.dumps(payload, indent=2, allow_nan=False) + '\n'
    return df.to_csv(index=False, lineterminator='\n')


def cmd_curve(args, parser) -> int:
    analyzer = _analyzer(args)
    config = {
        'f_min': args.f_min, 'f_max': args.f_max, 'step': args.step,
        'protocols': args.protocols, 'dist': None, 'werner': True,
    }
    config.update(analyzer.config())

    if args.dist:
        values, errors = parse_probabilities(args.dist)
        if errors:
            parser.error(f"--dist: {'; '.join(errors)}")
        dist = BellDiagonal.from_sequence(values)
        config['dist'] = list(dist.probabilities)
        config['werner'] = dist.is_werner()
        df = analyzer.points_frame([analyzer.evaluate_point(dist, args.protocols)], args.protocols)
    else:
        errors = validate_grid(args.f_min, args.f_max, args.step)
        if errors:
            parser.error('; '.join(errors))
        df = analyzer.curve(args.f_min, args.f_max, args.step, args.protocols)

    _write(_frame_text(df, args.format, config), args.output)
    return EXIT_OK


def cmd_crossover(args, parser) -> int:
    errors = validate_grid(args.f_min, args.f_max, args.step)
    if errors:
        parser.error('; '.join(errors))
    analyzer = _analyzer(args, tol=args.tol)
    intervals, table = analyzer.crossover_report(args.f_min, args.f_max, args.step, args.competitors)

    if args.audit:
        table.to_csv(args.audit, index=False, lineterminator='\n')
        print(f"✓ Wrote per-point winner table to {args.audit}", file=sys.stderr)

    if args.format == 'json':
        config = {'f_min': args.f_min, 'f_max': args.f_max, 'step': args.step,
                  'competitors': args.competitors}
        config.update(analyzer.config())
        payload = {
            'config': config,
            'intervals': [dict(iv, f_lo=round(iv['f_lo'], 3), f_hi=round(iv['f_hi'], 3)) for iv in intervals],
        }
        sys.stdout.write(json.dumps(payload, indent=2) + '\n')
        return EXIT_OK

    print(f"Crossover scan on [{args.f_min:.3f}, {args.f_max:.3f}] step {args.step:g} "
          f"(competitors: {', '.join(args.competitors)})")
    if not intervals:
        print("✗ No interval where ls strictly beats all competitors")
        return EXIT_OK
    for iv in intervals:
        print(f"✓ ls beats all competitors on [{iv['f_lo']:.3f}, {iv['f_hi']:.3f}]")
        if iv['f_lo'] <= args.f_min or iv['f_hi'] >= args.f_max:
            print("⚠️  interval reaches the edge of the scanned range; widen --f-min/--f-max to see where it ends")
        for side in ('lo', 'hi'):
            end = iv[side]
            print(f"   at F={end['F']:.3f}: ls {end['yield_ls']:.6f} vs {end['competitor']} "
                  f"{end['yield_competitor']:.6f} ({describe_schedule(end)})")
    return EXIT_OK


def cmd_verify(args, parser) -> int:
    targets = list(CHECKS) if args.target == 'all' else [args.target]
    reports = run_checks(targets, samples=args.samples, seed=args.seed)

    all_passed = True
    for report in reports:
        mark = '✓' if report['passed'] else '✗'
        print(f"{mark} {report['target']}: {report['summary']}")
        if not report['passed']:
            all_passed = False
            print(f"   first mismatch: {report['first_mismatch']}")
    return EXIT_OK if all_passed else EXIT_VERIFY_FAILED


def cmd_table(args, parser) -> int:
    df = generate_table()
    if args.output:
        write_table_csv(args.output, df)
        print(f"✓ Wrote {len(df)} rows to {args.output}", file=sys.stderr)
    else:
        write_table_csv(sys.stdout, df)
    return EXIT_OK


def cmd_threshold(args, parser) -> int:
    analyzer = _analyzer(args)
    for protocol in args.protocols:
        print(f"{protocol}: F = {analyzer.yield_threshold(protocol):.4f}")
    return EXIT_OK


COMMANDS = {
    'curve': cmd_curve,
    'crossover': cmd_crossover,
    'verify': cmd_verify,
    'table': cmd_table,
    'threshold': cmd_threshold,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.verbose:
        logging.basicConfig(level=logging.DEBUG, stream=sys.stderr,
                            format='%(levelname)s %(name)s: %(message)s')

    try:
        return COMMANDS[args.command](args, parser)
    except PurificationError as e:
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
