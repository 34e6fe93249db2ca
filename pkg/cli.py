#!/usr/bin/env python3
"""
Depol CLI Interface

Runs depolarization scenarios from a JSON config.
Reports are JSON on stdout, logging goes to stderr.

Exit codes: 0 pass, 1 invariant violation or error, 2 regime/fit warning.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from core import EXIT_VIOLATION, DepolarizationSystem, _jsonable
from modules.scenario_config import ConfigError, load_scenario

logger = logging.getLogger('depol')

Command = Callable[[DepolarizationSystem, argparse.Namespace], Tuple[Dict[str, Any], int]]


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


def emit(payload: Dict[str, Any]) -> None:
    print(json.dumps(payload, ensure_ascii=False, indent=2, default=_jsonable))


def algebra_check_command(system: DepolarizationSystem, args: argparse.Namespace):
    return system.algebra_check(args.n_max, inject_fault=args.inject_fault)


def _with_config(method: str) -> Command:
    def run(system: DepolarizationSystem, args: argparse.Namespace):
        config = load_scenario(Path(args.config))
        if args.n_max is not None and args.n_max != config.n_max:
            data = config.to_dict()
            data['n_max'] = args.n_max
            config = load_scenario(data)
        return getattr(system, method)(config)
    return run


def run_command(func: Command, args: argparse.Namespace) -> int:
    """Execute one command and print its JSON report"""
    try:
        system = DepolarizationSystem(args.output, threads=args.threads)
        report, code = func(system, args)
        emit(report)
        return code
    except ConfigError as e:
        logger.error("config error: %s", e)
        emit(e.to_dict())
        return EXIT_VIOLATION
    except Exception as e:
        logger.exception("command failed")
        emit({'error': str(e), 'type': type(e).__name__})
        return EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='depol',
        description="Quantum light depolarization simulator",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s algebra-check --n-max 4
  %(prog)s evolve -c data/scenario_default.json -o out/
  %(prog)s sphere -c data/scenario_default.json -o out/
  %(prog)s calibrate -c data/scenario_default.json
  %(prog)s micro-validate -c data/scenario_default.json
        """
    )
    parser.add_argument('--verbose', action='store_true', help='Debug logging on stderr')
    parser.add_argument('--threads', type=int, default=None,
                        help='Worker cap (default: DEPOL_THREADS or 1)')

    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    algebra = subparsers.add_parser('algebra-check', help='Check the Stokes algebra per block')
    algebra.add_argument('--n-max', type=int, default=4, help='Largest block (default: 4)')
    algebra.add_argument('--inject-fault', action='store_true',
                         help='Corrupt S3 of the largest block (negative control)')
    algebra.add_argument('-o', '--output', default=None, help='Output directory')
    algebra.set_defaults(func=algebra_check_command)

    for name, method, help_text in (
        ('evolve', 'evolve', 'Trajectory CSV and summary JSON'),
        ('sphere', 'sphere', 'Q grids and multipole JSON'),
        ('calibrate', 'calibrate', 'Fit the multipole decay exponents'),
        ('micro-validate', 'micro_validate', 'Check the effective rate on the atom model'),
    ):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument('-c', '--config', required=True, help='Scenario JSON file')
        sub.add_argument('-o', '--output', default=None, help='Output directory')
        sub.add_argument('--n-max', type=int, default=None, help='Override the scenario n_max')
        sub.set_defaults(func=_with_config(method))

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main CLI entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    if not getattr(args, 'func', None):
        parser.print_help()
        return EXIT_VIOLATION
    return run_command(args.func, args)


if __name__ == '__main__':
    sys.exit(main())
