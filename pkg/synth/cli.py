#!/usr/bin/env python3
"""
LTL Synth - CLI Entry Point

Reads an LTL specification (or, with --algo=lar, a deterministic automaton
in HOA), decides realizability and prints REALIZABLE or UNREALIZABLE on the
first line of stdout, followed by an AIGER circuit when realizable.
"""

import argparse
import csv
import os
import sys
from typing import List, Optional

from . import __version__
from . import config as cfg
from .errors import BudgetExceeded, InternalError, SynthError, UsageError
from .ltl import SignalPartition, parse_ltl

# ── ANSI Colors ──────────────────────────────────────────────────────────────

class C:
    """ANSI color codes for terminal output."""
    RESET   = '\033[0m'
    BOLD    = '\033[1m'
    DIM     = '\033[2m'
    RED     = '\033[31m'
    GREEN   = '\033[32m'
    YELLOW  = '\033[33m'

    @staticmethod
    def disable():
        for attr in dir(C):
            if attr.isupper() and not attr.startswith('_'):
                setattr(C, attr, '')


# Disable colors if not a terminal
if not sys.stdout.isatty():
    C.disable()


def _error(message: str):
    print(f'{C.RED}Error:{C.RESET} {message}', file=sys.stderr)


# ── Input ────────────────────────────────────────────────────────────────────

def _read_text(path: str) -> str:
    if path == '-':
        return sys.stdin.read()
    try:
        with open(path) as f:
            return f.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}")


def _formulas(args) -> List[str]:
    """Formulas from -f and -F; file lines starting with '#' are comments."""
    out = list(args.formula or [])
    for path in args.formula_file or []:
        for line in _read_text(path).splitlines():
            line = line.strip()
            if line and not line.startswith('#'):
                out.append(line)
    return out


def _dontcare(args) -> int:
    if args.aiger == 'dontcare1':
        return 1
    if args.dontcare is not None:
        return args.dontcare
    return cfg.DONTCARE_DEFAULT


def _pipeline_config(args):
    from .pipeline import PipelineConfig
    return PipelineConfig(
        algo=args.algo,
        realizability=args.realizability,
        decompose=args.decompose == 'yes',
        bypass=args.bypass == 'yes',
        simplify=args.simplify,
        verify=args.verify,
        dontcare=_dontcare(args),
        hoa_input=args.hoa_input,
        debug_arena=args.debug_arena,
        game_hoa=args.print_game_hoa,
        workers=args.workers,
        sat_solver=args.sat_solver,
    )


# ── Output ───────────────────────────────────────────────────────────────────

def _emit(report, out):
    from .aiger import print_aag
    color = C.GREEN if report.realizable else C.YELLOW
    if out is sys.stdout:
        print(f'{color}{report.verdict}{C.RESET}', file=out)
    else:
        print(report.verdict, file=out)
    if report.circuit is not None:
        out.write(print_aag(report.circuit))


def _append_csv(path: str, report):
    from .pipeline import CSV_HEADER
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, 'a', newline='') as f:
        writer = csv.writer(f)
        if fresh:
            writer.writerow(CSV_HEADER)
        writer.writerow(report.csv_row())


def _exit_code_for(error: SynthError) -> int:
    """Budget and SAT backend failures are resource problems; bad input is a usage error."""
    from .sat import SatError
    if isinstance(error, (BudgetExceeded, SatError)):
        return cfg.EXIT_BUDGET
    if isinstance(error, InternalError):
        return cfg.EXIT_INTERNAL
    return cfg.EXIT_USAGE


def _synthesize(args) -> int:
    from .pipeline import run, run_hoa

    config = _pipeline_config(args)
    config.validate()
    partition = None
    if args.ins is not None or args.outs is not None:
        partition = SignalPartition.from_strings(args.ins or '', args.outs or '')

    out = sys.stdout
    if args.output and args.output != '-':
        out = open(args.output, 'w')
    try:
        if config.algo == 'lar':
            if _formulas(args):
                raise UsageError('--algo=lar reads --hoa-input, not formulas')
            report = run_hoa(config, _read_text(config.hoa_input), partition)
            _emit(report, out)
            if args.csv:
                _append_csv(args.csv, report)
            return report.exit_code

        formulas = _formulas(args)
        if not formulas:
            raise UsageError('no specification given (use -f or -F)')
        if partition is None:
            raise UsageError('--ins and --outs are required for LTL input')
        code = cfg.EXIT_REALIZABLE
        for text in formulas:
            report = run(config, parse_ltl(text), partition)
            _emit(report, out)
            if args.csv:
                _append_csv(args.csv, report)
            code = max(code, report.exit_code)
        return code
    finally:
        if out is not sys.stdout:
            out.close()


# ── Parser ───────────────────────────────────────────────────────────────────

class _Parser(argparse.ArgumentParser):
    """Argument errors are usage errors (exit 1); argparse's own 2 is the budget code here."""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    """Build the CLI argument parser."""
    parser = _Parser(
        prog='ltl-synth',
        description='LTL Synth - reactive synthesis from LTL to AIGER',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f'''{C.DIM}Examples:
  ltl-synth --ins=i --outs=o -f 'G(i -> F o)'          Synthesize a controller
  ltl-synth --ins=i --outs=o -f 'G(o <-> X i)' --realizability
  ltl-synth --algo=sd --verify -F specs.ltl              One verdict per line of specs.ltl
  ltl-synth --algo=lar --hoa-input=game.hoa              Start from a deterministic automaton

Exit codes:
  0   realizable (every formula)
  20  unrealizable (some formula)
  1   usage or syntax error
  2   state/color/size budget exceeded
  3   internal self-check failed

Environment:
  SYNTH_DETERMINIZE_BUDGET  Macro-state budget for determinization (default: 1048576)
  SYNTH_COLOR_BUDGET        Color budget for paritization (default: 16)
  SYNTH_VERIFY_BUDGET       Product-state budget for --verify (default: 65536)
  SYNTH_SAT_SOLVER          pycosat, external or dpll (default: first available)
  SYNTH_SAT_CMD             External DIMACS solver command
  SYNTH_WORKERS             Worker threads for decomposed components (default: 1)
  SYNTH_LOG_FILE            Debug log file{C.RESET}'''
    )

    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--no-color', action='store_true',
                        help='Disable colored output')
    parser.add_argument('-v', '--verbose', action='store_true',
                        help='Debug logging on stderr')
    parser.add_argument('--log-file', default=None,
                        help='Also write the debug log to this file')

    spec = parser.add_argument_group('specification')
    spec.add_argument('--ins', default=None,
                      help='Comma-separated input propositions')
    spec.add_argument('--outs', default=None,
                      help='Comma-separated output propositions')
    spec.add_argument('-f', '--formula', action='append',
                      help='LTL formula (repeatable)')
    spec.add_argument('-F', '--formula-file', action='append',
                      help="File with one formula per line ('-' for stdin)")
    spec.add_argument('--hoa-input', default=None,
                      help='Deterministic Emerson-Lei automaton in HOA (with --algo=lar)')

    synth = parser.add_argument_group('synthesis')
    synth.add_argument('--algo', choices=['ds', 'sd', 'lar'], default='ds',
                       help='Game construction: determinize-then-split, split-then-determinize, '
                            'or paritize an automaton (default: ds)')
    synth.add_argument('--realizability', action='store_true',
                       help='Only decide realizability, print no circuit')
    synth.add_argument('--decompose', choices=['yes', 'no'], default='yes',
                       help='Split conjunctions with disjoint outputs (default: yes)')
    synth.add_argument('--bypass', choices=['yes', 'no'], default='yes',
                       help='Build strategies of G(b1) & (phi <-> GF b2) without a game (default: yes)')
    synth.add_argument('--simplify', choices=['none', 'signatures', 'sat', 'both'], default='both',
                       help='Mealy machine simplification (default: both)')
    synth.add_argument('--sat-solver', default=None,
                       help='SAT backend for --simplify=sat (pycosat, external, dpll)')
    synth.add_argument('--workers', type=int, default=cfg.WORKERS,
                       help='Worker threads for decomposed components')

    output = parser.add_argument_group('output')
    output.add_argument('--aiger', nargs='?', const='dontcare0', default=None,
                        choices=['dontcare0', 'dontcare1'],
                        help='Resolve unspecified outputs to 0 (default) or 1')
    output.add_argument('--dontcare', type=int, choices=[0, 1], default=None,
                        help='Same as --aiger=dontcare0/dontcare1')
    output.add_argument('-o', '--output', default=None,
                        help="Write verdict and circuit here instead of stdout ('-' for stdout)")
    output.add_argument('--verify', action='store_true',
                        help='Model-check the circuit against the specification')
    output.add_argument('--debug-arena', default=None,
                        help='Write the parity game in PGSolver format')
    output.add_argument('--print-game-hoa', default=None,
                        help='Write the parity game in HOA with spot-state-player')
    output.add_argument('--csv', default=None,
                        help='Append per-stage statistics to this CSV file')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        _error(str(e))
        return cfg.EXIT_USAGE

    if args.no_color:
        C.disable()

    cfg.setup_logging('ltl-synth', log_file=args.log_file, verbose=args.verbose)

    try:
        code = _synthesize(args)
    except SynthError as e:
        _error(str(e))
        code = _exit_code_for(e)
    except KeyboardInterrupt:
        _error('interrupted')
        code = cfg.EXIT_USAGE
    return code


if __name__ == '__main__':
    sys.exit(main())
