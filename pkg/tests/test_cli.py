#!/usr/bin/env python3
"""
Tests for the ltl-synth command line: output layout, exit codes and file
handling.

Run with: pytest tests/test_cli.py -v
"""

import csv
import sys
from pathlib import Path

import pytest

# Add project root to path
PROJECT_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from synth import config as cfg
from synth.aiger import parse_aag
from synth.cli import main
from synth.pipeline import CSV_HEADER
from tests.test_pipeline import BUCHI_ON_OUTPUT


def stdout_lines(capsys):
    return capsys.readouterr().out.splitlines()


# ── 1. Verdicts and exit codes ───────────────────────────────────────────────

class TestExitCodes:
    def test_realizable(self, capsys):
        code = main(['--ins=i', '--outs=o', '-f', 'G(i -> F o)'])
        lines = stdout_lines(capsys)
        assert code == 0
        assert lines[0] == 'REALIZABLE'
        assert lines[1].startswith('aag ')

    def test_unrealizable(self, capsys):
        code = main(['--ins=i', '--outs=o', '-f', 'G(o <-> X i)'])
        assert code == 20
        assert stdout_lines(capsys) == ['UNREALIZABLE']

    def test_realizability_only(self, capsys):
        assert main(['--ins=i', '--outs=o', '-f', 'G o', '--realizability']) == 0
        assert stdout_lines(capsys) == ['REALIZABLE']

    def test_syntax_error(self, capsys):
        assert main(['--ins=i', '--outs=o', '-f', 'G(i -> ']) == 1
        err = capsys.readouterr().err
        assert 'Error' in err

    @pytest.mark.parametrize('argv', [
        ['--ins=i', '--outs=o', '--algo=bogus', '-f', 'G o'],
        ['--ins=i', '--outs=o', '--no-such-flag', '-f', 'G o'],
        ['--ins=i', '--outs=o', '--workers=many', '-f', 'G o'],
    ])
    def test_bad_arguments_are_usage_errors(self, argv, capsys):
        """Rejected arguments exit 1, not argparse's 2."""
        assert main(argv) == cfg.EXIT_USAGE
        assert 'usage: ltl-synth' in capsys.readouterr().err

    def test_missing_partition(self):
        assert main(['-f', 'G o']) == 1

    def test_missing_formula(self):
        assert main(['--ins=i', '--outs=o']) == 1

    def test_undeclared_proposition(self):
        assert main(['--ins=i', '--outs=o', '-f', 'G x']) == 1

    def test_budget_exceeded(self, monkeypatch):
        monkeypatch.setattr(cfg, 'DETERMINIZE_STATE_BUDGET', 1)
        assert main(['--ins=i', '--outs=o', '--bypass=no', '-f', 'FG o']) == 2

    def test_worst_verdict_wins(self, capsys):
        """The exit code is the maximum over all formulas."""
        code = main(['--ins=i', '--outs=o', '--realizability', '-f', 'G o', '-f', 'G i'])
        assert code == 20
        assert stdout_lines(capsys) == ['REALIZABLE', 'UNREALIZABLE']

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(['--version'])
        assert exc.value.code == 0
        assert 'ltl-synth' in capsys.readouterr().out


# ── 2. Input files ───────────────────────────────────────────────────────────

class TestInput:
    def test_formula_file_with_comments(self, tmp_path, capsys):
        spec = tmp_path / 'specs.ltl'
        spec.write_text('# one per line\nG(i -> F o)\n\nG o\n')
        code = main(['--ins=i', '--outs=o', '--realizability', '-F', str(spec)])
        assert code == 0
        assert stdout_lines(capsys) == ['REALIZABLE', 'REALIZABLE']

    def test_missing_file(self, tmp_path):
        assert main(['--ins=i', '--outs=o', '-F', str(tmp_path / 'nope.ltl')]) == 1

    def test_hoa_input(self, tmp_path, capsys):
        game = tmp_path / 'game.hoa'
        game.write_text(BUCHI_ON_OUTPUT)
        assert main(['--algo=lar', f'--hoa-input={game}']) == 0
        assert stdout_lines(capsys)[0] == 'REALIZABLE'

    def test_lar_needs_hoa_input(self):
        assert main(['--algo=lar', '--ins=i', '--outs=o', '-f', 'G o']) == 1

    def test_malformed_hoa(self, tmp_path):
        game = tmp_path / 'game.hoa'
        game.write_text(BUCHI_ON_OUTPUT.replace('--END--', ''))
        assert main(['--algo=lar', f'--hoa-input={game}']) == 1


# ── 3. Output ────────────────────────────────────────────────────────────────

class TestOutput:
    def test_output_file(self, tmp_path, capsys):
        target = tmp_path / 'out.aag'
        assert main(['--ins=i', '--outs=o', '-f', 'G(o <-> i)', '-o', str(target)]) == 0
        assert capsys.readouterr().out == ''
        verdict, aag = target.read_text().split('\n', 1)
        assert verdict == 'REALIZABLE'
        circuit = parse_aag(aag)
        assert circuit.inputs == ['i']
        assert circuit.output_names() == ['o']

    def test_csv_appends(self, tmp_path):
        stats = tmp_path / 'stats.csv'
        for _ in range(2):
            assert main(['--ins=i', '--outs=o', '-f', 'G(i -> F o)', '--csv', str(stats)]) == 0
        with open(stats) as f:
            rows = list(csv.reader(f))
        assert rows[0] == CSV_HEADER
        assert len(rows) == 3
        assert rows[1][2] == 'REALIZABLE'

    def test_verify_flag(self):
        assert main(['--ins=i', '--outs=o', '-f', 'G(i -> X o)', '--verify']) == 0

    @pytest.mark.parametrize('flag,literal', [('--aiger=dontcare0', '0'), ('--aiger=dontcare1', '1')])
    def test_dontcare(self, capsys, flag, literal):
        """A free output becomes constant 0 or 1."""
        assert main(['--ins=i', '--outs=o', '-f', 'true', '--simplify=none', flag]) == 0
        lines = stdout_lines(capsys)
        assert lines[1] == 'aag 1 1 0 1 0'
        assert lines[3] == literal

    @pytest.mark.parametrize('algo', ['ds', 'sd'])
    def test_algorithms(self, algo, capsys):
        assert main(['--ins=i', '--outs=o', f'--algo={algo}', '--bypass=no', '-f', 'GF i -> GF o']) == 0
        assert stdout_lines(capsys)[0] == 'REALIZABLE'
