#!/usr/bin/env python3
"""
Tests for the SAT layer: CNF building, DIMACS I/O, solver output parsing
and the backends.

Run with: pytest tests/test_sat.py -v
"""

import os
import sys
from pathlib import Path

import pytest

# Add project root to path
PROJECT_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from synth import config as cfg
from synth.sat import (
    BACKENDS, SatError, SatModel, SatProblem, default_solver, detect_available_backends,
    get_backend, parse_dimacs, parse_model, write_dimacs,
)
from synth.sat.dpll import DpllSolver
from synth.sat.external import ExternalSolver


def pigeonhole(holes: int) -> SatProblem:
    """holes + 1 pigeons into holes holes: unsatisfiable."""
    problem = SatProblem()
    x = [[problem.new_var() for _ in range(holes)] for _ in range(holes + 1)]
    for row in x:
        problem.add_clause(row)
    for h in range(holes):
        for a in range(holes + 1):
            for b in range(a + 1, holes + 1):
                problem.add_clause([-x[a][h], -x[b][h]])
    return problem


def small_sat() -> SatProblem:
    problem = SatProblem(3)
    problem.add_clause([1, 2])
    problem.add_clause([-1])
    problem.add_clause([-2, 3])
    return problem


def fake_solver(tmp_path: Path, name: str, body: str) -> str:
    script = tmp_path / name
    script.write_text('#!/bin/sh\n' + body)
    os.chmod(script, 0o755)
    return str(script)


# ── 1. Problems and models ───────────────────────────────────────────────────

class TestProblem:
    def test_new_vars_count_up(self):
        problem = SatProblem()
        assert [problem.new_var() for _ in range(3)] == [1, 2, 3]

    @pytest.mark.parametrize('clause', [[0], [4], [-4]])
    def test_literal_out_of_range(self, clause):
        with pytest.raises(SatError):
            SatProblem(3).add_clause(clause)

    def test_model_values(self):
        model = SatModel([1, -2, 3])
        assert model.value(1) and not model.value(2) and model.value(3)
        assert model.satisfies(small_sat()) is False
        assert SatModel([2, 3]).satisfies(small_sat())


# ── 2. DIMACS ────────────────────────────────────────────────────────────────

class TestDimacs:
    def test_write(self):
        assert write_dimacs(2, [(1, -2), (2,)]) == 'p cnf 2 2\n1 -2 0\n2 0\n'

    def test_parse_back(self):
        problem = parse_dimacs(small_sat().to_dimacs())
        assert problem.num_vars == 3
        assert problem.clauses == [(1, 2), (-1,), (-2, 3)]

    def test_comments_and_wrapped_clauses(self):
        text = 'c example\np cnf 3 2\n1 2\n3 0 -1\n0\n'
        assert parse_dimacs(text).clauses == [(1, 2, 3), (-1,)]

    @pytest.mark.parametrize('text', [
        '1 2 0\n',
        'p cnf 2\n1 0\n',
        'p cnf 2 1\n1 x 0\n',
        'p cnf 1 1\n2 0\n',
        'p cnf 1 1\np cnf 1 1\n1 0\n',
        '',
    ])
    def test_rejected(self, text):
        with pytest.raises(SatError):
            parse_dimacs(text)


class TestParseModel:
    def test_competition_output(self):
        model = parse_model('c comment\ns SATISFIABLE\nv 1 -2\nv 3 0\n')
        assert model.true_vars == frozenset({1, 3})

    def test_competition_unsat(self):
        assert parse_model('s UNSATISFIABLE\n') is None

    def test_minisat_result_file(self):
        assert parse_model('SAT\n-1 2 0\n').true_vars == frozenset({2})
        assert parse_model('UNSAT\n') is None

    @pytest.mark.parametrize('text', ['', 's UNKNOWN\n', 'garbage\n'])
    def test_no_verdict(self, text):
        with pytest.raises(SatError):
            parse_model(text)


# ── 3. Backends ──────────────────────────────────────────────────────────────

class TestDpll:
    def test_satisfiable(self):
        problem = small_sat()
        model = DpllSolver().solve(problem)
        assert model is not None
        assert model.satisfies(problem)

    def test_unsatisfiable(self):
        assert DpllSolver().solve(pigeonhole(3)) is None

    def test_empty_clause(self):
        problem = SatProblem(1)
        problem.add_clause([])
        assert DpllSolver().solve(problem) is None

    def test_variable_limit(self):
        with pytest.raises(SatError):
            DpllSolver(limit=2).solve(small_sat())

    def test_limit_from_config(self, monkeypatch):
        monkeypatch.setattr(cfg, 'DPLL_VARIABLE_LIMIT', 5)
        assert DpllSolver().limit == 5


class TestPycosat:
    def test_agrees_with_dpll(self):
        pytest.importorskip('pycosat')
        solver = get_backend('pycosat')
        model = solver.solve(small_sat())
        assert model is not None and model.satisfies(small_sat())
        assert solver.solve(pigeonhole(3)) is None


class TestExternal:
    def test_competition_style(self, tmp_path):
        cmd = fake_solver(tmp_path, 'fake-kissat', 'echo "s SATISFIABLE"\necho "v 1 -2 0"\nexit 10\n')
        model = ExternalSolver(command=[cmd]).solve(small_sat())
        assert model.true_vars == frozenset({1})

    def test_unsat_exit_code(self, tmp_path):
        cmd = fake_solver(tmp_path, 'fake-cadical', 'echo "s UNSATISFIABLE"\nexit 20\n')
        assert ExternalSolver(command=[cmd]).solve(small_sat()) is None

    def test_minisat_writes_result_file(self, tmp_path):
        """MiniSat takes the result file as a second argument."""
        cmd = fake_solver(tmp_path, 'minisat', 'printf "SAT\\n2 3 0\\n" > "$2"\nexit 10\n')
        solver = ExternalSolver(command=[cmd])
        assert solver.minisat_style
        assert solver.solve(small_sat()).true_vars == frozenset({2, 3})

    def test_crash_is_reported(self, tmp_path):
        cmd = fake_solver(tmp_path, 'fake-crash', 'echo boom >&2\nexit 3\n')
        with pytest.raises(SatError, match='exited 3'):
            ExternalSolver(command=[cmd]).solve(small_sat())

    def test_missing_binary(self, tmp_path):
        with pytest.raises(SatError):
            ExternalSolver(command=[str(tmp_path / 'no-such-solver')]).solve(small_sat())

    def test_unknown_command_is_unavailable(self, monkeypatch):
        monkeypatch.setattr(cfg, 'SAT_SOLVER_CMD', 'definitely-not-a-sat-solver-xyz')
        assert ExternalSolver.probe_availability() == 'unavailable'


class TestRegistry:
    def test_all_backends_registered(self):
        assert {'dpll', 'external', 'pycosat'} <= set(BACKENDS)

    def test_unknown_backend(self):
        with pytest.raises(SatError, match='Unknown SAT backend'):
            get_backend('zchaff')

    def test_detection_lists_everything(self):
        names = [name for name, _, _ in detect_available_backends()]
        assert names == sorted(BACKENDS)

    def test_configured_backend_wins(self, monkeypatch):
        monkeypatch.setattr(cfg, 'SAT_SOLVER', 'dpll')
        assert isinstance(default_solver(), DpllSolver)

    def test_explicit_name(self):
        assert isinstance(default_solver('dpll'), DpllSolver)
