#!/usr/bin/env python3
"""
End-to-end tests for the synthesis driver: verdicts on a corpus of small
specifications, every synthesized circuit model-checked against its formula.

Run with: pytest tests/test_pipeline.py -v
"""

import sys
import time
from pathlib import Path

import pytest

# Add project root to path
PROJECT_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from synth import config as cfg
from synth import pipeline
from synth.aiger import encode
from synth.errors import BudgetExceeded, PreconditionError, UsageError
from synth.label import Label
from synth.ltl import SignalPartition, parse_ltl
from synth.mealy import MealyMachine, MealyTransition
from synth.pipeline import (
    CSV_HEADER, PipelineConfig, _Timer, _arena_ds, _arena_sd, run, run_hoa, verify_circuit,
)
from synth.solver import brute_force_solve, solve

REALIZABLE = [
    ('G(i -> F o)', 'i', 'o'),
    ('GF i <-> GF o', 'i', 'o'),
    ('G(o <-> i)', 'i', 'o'),
    ('G o', 'i', 'o'),
    ('G(i -> X o)', 'i', 'o'),
    ('G(X o <-> i)', 'i', 'o'),
    ('GF o', 'i', 'o'),
    ('FG o', 'i', 'o'),
    ('G(i | o)', 'i', 'o'),
    ('G(o -> X !o) & GF o', 'i', 'o'),
    ('GF i -> GF o', 'i', 'o'),
    ('GF o -> GF i', 'i', 'o'),
    ('FG i -> GF o', 'i', 'o'),
    ('o W i', 'i', 'o'),
    ('i <-> X o', 'i', 'o'),
    ('G(i -> X X o)', 'i', 'o'),
    ('G(F i -> F o)', 'i', 'o'),
    ('G(o1) & (GF i1 <-> GF o2)', 'i1', 'o1,o2'),
    ('G(i1 -> F o1) & G(i2 -> F o2)', 'i1,i2', 'o1,o2'),
    ('G(o2 <-> !o) & G(i -> F o)', 'i', 'o,o2'),
]

UNREALIZABLE = [
    ('G(o <-> X i)', 'i', 'o'),
    ('G(o & !o)', 'i', 'o'),
    ('F i', 'i', 'o'),
    ('G i', 'i', 'o'),
    ('GF i & GF o', 'i', 'o'),
    ('o U i', 'i', 'o'),
    ('o <-> X i', 'i', 'o'),
    ('G(o <-> X X i)', 'i', 'o'),
    ('G(o -> i) & GF o', 'i', 'o'),
]

BUCHI_ON_OUTPUT = """HOA: v1
States: 1
Start: 0
AP: 2 "i" "o"
controllable-AP: 1
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0
[1] 0 {0}
[!1] 0
--END--
"""


def synthesize(text, ins, outs, **options):
    options.setdefault('verify', True)
    return run(PipelineConfig(**options), parse_ltl(text), SignalPartition.from_strings(ins, outs))


# ── 1. Verdicts ──────────────────────────────────────────────────────────────

class TestVerdicts:
    @pytest.mark.parametrize('text,ins,outs', REALIZABLE)
    def test_realizable(self, text, ins, outs):
        """Each circuit is model-checked against its formula."""
        report = synthesize(text, ins, outs)
        assert report.realizable
        assert report.exit_code == cfg.EXIT_REALIZABLE
        assert report.circuit is not None
        assert report.verified is True
        assert report.circuit.output_names() == list(SignalPartition.from_strings(ins, outs).outputs)

    @pytest.mark.parametrize('text,ins,outs', UNREALIZABLE)
    def test_unrealizable(self, text, ins, outs):
        report = synthesize(text, ins, outs)
        assert not report.realizable
        assert report.exit_code == cfg.EXIT_UNREALIZABLE
        assert report.circuit is None

    @pytest.mark.parametrize('text,ins,outs', REALIZABLE[:12] + UNREALIZABLE)
    def test_split_then_determinize_agrees(self, text, ins, outs):
        """Both game constructions give the same verdict."""
        expected = (text, ins, outs) in REALIZABLE
        report = synthesize(text, ins, outs, algo='sd', bypass=False)
        assert report.realizable == expected

    @pytest.mark.parametrize('text,ins,outs', REALIZABLE + UNREALIZABLE)
    def test_without_bypass_or_decomposition(self, text, ins, outs):
        expected = (text, ins, outs) in REALIZABLE
        report = synthesize(text, ins, outs, bypass=False, decompose=False)
        assert report.realizable == expected

    def test_realizability_only(self):
        report = synthesize('G(i -> F o)', 'i', 'o', realizability=True)
        assert report.realizable
        assert report.circuit is None


# ── 2. Options ───────────────────────────────────────────────────────────────

class TestOptions:
    @pytest.mark.parametrize('mode', ['none', 'signatures', 'sat', 'both'])
    def test_simplify_modes(self, mode):
        report = synthesize('G(i -> F o)', 'i', 'o', simplify=mode, sat_solver='dpll')
        assert report.realizable and report.verified

    def test_decomposition_counts_components(self):
        report = synthesize('G(i1 -> F o1) & G(i2 -> F o2)', 'i1,i2', 'o1,o2')
        assert report.components == 2
        assert synthesize('G(i1 -> F o1) & G(i2 -> F o2)', 'i1,i2', 'o1,o2',
                          decompose=False).components == 1

    def test_workers(self):
        report = synthesize('G(i1 -> F o1) & G(i2 -> F o2)', 'i1,i2', 'o1,o2', workers=2)
        assert report.realizable and report.verified

    def test_unrealizable_component_with_workers(self):
        """One losing component decides the whole run."""
        report = synthesize('G(i1 -> F o1) & G(o2 <-> X i2)', 'i1,i2', 'o1,o2', workers=2)
        assert not report.realizable

    def test_workers_stop_after_unrealizable_component(self, monkeypatch):
        """Queued components are cancelled once one component loses."""
        started = []

        def component(sub, index, config, timer):
            started.append(index)
            if index == 0:
                return pipeline._Outcome(False)
            time.sleep(0.2)
            return pipeline._Outcome(True)

        monkeypatch.setattr(pipeline, '_component', component)
        text = ' & '.join(f'G(i -> F o{k})' for k in range(6))
        outs = ','.join(f'o{k}' for k in range(6))
        report = synthesize(text, 'i', outs, workers=2)
        assert report.components == 6
        assert not report.realizable
        assert len(started) <= 3

    def test_dontcare_one(self):
        report = synthesize('G(i -> o)', 'i', 'o', dontcare=1)
        assert report.realizable and report.verified

    def test_debug_files(self, tmp_path):
        arena = tmp_path / 'arena.pg'
        game = tmp_path / 'game.hoa'
        synthesize('G(i -> F o)', 'i', 'o', bypass=False,
                   debug_arena=str(arena), game_hoa=str(game))
        assert arena.read_text().startswith('parity ')
        assert 'spot-state-player:' in game.read_text()

    def test_debug_files_per_component(self, tmp_path):
        arena = tmp_path / 'arena.pg'
        synthesize('G(i1 -> F o1) & G(i2 -> F o2)', 'i1,i2', 'o1,o2', bypass=False,
                   debug_arena=str(arena))
        assert arena.exists()
        assert (tmp_path / 'arena.pg.1').exists()

    def test_csv_row_matches_header(self):
        report = synthesize('G(i -> F o)', 'i', 'o')
        row = report.csv_row()
        assert len(row) == len(CSV_HEADER)
        assert row[2] == 'REALIZABLE'

    def test_budget(self, monkeypatch):
        monkeypatch.setattr(cfg, 'DETERMINIZE_STATE_BUDGET', 1)
        with pytest.raises(BudgetExceeded):
            synthesize('FG o', 'i', 'o', bypass=False)


# ── 3. Configuration errors ──────────────────────────────────────────────────

class TestConfig:
    @pytest.mark.parametrize('options', [
        {'algo': 'bfs'},
        {'simplify': 'aggressive'},
        {'algo': 'lar'},
        {'hoa_input': 'game.hoa'},
        {'dontcare': 2},
        {'workers': 0},
    ])
    def test_rejected(self, options):
        with pytest.raises(UsageError):
            PipelineConfig(**options).validate()

    def test_lar_needs_automaton_entry_point(self):
        config = PipelineConfig(algo='lar', hoa_input='game.hoa')
        with pytest.raises(UsageError):
            run(config, parse_ltl('G o'), SignalPartition(('i',), ('o',)))

    def test_undeclared_proposition(self):
        with pytest.raises(PreconditionError):
            synthesize('G(i -> F x)', 'i', 'o')


# ── 4. Automaton input ───────────────────────────────────────────────────────

class TestHoaInput:
    def config(self):
        return PipelineConfig(algo='lar', hoa_input='game.hoa', verify=True)

    def test_output_recurrence_is_realizable(self):
        report = run_hoa(self.config(), BUCHI_ON_OUTPUT)
        assert report.realizable and report.verified
        assert report.circuit.inputs == ['i']

    def test_input_recurrence_is_unrealizable(self):
        text = BUCHI_ON_OUTPUT.replace('[1] 0 {0}\n[!1] 0', '[0] 0 {0}\n[!0] 0')
        assert not run_hoa(self.config(), text).realizable

    def test_explicit_partition_overrides_header(self):
        """With the roles swapped the environment owns o."""
        p = SignalPartition(('o',), ('i',))
        assert not run_hoa(self.config(), BUCHI_ON_OUTPUT, p).realizable

    def test_needs_outputs(self):
        text = BUCHI_ON_OUTPUT.replace('controllable-AP: 1\n', '')
        with pytest.raises(UsageError):
            run_hoa(self.config(), text)


# ── 5. Cross-checks ──────────────────────────────────────────────────────────

class TestCrossChecks:
    def test_verification_catches_bad_circuit(self):
        p = SignalPartition(('i',), ('o',))
        o = Label.var(p.ap, 'o')
        stuck = MealyMachine(p.ap, p, [[MealyTransition(Label.true(p.ap), ~o, 0)]])
        assert not verify_circuit(encode([stuck], p), parse_ltl('G o'), p)
        steady = MealyMachine(p.ap, p, [[MealyTransition(Label.true(p.ap), o, 0)]])
        assert verify_circuit(encode([steady], p), parse_ltl('G o'), p)

    @pytest.mark.parametrize('text', ['G(i -> F o)', 'GF i <-> GF o', 'G(o <-> X i)', 'o U i'])
    def test_solver_agrees_with_reference_on_built_games(self, text):
        p = SignalPartition(('i',), ('o',))
        for build in (_arena_ds, _arena_sd):
            ar = build(parse_ltl(text), p, _Timer())
            assert solve(ar).winner == brute_force_solve(ar).winner
