#!/usr/bin/env python3
"""
Tests for AIGER encoding, the ASCII reader and writer, and simulation.

Run with: pytest tests/test_aiger.py -v
"""

import sys
from pathlib import Path

import pytest

# Add project root to path
PROJECT_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from synth.aiger import (
    AigBuilder, AigerCircuit, circuit_step, encode, negate, parse_aag, print_aag, simulate,
)
from synth.errors import AigerFormatError, PreconditionError
from synth.label import Label
from synth.ltl import SignalPartition
from synth.mealy import MealyMachine, MealyTransition

P = SignalPartition(('i',), ('o',))
AP = P.ap
I = Label.var(AP, 'i')
O = Label.var(AP, 'o')
T = Label.true(AP)


def machine(rows, ap=AP, partition=P):
    return MealyMachine(ap, partition, [[MealyTransition(*t) for t in row] for row in rows])


def toggle():
    return machine([[(T, ~O, 1)], [(T, O, 0)]])


# ── 1. Builder ───────────────────────────────────────────────────────────────

class TestBuilder:
    def test_constant_folding(self):
        b = AigBuilder(2, 0)
        assert b.and_(0, 2) == 0
        assert b.and_(1, 2) == 2
        assert b.and_(2, 2) == 2
        assert b.and_(2, 3) == 0
        assert b.ands == []

    def test_structural_hashing(self):
        b = AigBuilder(2, 0)
        x = b.and_(2, 4)
        assert b.and_(4, 2) == x
        assert b.hits == 1
        assert b.ands == [(6, 4, 2)]

    def test_or_is_negated_and(self):
        b = AigBuilder(2, 0)
        assert b.or_(2, 4) == negate(b.and_(3, 5))


# ── 2. Encoding ──────────────────────────────────────────────────────────────

class TestEncode:
    def test_constant_output(self):
        c = encode([machine([[(T, O, 0)]])], P)
        assert c.num_latches == 0
        assert c.outputs == [(1, 'o')]

    def test_copy_circuit(self):
        c = encode([machine([[(I, O, 0), (~I, ~O, 0)]])], P)
        assert c.outputs == [(2, 'o')]
        assert print_aag(c) == 'aag 1 1 0 1 0\n2\n2\ni0 i\no0 o\n'

    def test_toggle(self):
        c = encode([toggle()], P)
        assert c.latches == [(4, 5)]
        assert c.outputs == [(4, 'o')]
        trace = simulate(c, [{'i': False}] * 4)
        assert [step['o'] for step in trace] == [False, True, False, True]

    def test_step_from_latch_state(self):
        c = encode([toggle()], P)
        assert circuit_step(c, 1, {}) == ({'o': True}, 0)

    @pytest.mark.parametrize('dontcare,expected', [(0, 0), (1, 1)])
    def test_unconstrained_output(self, dontcare, expected):
        c = encode([machine([[(T, T, 0)]])], P, dontcare=dontcare)
        assert c.outputs == [(expected, 'o')]

    def test_undriven_output_is_constant(self):
        p = SignalPartition(('i',), ('o', 'spare'))
        m = machine([[(I, O, 0), (~I, ~O, 0)]], partition=p)
        c = encode([m], p)
        assert c.output_names() == ['o', 'spare']
        assert c.outputs[1] == (0, 'spare')

    def test_gates_shared_between_machines(self):
        """Two machines computing i1 & i2 share one gate."""
        p = SignalPartition(('i1', 'i2'), ('o1', 'o2'))
        machines = []
        for out in ('o1', 'o2'):
            ap = ('i1', 'i2', out)
            both = Label.var(ap, 'i1') & Label.var(ap, 'i2')
            o = Label.var(ap, out)
            machines.append(machine([[(both, o, 0), (~both, ~o, 0)]], ap, p))
        c = encode(machines, p)
        assert c.stats['strash_hits'] >= 1
        assert (6, 4, 2) in c.ands
        assert c.outputs == [(6, 'o1'), (6, 'o2')]
        for i1 in (False, True):
            for i2 in (False, True):
                outputs, _ = circuit_step(c, 0, {'i1': i1, 'i2': i2})
                assert outputs == {'o1': i1 and i2, 'o2': i1 and i2}

    def test_output_driven_twice(self):
        m = machine([[(T, O, 0)]])
        with pytest.raises(PreconditionError):
            encode([m, m], P)

    def test_incomplete_machine(self):
        with pytest.raises(PreconditionError):
            encode([machine([[(I, O, 0)]])], P)


# ── 3. ASCII format ──────────────────────────────────────────────────────────

class TestAag:
    def test_round_trip(self):
        c = encode([toggle()], P)
        back = parse_aag(print_aag(c))
        assert back.inputs == c.inputs
        assert back.latches == c.latches
        assert back.outputs == c.outputs
        assert back.ands == c.ands
        assert back.latch_names == c.latch_names

    def test_gates_are_reordered(self):
        """Gates listed out of order are sorted topologically on read."""
        text = 'aag 4 2 0 1 2\n2\n4\n8\n8 6 2\n6 2 4\n'
        c = parse_aag(text)
        assert c.ands == [(6, 2, 4), (8, 6, 2)]
        c.validate()

    def test_default_names(self):
        c = parse_aag('aag 1 1 0 1 0\n2\n3\n')
        assert c.inputs == ['i0']
        assert c.outputs == [(3, 'o0')]

    def test_comment_section(self):
        c = parse_aag('aag 1 1 0 1 0\n2\n2\ni0 x\nc\nanything goes\n')
        assert c.inputs == ['x']

    @pytest.mark.parametrize('text', [
        'aig 1 1 0 1 0\n2\n2\n',
        'aag 1 1 0\n',
        'aag 1 1 0 1 0 1\n2\n2\n',
        'aag 0 1 0 1 0\n2\n2\n',
        'aag 1 1 0 1 0\n2\n',
        'aag 1 1 0 1 0\n4\n2\n',
        'aag 1 1 0 1 0\n2\n9\n',
        'aag 1 0 1 0 0\n2 3 1\n',
        'aag 2 1 0 1 1\n2\n4\n5 2 2\n',
        'aag 2 1 0 1 1\n2\n4\n4 2 6\n',
        'aag 3 0 0 1 2\n6\n4 6 1\n6 4 1\n',
        'aag 1 1 0 1 0\n2\n2\nx0 name\n',
        'aag 1 1 0 1 0\n2\n-2\n',
    ])
    def test_rejected(self, text):
        with pytest.raises(AigerFormatError):
            parse_aag(text)

    def test_error_line(self):
        with pytest.raises(AigerFormatError) as err:
            parse_aag('aag 1 1 0 1 0\n4\n2\n')
        assert err.value.line == 2


class TestValidate:
    def test_gate_read_before_definition(self):
        c = AigerCircuit(['a'], [], [(4, 'o')], [(4, 6, 2), (6, 2, 2)])
        with pytest.raises(PreconditionError):
            c.validate()

    def test_undefined_output(self):
        c = AigerCircuit(['a'], [], [(8, 'o')], [])
        with pytest.raises(PreconditionError):
            c.validate()
