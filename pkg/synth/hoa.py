"""
HOA v1 input and output for LTL Synth.

Supported subset: explicit transition labels, transition-based acceptance
marks, a single initial state. Header lines are read one per line, which is
how every common producer writes them. The spot-state-player and
controllable-AP headers are understood so that games survive a round trip.
"""

import logging
import re
import threading
from typing import Dict, List, Optional, Sequence, Tuple

import pyparsing as pp

from .automaton import Acceptance, Automaton, Edge, ACC_FALSE, ACC_TRUE, acc_and, acc_fin, acc_inf, acc_or
from .errors import HoaFormatError, PreconditionError
from .label import Label

log = logging.getLogger('ltl-synth')

_HEADER_RE = re.compile(r'^([A-Za-z@][A-Za-z0-9_-]*):\s*(.*)$')
_STRING_RE = re.compile(r'"((?:[^"\\]|\\.)*)"')
_EDGE_RE = re.compile(r'^\[(?P<label>[^\]]*)\]\s*(?P<dst>\d+)\s*(?:\{(?P<colors>[^}]*)\})?\s*$')
_STATE_RE = re.compile(r'^State:\s*(?P<num>\d+)\s*(?P<rest>.*)$')
_PARITY_NAME_RE = re.compile(r'^parity\s+max\s+odd\s+(\d+)$')


def _unquote(s: str) -> str:
    return re.sub(r'\\(.)', r'\1', s)


# ── Sub-grammars ─────────────────────────────────────────────────────────────

def _fold(kind):
    def action(tokens):
        group = list(tokens[0])
        return (kind, tuple(group[0::2]))
    return action


def _build_label_grammar() -> pp.ParserElement:
    const = pp.one_of('t f').set_parse_action(lambda t: ('const', t[0] == 't'))
    index = pp.Word(pp.nums).set_parse_action(lambda t: ('ap', int(t[0])))
    alias = pp.Regex(r'@[A-Za-z0-9_-]+').set_parse_action(lambda t: ('alias', t[0]))
    atom = const | index | alias
    return pp.infix_notation(atom, [
        (pp.Literal('!'), 1, pp.OpAssoc.RIGHT, lambda t: ('not', t[0][1])),
        (pp.Literal('&'), 2, pp.OpAssoc.LEFT, _fold('and')),
        (pp.Literal('|'), 2, pp.OpAssoc.LEFT, _fold('or')),
    ])


def _build_acceptance_grammar() -> pp.ParserElement:
    lpar, rpar = pp.Suppress('('), pp.Suppress(')')
    color = pp.Word(pp.nums)
    inf = (pp.Keyword('Inf') + lpar + pp.Optional('!') + color + rpar)
    fin = (pp.Keyword('Fin') + lpar + pp.Optional('!') + color + rpar)

    def mark(t):
        if len(t) == 3:
            raise pp.ParseFatalException('', 0, 'complemented acceptance sets are not supported')
        c = int(t[1])
        return acc_inf(c) if t[0] == 'Inf' else acc_fin(c)

    inf.set_parse_action(mark)
    fin.set_parse_action(mark)
    const = pp.one_of('t f').set_parse_action(lambda t: ACC_TRUE if t[0] == 't' else ACC_FALSE)
    return pp.infix_notation(inf | fin | const, [
        (pp.Literal('&'), 2, pp.OpAssoc.LEFT, lambda t: acc_and(*t[0][0::2])),
        (pp.Literal('|'), 2, pp.OpAssoc.LEFT, lambda t: acc_or(*t[0][0::2])),
    ])


_GRAMMARS = {}  # type: Dict[str, pp.ParserElement]
_GRAMMAR_LOCK = threading.Lock()


def _parse_with(which: str, text: str, line: int):
    with _GRAMMAR_LOCK:
        if which not in _GRAMMARS:
            _GRAMMARS[which] = (_build_label_grammar() if which == 'label'
                                else _build_acceptance_grammar())
        try:
            return _GRAMMARS[which].parse_string(text, parse_all=True)[0]
        except pp.ParseBaseException as e:
            raise HoaFormatError(f"bad {which} {text!r}: {e.msg}", line) from None


def _label_from_tree(tree, ap: Tuple[str, ...], line: int) -> Label:
    tag = tree[0]
    if tag == 'const':
        return Label.true(ap) if tree[1] else Label.false(ap)
    if tag == 'ap':
        if tree[1] >= len(ap):
            raise HoaFormatError(f"undeclared AP index {tree[1]} (AP declares {len(ap)})", line)
        return Label.var(ap, ap[tree[1]])
    if tag == 'alias':
        raise HoaFormatError(f"aliases are not supported ({tree[1]})", line)
    if tag == 'not':
        return ~_label_from_tree(tree[1], ap, line)
    parts = [_label_from_tree(p, ap, line) for p in tree[1]]
    out = parts[0]
    for p in parts[1:]:
        out = (out & p) if tag == 'and' else (out | p)
    return out


# ── Reading ──────────────────────────────────────────────────────────────────

def parse_hoa(text: str) -> Automaton:
    """Parse one HOA v1 automaton; flags are recomputed from the edges."""
    aut, _ = parse_hoa_game(text)
    return aut


def parse_hoa_game(text: str) -> Tuple[Automaton, Tuple[str, ...]]:
    """Parse HOA and also return the controllable-AP names, if declared."""
    lines = text.splitlines()
    headers = {}  # type: Dict[str, Tuple[str, int]]
    body_start = None
    for n, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith('/*'):
            continue
        if line == '--BODY--':
            body_start = n
            break
        m = _HEADER_RE.match(line)
        if not m:
            raise HoaFormatError(f"malformed header {line!r}", n)
        name, value = m.group(1), m.group(2).strip()
        if name in headers and name in ('HOA', 'States', 'Start', 'AP', 'Acceptance'):
            if name == 'Start':
                raise HoaFormatError('multiple initial states are not supported', n)
            raise HoaFormatError(f"duplicate {name} header", n)
        headers[name] = (value, n)
    if body_start is None:
        raise HoaFormatError('missing --BODY--', len(lines) or None)

    version = headers.get('HOA')
    if version is None or version[0] != 'v1':
        raise HoaFormatError('expected "HOA: v1" header', version[1] if version else 1)

    ap = _read_ap(headers)
    acceptance = _read_acceptance(headers)
    num_states = _read_int(headers, 'States', None)
    start_value, start_line = headers.get('Start', ('0', None))
    if '&' in start_value or len(start_value.split()) > 1:
        raise HoaFormatError('conjunctive initial states are not supported', start_line)
    start = _read_int(headers, 'Start', 0)

    edges = {}  # type: Dict[int, List[Edge]]
    current = None
    end_seen = False
    for n in range(body_start + 1, len(lines) + 1):
        line = lines[n - 1].strip()
        if not line:
            continue
        if line == '--END--':
            end_seen = True
            break
        m = _STATE_RE.match(line)
        if m:
            current = int(m.group('num'))
            rest = m.group('rest')
            if '{' in _STRING_RE.sub('', rest):
                raise HoaFormatError('state-based acceptance is not supported', n)
            if current in edges:
                raise HoaFormatError(f"state {current} declared twice", n)
            edges[current] = []
            continue
        if current is None:
            raise HoaFormatError(f"edge before any State: line ({line!r})", n)
        m = _EDGE_RE.match(line)
        if not m:
            if not line.startswith('['):
                raise HoaFormatError('implicit labels are not supported', n)
            raise HoaFormatError(f"malformed edge {line!r}", n)
        label = _label_from_tree(_parse_with('label', m.group('label'), n), ap, n)
        dst = int(m.group('dst'))
        colors = frozenset(int(c) for c in (m.group('colors') or '').split())
        for c in colors:
            if c >= acceptance.num_colors:
                raise HoaFormatError(
                    f"color {c} exceeds declared count {acceptance.num_colors}", n)
        if num_states is not None and dst >= num_states:
            raise HoaFormatError(f"destination {dst} >= States: {num_states}", n)
        edges[current].append(Edge(label, colors, dst))
    if not end_seen:
        raise HoaFormatError('missing --END--', len(lines))

    count = num_states if num_states is not None else max(
        [s + 1 for s in edges] + [e.dst + 1 for es in edges.values() for e in es] + [start + 1])
    for s in edges:
        if s >= count:
            raise HoaFormatError(f"state {s} >= States: {count}")
    player = _read_players(headers, count)
    controllable = _read_controllable(headers, ap)
    name = ''
    if 'name' in headers:
        m = _STRING_RE.search(headers['name'][0])
        name = _unquote(m.group(1)) if m else headers['name'][0]
    try:
        aut = Automaton(ap, [edges.get(s, []) for s in range(count)], start, acceptance, player, name)
    except PreconditionError as e:
        raise HoaFormatError(str(e)) from None
    log.debug(f"[HOA] read {aut.num_states} states, {aut.num_edges} edges, "
              f"acc={acceptance.to_text()}")
    return aut, controllable


def _read_int(headers, name: str, default: Optional[int]) -> Optional[int]:
    if name not in headers:
        return default
    value, n = headers[name]
    token = value.split()[0] if value.split() else ''
    if not token.isdigit():
        raise HoaFormatError(f"{name}: expects a number, got {value!r}", n)
    return int(token)


def _read_ap(headers) -> Tuple[str, ...]:
    if 'AP' not in headers:
        return ()
    value, n = headers['AP']
    parts = value.split(None, 1)
    if not parts or not parts[0].isdigit():
        raise HoaFormatError(f"AP: expects a count, got {value!r}", n)
    names = tuple(_unquote(s) for s in _STRING_RE.findall(parts[1] if len(parts) > 1 else ''))
    if len(names) != int(parts[0]):
        raise HoaFormatError(f"AP: declares {parts[0]} names but lists {len(names)}", n)
    if len(set(names)) != len(names):
        raise HoaFormatError('AP: duplicate proposition', n)
    return names


def _read_acceptance(headers) -> Acceptance:
    if 'Acceptance' not in headers:
        raise HoaFormatError('missing Acceptance header')
    value, n = headers['Acceptance']
    parts = value.split(None, 1)
    if not parts or not parts[0].isdigit():
        raise HoaFormatError(f"Acceptance: expects a color count, got {value!r}", n)
    count = int(parts[0])
    formula = _parse_with('acceptance', parts[1] if len(parts) > 1 else 't', n)
    try:
        acceptance = Acceptance(count, formula)
    except PreconditionError as e:
        raise HoaFormatError(str(e), n) from None
    if 'acc-name' in headers:
        name, an = headers['acc-name']
        m = _PARITY_NAME_RE.match(name)
        if m and acceptance != Acceptance.parity_max_odd(int(m.group(1))):
            raise HoaFormatError(f"acc-name {name!r} does not match Acceptance", an)
        if name == 'Buchi' and acceptance != Acceptance.buchi():
            raise HoaFormatError('acc-name Buchi does not match Acceptance', an)
    return acceptance


def _read_players(headers, count: int) -> Optional[List[bool]]:
    if 'spot-state-player' not in headers:
        return None
    value, n = headers['spot-state-player']
    tokens = value.split()
    if len(tokens) != count or any(t not in ('0', '1') for t in tokens):
        raise HoaFormatError(f"spot-state-player needs {count} entries of 0/1", n)
    return [t == '1' for t in tokens]


def _read_controllable(headers, ap: Tuple[str, ...]) -> Tuple[str, ...]:
    if 'controllable-AP' not in headers:
        return ()
    value, n = headers['controllable-AP']
    out = []
    for token in value.split():
        if not token.isdigit() or int(token) >= len(ap):
            raise HoaFormatError(f"controllable-AP: bad index {token!r}", n)
        out.append(ap[int(token)])
    return tuple(out)


# ── Writing ──────────────────────────────────────────────────────────────────

def _quote(s: str) -> str:
    return '"' + s.replace('\\', '\\\\').replace('"', '\\"') + '"'


def print_hoa(a: Automaton, controllable: Sequence[str] = ()) -> str:
    """HOA v1 text for a; parse_hoa(print_hoa(a)) rebuilds the same automaton."""
    out = ['HOA: v1']
    if a.name:
        out.append(f"name: {_quote(a.name)}")
    out.append(f"States: {a.num_states}")
    out.append(f"Start: {a.initial}")
    out.append(' '.join([f"AP: {len(a.ap)}"] + [_quote(p) for p in a.ap]))
    acc_name = a.acceptance.acc_name()
    if acc_name:
        out.append(f"acc-name: {acc_name}")
    out.append(f"Acceptance: {a.acceptance.num_colors} {a.acceptance.to_text()}")
    props = ['trans-labels', 'explicit-labels', 'trans-acc']
    if a.deterministic:
        props.append('deterministic')
    if a.complete:
        props.append('complete')
    out.append('properties: ' + ' '.join(props))
    if a.state_player is not None:
        out.append('spot-state-player: ' + ' '.join('1' if p else '0' for p in a.state_player))
    if controllable:
        out.append('controllable-AP: ' + ' '.join(str(a.ap.index(c)) for c in controllable))
    out.append('--BODY--')
    for s, es in enumerate(a.edges):
        out.append(f"State: {s}")
        for e in es:
            line = f"[{e.label.to_hoa()}] {e.dst}"
            if e.colors:
                line += ' {' + ' '.join(str(c) for c in sorted(e.colors)) + '}'
            out.append(line)
    out.append('--END--')
    return '\n'.join(out) + '\n'
