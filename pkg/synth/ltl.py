"""
LTL formulas for LTL Synth.

Formulas are hash-consed: building the same node twice returns the same
object, so equality is identity and comparisons during decomposition and
pattern matching are constant-time. The grammar accepts the operator
spellings used by SYNTCOMP benchmarks (G, F, X, U, R, W, &, |, !, ->, <->,
xor).
"""

import itertools
import logging
import re
import threading
import weakref
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import pyparsing as pp

from .errors import LtlSyntaxError, PreconditionError

log = logging.getLogger('ltl-synth')

# ── Node kinds ───────────────────────────────────────────────────────────────

AP = 'ap'
TRUE_K = 'true'
FALSE_K = 'false'
NOT = 'not'
AND = 'and'
OR = 'or'
XOR = 'xor'
IFF = 'iff'
IMPLIES = 'implies'
NEXT = 'X'
UNTIL = 'U'
RELEASE = 'R'
EVENTUALLY = 'F'
GLOBALLY = 'G'
WEAK_UNTIL = 'W'

ARITY = {
    AP: 0, TRUE_K: 0, FALSE_K: 0,
    NOT: 1, NEXT: 1, EVENTUALLY: 1, GLOBALLY: 1,
    AND: 2, OR: 2, XOR: 2, IFF: 2, IMPLIES: 2,
    UNTIL: 2, RELEASE: 2, WEAK_UNTIL: 2,
}
TEMPORAL = frozenset({NEXT, UNTIL, RELEASE, EVENTUALLY, GLOBALLY, WEAK_UNTIL})

_PRINT_OP = {
    NOT: '!', NEXT: 'X', EVENTUALLY: 'F', GLOBALLY: 'G',
    AND: '&', OR: '|', XOR: 'xor', IFF: '<->', IMPLIES: '->',
    UNTIL: 'U', RELEASE: 'R', WEAK_UNTIL: 'W',
}

_IDENT_RE = re.compile(r'[A-Za-z_][A-Za-z0-9_]*\Z')
# X, F and G glue onto a following lowercase name: "GFa" is G(F(a))
_RESERVED_RE = re.compile(r'(?:[XFG]+(?:[a-z_][A-Za-z0-9_]*)?|U|R|W|xor|true|false)\Z')


# ── Hash-consed formulas ─────────────────────────────────────────────────────

_TABLE = weakref.WeakValueDictionary()  # type: weakref.WeakValueDictionary
_TABLE_LOCK = threading.Lock()
_UIDS = itertools.count()


class Formula:
    """Immutable, hash-consed LTL syntax tree node."""

    __slots__ = ('kind', 'children', 'name', 'uid', '_atoms', '__weakref__')

    def __new__(cls, kind: str, children: Sequence['Formula'] = (), name: Optional[str] = None):
        children = tuple(children)
        if kind not in ARITY:
            raise ValueError(f"unknown formula kind {kind!r}")
        if len(children) != ARITY[kind]:
            raise ValueError(f"{kind} expects {ARITY[kind]} children, got {len(children)}")
        if kind == AP and not name:
            raise ValueError("atomic propositions need a nonempty name")
        key = (kind, children, name if kind == AP else None)
        with _TABLE_LOCK:
            node = _TABLE.get(key)
            if node is None:
                node = object.__new__(cls)
                object.__setattr__(node, 'kind', kind)
                object.__setattr__(node, 'children', children)
                object.__setattr__(node, 'name', name if kind == AP else None)
                object.__setattr__(node, 'uid', next(_UIDS))
                object.__setattr__(node, '_atoms', None)
                _TABLE[key] = node
        return node

    def __setattr__(self, key, value):
        raise AttributeError('Formula is immutable')

    def __hash__(self):
        return self.uid

    def __eq__(self, other):
        return self is other

    def __lt__(self, other: 'Formula'):
        return self.uid < other.uid

    def __reduce__(self):
        return (Formula, (self.kind, self.children, self.name))

    def __str__(self):
        return print_ltl(self)

    def __repr__(self):
        return f"Formula({print_ltl(self)!r})"

    def atoms(self) -> Tuple[str, ...]:
        """Atomic proposition names in first-occurrence order."""
        if self._atoms is None:
            seen = {}  # type: Dict[str, None]
            stack = [self]
            while stack:
                node = stack.pop()
                if node.kind == AP:
                    seen.setdefault(node.name, None)
                stack.extend(reversed(node.children))
            object.__setattr__(self, '_atoms', tuple(seen))
        return self._atoms

    def is_boolean(self) -> bool:
        """True when the formula contains no temporal operator."""
        return self.kind not in TEMPORAL and all(c.is_boolean() for c in self.children)

    @property
    def left(self) -> 'Formula':
        return self.children[0]

    @property
    def right(self) -> 'Formula':
        return self.children[1]

    @property
    def child(self) -> 'Formula':
        return self.children[0]


TRUE = Formula(TRUE_K)
FALSE = Formula(FALSE_K)


def ap(name: str) -> Formula:
    return Formula(AP, (), name)


def neg(f: Formula) -> Formula:
    return Formula(NOT, (f,))


def conj(a: Formula, b: Formula) -> Formula:
    return Formula(AND, (a, b))


def disj(a: Formula, b: Formula) -> Formula:
    return Formula(OR, (a, b))


def xor(a: Formula, b: Formula) -> Formula:
    return Formula(XOR, (a, b))


def iff(a: Formula, b: Formula) -> Formula:
    return Formula(IFF, (a, b))


def implies(a: Formula, b: Formula) -> Formula:
    return Formula(IMPLIES, (a, b))


def next_(f: Formula) -> Formula:
    return Formula(NEXT, (f,))


def until(a: Formula, b: Formula) -> Formula:
    return Formula(UNTIL, (a, b))


def release(a: Formula, b: Formula) -> Formula:
    return Formula(RELEASE, (a, b))


def weak_until(a: Formula, b: Formula) -> Formula:
    return Formula(WEAK_UNTIL, (a, b))


def eventually(f: Formula) -> Formula:
    return Formula(EVENTUALLY, (f,))


def globally(f: Formula) -> Formula:
    return Formula(GLOBALLY, (f,))


def conj_all(parts: Iterable[Formula]) -> Formula:
    """Left-fold a sequence into nested conjunctions (true when empty)."""
    result = None
    for part in parts:
        result = part if result is None else conj(result, part)
    return TRUE if result is None else result


def flatten_and(f: Formula) -> List[Formula]:
    """Top-level conjuncts of f, left to right."""
    if f.kind != AND:
        return [f]
    return flatten_and(f.left) + flatten_and(f.right)


# ── Printing ─────────────────────────────────────────────────────────────────

def _print_atom(name: str) -> str:
    if _IDENT_RE.match(name) and not _RESERVED_RE.match(name):
        return name
    return '"' + name.replace('\\', '\\\\').replace('"', '\\"') + '"'


def print_ltl(f: Formula) -> str:
    """Fully parenthesized canonical text for f."""
    if f.kind == AP:
        return _print_atom(f.name)
    if f.kind == TRUE_K:
        return 'true'
    if f.kind == FALSE_K:
        return 'false'
    op = _PRINT_OP[f.kind]
    if len(f.children) == 1:
        return f"{op}({print_ltl(f.child)})"
    return f"({print_ltl(f.left)} {op} {print_ltl(f.right)})"


# ── Parsing ──────────────────────────────────────────────────────────────────

_BINARY_KIND = {
    'U': UNTIL, 'R': RELEASE, 'W': WEAK_UNTIL,
    '&': AND, '&&': AND,
    'xor': XOR, '^': XOR,
    '|': OR, '||': OR,
    '->': IMPLIES, '=>': IMPLIES, '<->': IFF, '<=>': IFF,
}
_UNARY_KIND = {'!': NOT, 'X': NEXT, 'F': EVENTUALLY, 'G': GLOBALLY}


def _unary_action(tokens):
    group = list(tokens[0])
    result = group[-1]
    for op in reversed(group[:-1]):
        # "GF" is the chain G(F(...))
        for letter in reversed(op):
            result = Formula(_UNARY_KIND[letter], (result,))
    return result


def _right_fold(tokens):
    group = list(tokens[0])
    result = group[-1]
    for i in range(len(group) - 2, 0, -2):
        result = Formula(_BINARY_KIND[group[i]], (group[i - 1], result))
    return result


def _left_fold(tokens):
    group = list(tokens[0])
    result = group[0]
    for i in range(1, len(group), 2):
        result = Formula(_BINARY_KIND[group[i]], (result, group[i + 1]))
    return result


def _build_grammar() -> pp.ParserElement:
    pp.ParserElement.enable_packrat()

    reserved = pp.Regex(r'(?:[XFG]+|U|R|W|xor|true|false)\b')
    constant = pp.Regex(r'(?:true|false)\b|[01](?![A-Za-z0-9_])')
    constant.set_parse_action(lambda t: TRUE if t[0] in ('true', '1') else FALSE)
    constant.set_name('constant')
    ident = ~reserved + pp.Regex(r'[A-Za-z_][A-Za-z0-9_]*')
    ident.set_parse_action(lambda t: ap(t[0]))
    ident.set_name('proposition')
    quoted = pp.QuotedString('"', esc_char='\\')
    quoted.set_parse_action(lambda t: ap(t[0]))
    operand = constant | quoted | ident

    unary_op = pp.Regex(r'!|[XFG]+(?:\b|(?=[a-z_]))').set_name('unary operator')
    temporal_op = pp.Regex(r'[URW]\b').set_name('U, R or W')
    and_op = pp.one_of('&& &').set_name('&')
    xor_op = pp.Regex(r'xor\b|\^').set_name('xor')
    or_op = pp.one_of('|| |').set_name('|')
    impl_op = pp.one_of('<-> <=> -> =>').set_name('-> or <->')

    expr = pp.infix_notation(operand, [
        (unary_op, 1, pp.OpAssoc.RIGHT, _unary_action),
        (temporal_op, 2, pp.OpAssoc.RIGHT, _right_fold),
        (and_op, 2, pp.OpAssoc.LEFT, _left_fold),
        (xor_op, 2, pp.OpAssoc.LEFT, _left_fold),
        (or_op, 2, pp.OpAssoc.LEFT, _left_fold),
        (impl_op, 2, pp.OpAssoc.RIGHT, _right_fold),
    ])
    return expr


_GRAMMAR = None
_GRAMMAR_LOCK = threading.Lock()


def _grammar() -> pp.ParserElement:
    global _GRAMMAR
    with _GRAMMAR_LOCK:
        if _GRAMMAR is None:
            _GRAMMAR = _build_grammar()
        return _GRAMMAR


def _expected_from(message: str) -> frozenset:
    if not message.startswith('Expected '):
        return frozenset()
    what = message[len('Expected '):].split(', found')[0].strip()
    return frozenset({what}) if what else frozenset()


def parse_ltl(text) -> Formula:
    """Parse LTL text (str or UTF-8 bytes) into a Formula.

    Raises LtlSyntaxError carrying the UTF-8 byte offset of the failure and
    the set of token descriptions the parser expected there.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode('utf-8')
        except UnicodeDecodeError as e:
            raise LtlSyntaxError('invalid UTF-8', e.start, frozenset({'UTF-8 text'}))
    grammar = _grammar()
    with _GRAMMAR_LOCK:
        try:
            result = grammar.parse_string(text, parse_all=True)
        except pp.ParseBaseException as e:
            offset = len(text[:e.loc].encode('utf-8'))
            raise LtlSyntaxError('syntax error', offset, _expected_from(e.msg)) from None
    f = result[0]
    log.debug(f"[PARSE] {print_ltl(f)}")
    return f


# ── Negation normal form ─────────────────────────────────────────────────────

def _mk_and(a: Formula, b: Formula) -> Formula:
    if a is FALSE or b is FALSE:
        return FALSE
    if a is TRUE:
        return b
    if b is TRUE or a is b:
        return a
    return conj(a, b)


def _mk_or(a: Formula, b: Formula) -> Formula:
    if a is TRUE or b is TRUE:
        return TRUE
    if a is FALSE:
        return b
    if b is FALSE or a is b:
        return a
    return disj(a, b)


def _mk_next(a: Formula) -> Formula:
    return a if a in (TRUE, FALSE) else next_(a)


def _mk_eventually(a: Formula) -> Formula:
    if a in (TRUE, FALSE) or a.kind == EVENTUALLY:
        return a
    return eventually(a)


def _mk_globally(a: Formula) -> Formula:
    if a in (TRUE, FALSE) or a.kind == GLOBALLY:
        return a
    return globally(a)


def _mk_until(a: Formula, b: Formula) -> Formula:
    if b in (TRUE, FALSE) or a is FALSE:
        return b
    if a is TRUE:
        return _mk_eventually(b)
    return until(a, b)


def _mk_release(a: Formula, b: Formula) -> Formula:
    if b in (TRUE, FALSE) or a is TRUE:
        return b
    if a is FALSE:
        return _mk_globally(b)
    return release(a, b)


def to_nnf(f: Formula) -> Formula:
    """Negation normal form with xor/iff/implies/W eliminated and constants folded."""
    memo = {}  # type: Dict[Tuple[int, bool], Formula]

    def nnf(g: Formula, negated: bool) -> Formula:
        key = (g.uid, negated)
        hit = memo.get(key)
        if hit is not None:
            return hit
        k = g.kind
        if k == TRUE_K:
            r = FALSE if negated else TRUE
        elif k == FALSE_K:
            r = TRUE if negated else FALSE
        elif k == AP:
            r = neg(g) if negated else g
        elif k == NOT:
            r = nnf(g.child, not negated)
        elif k == AND:
            r = (_mk_or if negated else _mk_and)(nnf(g.left, negated), nnf(g.right, negated))
        elif k == OR:
            r = (_mk_and if negated else _mk_or)(nnf(g.left, negated), nnf(g.right, negated))
        elif k == IMPLIES:
            if negated:
                r = _mk_and(nnf(g.left, False), nnf(g.right, True))
            else:
                r = _mk_or(nnf(g.left, True), nnf(g.right, False))
        elif k in (IFF, XOR):
            flip = negated != (k == XOR)
            a, b = nnf(g.left, False), nnf(g.right, False)
            na, nb = nnf(g.left, True), nnf(g.right, True)
            if flip:
                r = _mk_or(_mk_and(a, nb), _mk_and(na, b))
            else:
                r = _mk_or(_mk_and(a, b), _mk_and(na, nb))
        elif k == NEXT:
            r = _mk_next(nnf(g.child, negated))
        elif k == EVENTUALLY:
            c = nnf(g.child, negated)
            r = _mk_globally(c) if negated else _mk_eventually(c)
        elif k == GLOBALLY:
            c = nnf(g.child, negated)
            r = _mk_eventually(c) if negated else _mk_globally(c)
        elif k == UNTIL:
            a, b = nnf(g.left, negated), nnf(g.right, negated)
            r = _mk_release(a, b) if negated else _mk_until(a, b)
        elif k == RELEASE:
            a, b = nnf(g.left, negated), nnf(g.right, negated)
            r = _mk_until(a, b) if negated else _mk_release(a, b)
        elif k == WEAK_UNTIL:
            # a W b == b R (a | b); !(a W b) == !b U (!a & !b)
            if negated:
                nb = nnf(g.right, True)
                r = _mk_until(nb, _mk_and(nnf(g.left, True), nb))
            else:
                b = nnf(g.right, False)
                r = _mk_release(b, _mk_or(nnf(g.left, False), b))
        else:  # pragma: no cover
            raise ValueError(k)
        memo[key] = r
        return r

    return nnf(f, False)


def is_nnf(f: Formula) -> bool:
    """True when negations sit on atoms only and no xor/iff/implies/W remain."""
    if f.kind == NOT:
        return f.child.kind == AP
    if f.kind in (XOR, IFF, IMPLIES, WEAK_UNTIL):
        return False
    return all(is_nnf(c) for c in f.children)


# ── Semantics on lassos ──────────────────────────────────────────────────────

def holds_on_lasso(f: Formula, prefix: Sequence[Mapping[str, bool]],
                   period: Sequence[Mapping[str, bool]]) -> bool:
    """Evaluate f on the word prefix . period^omega (missing atoms are false)."""
    if not period:
        raise PreconditionError('lasso period must be nonempty')
    letters = list(prefix) + list(period)
    n = len(letters)
    loop = len(prefix)
    succ = [i + 1 if i + 1 < n else loop for i in range(n)]
    memo = {}  # type: Dict[Formula, List[bool]]

    def fix(step, start: bool) -> List[bool]:
        val = [start] * n
        changed = True
        while changed:
            changed = False
            for i in reversed(range(n)):
                v = step(i, val)
                if v != val[i]:
                    val[i] = v
                    changed = True
        return val

    def ev(g: Formula) -> List[bool]:
        if g in memo:
            return memo[g]
        k = g.kind
        if k == TRUE_K:
            r = [True] * n
        elif k == FALSE_K:
            r = [False] * n
        elif k == AP:
            r = [bool(letter.get(g.name, False)) for letter in letters]
        elif k == NOT:
            r = [not v for v in ev(g.child)]
        elif k in (AND, OR, XOR, IFF, IMPLIES):
            a, b = ev(g.left), ev(g.right)
            op = {
                AND: lambda x, y: x and y,
                OR: lambda x, y: x or y,
                XOR: lambda x, y: x != y,
                IFF: lambda x, y: x == y,
                IMPLIES: lambda x, y: (not x) or y,
            }[k]
            r = [op(a[i], b[i]) for i in range(n)]
        elif k == NEXT:
            c = ev(g.child)
            r = [c[succ[i]] for i in range(n)]
        elif k == EVENTUALLY:
            c = ev(g.child)
            r = fix(lambda i, z: c[i] or z[succ[i]], False)
        elif k == GLOBALLY:
            c = ev(g.child)
            r = fix(lambda i, z: c[i] and z[succ[i]], True)
        elif k == UNTIL:
            a, b = ev(g.left), ev(g.right)
            r = fix(lambda i, z: b[i] or (a[i] and z[succ[i]]), False)
        elif k == WEAK_UNTIL:
            a, b = ev(g.left), ev(g.right)
            r = fix(lambda i, z: b[i] or (a[i] and z[succ[i]]), True)
        elif k == RELEASE:
            a, b = ev(g.left), ev(g.right)
            r = fix(lambda i, z: b[i] and (a[i] or z[succ[i]]), True)
        else:  # pragma: no cover
            raise ValueError(k)
        memo[g] = r
        return r

    return ev(f)[0]


# ── Signal partition and decomposition ───────────────────────────────────────

@dataclass(frozen=True)
class SignalPartition:
    """Input propositions I (environment) and output propositions O (controller)."""
    inputs: Tuple[str, ...]
    outputs: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, 'inputs', tuple(self.inputs))
        object.__setattr__(self, 'outputs', tuple(self.outputs))
        for group in (self.inputs, self.outputs):
            if len(set(group)) != len(group):
                raise PreconditionError(f"duplicate signal in {', '.join(group)}")
        shared = set(self.inputs) & set(self.outputs)
        if shared:
            raise PreconditionError(f"signals both input and output: {', '.join(sorted(shared))}")

    @classmethod
    def from_strings(cls, ins: str, outs: str) -> 'SignalPartition':
        def split(s):
            return tuple(x.strip() for x in (s or '').split(',') if x.strip())
        return cls(split(ins), split(outs))

    @property
    def ap(self) -> Tuple[str, ...]:
        return self.inputs + self.outputs

    def check_covers(self, f: Formula):
        missing = [a for a in f.atoms() if a not in self.inputs and a not in self.outputs]
        if missing:
            raise PreconditionError(f"propositions not declared as input or output: {', '.join(missing)}")


@dataclass(frozen=True)
class SubSpecification:
    """One conjunct group of a decomposed specification."""
    formula: Formula
    outputs: Tuple[str, ...]
    inputs: Tuple[str, ...] = field(default=())


def decompose(f: Formula, p: SignalPartition) -> List[SubSpecification]:
    """Split the top-level conjunction into groups with disjoint output variables.

    Conjuncts sharing an output land in the same group. Conjuncts without any
    output join the first group. Outputs mentioned nowhere are attached to the
    first group so that the groups together still drive every output.
    """
    p.check_covers(f)
    conjuncts = flatten_and(f)
    outputs = set(p.outputs)

    graph = nx.Graph()
    owners = []
    for i, c in enumerate(conjuncts):
        graph.add_node(('c', i))
        outs = [a for a in c.atoms() if a in outputs]
        owners.append(outs)
        for o in outs:
            graph.add_edge(('c', i), ('o', o))

    groups = []
    for comp in nx.connected_components(graph):
        idx = sorted(n[1] for n in comp if n[0] == 'c')
        if any(owners[i] for i in idx):
            groups.append(idx)
    groups.sort(key=lambda g: g[0])
    input_only = [i for i, outs in enumerate(owners) if not outs]
    if not groups:
        groups = [input_only]
    elif input_only:
        groups[0] = sorted(groups[0] + input_only)

    if len(groups) == 1:
        log.debug(f"[DECOMPOSE] no split for {len(conjuncts)} conjunct(s)")
        return [SubSpecification(f, p.outputs, p.inputs)]

    used = set()
    parts = []
    for idx in groups:
        outs = {o for i in idx for o in owners[i]}
        used |= outs
        parts.append((idx, outs))
    free = outputs - used
    result = []
    for n, (idx, outs) in enumerate(parts):
        if n == 0:
            outs = outs | free
        ordered = tuple(o for o in p.outputs if o in outs)
        result.append(SubSpecification(conj_all(conjuncts[i] for i in idx), ordered, p.inputs))
    log.debug(f"[DECOMPOSE] {len(conjuncts)} conjuncts -> {len(result)} components")
    return result


# ── Bypass pattern ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class BypassPattern:
    """G(b1) & (phi <-> GF b2), kept in the positive form.

    With polarity False the input had the shape phi' <-> FG c; it is stored
    as !phi' <-> GF !c so that consumers only see the positive form.
    """
    b1: Formula
    phi: Formula
    b2: Formula
    polarity: bool = True

    def validate(self, p: SignalPartition):
        if not self.b1.is_boolean() or not self.b2.is_boolean():
            raise PreconditionError('bypass b1 and b2 must be Boolean')
        if any(a not in p.inputs and a not in p.outputs for a in self.b1.atoms()):
            raise PreconditionError('bypass b1 uses undeclared propositions')
        if any(a not in p.inputs for a in self.phi.atoms()):
            raise PreconditionError('bypass phi must use inputs only')
        if any(a not in p.outputs for a in self.b2.atoms()):
            raise PreconditionError('bypass b2 must use outputs only')


def _recurrence_side(side: Formula, outputs: set) -> Optional[Tuple[Formula, bool]]:
    """Match GF b (positive) or FG c (negative) with b, c Boolean over outputs."""
    if side.kind == GLOBALLY and side.child.kind == EVENTUALLY:
        body, positive = side.child.child, True
    elif side.kind == EVENTUALLY and side.child.kind == GLOBALLY:
        body, positive = side.child.child, False
    else:
        return None
    if not body.is_boolean() or any(a not in outputs for a in body.atoms()):
        return None
    return body, positive


def detect_bypass(f: Formula, p: SignalPartition) -> Optional[BypassPattern]:
    """Recognize G(b1) & (phi <-> GF b2) up to commutativity."""
    inputs, outputs = set(p.inputs), set(p.outputs)
    b1_parts = []
    equivalences = []
    for c in flatten_and(f):
        if c.kind == GLOBALLY and c.child.is_boolean():
            b1_parts.append(c.child)
        elif c.kind == IFF:
            equivalences.append(c)
        else:
            return None
    if len(equivalences) > 1:
        return None
    b1 = conj_all(b1_parts)
    if any(a not in inputs and a not in outputs for a in b1.atoms()):
        return None
    if not equivalences:
        pattern = BypassPattern(b1, TRUE, TRUE, True)
        log.debug(f"[BYPASS] safety shape, b1={print_ltl(b1)}")
        return pattern

    eq = equivalences[0]
    for phi, side in ((eq.left, eq.right), (eq.right, eq.left)):
        if any(a not in inputs for a in phi.atoms()):
            continue
        matched = _recurrence_side(side, outputs)
        if matched is None:
            continue
        body, positive = matched
        if positive:
            pattern = BypassPattern(b1, phi, body, True)
        else:
            pattern = BypassPattern(b1, to_nnf(neg(phi)), to_nnf(neg(body)), False)
        log.debug(f"[BYPASS] matched b1={print_ltl(pattern.b1)} "
                  f"phi={print_ltl(pattern.phi)} b2={print_ltl(pattern.b2)}")
        return pattern
    return None
