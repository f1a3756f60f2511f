"""
Boolean edge labels for LTL Synth.

A Label is a Boolean function over an ordered proposition alphabet, stored as
a reduced ordered cube set: the cubes are the paths to "true" of the reduced
ordered decision diagram of the function (variable order = alphabet order).
That form is canonical, so two labels are equal exactly when they denote the
same function. A cube is a pair of bit masks (care, value) over alphabet
positions.
"""

import functools
import itertools
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .errors import PreconditionError

Cube = Tuple[int, int]

_TAUTOLOGY = ((0, 0),)


@functools.lru_cache(maxsize=1 << 16)
def _shannon(cubes: FrozenSet[Cube], var: int) -> Tuple[Tuple[Cube, ...], Tuple[Cube, ...]]:
    """Canonical on-set and off-set covers of a cube set, from variable var on."""
    if not cubes:
        return (), _TAUTOLOGY
    if any(care == 0 for care, _ in cubes):
        return _TAUTOLOGY, ()
    bit = 1 << var
    low = frozenset((care & ~bit, val & ~bit) for care, val in cubes
                    if not (care & bit and val & bit))
    high = frozenset((care & ~bit, val & ~bit) for care, val in cubes
                     if not (care & bit and not val & bit))
    on0, off0 = _shannon(low, var + 1)
    on1, off1 = _shannon(high, var + 1)
    if on0 == on1:
        return on0, off0
    on = tuple((c | bit, v) for c, v in on0) + tuple((c | bit, v | bit) for c, v in on1)
    off = tuple((c | bit, v) for c, v in off0) + tuple((c | bit, v | bit) for c, v in off1)
    return on, off


def _canon(cubes: Iterable[Cube]) -> Tuple[Cube, ...]:
    return _shannon(frozenset(cubes), 0)[0]


def _meet(a: Cube, b: Cube) -> Optional[Cube]:
    if (a[0] & b[0]) & (a[1] ^ b[1]):
        return None
    return a[0] | b[0], a[1] | b[1]


class Label:
    """Boolean function over an alphabet, as a canonical cube set."""

    __slots__ = ('ap', 'cubes', '_hash')

    def __init__(self, ap: Sequence[str], cubes: Iterable[Cube] = (), canonical: bool = False):
        self.ap = tuple(ap)
        self.cubes = tuple(cubes) if canonical else _canon(cubes)
        self._hash = hash((self.ap, self.cubes))

    # ── Constructors ─────────────────────────────────────────────────────

    @classmethod
    def true(cls, ap: Sequence[str]) -> 'Label':
        return cls(ap, _TAUTOLOGY, canonical=True)

    @classmethod
    def false(cls, ap: Sequence[str]) -> 'Label':
        return cls(ap, (), canonical=True)

    @classmethod
    def var(cls, ap: Sequence[str], name: str, value: bool = True) -> 'Label':
        ap = tuple(ap)
        if name not in ap:
            raise PreconditionError(f"proposition {name!r} not in alphabet {', '.join(ap)}")
        bit = 1 << ap.index(name)
        return cls(ap, ((bit, bit if value else 0),), canonical=True)

    @classmethod
    def from_assignment(cls, ap: Sequence[str], assignment: Mapping[str, bool]) -> 'Label':
        """Cube fixing the given propositions (others unconstrained)."""
        ap = tuple(ap)
        care = val = 0
        for name, value in assignment.items():
            if name not in ap:
                raise PreconditionError(f"proposition {name!r} not in alphabet {', '.join(ap)}")
            bit = 1 << ap.index(name)
            care |= bit
            if value:
                val |= bit
        return cls(ap, ((care, val),), canonical=True)

    @classmethod
    def from_bits(cls, ap: Sequence[str], care: int, value: int) -> 'Label':
        return cls(ap, ((care, value & care),))

    @classmethod
    def from_formula(cls, f, ap: Sequence[str]) -> 'Label':
        """Label of a Boolean LTL formula."""
        from . import ltl
        ap = tuple(ap)
        memo = {}  # type: Dict[object, Label]

        def build(g) -> 'Label':
            if g in memo:
                return memo[g]
            k = g.kind
            if k == ltl.TRUE_K:
                r = cls.true(ap)
            elif k == ltl.FALSE_K:
                r = cls.false(ap)
            elif k == ltl.AP:
                r = cls.var(ap, g.name)
            elif k == ltl.NOT:
                r = ~build(g.child)
            elif k == ltl.AND:
                r = build(g.left) & build(g.right)
            elif k == ltl.OR:
                r = build(g.left) | build(g.right)
            elif k == ltl.IMPLIES:
                r = ~build(g.left) | build(g.right)
            elif k == ltl.IFF:
                a, b = build(g.left), build(g.right)
                r = (a & b) | (~a & ~b)
            elif k == ltl.XOR:
                a, b = build(g.left), build(g.right)
                r = (a & ~b) | (~a & b)
            else:
                raise PreconditionError(f"temporal operator {k} in a Boolean label")
            memo[g] = r
            return r

        return build(f)

    # ── Boolean algebra ──────────────────────────────────────────────────

    def _check(self, other: 'Label'):
        if self.ap != other.ap:
            raise PreconditionError(
                f"label alphabets differ: ({', '.join(self.ap)}) vs ({', '.join(other.ap)})")

    def __and__(self, other: 'Label') -> 'Label':
        self._check(other)
        if not self.cubes or not other.cubes:
            return Label.false(self.ap)
        if self.is_true():
            return other
        if other.is_true():
            return self
        product = [m for a in self.cubes for b in other.cubes for m in (_meet(a, b),) if m]
        return Label(self.ap, product)

    def __or__(self, other: 'Label') -> 'Label':
        self._check(other)
        if self.is_true() or not other.cubes:
            return self
        if other.is_true() or not self.cubes:
            return other
        return Label(self.ap, self.cubes + other.cubes)

    def __invert__(self) -> 'Label':
        return Label(self.ap, _shannon(frozenset(self.cubes), 0)[1], canonical=True)

    def __eq__(self, other):
        return isinstance(other, Label) and self.ap == other.ap and self.cubes == other.cubes

    def __hash__(self):
        return self._hash

    def __lt__(self, other: 'Label'):
        return self.cubes < other.cubes

    def __repr__(self):
        return f"Label({self.to_text()!r})"

    def is_true(self) -> bool:
        return self.cubes == _TAUTOLOGY

    def is_false(self) -> bool:
        return not self.cubes

    def is_satisfiable(self) -> bool:
        return bool(self.cubes)

    def intersects(self, other: 'Label') -> bool:
        self._check(other)
        return any(_meet(a, b) is not None for a in self.cubes for b in other.cubes)

    def implies(self, other: 'Label') -> bool:
        return not self.intersects(~other)

    # ── Variables ────────────────────────────────────────────────────────

    def mask_of(self, names: Iterable[str]) -> int:
        mask = 0
        for name in names:
            if name in self.ap:
                mask |= 1 << self.ap.index(name)
        return mask

    def support_mask(self) -> int:
        mask = 0
        for care, _ in self.cubes:
            mask |= care
        return mask

    def support(self) -> Tuple[str, ...]:
        mask = self.support_mask()
        return tuple(name for i, name in enumerate(self.ap) if mask >> i & 1)

    def exists(self, names: Iterable[str]) -> 'Label':
        """Existentially quantify the given propositions away."""
        drop = self.mask_of(names)
        if not drop & self.support_mask():
            return self
        keep = ~drop
        return Label(self.ap, ((c & keep, v & keep) for c, v in self.cubes))

    def restrict_to(self, names: Iterable[str]) -> 'Label':
        """Project onto the given propositions (exists over all others)."""
        names = set(names)
        return self.exists(n for n in self.ap if n not in names)

    def cofactor_bits(self, care: int, value: int) -> 'Label':
        """Substitute fixed values for the propositions in care."""
        value &= care
        kept = [(c & ~care, v & ~care) for c, v in self.cubes if not (c & care & (v ^ value))]
        return Label(self.ap, kept)

    def cofactor(self, assignment: Mapping[str, bool]) -> 'Label':
        care = value = 0
        for name, v in assignment.items():
            if name in self.ap:
                bit = 1 << self.ap.index(name)
                care |= bit
                if v:
                    value |= bit
        return self.cofactor_bits(care, value)

    def retarget(self, ap: Sequence[str]) -> 'Label':
        """Same function over another alphabet containing this one's support."""
        ap = tuple(ap)
        if ap == self.ap:
            return self
        pos = {}
        for i, name in enumerate(self.ap):
            if self.support_mask() >> i & 1:
                if name not in ap:
                    raise PreconditionError(f"proposition {name!r} missing from target alphabet")
                pos[i] = ap.index(name)
        cubes = []
        for care, val in self.cubes:
            nc = nv = 0
            for i, j in pos.items():
                if care >> i & 1:
                    nc |= 1 << j
                    if val >> i & 1:
                        nv |= 1 << j
            cubes.append((nc, nv))
        return Label(ap, cubes)

    # ── Evaluation and enumeration ───────────────────────────────────────

    def evaluate_bits(self, bits: int) -> bool:
        return any(not ((bits ^ v) & c) for c, v in self.cubes)

    def evaluate(self, assignment: Mapping[str, bool]) -> bool:
        bits = 0
        for i, name in enumerate(self.ap):
            if assignment.get(name, False):
                bits |= 1 << i
        return self.evaluate_bits(bits)

    def iter_cubes(self) -> Iterator[Dict[str, bool]]:
        for care, val in self.cubes:
            yield {name: bool(val >> i & 1) for i, name in enumerate(self.ap) if care >> i & 1}

    def pick_bits(self, prefer: int = 0) -> int:
        """One satisfying assignment, choosing `prefer` bits where unconstrained."""
        if not self.cubes:
            raise PreconditionError('no satisfying assignment of false')
        care, val = self.cubes[0]
        return (val & care) | (prefer & ~care)

    # ── Rendering ────────────────────────────────────────────────────────

    def to_hoa(self) -> str:
        if self.is_true():
            return 't'
        if self.is_false():
            return 'f'
        return ' | '.join(_cube_text(c, v, [str(i) for i in range(len(self.ap))])
                          for c, v in self.cubes)

    def to_text(self) -> str:
        if self.is_true():
            return 'true'
        if self.is_false():
            return 'false'
        return ' | '.join(_cube_text(c, v, list(self.ap), ' & ') for c, v in self.cubes)


def _cube_text(care: int, val: int, names: List[str], sep: str = '&') -> str:
    lits = []
    for i, name in enumerate(names):
        if care >> i & 1:
            lits.append(name if val >> i & 1 else '!' + name)
    return sep.join(lits)


def minterms(mask: int) -> Iterator[int]:
    """All value vectors over the bits of mask (as bit masks), in counting order."""
    bits = [1 << i for i in range(mask.bit_length()) if mask >> i & 1]
    for combo in itertools.product((0, 1), repeat=len(bits)):
        value = 0
        # counting order with the lowest bit varying fastest
        for b, on in zip(bits, reversed(combo)):
            if on:
                value |= b
        yield value


def refine(labels: Sequence[Label]) -> List[Label]:
    """Coarsest partition of true whose cells are inside or outside each label."""
    if not labels:
        return []
    cells = [Label.true(labels[0].ap)]
    for lab in labels:
        nxt = []
        for cell in cells:
            inside = cell & lab
            outside = cell & ~lab
            if inside.is_satisfiable():
                nxt.append(inside)
            if outside.is_satisfiable():
                nxt.append(outside)
        cells = nxt
    return cells
