"""
SAT backends for LTL Synth.

Each backend implements SatSolver.solve() on a SatProblem in DIMACS
numbering (variables 1..n, a negative literal is a negated variable).
Backends register themselves by name; default_solver() picks the
configured one, or the first available of pycosat, an external DIMACS
solver and the built-in DPLL.
"""

import abc
import logging
import re
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .. import config as cfg
from ..errors import SynthError

log = logging.getLogger('ltl-synth')


class SatError(SynthError):
    """Raised when a SAT backend fails or refuses a problem."""
    pass


class SatProblem:
    """CNF under construction."""

    def __init__(self, num_vars: int = 0):
        self.num_vars = num_vars
        self.clauses = []  # type: List[Tuple[int, ...]]

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def add_clause(self, literals: Iterable[int]):
        clause = tuple(literals)
        for lit in clause:
            if lit == 0 or abs(lit) > self.num_vars:
                raise SatError(f"literal {lit} outside variables 1..{self.num_vars}")
        self.clauses.append(clause)

    def to_dimacs(self) -> str:
        return write_dimacs(self.num_vars, self.clauses)


class SatModel:
    """Satisfying assignment; variables not mentioned are false."""

    def __init__(self, true_vars: Iterable[int]):
        self.true_vars = frozenset(v for v in true_vars if v > 0)

    def value(self, var: int) -> bool:
        return var in self.true_vars

    def satisfies(self, problem: SatProblem) -> bool:
        return all(any((lit > 0) == self.value(abs(lit)) for lit in clause)
                   for clause in problem.clauses)

    def __repr__(self):
        return f"SatModel({sorted(self.true_vars)})"


class SatSolver(abc.ABC):
    """Base class for SAT backends."""

    BACKEND_NAME = ''   # type: str
    DESCRIPTION = ''    # type: str

    def __init__(self, **kwargs):
        pass

    @classmethod
    def probe_availability(cls) -> str:
        """'available' or 'unavailable'."""
        return 'available'

    @abc.abstractmethod
    def solve(self, problem: SatProblem) -> Optional[SatModel]:
        """A model, or None when the problem is unsatisfiable."""
        ...


# ── Registry ─────────────────────────────────────────────────────────────────

BACKENDS = {}  # type: Dict[str, type]

# tried in this order by default_solver()
AUTO_ORDER = ('pycosat', 'external', 'dpll')


def register_backend(name):
    """Decorator to register a backend class."""
    def decorator(cls):
        BACKENDS[name] = cls
        cls.BACKEND_NAME = name
        return cls
    return decorator


def get_backend(backend_name: str, **kwargs) -> SatSolver:
    """Instantiate a backend by name."""
    if backend_name not in BACKENDS:
        available = ', '.join(sorted(BACKENDS.keys()))
        raise SatError(f"Unknown SAT backend '{backend_name}'. Available: {available}")
    return BACKENDS[backend_name](**kwargs)


def detect_available_backends() -> List[Tuple[str, str, str]]:
    """(name, status, description) for every registered backend."""
    results = []
    for name in sorted(BACKENDS.keys()):
        cls = BACKENDS[name]
        try:
            results.append((name, cls.probe_availability(), cls.DESCRIPTION))
        except Exception as e:
            results.append((name, 'error', str(e)))
    return results


def default_solver(name: Optional[str] = None) -> SatSolver:
    name = name if name is not None else cfg.SAT_SOLVER
    if name:
        return get_backend(name)
    for candidate in AUTO_ORDER:
        if BACKENDS[candidate].probe_availability() == 'available':
            log.debug(f"[SAT] using backend {candidate}")
            return get_backend(candidate)
        log.warning(f"[SAT] backend {candidate} unavailable")
    raise SatError('no SAT backend available')


# ── DIMACS ───────────────────────────────────────────────────────────────────

def write_dimacs(num_vars: int, clauses: Sequence[Sequence[int]]) -> str:
    lines = [f"p cnf {num_vars} {len(clauses)}"]
    for clause in clauses:
        lines.append(' '.join(str(lit) for lit in clause) + ' 0')
    return '\n'.join(lines) + '\n'


def parse_dimacs(text: str) -> SatProblem:
    """Read a DIMACS CNF; clauses may span lines and end with 0."""
    problem = None
    pending = []  # type: List[int]
    declared = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith('c') or line.startswith('%'):
            continue
        if line.startswith('p'):
            m = re.fullmatch(r'p\s+cnf\s+(\d+)\s+(\d+)', line)
            if not m or problem is not None:
                raise SatError(f"line {lineno}: bad problem line {line!r}")
            problem = SatProblem(int(m.group(1)))
            declared = int(m.group(2))
            continue
        if problem is None:
            raise SatError(f"line {lineno}: clause before the problem line")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise SatError(f"line {lineno}: bad literal {tok!r}")
            if lit == 0:
                problem.add_clause(pending)
                pending = []
            else:
                pending.append(lit)
    if problem is None:
        raise SatError('missing problem line')
    if pending:
        problem.add_clause(pending)
    if len(problem.clauses) != declared:
        log.warning(f"[SAT] DIMACS declares {declared} clauses, found {len(problem.clauses)}")
    return problem


def parse_model(text: str) -> Optional[SatModel]:
    """Solver output: competition 's'/'v' lines or a MiniSat result file.

    Returns None for UNSAT; raises SatError when no verdict is found.
    """
    verdict = None
    values = []  # type: List[int]
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    for line in lines:
        if line.startswith('s '):
            verdict = line[2:].strip()
        elif line.startswith('v '):
            values.extend(int(tok) for tok in line[2:].split())
    if verdict is None and lines:
        # MiniSat: first line SAT/UNSAT, second line the model
        if lines[0] in ('SAT', 'UNSAT'):
            verdict = 'SATISFIABLE' if lines[0] == 'SAT' else 'UNSATISFIABLE'
            if len(lines) > 1:
                values.extend(int(tok) for tok in lines[1].split())
    if verdict == 'UNSATISFIABLE':
        return None
    if verdict != 'SATISFIABLE':
        raise SatError(f"no SAT verdict in solver output ({verdict or 'empty'})")
    return SatModel(v for v in values if v > 0)


# ── Import backends to trigger registration ──────────────────────────────────

from . import dpll             # noqa: E402, F401
from . import external         # noqa: E402, F401
from . import pycosat_backend  # noqa: E402, F401
