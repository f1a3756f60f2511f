"""
Built-in DPLL solver for small problems.

Unit propagation plus chronological backtracking on the lowest unassigned
variable. Problems above DPLL_VARIABLE_LIMIT variables are refused.
"""

import logging
from typing import Dict, List, Optional, Tuple

from synth import config as cfg
from synth.sat import SatError, SatModel, SatProblem, SatSolver, register_backend

log = logging.getLogger('ltl-synth')


def _propagate(clauses: List[Tuple[int, ...]], assign: Dict[int, bool]) -> bool:
    """Extend assign by unit propagation; False on a conflict."""
    changed = True
    while changed:
        changed = False
        for clause in clauses:
            free = []
            satisfied = False
            for lit in clause:
                value = assign.get(abs(lit))
                if value is None:
                    free.append(lit)
                elif value == (lit > 0):
                    satisfied = True
                    break
            if satisfied:
                continue
            if not free:
                return False
            if len(free) == 1:
                assign[abs(free[0])] = free[0] > 0
                changed = True
    return True


@register_backend('dpll')
class DpllSolver(SatSolver):
    """Naive DPLL, always available."""

    DESCRIPTION = 'built-in DPLL (small problems only)'

    def __init__(self, limit: Optional[int] = None, **kwargs):
        self.limit = limit if limit is not None else cfg.DPLL_VARIABLE_LIMIT

    def solve(self, problem: SatProblem) -> Optional[SatModel]:
        if problem.num_vars > self.limit:
            raise SatError(f"DPLL refuses {problem.num_vars} variables (limit {self.limit})")
        clauses = problem.clauses
        stack = [{}]  # type: List[Dict[int, bool]]
        while stack:
            assign = stack.pop()
            if not _propagate(clauses, assign):
                continue
            free = next((v for v in range(1, problem.num_vars + 1) if v not in assign), None)
            if free is None:
                log.debug(f"[SAT] dpll: {problem.num_vars} vars, {len(clauses)} clauses, SAT")
                return SatModel(v for v, value in assign.items() if value)
            for value in (False, True):
                branch = dict(assign)
                branch[free] = value
                stack.append(branch)
        log.debug(f"[SAT] dpll: {problem.num_vars} vars, {len(clauses)} clauses, UNSAT")
        return None
