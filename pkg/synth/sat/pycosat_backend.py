"""
In-process backend on top of pycosat (PicoSAT bindings).
"""

import logging
from typing import Optional

from synth.sat import SatError, SatModel, SatProblem, SatSolver, register_backend

log = logging.getLogger('ltl-synth')


@register_backend('pycosat')
class PycosatSolver(SatSolver):
    """PicoSAT through the pycosat extension module."""

    DESCRIPTION = 'PicoSAT via pycosat (in-process)'

    def __init__(self, prop_limit: int = 0, **kwargs):
        self.prop_limit = prop_limit

    @classmethod
    def probe_availability(cls) -> str:
        try:
            import pycosat  # noqa: F401
        except ImportError:
            return 'unavailable'
        return 'available'

    def solve(self, problem: SatProblem) -> Optional[SatModel]:
        try:
            import pycosat
        except ImportError:
            raise SatError('pycosat is not installed')
        if any(not clause for clause in problem.clauses):
            return None
        clauses = [list(clause) for clause in problem.clauses]
        result = pycosat.solve(clauses, vars=problem.num_vars, prop_limit=self.prop_limit)
        if result == 'UNSAT':
            return None
        if result == 'UNKNOWN':
            raise SatError(f"pycosat gave up after {self.prop_limit} propagations")
        log.debug(f"[SAT] pycosat: {problem.num_vars} vars, {len(clauses)} clauses, SAT")
        return SatModel(v for v in result if v > 0)
