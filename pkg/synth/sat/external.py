"""
External DIMACS solver backend.

The CNF is written to a temporary file and handed to a solver process.
Competition-style solvers (kissat, cadical, ...) answer on stdout with
's'/'v' lines and exit 10 (SAT) or 20 (UNSAT); MiniSat writes its answer
to a result file named as a second argument.
"""

import logging
import os
import shlex
import shutil
import subprocess
import tempfile
from typing import List, Optional

from synth import config as cfg
from synth.sat import SatError, SatModel, SatProblem, SatSolver, parse_model, register_backend

log = logging.getLogger('ltl-synth')


def _find_command() -> Optional[List[str]]:
    if cfg.SAT_SOLVER_CMD:
        return shlex.split(cfg.SAT_SOLVER_CMD)
    for name in cfg.KNOWN_SAT_COMMANDS:
        path = shutil.which(name)
        if path:
            return [path]
    return None


@register_backend('external')
class ExternalSolver(SatSolver):
    """Any DIMACS solver binary."""

    DESCRIPTION = 'external DIMACS solver (SYNTH_SAT_CMD or kissat/cadical/minisat on PATH)'

    def __init__(self, command: Optional[List[str]] = None, timeout: Optional[int] = None, **kwargs):
        self.command = list(command) if command else _find_command()
        self.timeout = timeout or cfg.SAT_TIMEOUT_SECONDS

    @classmethod
    def probe_availability(cls) -> str:
        cmd = _find_command()
        if cmd and shutil.which(cmd[0]):
            return 'available'
        return 'unavailable'

    @property
    def minisat_style(self) -> bool:
        return bool(self.command) and 'minisat' in os.path.basename(self.command[0])

    def solve(self, problem: SatProblem) -> Optional[SatModel]:
        if not self.command:
            raise SatError('no external SAT solver configured or found on PATH')
        with tempfile.TemporaryDirectory(prefix='ltl-synth-sat-') as tmp:
            cnf = os.path.join(tmp, 'problem.cnf')
            with open(cnf, 'w') as f:
                f.write(problem.to_dimacs())
            cmd = self.command + [cnf]
            answer = os.path.join(tmp, 'answer.txt')
            if self.minisat_style:
                cmd.append(answer)
            try:
                result = subprocess.run(cmd, capture_output=True, text=True, timeout=self.timeout)
            except FileNotFoundError:
                raise SatError(f"SAT solver not found: {self.command[0]}")
            except subprocess.TimeoutExpired:
                raise SatError(f"SAT solver timed out after {self.timeout}s")
            if result.returncode not in (0, 10, 20):
                raise SatError(f"SAT solver exited {result.returncode}: "
                               f"{result.stderr.strip()[:200]}")
            if self.minisat_style:
                if not os.path.exists(answer):
                    raise SatError('MiniSat wrote no result file')
                with open(answer) as f:
                    text = f.read()
            else:
                text = result.stdout
        model = parse_model(text)
        log.debug(f"[SAT] {os.path.basename(self.command[0])}: {problem.num_vars} vars, "
                  f"{len(problem.clauses)} clauses, {'UNSAT' if model is None else 'SAT'}")
        return model
