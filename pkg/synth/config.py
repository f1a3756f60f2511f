"""
Configuration for LTL Synth.

Budgets and backend choices are read from the environment once at import.
Command-line flags override them through PipelineConfig.
"""

import logging
import os
from pathlib import Path

log = logging.getLogger('ltl-synth')

# Budgets
DETERMINIZE_STATE_BUDGET = int(os.environ.get('SYNTH_DETERMINIZE_BUDGET', 2 ** 20))
COLOR_BUDGET = int(os.environ.get('SYNTH_COLOR_BUDGET', 16))
VERIFY_STATE_BUDGET = int(os.environ.get('SYNTH_VERIFY_BUDGET', 2 ** 16))
LASSO_PRODUCT_BUDGET = int(os.environ.get('SYNTH_LASSO_BUDGET', 2 ** 16))
BRUTE_FORCE_STATE_BUDGET = int(os.environ.get('SYNTH_BRUTE_FORCE_BUDGET', 2 ** 12))

# SAT backends ('' = first available of pycosat, external, dpll)
SAT_SOLVER = os.environ.get('SYNTH_SAT_SOLVER', '')
SAT_SOLVER_CMD = os.environ.get('SYNTH_SAT_CMD', '')
SAT_TIMEOUT_SECONDS = int(os.environ.get('SYNTH_SAT_TIMEOUT', 300))
DPLL_VARIABLE_LIMIT = int(os.environ.get('SYNTH_DPLL_VARIABLES', 64))
# Probed in order when SAT_SOLVER_CMD is empty
KNOWN_SAT_COMMANDS = ['kissat', 'cadical', 'minisat']

# Pipeline defaults
WORKERS = int(os.environ.get('SYNTH_WORKERS', 1))
DONTCARE_DEFAULT = int(os.environ.get('SYNTH_DONTCARE', 0))
LOG_FILE = os.environ.get('SYNTH_LOG_FILE', '')

# Exit codes
EXIT_REALIZABLE = 0
EXIT_USAGE = 1
EXIT_BUDGET = 2
EXIT_INTERNAL = 3
EXIT_UNREALIZABLE = 20


def setup_logging(name: str = 'ltl-synth', log_file: str = None,
                  verbose: bool = False):
    """Configure logging for the command-line tool.

    Console output goes to stderr; stdout carries the verdict and circuit.
    """
    log_file = log_file or LOG_FILE

    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    # File handler
    if log_file:
        try:
            Path(log_file).parent.mkdir(parents=True, exist_ok=True)
            fh = logging.FileHandler(log_file)
            fh.setLevel(logging.DEBUG)
            fh.setFormatter(logging.Formatter(
                '%(asctime)s [%(levelname)s] %(message)s',
                datefmt='%Y-%m-%d %H:%M:%S'
            ))
            logger.addHandler(fh)
        except Exception:
            pass  # Skip file logging if directory isn't writable

    # Console handler
    ch = logging.StreamHandler()
    ch.setLevel(logging.DEBUG if verbose else logging.INFO)
    ch.setFormatter(logging.Formatter(
        '%(asctime)s [%(levelname)s] %(message)s',
        datefmt='%H:%M:%S'
    ))
    logger.addHandler(ch)
    return logger
