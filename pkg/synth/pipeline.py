"""
End-to-end synthesis driver for LTL Synth.

    decompose -> per component: bypass, or
        ds:  translate -> determinize -> split
        sd:  translate -> split -> determinize
        lar: HOA input -> paritize -> split
      -> minimize colors -> merge successors -> solve
    -> extract Mealy machines -> simplify -> encode AIGER -> verify

Components are independent and may be handled by a worker pool; results are
assembled in component order. One unrealizable component makes the whole
specification unrealizable.
"""

import concurrent.futures
import logging
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import config as cfg
from .aiger import AigerCircuit, circuit_step, encode
from .arena import Arena, Player, dump_pgsolver, print_game_hoa, split_automaton, unsplit_strategy
from .automaton import Automaton, AutomatonBuilder, complement_parity, is_empty
from .errors import BudgetExceeded, BypassNotApplicable, InternalError, UsageError
from .hoa import parse_hoa_game
from .label import Label, minterms
from .ltl import (Formula, SignalPartition, SubSpecification, decompose, detect_bypass, neg,
                  print_ltl)
from .mealy import MealyMachine, bypass_strategy, minimize_sat, simplify_signatures
from .parity import car_paritize, determinize_nba, merge_identical_successors, minimize_colors
from .solver import SolveResult, solve
from .translate import ltl_to_nba

log = logging.getLogger('ltl-synth')

ALGOS = ('ds', 'sd', 'lar')
SIMPLIFY_MODES = ('none', 'signatures', 'sat', 'both')


@dataclass
class PipelineConfig:
    """Options of one synthesis run; command-line flags map onto these fields."""
    algo: str = 'ds'
    realizability: bool = False
    decompose: bool = True
    bypass: bool = True
    simplify: str = 'both'
    verify: bool = False
    dontcare: int = cfg.DONTCARE_DEFAULT
    hoa_input: Optional[str] = None
    debug_arena: Optional[str] = None
    game_hoa: Optional[str] = None
    workers: int = cfg.WORKERS
    sat_solver: Optional[str] = None

    def validate(self):
        if self.algo not in ALGOS:
            raise UsageError(f"unknown algorithm {self.algo!r} (choose from {', '.join(ALGOS)})")
        if self.simplify not in SIMPLIFY_MODES:
            raise UsageError(f"unknown simplification {self.simplify!r}")
        if self.algo == 'lar' and not self.hoa_input:
            raise UsageError('--algo=lar needs --hoa-input')
        if self.hoa_input and self.algo != 'lar':
            raise UsageError('--hoa-input is only used with --algo=lar')
        if self.dontcare not in (0, 1):
            raise UsageError('dontcare must be 0 or 1')
        if self.workers < 1:
            raise UsageError('--workers must be at least 1')


@dataclass
class SynthesisReport:
    """Verdict, circuit and statistics of one run."""
    realizable: bool
    source: str
    algo: str
    circuit: Optional[AigerCircuit] = None
    components: int = 1
    game_states: int = 0
    strategy_states: int = 0
    timings: Dict[str, float] = field(default_factory=dict)
    verified: Optional[bool] = None

    @property
    def verdict(self) -> str:
        return 'REALIZABLE' if self.realizable else 'UNREALIZABLE'

    @property
    def exit_code(self) -> int:
        return cfg.EXIT_REALIZABLE if self.realizable else cfg.EXIT_UNREALIZABLE

    def csv_row(self) -> List[str]:
        c = self.circuit
        return [self.source, self.algo, self.verdict,
                *(f"{self.timings.get(stage, 0.0):.4f}" for stage in STAGES),
                str(self.game_states), str(self.strategy_states),
                str(c.num_latches if c else ''), str(c.num_gates if c else ''),
                str(c.stats.get('strash_hits', 0) if c else '')]


STAGES = ('translate', 'determinize', 'split', 'solve', 'strategy', 'simplify', 'aiger', 'verify')
CSV_HEADER = ['formula', 'algo', 'verdict', *(f"{s}_s" for s in STAGES),
              'game_states', 'strategy_states', 'latches', 'gates', 'shared_gates']


class _Timer:
    """Per-stage wall clock, safe to share between workers."""

    def __init__(self):
        self.totals = {}  # type: Dict[str, float]
        self._lock = threading.Lock()

    @contextmanager
    def stage(self, name: str):
        start = time.monotonic()
        try:
            yield
        finally:
            elapsed = time.monotonic() - start
            with self._lock:
                self.totals[name] = self.totals.get(name, 0.0) + elapsed


@dataclass
class _Outcome:
    realizable: bool
    machine: Optional[MealyMachine] = None
    game_states: int = 0


# ── Game construction ────────────────────────────────────────────────────────

def _arena_ds(f: Formula, sp: SignalPartition, timer: _Timer) -> Arena:
    with timer.stage('translate'):
        nba = ltl_to_nba(f, sp.ap)
    with timer.stage('determinize'):
        dpa = merge_identical_successors(minimize_colors(determinize_nba(nba)))
    with timer.stage('split'):
        return split_automaton(dpa.complete_with_sink(), sp)


def _arena_sd(f: Formula, sp: SignalPartition, timer: _Timer) -> Arena:
    with timer.stage('translate'):
        nba = ltl_to_nba(f, sp.ap)
    with timer.stage('split'):
        game = split_automaton(nba.complete_with_sink(), sp).to_automaton()
    with timer.stage('determinize'):
        dpa = merge_identical_successors(minimize_colors(determinize_nba(game)))
    return Arena.from_game_automaton(dpa, sp)


def _arena_lar(aut: Automaton, sp: SignalPartition, timer: _Timer) -> Arena:
    with timer.stage('determinize'):
        dpa = merge_identical_successors(minimize_colors(car_paritize(aut)))
    with timer.stage('split'):
        return split_automaton(dpa.complete_with_sink(), sp)


def _check_certificate(ar: Arena, result: SolveResult):
    """The environment's strategy must keep plays inside its winning region."""
    env_region = result.region(Player.ENV)
    if ar.initial not in env_region:
        raise InternalError('unrealizable verdict without an environment-won initial state')
    for s in env_region:
        if ar.owner[s] == Player.ENV:
            k = result.env_strategy.get(s)
            if k is None or ar.edges[s][k].dst not in env_region:
                raise InternalError(f"environment strategy leaves its region at state {s}")
        elif any(e.dst not in env_region for e in ar.edges[s]):
            raise InternalError(f"controller escapes the environment region at state {s}")


def _write_debug(path: Optional[str], index: int, text: str):
    if not path:
        return
    target = path if index == 0 else f"{path}.{index}"
    with open(target, 'w') as f:
        f.write(text)
    log.debug(f"[PIPELINE] wrote {target}")


def _solve_arena(ar: Arena, config: PipelineConfig, index: int, timer: _Timer) -> _Outcome:
    _write_debug(config.debug_arena, index, dump_pgsolver(ar))
    _write_debug(config.game_hoa, index, print_game_hoa(ar))
    with timer.stage('solve'):
        result = solve(ar)
    if not result.controller_wins(ar.initial):
        _check_certificate(ar, result)
        return _Outcome(False, None, ar.num_states)
    if config.realizability:
        return _Outcome(True, None, ar.num_states)
    with timer.stage('strategy'):
        machine = unsplit_strategy(ar, result.strategy)
    return _Outcome(True, machine, ar.num_states)


def _simplify(machine: MealyMachine, config: PipelineConfig, timer: _Timer) -> MealyMachine:
    if config.simplify == 'none':
        return machine
    with timer.stage('simplify'):
        if config.simplify in ('signatures', 'both'):
            machine = simplify_signatures(machine)
        if config.simplify in ('sat', 'both'):
            from .sat import default_solver
            machine = minimize_sat(machine, default_solver(config.sat_solver))
    return machine


def _component(sub: SubSpecification, index: int, config: PipelineConfig,
               timer: _Timer) -> _Outcome:
    sp = SignalPartition(sub.inputs, sub.outputs)
    outcome = None
    if config.bypass:
        pattern = detect_bypass(sub.formula, sp)
        if pattern is not None:
            try:
                with timer.stage('strategy'):
                    ok, machine = bypass_strategy(pattern, sp)
                log.info(f"[BYPASS] component {index}: {'realizable' if ok else 'unrealizable'} "
                         f"without a game")
                outcome = _Outcome(ok, None if config.realizability else machine)
            except BypassNotApplicable as e:
                log.warning(f"[BYPASS] component {index}: {e}; solving the game instead")
    if outcome is None:
        build = _arena_ds if config.algo == 'ds' else _arena_sd
        outcome = _solve_arena(build(sub.formula, sp, timer), config, index, timer)
    if outcome.machine is not None:
        outcome.machine = _simplify(outcome.machine, config, timer)
    return outcome


def _run_components(subs: List[SubSpecification], config: PipelineConfig,
                    timer: _Timer) -> List[_Outcome]:
    if config.workers == 1 or len(subs) == 1:
        outcomes = []
        for k, sub in enumerate(subs):
            outcomes.append(_component(sub, k, config, timer))
            if not outcomes[-1].realizable:
                break
        return outcomes
    with concurrent.futures.ThreadPoolExecutor(max_workers=config.workers) as executor:
        futures = {executor.submit(_component, sub, k, config, timer): k for k, sub in enumerate(subs)}
        done = {}  # type: Dict[int, _Outcome]
        for future in concurrent.futures.as_completed(futures):
            k = futures[future]
            done[k] = future.result()
            if not done[k].realizable:
                # components already running still finish before the pool closes
                cancelled = sum(1 for f in futures if f.cancel())
                log.info(f"[PIPELINE] component {k} is unrealizable; {cancelled} queued component(s) cancelled")
                return [done[j] for j in sorted(done)]
        return [done[k] for k in range(len(subs))]


# ── Entry points ─────────────────────────────────────────────────────────────

def _finish(report: SynthesisReport, outcomes: List[_Outcome], p: SignalPartition,
            config: PipelineConfig, timer: _Timer, check) -> SynthesisReport:
    report.realizable = all(o.realizable for o in outcomes)
    report.game_states = sum(o.game_states for o in outcomes)
    if report.realizable and not config.realizability:
        machines = [o.machine for o in outcomes]
        report.strategy_states = sum(m.num_states for m in machines)
        with timer.stage('aiger'):
            report.circuit = encode(machines, p, config.dontcare)
        if config.verify:
            with timer.stage('verify'):
                report.verified = check(report.circuit)
            if not report.verified:
                raise InternalError('synthesized circuit violates the specification')
            log.info('[VERIFY] circuit satisfies the specification')
    report.timings = dict(timer.totals)
    log.info(f"[PIPELINE] {report.verdict} ({report.components} component(s), "
             f"{report.game_states} game states, {sum(timer.totals.values()):.3f}s)")
    return report


def run(config: PipelineConfig, f: Formula, p: SignalPartition) -> SynthesisReport:
    """Synthesize a controller for the LTL formula f."""
    config.validate()
    if config.algo == 'lar':
        raise UsageError('--algo=lar reads an automaton; use run_hoa')
    p.check_covers(f)
    timer = _Timer()
    subs = decompose(f, p) if config.decompose else [SubSpecification(f, p.outputs, p.inputs)]
    report = SynthesisReport(False, print_ltl(f), config.algo, components=len(subs))
    outcomes = _run_components(subs, config, timer)
    return _finish(report, outcomes, p, config, timer, lambda c: verify_circuit(c, f, p))


def run_hoa(config: PipelineConfig, text: str,
            p: Optional[SignalPartition] = None) -> SynthesisReport:
    """Synthesize from a deterministic Emerson-Lei automaton given as HOA.

    Without an explicit partition, the controllable-AP header names the outputs.
    """
    config.validate()
    aut, controllable = parse_hoa_game(text)
    if p is None:
        if not controllable:
            raise UsageError('HOA input declares no controllable-AP; pass --ins/--outs')
        p = SignalPartition(tuple(x for x in aut.ap if x not in controllable), tuple(controllable))
    missing = [x for x in aut.ap if x not in p.ap]
    if missing:
        raise UsageError(f"automaton propositions not in --ins/--outs: {', '.join(missing)}")
    aut = aut.with_ap(p.ap)
    timer = _Timer()
    report = SynthesisReport(False, config.hoa_input or aut.name or 'hoa', 'lar')
    outcome = _solve_arena(_arena_lar(aut, p, timer), config, 0, timer)
    if outcome.machine is not None:
        outcome.machine = _simplify(outcome.machine, config, timer)
    return _finish(report, [outcome], p, config, timer,
                   lambda c: verify_circuit_against_automaton(c, aut, p))


# ── Verification ─────────────────────────────────────────────────────────────

def _circuit_product_empty(c: AigerCircuit, aut: Automaton, p: SignalPartition) -> bool:
    """No run of the circuit, under any inputs, is accepted by aut."""
    if set(c.inputs) != set(p.inputs) or set(c.output_names()) != set(p.outputs):
        raise UsageError('circuit signals do not match the partition')
    aut = aut.with_ap(p.ap)
    in_mask = Label.true(p.ap).mask_of(p.inputs)
    letters = []
    for bits in minterms(in_mask):
        letters.append({x: bool(bits >> k & 1) for k, x in enumerate(p.ap) if in_mask >> k & 1})

    builder = AutomatonBuilder(())
    index = {}  # type: Dict[Tuple[int, int], int]
    start = (0, aut.initial)
    index[start] = builder.new_state()
    queue = [start]
    true = Label.true(())
    while queue:
        latches, q = queue.pop()
        src = index[(latches, q)]
        for letter in letters:
            outputs, nxt = circuit_step(c, latches, letter)
            word = dict(letter)
            word.update(outputs)
            for e in aut.edges[q]:
                if not e.label.evaluate(word):
                    continue
                key = (nxt, e.dst)
                if key not in index:
                    if len(index) >= cfg.VERIFY_STATE_BUDGET:
                        raise BudgetExceeded('verification product', cfg.VERIFY_STATE_BUDGET)
                    index[key] = builder.new_state()
                    queue.append(key)
                builder.add_edge(src, true, e.colors, index[key])
    prod = builder.build(0, aut.acceptance)
    empty = is_empty(prod)
    log.debug(f"[VERIFY] product with {prod.num_states} states, "
              f"{'empty' if empty else 'NOT empty'}")
    return empty


def verify_circuit(c: AigerCircuit, f: Formula, p: SignalPartition) -> bool:
    """True when every behavior of the circuit satisfies f."""
    return _circuit_product_empty(c, ltl_to_nba(neg(f), p.ap), p)


def verify_circuit_against_automaton(c: AigerCircuit, a: Automaton, p: SignalPartition) -> bool:
    """True when every behavior of the circuit is accepted by the deterministic automaton a."""
    dpa = minimize_colors(car_paritize(a.with_ap(p.ap)))
    return _circuit_product_empty(c, complement_parity(dpa.complete_with_sink()), p)
