"""The fuzzing loop: choose a seed, mutate, execute, keep what is new.

Variants switch the state-aware heuristics on one at a time:

========== ============= ====== ===========
variant    tree feedback energy byte ranges
========== ============= ====== ===========
baseline   no            no     no
stt_only   yes           no     no
stt_energy yes           yes    no
full       yes           yes    yes
========== ============= ====== ===========

The tree is maintained in every variant so that transition coverage can be
measured; the baseline just never looks at it.
"""

from __future__ import annotations

import bisect
import logging
import random
import time
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from ..stt import STT, PathId
from ..targets import Outcome, Target
from .energy import DEFAULT_CAP_FACTOR, energy_vector
from .mutate import WHOLE, Range, enlarge_range, identify_bytes, mutate

log = logging.getLogger(__name__)

VARIANTS = ("baseline", "stt_only", "stt_energy", "full")

STATS_FIELDS = ("elapsed", "executions", "features", "stt_nodes",
                "transition_coverage", "corpus_size", "crashes")


class TargetInitFailure(RuntimeError):
    pass


@dataclass
class CampaignConfig:
    variant: str = "full"
    max_executions: Optional[int] = 100_000
    max_seconds: Optional[float] = None
    rng_seed: int = 0
    repetition_cap: int = 16
    reset_implicit_state: bool = True
    # executions between snapshots (seconds when running on a wall budget)
    stats_interval: float = 10_000
    energy_cap_factor: int = DEFAULT_CAP_FACTOR
    # non-interesting mutations of a ranged seed before its range grows
    enlarge_after: int = 64
    max_len: int = 64
    mutate_depth: int = 4
    keep_history: Optional[bool] = None
    # False keeps fuzzing after a crash (coverage runs); the first crash is reported
    stop_on_crash: bool = True
    # state variables whose updates never reach the tree
    blocked_variables: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.energy_cap_factor <= 0:
            raise ValueError("energy_cap_factor must be positive")
        if self.repetition_cap < 1:
            raise ValueError("repetition_cap must be positive")
        if self.keep_history is None:
            self.keep_history = not self.reset_implicit_state

    @property
    def stt_feedback(self) -> bool:
        return self.variant != "baseline"

    @property
    def energy_schedule(self) -> bool:
        return self.variant in ("stt_energy", "full")

    @property
    def byte_ranges(self) -> bool:
        return self.variant == "full"

    @property
    def wall_clock(self) -> bool:
        return self.max_seconds is not None


@dataclass
class SeedEntry:
    data: bytes
    node: int = 0
    path_nodes: tuple = ()
    energy: float = 1.0
    offspring_total: int = 0
    offspring_same_path: int = 0
    mutation_range: Range = WHOLE
    enlargement_stagnation: int = 0


@dataclass
class ExecutionResult:
    outcome: Outcome
    node: int
    new_nodes: int
    new_features: int


@dataclass
class CrashReport:
    bug_id: str
    crashing_input: bytes
    input_history: List[bytes]
    stt_path: PathId
    feature_set: FrozenSet[int]
    classification: Optional[str]
    executions: int


@dataclass
class CampaignStats:
    executions: int = 0
    features: int = 0
    stt_nodes: int = 0
    transition_coverage: int = 0
    corpus_size: int = 0
    crashes: int = 0
    executions_to_crash: Optional[int] = None
    snapshots: List[tuple] = field(default_factory=list)
    wall_seconds: float = 0.0

    def csv_lines(self) -> List[str]:
        lines = [",".join(STATS_FIELDS)]
        for row in self.snapshots:
            lines.append(",".join(_fmt(v) for v in row))
        return lines


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)


def is_interesting(result: ExecutionResult, variant: str = "full") -> bool:
    """New coverage features, or (outside the baseline) new tree nodes."""
    if result.new_features > 0:
        return True
    return variant != "baseline" and result.new_nodes > 0


class Campaign:
    """One fuzzing campaign over one target; owns its tree, corpus and rng."""

    def __init__(self, config: CampaignConfig, target: Target,
                 initial_corpus: Sequence[bytes]):
        if not initial_corpus:
            raise ValueError("initial corpus must not be empty")
        self.config = config
        self.target = target
        self.initial = [bytes(s) for s in initial_corpus]
        self.rng = random.Random(config.rng_seed)
        self.stt = STT(config.repetition_cap)
        self.corpus: List[SeedEntry] = []
        self.corpus_data: List[bytes] = []
        self.seen: set = set()
        self._feats: set = set()
        self.history: Optional[List[bytes]] = [] if config.keep_history else None
        self.stats = CampaignStats()
        self.crash: Optional[CrashReport] = None
        self._cum: List[float] = []
        self._path_flat: List[int] = []
        self._path_starts: List[int] = []
        self._path_lens: List[int] = []
        self._total_energy = 0.0
        self._start = 0.0
        try:
            target.attach(self._feats.add, self._update_probe())
            target.reset()
        except Exception as exc:  # pragma: no cover - defensive
            raise TargetInitFailure(str(exc)) from exc

    def _update_probe(self):
        blocked = frozenset(self.config.blocked_variables)
        on_update = self.stt.on_update
        if not blocked:
            return on_update

        def probe(variable: str, value: int) -> None:
            if variable not in blocked:
                on_update(variable, value)
        return probe

    # -- execution ------------------------------------------------------

    def execute(self, data: bytes) -> ExecutionResult:
        if self.config.reset_implicit_state:
            self.target.reset()
        feats = self._feats
        feats.clear()
        stt = self.stt
        stt.begin_execution()
        try:
            outcome = self.target.run(data)
        finally:
            node = stt.end_execution_node()
        self.stats.executions += 1
        if self.history is not None:
            self.history.append(data)
        new_features = 0 if feats.issubset(self.seen) else len(feats - self.seen)
        return ExecutionResult(outcome, node, stt.new_nodes, new_features)

    # -- corpus and energy ------------------------------------------------

    def _add_seed(self, entry: SeedEntry) -> None:
        entry.path_nodes = self.stt.path_nodes(entry.node)
        self.corpus.append(entry)
        self.corpus_data.append(entry.data)
        self._path_starts.append(len(self._path_flat))
        self._path_lens.append(len(entry.path_nodes))
        self._path_flat.extend(entry.path_nodes)
        if self.config.energy_schedule:
            self.assign_energies()

    def assign_energies(self) -> None:
        """Recompute every seed's energy from the current tree (baseline 1)."""
        stt = self.stt
        total, count = stt.rare_threshold()
        corpus = self.corpus
        energies = energy_vector(
            np.asarray(self._path_flat, dtype=np.int64),
            np.asarray(self._path_starts, dtype=np.int64),
            np.asarray(self._path_lens, dtype=np.int64),
            stt.hit_counts, total, count,
            np.fromiter((s.offspring_total for s in corpus), np.int64, len(corpus)),
            np.fromiter((s.offspring_same_path for s in corpus), np.int64, len(corpus)),
            self.config.energy_cap_factor,
        )
        for seed, e in zip(corpus, energies.tolist()):
            seed.energy = e
        cum = np.cumsum(energies)
        self._cum = cum.tolist()
        self._total_energy = self._cum[-1]

    def choose_next(self) -> SeedEntry:
        corpus = self.corpus
        if not self.config.energy_schedule:
            return corpus[self.rng.randrange(len(corpus))]
        i = bisect.bisect_right(self._cum, self.rng.random() * self._total_energy)
        return corpus[min(i, len(corpus) - 1)]

    # -- main loop --------------------------------------------------------

    def _snapshot(self) -> None:
        st = self.stats
        st.features = len(self.seen)
        st.stt_nodes = self.stt.node_count
        st.transition_coverage = self.stt.transition_coverage()
        st.corpus_size = len(self.corpus)
        if self.config.wall_clock:
            elapsed = round(time.perf_counter() - self._start, 3)
        else:
            elapsed = st.executions
        row = (elapsed, st.executions, st.features, st.stt_nodes,
               st.transition_coverage, st.corpus_size, st.crashes)
        if st.snapshots and st.snapshots[-1][1:] == row[1:]:
            return
        st.snapshots.append(row)

    def _record_crash(self, data: bytes, result: ExecutionResult) -> None:
        self.stats.crashes += 1
        if self.crash is not None:
            return
        out = result.outcome
        history = list(self.history) if self.history is not None else [data]
        self.stats.executions_to_crash = self.stats.executions
        self.crash = CrashReport(
            bug_id=out.bug_id,
            crashing_input=data,
            input_history=history,
            stt_path=self.stt.path_id(result.node),
            feature_set=frozenset(self._feats),
            classification=self.target.bug_class(out.bug_id),
            executions=self.stats.executions,
        )
        self._snapshot()

    def _budget_left(self) -> bool:
        cfg = self.config
        if cfg.max_executions is not None and self.stats.executions >= cfg.max_executions:
            return False
        if cfg.max_seconds is not None and time.perf_counter() - self._start >= cfg.max_seconds:
            return False
        return True

    def run(self) -> "Campaign":
        cfg = self.config
        self._start = time.perf_counter()
        self._snapshot()
        for data in self.initial:
            if not self._budget_left():
                break
            res = self.execute(data)
            self.seen.update(self._feats)
            if res.outcome.crashed:
                self._record_crash(data, res)
                if cfg.stop_on_crash:
                    break
                continue
            self._add_seed(SeedEntry(data, node=res.node))
        if (self.crash is None or not cfg.stop_on_crash) and self.corpus:
            self._loop()
        self._snapshot()
        self.stats.wall_seconds = time.perf_counter() - self._start
        return self

    def _loop(self) -> None:
        cfg = self.config
        rng = self.rng
        stats = self.stats
        seen = self.seen
        feats = self._feats
        stt = self.stt
        target = self.target
        history = self.history
        corpus_data = self.corpus_data
        reset = target.reset if cfg.reset_implicit_state else None
        run = target.run
        begin, end = stt.begin_execution, stt.end_execution_node
        stop = cfg.stop_on_crash
        stt_feedback = cfg.stt_feedback
        byte_ranges = cfg.byte_ranges
        enlarge_after = cfg.enlarge_after
        max_len, depth = cfg.max_len, cfg.mutate_depth
        choose = self.choose_next
        max_exec = cfg.max_executions if cfg.max_executions is not None else float("inf")
        wall = cfg.max_seconds
        interval = cfg.stats_interval
        if cfg.wall_clock:
            next_stat = interval
        else:
            next_stat = (stats.executions // int(interval) + 1) * int(interval)
        start = self._start

        while stats.executions < max_exec:
            if wall is not None and stats.executions % 256 == 0:
                now = time.perf_counter() - start
                if now >= wall:
                    break
                if now >= next_stat:
                    self._snapshot()
                    next_stat += interval
            seed = choose()
            child = mutate(seed.data, rng, seed.mutation_range, corpus_data, max_len, depth)
            # inlined execute()
            if reset is not None:
                reset()
            feats.clear()
            begin()
            outcome = run(child)
            node = end()
            stats.executions += 1
            if history is not None:
                history.append(child)
            seed.offspring_total += 1
            if node == seed.node:
                seed.offspring_same_path += 1
            if outcome.kind == "crash":
                self._record_crash(child, ExecutionResult(outcome, node, stt.new_nodes, 0))
                if stop:
                    break
                continue
            new_feature = not feats.issubset(seen)
            if new_feature or (stt_feedback and stt.new_nodes):
                if new_feature:
                    seen.update(feats)
                entry = SeedEntry(child, node=node)
                if byte_ranges:
                    entry.mutation_range = identify_bytes(seed.data, child, stt.new_nodes)
                seed.enlargement_stagnation = 0
                self._add_seed(entry)
            elif byte_ranges and seed.mutation_range is not WHOLE:
                seed.enlargement_stagnation += 1
                if seed.enlargement_stagnation >= enlarge_after:
                    seed.mutation_range = enlarge_range(seed.mutation_range, len(seed.data))
                    seed.enlargement_stagnation = 0
            if wall is None and stats.executions >= next_stat:
                self._snapshot()
                next_stat += int(interval)


@dataclass
class CampaignResult:
    stats: CampaignStats
    crash: Optional[CrashReport]
    campaign: Campaign


def run_campaign(config: CampaignConfig, target: Target,
                 initial_corpus: Optional[Sequence[bytes]] = None) -> CampaignResult:
    """Fuzz until the budget runs out or the target crashes."""
    corpus = list(initial_corpus) if initial_corpus is not None else target.seeds()
    camp = Campaign(config, target, corpus).run()
    return CampaignResult(camp.stats, camp.crash, camp)
