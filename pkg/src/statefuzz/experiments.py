"""Repeated-trial helpers shared by the CLI, the scripts and the acceptance tests."""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .engine import CampaignConfig, CampaignResult, run_campaign
from .targets import get_target

INF = math.inf


@dataclass
class TrialResult:
    rng_seed: int
    crashed: bool
    bug_id: Optional[str]
    executions_to_bug: float
    # elapsed column of the first crashing stats row (executions or seconds)
    time_to_bug: float
    executions: int
    transition_coverage: int
    features: int
    stt_nodes: int


def summarize(result: CampaignResult, rng_seed: int) -> TrialResult:
    st = result.stats
    crash_rows = [row for row in st.snapshots if row[-1] > 0]
    ttb = crash_rows[0][0] if crash_rows else INF
    return TrialResult(
        rng_seed=rng_seed,
        crashed=result.crash is not None,
        bug_id=result.crash.bug_id if result.crash else None,
        executions_to_bug=st.executions_to_crash if result.crash else INF,
        time_to_bug=ttb,
        executions=st.executions,
        transition_coverage=st.transition_coverage,
        features=st.features,
        stt_nodes=st.stt_nodes,
    )


def run_trial(target: str, config: CampaignConfig,
              corpus: Optional[Sequence[bytes]] = None) -> Tuple[TrialResult, CampaignResult]:
    result = run_campaign(config, get_target(target), corpus)
    return summarize(result, config.rng_seed), result


def _trial_only(args) -> TrialResult:
    target, config, corpus = args
    return run_trial(target, config, corpus)[0]


def trial_configs(base: CampaignConfig, trials: int, rng_base: int = 0) -> List[CampaignConfig]:
    return [replace(base, rng_seed=rng_base + i) for i in range(trials)]


def run_trials(target: str, base: CampaignConfig, trials: int, rng_base: int = 0,
               jobs: int = 1, corpus: Optional[Sequence[bytes]] = None) -> List[TrialResult]:
    """``trials`` independent campaigns with rng seeds ``rng_base, rng_base+1, ...``."""
    work = [(target, cfg, corpus) for cfg in trial_configs(base, trials, rng_base)]
    if jobs <= 1:
        return [_trial_only(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_trial_only, work))


def median(values: Iterable[float]) -> float:
    """Median that treats ``inf`` (bug not found) as an ordinary large value."""
    vals = list(values)
    if not vals:
        return INF
    return statistics.median(vals)


def compare_variants(target: str, variants: Sequence[str], trials: int,
                     rng_base: int = 0, jobs: int = 1,
                     **overrides) -> Dict[str, List[TrialResult]]:
    out = {}
    for variant in variants:
        base = CampaignConfig(variant=variant, **overrides)
        out[variant] = run_trials(target, base, trials, rng_base, jobs)
    return out
