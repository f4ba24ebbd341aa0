"""Acceptance gate: the eight end-to-end criteria at full scale.

Each test prints (and records for the terminal summary) one line of the form
``criterion N PASS|FAIL: <measurements>`` before asserting.
"""

import random
from collections import Counter
from fractions import Fraction
from types import SimpleNamespace

import numpy as np
import pytest

from statefuzz.cli import main
from statefuzz.engine import CampaignConfig, minimize_history, replay
from statefuzz.engine.energy import assign_energy, energy_vector
from statefuzz.experiments import compare_variants, median, run_trial, run_trials
from statefuzz.instrument import inject, strip
from statefuzz.stt import STT
from statefuzz.svscan import scan_sources
from statefuzz.targets import get_target
from statefuzz.targets.leaky import LeakyParser

from conftest import ACCEPTANCE_LINES, corpus_sources
from test_energy import reference_energy
from test_stt import brute_force_graph, check_against_oracle, oracle

VARIANTS = ("baseline", "stt_only", "stt_energy", "full")

pytestmark = pytest.mark.acceptance


def report(n, ok, detail):
    line = f"criterion {n} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line, flush=True)
    return ok


def test_criterion_1_stateful_bug_speedup():
    results = compare_variants("mini_http2", ["baseline", "full"], trials=20, rng_base=0,
                               max_executions=500_000)
    base = median(t.executions_to_bug for t in results["baseline"])
    full = median(t.executions_to_bug for t in results["full"])
    found = sum(t.crashed for t in results["full"])
    ok = full <= 0.67 * base and found >= 18
    assert report(1, ok, f"median execs-to-crash full {full:g} vs baseline {base:g} "
                         f"(ratio {full / base:.3f}, need <= 0.67); full found {found}/20")


def test_criterion_2_transition_coverage_dominance():
    parts, ok = [], True
    for target in ("mini_http2", "mini_rtsp"):
        results = compare_variants(target, VARIANTS, trials=10, rng_base=0,
                                   max_executions=200_000, stop_on_crash=False)
        med = [median(t.transition_coverage for t in results[v]) for v in VARIANTS]
        ordered = all(a <= b for a, b in zip(med, med[1:]))
        factor = med[-1] / med[0]
        ok &= ordered and factor >= 3
        parts.append(f"{target} " + ", ".join(f"{v} {m:g}" for v, m in zip(VARIANTS, med))
                     + f" ({'ordered' if ordered else 'NOT ordered'}; full/baseline {factor:.1f}x)")
    assert report(2, ok, "; ".join(parts))


def test_criterion_3_implicit_state_bug():
    target = get_target("leaky_parser")
    found, leaked, minimal_ok = {}, {}, True
    sizes = Counter()
    for variant in VARIANTS:
        hits = 0
        for rng in range(20):
            cfg = CampaignConfig(variant=variant, max_executions=200_000, rng_seed=rng,
                                 reset_implicit_state=False)
            trial, result = run_trial("leaky_parser", cfg)
            if not trial.crashed:
                continue
            hits += 1
            reduced = minimize_history(result.crash.input_history, target)
            valid = sum(_accepted(x) for x in reduced)
            sizes[(len(reduced), valid)] += 1
            one_minimal = all(replay(reduced[:i] + reduced[i + 1:], target) is None
                              for i in range(len(reduced)))
            minimal_ok &= valid == 32 and len(reduced) == 32 and one_minimal
        found[variant] = hits
        with_reset = run_trials("leaky_parser", CampaignConfig(variant=variant, max_executions=200_000),
                                trials=20)
        leaked[variant] = sum(t.crashed for t in with_reset)
    ok = all(v >= 18 for v in found.values()) and not any(leaked.values()) and minimal_ok
    assert report(3, ok, f"found without reset {found}; found with reset {leaked}; "
                         f"minimized (length, valid) {dict(sizes)}; 1-minimal {minimal_ok}")


def _accepted(data):
    t = LeakyParser(threshold=10**9)
    t.attach()
    return t.run(data).kind == "ok"


def test_criterion_4_stateless_non_regression():
    results = compare_variants("stateless_parser", ["baseline", "full"], trials=20, rng_base=0,
                               max_executions=500_000)
    base = median(t.executions_to_bug for t in results["baseline"])
    full = median(t.executions_to_bug for t in results["full"])
    ok = full <= 1.25 * base
    assert report(4, ok, f"median execs-to-crash full {full:g} vs baseline {base:g} "
                         f"(ratio {full / base:.3f}, need <= 1.25)")


def _random_tree(rng):
    alphabet = [(v, x) for v in "AB" for x in range(rng.randint(1, 4))]
    seqs = [[rng.choice(alphabet) for _ in range(rng.randint(0, 12))]
            for _ in range(rng.randint(1, 10))]
    stt = STT()
    terminals = []
    for s in seqs:
        stt.begin_execution()
        for var, val in s:
            stt.on_update(var, val)
        terminals.append(stt.end_execution_node())
    return stt, seqs, terminals


def test_criterion_5_energy_formula_oracles():
    rng = random.Random(5)
    checked, bad, bounds_ok = 0, 0, True
    for _ in range(1000):
        stt, seqs, terminals = _random_tree(rng)
        hits_by_prefix, _, truncated = oracle(seqs, stt.repetition_cap)
        # independent hit vector indexed like the tree, from the prefix oracle
        hits = [0] * len(stt.hit_counts)
        for prefix, h in hits_by_prefix.items():
            hits[stt.find(prefix)] = h
        corpus = []
        for node, seq in zip(terminals, truncated):
            total = rng.randint(0, 100)
            corpus.append(SimpleNamespace(
                path_nodes=tuple(stt.find(seq[:i]) for i in range(1, len(seq) + 1)),
                offspring_total=total, offspring_same_path=rng.randint(0, total)))
        base = Fraction(rng.choice([1, 1, 2, 3]), rng.choice([1, 2]))
        got_vec = energy_vector(
            np.array([n for s in corpus for n in s.path_nodes], dtype=np.int64),
            np.cumsum([0] + [len(s.path_nodes) for s in corpus[:-1]]).astype(np.int64),
            np.array([len(s.path_nodes) for s in corpus], dtype=np.int64),
            stt.hit_counts, *stt.rare_threshold(),
            np.array([s.offspring_total for s in corpus], dtype=np.int64),
            np.array([s.offspring_same_path for s in corpus], dtype=np.int64), 10)
        for seed, vec in zip(corpus, got_vec):
            want, e1 = reference_energy(list(seed.path_nodes), hits, base,
                                        seed.offspring_total, seed.offspring_same_path)
            got = assign_energy(seed, stt, base)
            checked += 1
            bad += got != want or abs(float(want / base) - vec) > 1e-9
            bounds_ok &= base <= e1 <= 2 * base and got <= 10 * base
    ok = bad == 0 and bounds_ok
    assert report(5, ok, f"1000 configurations, {checked} seeds, {bad} mismatches "
                         f"(exact rationals); bounds and cap hold: {bounds_ok}")


def test_criterion_6_stt_trie_equivalence():
    rng = random.Random(6)
    bad = 0
    for i in range(1000):
        cap = (1, 2, 16)[i % 3]
        size = rng.randint(1, 8)
        alphabet = [("ABCD"[k % 4], k // 4) for k in range(size)]
        seqs = [[rng.choice(alphabet) for _ in range(rng.randint(0, 32))]
                for _ in range(rng.randint(1, 12))]
        try:
            stt, truncated = check_against_oracle(seqs, cap)
            states, edges, initial = brute_force_graph(truncated)
            g = stt.compact()
            assert set(g.states) == states and dict(g.edges) == dict(edges)
            assert dict(g.initial_edges) == dict(initial)
            assert stt.transition_coverage() == len(set(truncated))
        except AssertionError:
            bad += 1
    assert report(6, bad == 0, f"1000 update-sequence multisets, {bad} disagreements "
                               "with the truncated-trie and pair-enumeration oracles")


def test_criterion_7_scanner_instrumenter_fidelity(labels):
    sources = corpus_sources()
    manifest = scan_sources(sources)
    missed, wrong_sites, not_idem, not_strip = [], [], [], []
    for name, text in sources:
        lab = labels["files"][name]
        found = {e.name for e in manifest.entries
                 if any(loc.path == name for loc in e.assignment_sites)}
        missed += [f"{name}:{v}" for v in lab["state_vars"] if v not in found]
        out, sites, _ = inject(text, manifest, name)
        if len(sites) != lab["injection_sites"]:
            wrong_sites.append(f"{name} {len(sites)}!={lab['injection_sites']}")
        if inject(out, manifest, name)[0] != out:
            not_idem.append(name)
        if strip(out) != text:
            not_strip.append(name)
    labeled = sum(len(v["state_vars"]) for v in labels["files"].values())
    ok = not (missed or wrong_sites or not_idem or not_strip)
    assert report(7, ok, f"recall {labeled - len(missed)}/{labeled}; site-count mismatches "
                         f"{wrong_sites or 'none'}; non-idempotent {not_idem or 'none'}; "
                         f"not strippable {not_strip or 'none'}")


DETERMINISM_RUNS = [
    ["--target", "mini_http2", "--variant", "full", "--max-execs", "200000", "--rng", "1"],
    ["--target", "mini_rtsp", "--variant", "stt_energy", "--max-execs", "100000", "--rng", "2",
     "--keep-going", "--stats-interval", "5000"],
    ["--target", "leaky_parser", "--variant", "full", "--no-implicit-reset", "--max-execs", "200000"],
    ["--target", "stateless_parser", "--variant", "baseline", "--max-execs", "100000", "--rng", "3"],
    ["--target", "mini_http2", "--variant", "stt_only", "--trials", "3", "--max-execs", "30000"],
]


def _tree(path):
    return {str(p.relative_to(path)): p.read_bytes() for p in sorted(path.rglob("*")) if p.is_file()}


def test_criterion_8_determinism(tmp_path):
    differing = []
    for i, args in enumerate(DETERMINISM_RUNS):
        a, b = tmp_path / f"{i}a", tmp_path / f"{i}b"
        code_a = main(["fuzz", *args, "-o", str(a)])
        code_b = main(["fuzz", *args, "-o", str(b)])
        if code_a != code_b or _tree(a) != _tree(b):
            differing.append(" ".join(args[:2]))
    ok = not differing
    assert report(8, ok, f"{len(DETERMINISM_RUNS)} fuzz specs run twice; byte-identical "
                         f"artifacts: {'all' if ok else 'not ' + ', '.join(differing)}")
