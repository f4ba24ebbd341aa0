"""Command line front end: ``statefuzz fuzz|replay|minimize|svscan|instrument``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from .engine import CampaignConfig, NotReproducible, minimize_history
from .engine.campaign import VARIANTS
from .experiments import TrialResult, median, run_trial
from .instrument import dynamic_assignments, inject
from .stt import STT, export_dot
from .svscan import VariableManifest, scan_sources
from .targets import REGISTRY, Target, get_target

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_REPRODUCIBLE = 3
EXIT_CRASH = 10

SEED_DIR_ENV = "STATEFUZZ_SEED_DIR"
SUMMARY_FIELDS = ("trial", "rng", "crashed", "bug_id", "time_to_bug",
                  "executions_to_bug", "executions", "transition_coverage", "features")


class ConfigError(ValueError):
    pass


@dataclass
class RunSpec:
    target: str
    variant: str = "full"
    seed_dir: Optional[Path] = None
    max_executions: Optional[int] = None
    max_seconds: Optional[float] = None
    rng: int = 0
    trials: int = 1
    jobs: int = 1
    out_dir: Path = Path("out")
    append: bool = False
    stats_interval: Optional[float] = None
    repetition_cap: int = 16
    reset_implicit_state: bool = True
    keep_going: bool = False
    blocked: List[str] = field(default_factory=list)

    def config(self, rng_seed: Optional[int] = None) -> CampaignConfig:
        max_execs = self.max_executions
        if max_execs is None and self.max_seconds is None:
            max_execs = 100_000
        interval = self.stats_interval
        if interval is None:
            interval = 1.0 if self.max_seconds is not None else 10_000
        try:
            return CampaignConfig(
                variant=self.variant,
                max_executions=max_execs,
                max_seconds=self.max_seconds,
                rng_seed=self.rng if rng_seed is None else rng_seed,
                repetition_cap=self.repetition_cap,
                reset_implicit_state=self.reset_implicit_state,
                stats_interval=interval,
                stop_on_crash=not self.keep_going,
                blocked_variables=tuple(self.blocked),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def load_inputs(directory: Path) -> List[bytes]:
    """Files of ``directory`` in name order."""
    return [p.read_bytes() for p in sorted(directory.iterdir()) if p.is_file()]


def write_inputs(directory: Path, inputs: Sequence[bytes]) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    width = max(6, len(str(len(inputs))))
    for i, data in enumerate(inputs):
        (directory / f"{i:0{width}d}").write_bytes(data)


def seed_corpus(spec: RunSpec) -> Optional[List[bytes]]:
    seed_dir = os.environ.get(SEED_DIR_ENV) or spec.seed_dir
    if not seed_dir:
        return None
    path = Path(seed_dir)
    if not path.is_dir():
        raise ConfigError(f"seed directory {path} does not exist")
    corpus = load_inputs(path)
    if not corpus:
        raise ConfigError(f"seed directory {path} is empty")
    return corpus


def _prepare_dir(path: Path, append: bool) -> None:
    if path.exists() and any(path.iterdir()) and not append:
        raise ConfigError(f"output directory {path} is not empty (use --append)")
    path.mkdir(parents=True, exist_ok=True)


def write_artifacts(out: Path, result, target: Target) -> None:
    out.mkdir(parents=True, exist_ok=True)
    stt = result.campaign.stt
    (out / "stats.csv").write_text("\n".join(result.stats.csv_lines()) + "\n")
    (out / "stt.json").write_text(stt.to_json() + "\n")
    (out / "stt.dot").write_text(export_dot(stt.compact(), target.value_names()))
    crash = result.crash
    if crash is None:
        return
    (out / f"crash-{crash.bug_id}").write_bytes(crash.crashing_input)
    write_inputs(out / "history", crash.input_history)
    info = {
        "bug_id": crash.bug_id,
        "classification": crash.classification,
        "executions": crash.executions,
        "stt_path": [[v, x] for v, x in crash.stt_path],
        "features": sorted(crash.feature_set),
        "history_length": len(crash.input_history),
    }
    (out / "crash.json").write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return "inf" if math.isinf(v) else f"{v:g}"
    if v is None:
        return ""
    return str(v)


def summary_csv(trials: Sequence[TrialResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_FIELDS)
    for i, t in enumerate(trials):
        w.writerow([i, t.rng_seed, int(t.crashed), t.bug_id or "", _fmt(t.time_to_bug),
                    _fmt(t.executions_to_bug), t.executions, t.transition_coverage, t.features])
    w.writerow(["median", "", sum(t.crashed for t in trials), "",
                _fmt(median(t.time_to_bug for t in trials)),
                _fmt(median(t.executions_to_bug for t in trials)),
                _fmt(median(t.executions for t in trials)),
                _fmt(median(t.transition_coverage for t in trials)),
                _fmt(median(t.features for t in trials))])
    return buf.getvalue()


def _fuzz_trial(args) -> TrialResult:
    target, config, corpus, out = args
    trial, result = run_trial(target, config, corpus)
    write_artifacts(out, result, result.campaign.target)
    return trial


def cmd_fuzz(spec: RunSpec) -> int:
    if spec.target not in REGISTRY:
        raise ConfigError(f"unknown target {spec.target!r} (choose from {', '.join(REGISTRY)})")
    if spec.variant not in VARIANTS:
        raise ConfigError(f"unknown variant {spec.variant!r} (choose from {', '.join(VARIANTS)})")
    if spec.trials < 1:
        raise ConfigError("--trials must be at least 1")
    corpus = seed_corpus(spec)
    spec.config()  # validate before touching the output directory
    _prepare_dir(spec.out_dir, spec.append)

    if spec.trials == 1:
        trial = _fuzz_trial((spec.target, spec.config(), corpus, spec.out_dir))
        _report(trial)
        return EXIT_CRASH if trial.crashed else EXIT_OK

    work = [(spec.target, spec.config(spec.rng + i), corpus, spec.out_dir / f"trial_{i:02d}")
            for i in range(spec.trials)]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            trials = list(pool.map(_fuzz_trial, work))
    else:
        trials = [_fuzz_trial(w) for w in work]
    (spec.out_dir / "summary.csv").write_text(summary_csv(trials))
    for t in trials:
        _report(t)
    found = sum(t.crashed for t in trials)
    print(f"found {found}/{len(trials)}; median time-to-bug "
          f"{_fmt(median(t.time_to_bug for t in trials))}")
    return EXIT_CRASH if found else EXIT_OK


def _report(t: TrialResult) -> None:
    status = f"crash {t.bug_id} after {t.executions_to_bug} executions" if t.crashed else "no crash"
    print(f"rng {t.rng_seed}: {status}; transition coverage {t.transition_coverage}, "
          f"features {t.features}, executions {t.executions}")


def _read_inputs(path: Path) -> List[bytes]:
    if path.is_dir():
        return load_inputs(path)
    if path.is_file():
        return [path.read_bytes()]
    raise FileNotFoundError(path)


def cmd_replay(path: Path, target_name: str, implicit: bool = False) -> int:
    """Print each input's outcome and tree path; stops at the first crash."""
    target = get_target(target_name)
    inputs = _read_inputs(path)
    stt = STT()
    target.attach(None, stt.on_update)
    target.reset()
    crash = None
    for i, data in enumerate(inputs):
        if i and not implicit:
            target.reset()
        stt.begin_execution()
        out = target.run(data)
        path_id = stt.end_execution()
        shown = " ".join(f"{v}={x}" for v, x in path_id) or "(empty)"
        print(f"input {i}: {out.kind} path {shown}")
        if out.crashed:
            crash = out
            break
    if crash is None:
        print("no crash")
        return EXIT_OK
    print(f"crash {crash.bug_id} ({target.bug_class(crash.bug_id)})")
    return EXIT_CRASH


def cmd_minimize(path: Path, target_name: str, out: Optional[Path] = None) -> int:
    target = get_target(target_name)
    history = load_inputs(path)
    try:
        reduced = minimize_history(history, target)
    except NotReproducible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_REPRODUCIBLE
    out = out or path.with_name(path.name + ".min")
    if out.exists():
        for old in out.iterdir():
            old.unlink()
    write_inputs(out, reduced)
    ratio = len(reduced) / len(history)
    print(f"minimized {len(history)} -> {len(reduced)} inputs (ratio {ratio:.3f}); wrote {out}")
    return EXIT_OK


def _c_sources(paths: Sequence[str]) -> List[tuple]:
    sources = []
    for p in paths:
        path = Path(p)
        files = sorted(f for f in path.rglob("*") if f.suffix in (".c", ".h", ".cc", ".cpp")) \
            if path.is_dir() else [path]
        for f in files:
            sources.append((str(f), f.read_text(encoding="utf-8", errors="replace")))
    return sources


def cmd_svscan(paths: Sequence[str], blocked: Sequence[str], out: Optional[Path]) -> int:
    diagnostics: List[str] = []
    manifest = scan_sources(_c_sources(paths), blocked, diagnostics)
    for d in diagnostics:
        print(d, file=sys.stderr)
    text = manifest.dumps()
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)
    return EXIT_OK


def cmd_instrument(path: Path, manifest_path: Path, out: Optional[Path]) -> int:
    manifest = VariableManifest.loads(manifest_path.read_text())
    # newline="" keeps CRLF files byte-identical outside the inserted lines
    with open(path, newline="") as fh:
        source = fh.read()
    text, sites, conflicts = inject(source, manifest, str(path))
    for c in conflicts:
        print(f"{c}  ({c.reason})", file=sys.stderr)
    for d in dynamic_assignments(source, manifest, str(path)):
        print(f"NOTE {d.file}:{d.line} {d.variable} {d.reason}, not instrumented", file=sys.stderr)
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    print(f"{len(sites)} sites, {len(conflicts)} conflicts", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="statefuzz", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fuzz", help="run a fuzzing campaign (or several trials)")
    f.add_argument("--target", required=True)
    f.add_argument("--variant", default="full")
    f.add_argument("--seeds", type=Path, default=None,
                   help=f"seed corpus directory (${SEED_DIR_ENV} overrides)")
    f.add_argument("--max-execs", type=int, default=None)
    f.add_argument("--max-seconds", type=float, default=None)
    f.add_argument("--rng", type=int, default=0)
    f.add_argument("--trials", type=int, default=1)
    f.add_argument("--jobs", type=int, default=1, help="worker processes for --trials")
    f.add_argument("--stats-interval", type=float, default=None,
                   help="executions between stats rows (seconds with --max-seconds)")
    f.add_argument("--repetition-cap", type=int, default=16)
    f.add_argument("--no-implicit-reset", action="store_true",
                   help="keep persistent target state across executions")
    f.add_argument("--keep-going", action="store_true", help="continue after the first crash")
    f.add_argument("--block", action="append", default=[], metavar="VAR")
    f.add_argument("--append", action="store_true", help="allow a non-empty output directory")
    f.add_argument("-o", "--out", type=Path, default=Path("out"))

    r = sub.add_parser("replay", help="re-execute an input file or history directory")
    r.add_argument("path", type=Path)
    r.add_argument("--target", required=True)
    r.add_argument("--implicit", action="store_true", help="do not reset between inputs")

    m = sub.add_parser("minimize", help="reduce a crashing input history")
    m.add_argument("history", type=Path)
    m.add_argument("--target", required=True)
    m.add_argument("-o", "--out", type=Path, default=None)

    s = sub.add_parser("svscan", help="find candidate state variables in C sources")
    s.add_argument("paths", nargs="+")
    s.add_argument("--block", action="append", default=[], metavar="NAME")
    s.add_argument("-o", "--out", type=Path, default=None)

    i = sub.add_parser("instrument", help="inject state update calls into a C file")
    i.add_argument("file", type=Path)
    i.add_argument("--manifest", type=Path, required=True)
    i.add_argument("-o", "--out", type=Path, default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fuzz":
            spec = RunSpec(
                target=args.target, variant=args.variant, seed_dir=args.seeds,
                max_executions=args.max_execs, max_seconds=args.max_seconds, rng=args.rng,
                trials=args.trials, jobs=args.jobs, out_dir=args.out, append=args.append,
                stats_interval=args.stats_interval, repetition_cap=args.repetition_cap,
                reset_implicit_state=not args.no_implicit_reset, keep_going=args.keep_going,
                blocked=args.block,
            )
            return cmd_fuzz(spec)
        if args.command in ("replay", "minimize") and args.target not in REGISTRY:
            raise ConfigError(f"unknown target {args.target!r}")
        if args.command == "replay":
            return cmd_replay(args.path, args.target, args.implicit)
        if args.command == "minimize":
            if not args.history.is_dir():
                raise FileNotFoundError(args.history)
            return cmd_minimize(args.history, args.target, args.out)
        if args.command == "svscan":
            return cmd_svscan(args.paths, args.block, args.out)
        return cmd_instrument(args.file, args.manifest, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: no such file or directory: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
