"""Scan a C source tree, write the manifest and instrumented copies of every file.

    python scripts/scan_and_instrument.py testdata/c_corpus -o /tmp/instrumented
"""

import argparse
from pathlib import Path

from statefuzz.instrument import emit_runtime_header, inject
from statefuzz.svscan import scan_sources

SUFFIXES = (".c", ".h", ".cc", ".cpp")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("src", type=Path)
    ap.add_argument("-o", "--out", type=Path, required=True)
    ap.add_argument("--block", action="append", default=[], metavar="VAR")
    args = ap.parse_args(argv)

    files = sorted(p for p in args.src.rglob("*") if p.suffix in SUFFIXES)
    sources = []
    for p in files:
        with open(p, newline="") as fh:
            sources.append((str(p.relative_to(args.src)), fh.read()))
    diagnostics = []
    manifest = scan_sources(sources, args.block, diagnostics)
    for d in diagnostics:
        print("note:", d)

    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "manifest.tsv").write_text(manifest.dumps())
    (args.out / "stt_runtime.h").write_text(emit_runtime_header())
    total_sites = total_conflicts = 0
    for rel, text in sources:
        out, sites, conflicts = inject(text, manifest, rel)
        dest = args.out / rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        with open(dest, "w", newline="") as fh:
            fh.write(out)
        for c in conflicts:
            print(f"{c}  ({c.reason})")
        total_sites += len(sites)
        total_conflicts += len(conflicts)
    active = sum(not e.blocked for e in manifest.entries)
    print(f"{len(sources)} files, {active} state variables, {total_sites} sites, "
          f"{total_conflicts} conflicts -> {args.out}")


if __name__ == "__main__":
    main()
