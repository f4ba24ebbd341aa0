"""Write every target's bug witnesses to testdata/witnesses/<bug_id>/."""

import argparse
import shutil
from pathlib import Path

from statefuzz.cli import write_inputs
from statefuzz.targets import REGISTRY, get_target


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "testdata" / "witnesses"))
    args = ap.parse_args(argv)
    root = Path(args.out)
    for name in sorted(REGISTRY):
        for bug_id, inputs in get_target(name).witnesses().items():
            d = root / bug_id
            if d.exists():
                shutil.rmtree(d)
            write_inputs(d, inputs)
            print(f"{name}\t{bug_id}\t{len(inputs)} inputs")


if __name__ == "__main__":
    main()
