#!/usr/bin/env python3
"""Classify every walk spec in walks/ and print a one-line summary each.

Usage: python scripts/classify_walks.py [walks_dir]
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from dlwalks.boundary import enumerate_minimal_families
from dlwalks.walks import load_walk_spec


def main():
    walks_dir = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else
                             pathlib.Path(__file__).resolve().parents[1] / "walks")
    for path in sorted(walks_dir.glob("*.json")):
        spec = load_walk_spec(path)
        rep = enumerate_minimal_families(spec.measure, J=160)
        c0 = "none" if rep.c0 is None else f"{rep.c0:+.6f}"
        sides = ", ".join(f"T{f.side}:{f.tree_case.kind}" for f in rep.families)
        const = "+const" if rep.includes_constant else ""
        print(f"{path.name:34s} DL({spec.q},{spec.r})  case {rep.case}  "
              f"alpha={rep.alpha:+.3f}  c0={c0:>9s}  [{sides}] {const}")


if __name__ == "__main__":
    main()
