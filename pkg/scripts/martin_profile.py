#!/usr/bin/env python3
"""Martin-kernel convergence profile: Green-ratio approximations along a ray.

For one walk spec, computes K_hat(x, y_n) = G_partial(x, y_n) / G_partial(o, y_n)
for three standard x choices and prints the distance to the closed-form kernel
at each depth.

Usage: python scripts/martin_profile.py <walk.json> [n_max] [depths...]
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from dlwalks import mc
from dlwalks.boundary import solve_coefficients, standard_boundary_points
from dlwalks.tree import ROOT, ancestor, descend
from dlwalks.walks import load_walk_spec


def main():
    if len(sys.argv) < 2:
        print(__doc__)
        return 2
    spec = load_walk_spec(sys.argv[1])
    n_max = int(sys.argv[2]) if len(sys.argv) > 2 else 300
    depths = [int(d) for d in sys.argv[3:]] or [2, 4, 6, 8, 10]
    walk = spec.measure.project_to_tree(1)
    coeffs = solve_coefficients(walk, J=200)
    xi = standard_boundary_points(ks=(1,), depth=24)[0]
    xs = [
        ("on-ray depth 1", descend(ancestor(ROOT, 1), (1, 0))),
        ("off-ray sibling", descend(ancestor(ROOT, 1), (1, 1))),
        ("below origin", descend(ROOT, (1,))),
    ]
    print(f"walk={sys.argv[1]}  case={coeffs.case.kind}  n_max={n_max}")
    print("x,n,k_hat,target,rel_err")
    for name, x in xs:
        rep = mc.martin_convergence_test(walk, coeffs, x, xi, depths, n_max)
        for row in rep.rows:
            print(f"{name},{row.n},{row.k_hat!r},{rep.target!r},{row.rel_err!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
