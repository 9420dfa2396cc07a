#!/usr/bin/env python3
"""Mesh-refinement study for the minimization cascade.

Solves Div(|Du|^(p-2) Du) = 1 with the closed-form radial boundary trace on
a sequence of meshes, reporting W^{1,p} errors against the radial oracle,
the localized stress norms, and the measured estimate constant per level.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from quclab.integrands import gallery
from quclab.solver import (ProblemSpec, make_boundary, make_source, minimize,
                           radial_power_solution, sobolev_report, w1p_error)
from quclab.solver.problem import radial_power_gradient
from quclab.utils import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--cells", type=str, default="32,64,128,256")
    ap.add_argument("--ball-center", type=float, nargs=2, default=(0.2, 0.1))
    ap.add_argument("--ball-radius", type=float, default=0.15)
    ap.add_argument("--m", type=float, default=2.0)
    ap.add_argument("--out", type=Path, default=Path("out/solver_convergence.csv"))
    args = ap.parse_args()

    rows = []
    prev_err = None
    for cells in (int(c) for c in args.cells.split(",")):
        spec = ProblemSpec(integrand=gallery("power", p=args.p), cells=cells,
                           boundary=make_boundary("radial_power", p=args.p),
                           source=make_source("constant", value=1.0))
        sol = minimize(spec)
        err = w1p_error(sol, radial_power_solution(args.p),
                        radial_power_gradient(args.p), args.p)
        rep = sobolev_report(sol, args.ball_center, args.ball_radius, m=args.m)
        ratio = prev_err / err if prev_err else float("nan")
        prev_err = err
        rows.append([cells, err, ratio, rep.v_w1m_b, rep.f_lm_2b,
                     rep.v_ltheta_2b, rep.c_meas])
        print(f"cells={cells:4d}  W1p err={err:.4e}  ratio={ratio:5.2f}  "
              f"C_meas={rep.c_meas:.6f}")
    write_csv(args.out, ["cells", "w1p_error", "ratio", "v_w1m_B",
                         "f_lm_2B", "v_ltheta_2B", "c_meas"], rows)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
