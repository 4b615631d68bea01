"""Sweep the outlier density and record where AltProj stops recovering.

Usage: python scripts/calibrate_breakdown.py [--seeds 20] [--out calibration/altproj_breakdown.json]

The breakdown alpha is the smallest swept density at which fewer than half of
the seeds reach the recovery tolerance. The acceptance regime must sit at or
below half of it.
"""

import argparse
import json
import logging
import time
from pathlib import Path

import numpy as np

from robust_cur.diagnostics import relative_error
from robust_cur.rpca import RpcaConfig, altproj
from robust_cur.sampling import split_seeds
from robust_cur.synth import SynthConfig, gen_problem

M = N = 200
RANK = 3
KAPPA = 5.0
TOL = 1e-6
ACCEPTANCE_ALPHA = 0.02


def sweep(alphas, seeds: int, master: int = 2024) -> list[dict]:
    rows = []
    for alpha in alphas:
        errors = []
        for seed in split_seeds(master, seeds):
            gt = gen_problem(SynthConfig(M, N, RANK, KAPPA, alpha, seed=seed))
            res = altproj(gt.D, RpcaConfig(RANK))
            errors.append(relative_error(gt.L, res.L_hat))
        rate = float(np.mean(np.array(errors) <= TOL))
        rows.append({"alpha": alpha, "success_rate": rate, "median_error": float(np.median(errors))})
        print(f"alpha={alpha:.3f} success={rate:.2f} median_err={np.median(errors):.3g}", flush=True)
        if len(rows) >= 3 and all(row["success_rate"] < 0.5 for row in rows[-3:]):
            break  # well past breakdown
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--out", type=Path, default=Path("calibration/altproj_breakdown.json"))
    args = parser.parse_args()
    # monotonicity warnings are expected past breakdown
    logging.getLogger("robust_cur").setLevel(logging.ERROR)
    alphas = [round(float(a), 3) for a in np.arange(0.02, 0.205, 0.01)]
    start = time.perf_counter()
    rows = sweep(alphas, args.seeds)
    broken = [row["alpha"] for row in rows if row["success_rate"] < 0.5]
    breakdown = broken[0] if broken else None
    result = {
        "regime": {"m": M, "n": N, "r": RANK, "kappa": KAPPA, "success_tol": TOL, "seeds": args.seeds,
                   "solver": "altproj defaults"},
        "sweep": rows,
        "breakdown_alpha": breakdown,
        "acceptance_alpha": ACCEPTANCE_ALPHA,
        "acceptance_within_half": bool(breakdown is None or ACCEPTANCE_ALPHA <= breakdown / 2),
        "seconds": time.perf_counter() - start,
    }
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(result, indent=2) + "\n")
    print(f"breakdown alpha: {breakdown}, acceptance alpha {ACCEPTANCE_ALPHA} within half: "
          f"{result['acceptance_within_half']}")


if __name__ == "__main__":
    main()
