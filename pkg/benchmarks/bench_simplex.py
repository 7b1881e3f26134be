"""Compare the compiled and pure-Python simplex kernels.

Usage: python3 benchmarks/bench_simplex.py [--repeat N] [--seed S]

Times three workloads per kernel: small random LPs, node-form purchase
instances, and their scenario-form counterparts (the largest tableaux).
"""

import argparse
import time

import numpy as np

from stagelp.det_equiv import expand_node_form, expand_scenario_form
from stagelp.dsl_parser import parse_text
from stagelp.lp import KERNELS, Status, solve
from stagelp.meta_model import validate_model
from stagelp.verify_oracles import PURCHASE_MODEL, random_lp, random_tree


def workloads(seed):
    rng = np.random.default_rng(seed)
    model = parse_text(PURCHASE_MODEL)
    lps = [random_lp(rng, 8, 8) for _ in range(300)]
    trees = [random_tree(rng, 4, max_branching=3, amount=1.0) for _ in range(20)]
    node, scen = [], []
    for t in trees:
        vm = validate_model(model, t.horizon)
        node.append(expand_node_form(vm, t).lp)
        scen.append(expand_scenario_form(vm, t).lp)
    return {"random LPs (300)": lps, "node form (20, T=4)": node, "scenario form (20, T=4)": scen}


def time_kernel(problems, backend, repeat):
    best = float("inf")
    pivots = 0
    for _ in range(repeat):
        t0 = time.perf_counter()
        pivots = 0
        for p in problems:
            sol = solve(p, backend)
            pivots += sol.iterations
            assert sol.status in (Status.OPTIMAL, Status.INFEASIBLE, Status.UNBOUNDED)
        best = min(best, time.perf_counter() - t0)
    return best, pivots


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    kernels = sorted(KERNELS)
    if "cython" not in KERNELS:
        print("note: compiled kernel not available; timing the pure-Python kernel only")
    loads = workloads(args.seed)
    print(f"{'workload':<26}{'cols (max)':>11}" + "".join(f"{k + ' s':>12}" for k in kernels) + f"{'speedup':>10}")
    for name, problems in loads.items():
        times = {k: time_kernel(problems, k, args.repeat) for k in kernels}
        pivots = {p for _, p in times.values()}
        assert len(pivots) == 1, "kernels disagree on the pivot sequence"
        cols = max(p.n_cols for p in problems)
        row = f"{name:<26}{cols:>11}" + "".join(f"{times[k][0]:>12.4f}" for k in kernels)
        if len(kernels) == 2:
            row += f"{times['python'][0] / times['cython'][0]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
