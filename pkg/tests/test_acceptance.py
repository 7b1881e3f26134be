"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line (visible even
under output capture) before asserting.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import PURCHASE_TEXT, BUILDER_CALLS, tree_doc_t1
from stagelp.cli import run
from stagelp.det_equiv import expand_node_form, expand_scenario_form, predicted_nonant_rows
from stagelp.dsl_parser import format_model, parse_text
from stagelp.errors import TreeError
from stagelp.lp import KERNELS, Status, check_solution, solve
from stagelp.meta_model import build_model, validate_model
from stagelp.pipeline import RunReport
from stagelp.scenario_tree import load_tree
from stagelp.verify_oracles import (
    PURCHASE_MODEL,
    PurchaseInstance,
    dp_purchase_oracle,
    enumerate_vertices,
    random_lp,
    random_purchase_instance,
    random_tree,
)

MODELS = Path(__file__).resolve().parent.parent / "models"
N_PURCHASE = 120
N_LP = 250

# residuals of every OPTIMAL solve made by this module, checked by criterion 8
RESIDUALS: list[float] = []


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def checked_solve(lp, backend=None):
    sol = solve(lp, backend)
    if sol.status is Status.OPTIMAL:
        RESIDUALS.append(check_solution(lp, sol.x).max_residual)
    return sol


@pytest.fixture(scope="module")
def purchase_instances():
    rng = np.random.default_rng(20240601)
    return [random_purchase_instance(rng) for _ in range(N_PURCHASE)]


def test_1_purchase_text_parse_validate_round_trip(capsys):
    t0 = time.perf_counter()
    m = parse_text(PURCHASE_TEXT)
    vm = validate_model(m, 3)
    again = parse_text(format_model(m))
    elapsed = time.perf_counter() - t0
    ok = again == m and vm.stages("non_anticitpativity") == (1, 2, 3) and elapsed < 0.1
    report(capsys, 1, ok, f"purchase model text parses, validates at T=3, round-trips in {elapsed * 1e3:.2f} ms")


def test_2_builder_equals_parser(capsys):
    ok = build_model(BUILDER_CALLS) == parse_text(PURCHASE_TEXT)
    report(capsys, 2, ok, "builder sequence equals parsed purchase model text")


def test_3_worked_example_end_to_end(capsys):
    got = {}
    codes = {}
    for tree, expected in (("t3.tree", 4.5), ("t3_a2.tree", 9.0)):
        argv = ["solve", "--model", str(MODELS / "eq2.msm"), "--tree", str(MODELS / tree), "--format", "structured"]
        codes[tree] = run(argv)
        rep = RunReport.from_json(capsys.readouterr().out)
        got[tree] = (rep.status, rep.objective_value, expected)
    ok = all(
        codes[k] == 0 and s == "OPTIMAL" and abs(v - e) <= 1e-6 for k, (s, v, e) in got.items()
    )
    detail = ", ".join(f"{k}: {s} {v!r} (want {e})" for k, (s, v, e) in got.items())
    report(capsys, 3, ok, detail)


def test_4_oracle_equivalence(capsys, purchase_instances):
    model = parse_text(PURCHASE_MODEL)
    t0 = time.perf_counter()
    worst = 0.0
    for inst in purchase_instances:
        vm = validate_model(model, inst.tree.horizon)
        sol = checked_solve(expand_node_form(vm, inst.tree).lp)
        worst = max(worst, abs(sol.objective_value - dp_purchase_oracle(inst)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 10.0 and len(purchase_instances) >= 100
    report(capsys, 4, ok, f"{len(purchase_instances)} instances, max |LP - DP| = {worst:.2e}, {elapsed:.2f} s")


def test_5_node_vs_scenario_form(capsys, purchase_instances):
    model = parse_text(PURCHASE_MODEL)
    worst = 0.0
    bad_counts = 0
    for inst in purchase_instances:
        vm = validate_model(model, inst.tree.horizon)
        node = checked_solve(expand_node_form(vm, inst.tree).lp)
        em = expand_scenario_form(vm, inst.tree)
        scen = checked_solve(em.lp)
        worst = max(worst, abs(node.objective_value - scen.objective_value))
        bad_counts += em.nonant_rows != predicted_nonant_rows(vm, inst.tree)
    rng = np.random.default_rng(77)
    chain_rows = 0
    for _ in range(20):
        horizon = int(rng.integers(1, 5))
        tree = random_tree(rng, horizon, chain=True, amount=1.0)
        em = expand_scenario_form(validate_model(model, horizon), tree)
        chain_rows += em.nonant_rows
        scen = checked_solve(em.lp)
        worst = max(worst, abs(scen.objective_value - dp_purchase_oracle(PurchaseInstance(tree, 1.0))))
    ok = worst <= 1e-6 and bad_counts == 0 and chain_rows == 0
    detail = f"max |node - scenario| = {worst:.2e}, coupling-row mismatches {bad_counts}, chain coupling rows {chain_rows}"
    report(capsys, 5, ok, detail)


def test_6_simplex_vs_vertex_enumeration(capsys):
    rng = np.random.default_rng(4242)
    problems = [random_lp(rng, 6, 6) for _ in range(N_LP)]
    worst = 0.0
    mismatched = 0
    statuses = {}
    for p in problems:
        ref = enumerate_vertices(p)
        for backend in sorted(KERNELS):
            sol = checked_solve(p, backend)
            if sol.status is not ref.status:
                mismatched += 1
            elif ref.status is Status.OPTIMAL:
                worst = max(worst, abs(sol.objective_value - ref.best_objective))
        statuses[ref.status.value] = statuses.get(ref.status.value, 0) + 1
    ok = worst <= 1e-7 and mismatched == 0
    detail = f"{len(problems)} LPs x {len(KERNELS)} kernels, {statuses}, max gap {worst:.2e}, status mismatches {mismatched}"
    report(capsys, 6, ok, detail)


def test_7_structural_counts(capsys):
    tree = load_tree(json.dumps(tree_doc_t1()))
    em = expand_node_form(validate_model(parse_text(PURCHASE_TEXT), 1), tree)
    x_coeffs = sorted(float(em.lp.objective[j]) for j, k in enumerate(em.columns.reverse) if k.var == "x")
    nonzero = int(np.count_nonzero(em.lp.objective))
    ok = em.lp.n_cols == 6 and em.lp.n_rows == 5 and nonzero == 3 and x_coeffs == [2.0, 4.0, 5.0]
    report(capsys, 7, ok, f"{em.lp.n_cols} columns, {em.lp.n_rows} rows, x coefficients {x_coeffs}")


def test_8_residuals_and_tree_rejection(capsys):
    rng = np.random.default_rng(99)
    own = 0
    while own < 100:
        own += checked_solve(random_lp(rng, 8, 8)).status is Status.OPTIMAL
    worst = max(RESIDUALS) if RESIDUALS else 0.0

    accepted = 0
    for _ in range(200):
        tree = random_tree(rng, int(rng.integers(1, 4)), amount=1.0)
        doc = json.loads(tree.to_json())
        non_root = [nd for nd in doc["nodes"] if nd["parent"] is not None]
        victim = non_root[int(rng.integers(0, len(non_root)))]
        delta = float(rng.uniform(1.5e-9, 1e-2)) * (1 if rng.random() < 0.5 else -1)
        victim["prob"] += delta
        try:
            load_tree(json.dumps(doc))
            accepted += 1
        except TreeError:
            pass
    ok = worst <= 1e-8 and accepted == 0
    detail = f"{len(RESIDUALS)} optimal solves, worst residual {worst:.2e}; perturbed trees accepted: {accepted}/200"
    report(capsys, 8, ok, detail)
