import json
import math

import numpy as np
import pytest

from conftest import PURCHASE_TEXT, tree_doc_t1
from stagelp.det_equiv import expand_node_form
from stagelp.dsl_parser import parse_text
from stagelp.errors import DimensionError
from stagelp.lp import KERNELS, LpProblem, Row, Status, check_solution, emit_lp_file, solve
from stagelp.meta_model import validate_model
from stagelp.model import Relop
from stagelp.scenario_tree import load_tree
from stagelp.verify_oracles import random_lp

INF = math.inf


class TestSolve:
    def test_no_rows(self, backend):
        sol = solve(LpProblem(1, [1.0]), backend)
        assert sol.status is Status.OPTIMAL
        assert sol.x.tolist() == [0.0]
        assert sol.objective_value == 0.0

    def test_simplex_vertex(self, backend):
        p = LpProblem(2, [-1.0, -1.0], [Row({0: 1.0, 1: 1.0}, Relop.LE, 1.0)])
        sol = solve(p, backend)
        assert sol.status is Status.OPTIMAL
        assert sol.objective_value == pytest.approx(-1.0, abs=1e-12)
        assert sol.max_residual <= 1e-8

    def test_infeasible(self, backend):
        p = LpProblem(1, [0.0], [Row({0: 1.0}, Relop.LE, -1.0)])
        sol = solve(p, backend)
        assert sol.status is Status.INFEASIBLE
        assert sol.x is None and sol.objective_value is None

    def test_unbounded(self, backend):
        assert solve(LpProblem(1, [-1.0]), backend).status is Status.UNBOUNDED

    def test_free_and_negative_bounds(self, backend):
        # min x + 2y with x free, y in [-3, -1], x - y >= 2
        p = LpProblem(2, [1.0, 2.0], [Row({0: 1.0, 1: -1.0}, Relop.GE, 2.0)], [(-INF, INF), (-3.0, -1.0)])
        sol = solve(p, backend)
        assert sol.status is Status.OPTIMAL
        assert sol.x == pytest.approx([-1.0, -3.0])
        assert sol.objective_value == pytest.approx(-7.0)

    def test_upper_bounded_only(self, backend):
        p = LpProblem(1, [-1.0], [], [(-INF, 4.5)])
        sol = solve(p, backend)
        assert sol.x.tolist() == [4.5]

    def test_offset_in_objective(self, backend):
        p = LpProblem(1, [1.0], [Row({0: 1.0}, Relop.GE, 2.0)], offset=10.0)
        assert solve(p, backend).objective_value == pytest.approx(12.0)

    def test_redundant_equalities(self, backend):
        rows = [Row({0: 1.0, 1: 1.0}, Relop.EQ, 2.0), Row({0: 2.0, 1: 2.0}, Relop.EQ, 4.0)]
        sol = solve(LpProblem(2, [1.0, 3.0], rows), backend)
        assert sol.status is Status.OPTIMAL
        assert sol.objective_value == pytest.approx(2.0)

    def test_degenerate_cycling_example(self, backend):
        # Beale's example cycles under Dantzig pricing without a safeguard
        c = [-0.75, 150.0, -0.02, 6.0]
        rows = [
            Row({0: 0.25, 1: -60.0, 2: -0.04, 3: 9.0}, Relop.LE, 0.0),
            Row({0: 0.5, 1: -90.0, 2: -0.02, 3: 3.0}, Relop.LE, 0.0),
            Row({2: 1.0}, Relop.LE, 1.0),
        ]
        sol = solve(LpProblem(4, c, rows), backend)
        assert sol.status is Status.OPTIMAL
        assert sol.objective_value == pytest.approx(-0.05)

    def test_every_optimum_checks_out(self, backend):
        rng = np.random.default_rng(1)
        for _ in range(100):
            p = random_lp(rng)
            sol = solve(p, backend)
            if sol.status is Status.OPTIMAL:
                chk = check_solution(p, sol.x)
                assert chk.feasible and chk.max_residual <= 1e-8

    def test_duplicate_row_insensitive(self, backend):
        rng = np.random.default_rng(2)
        checked = 0
        for _ in range(100):
            p = random_lp(rng)
            if not p.rows:
                continue
            base = solve(p, backend)
            k = int(rng.integers(0, p.n_rows))
            dup = LpProblem(p.n_cols, p.objective, p.rows + [p.rows[k]], p.bounds)
            again = solve(dup, backend)
            assert again.status is base.status
            if base.status is Status.OPTIMAL:
                assert again.objective_value == pytest.approx(base.objective_value, abs=1e-9)
                checked += 1
        assert checked > 20


def test_kernel_parity():
    if len(KERNELS) < 2:
        pytest.skip("compiled kernel not built")
    rng = np.random.default_rng(3)
    for _ in range(200):
        p = random_lp(rng, 8, 8)
        a, b = (solve(p, k) for k in sorted(KERNELS))
        assert a.status is b.status
        assert a.iterations == b.iterations
        if a.status is Status.OPTIMAL:
            assert a.objective_value == pytest.approx(b.objective_value, abs=1e-9)


class TestCheckSolution:
    p = LpProblem(2, [0.0, 0.0], [Row({0: 1.0, 1: 1.0}, Relop.EQ, 1.0)])

    def test_exact(self):
        chk = check_solution(self.p, [0.5, 0.5])
        assert chk.feasible and chk.max_residual == 0.0

    def test_violation(self):
        chk = check_solution(self.p, [1.0, 1.0])
        assert chk.max_residual == 1.0
        assert not chk.feasible

    def test_bound_violation(self):
        assert check_solution(self.p, [-0.5, 1.5]).max_residual == 0.5

    def test_dimension(self):
        with pytest.raises(DimensionError):
            check_solution(self.p, [1.0])


class TestProblem:
    def test_bad_column(self):
        with pytest.raises(DimensionError):
            LpProblem(1, [0.0], [Row({3: 1.0}, Relop.LE, 0.0)])

    def test_bad_bounds(self):
        with pytest.raises(ValueError):
            LpProblem(1, [0.0], [], [(2.0, 1.0)])


class TestLpFile:
    def expanded(self):
        t = load_tree(json.dumps(tree_doc_t1()))
        return expand_node_form(validate_model(parse_text(PURCHASE_TEXT), 1), t)

    def test_three_node_file(self):
        em = self.expanded()
        text = emit_lp_file(em.lp, em)
        lines = text.splitlines()
        assert lines[1] == "Minimize"
        assert lines[2] == " obj: 5 x__n0 + 2 x__n1 + 4 x__n2"
        sub = lines[lines.index("Subject To") + 1 : lines.index("Bounds")]
        assert len(sub) == 5
        assert sub[0] == " non_anticitpativity__n1: -x__n1 - s__n0 + s__n1 = 0"
        assert sub[2] == " root_stage__n0: s__n0 = 0"
        bounds = lines[lines.index("Bounds") + 1 : lines.index("End")]
        assert bounds == [f" {c} >= 0" for c in em.column_names()]
        assert len(em.column_names()) == 6

    def test_deterministic_bytes(self):
        a, b = self.expanded(), self.expanded()
        assert emit_lp_file(a.lp, a).encode() == emit_lp_file(b.lp, b).encode()

    def test_empty(self):
        assert emit_lp_file(LpProblem(0, [])) == "\\ deterministic equivalent written by stagelp\nEnd\n"

    def test_bound_kinds(self):
        p = LpProblem(4, [0.0] * 4, [], [(-INF, INF), (1.0, 1.0), (-INF, 3.0), (-2.0, 2.5)])
        text = emit_lp_file(p)
        assert " obj: 0 x0" in text
        for line in (" x0 free", " x1 = 1", " -inf <= x2 <= 3", " -2 <= x3 <= 2.5"):
            assert line in text

    def test_long_rows_wrap(self):
        p = LpProblem(40, np.ones(40), [Row({j: 1.0 for j in range(40)}, Relop.LE, 1.0)])
        assert all(len(line) <= 80 for line in emit_lp_file(p).splitlines())
