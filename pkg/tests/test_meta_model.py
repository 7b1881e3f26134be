import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import BUILDER_CALLS, BUILDER_CALLS_MISSPELT
from stagelp.dsl_parser import parse_text
from stagelp.errors import DuplicateName, ParseError, StageError, ValidationError
from stagelp.meta_model import ModelBuilder, build_model, resolve_stage_set, validate_model
from stagelp.model import MetaModel, StageKind, StageSetExpr


class TestResolveStageSet:
    def test_full_range(self):
        assert resolve_stage_set(StageSetExpr(0, "T"), 3) == (0, 1, 2, 3)

    def test_horizon_singleton(self):
        assert resolve_stage_set(StageSetExpr("T"), 3) == (3,)

    def test_empty_range(self):
        with pytest.raises(StageError):
            resolve_stage_set(StageSetExpr(1, "T"), 0)

    def test_out_of_horizon(self):
        with pytest.raises(StageError):
            resolve_stage_set(StageSetExpr(2, 5), 3)

    @given(st.integers(1, 50))
    def test_monotone(self, T):
        full = set(resolve_stage_set(StageSetExpr(0, "T"), T))
        tail = set(resolve_stage_set(StageSetExpr(1, "T"), T))
        last = set(resolve_stage_set(StageSetExpr("T"), T))
        assert full >= tail >= last
        assert sorted(full) == list(range(T + 1))


def issues_of(model, T):
    with pytest.raises(ValidationError) as exc:
        validate_model(model, T)
    return [(i.name, i.reason) for i in exc.value.issues]


class TestValidate:
    def test_purchase_model(self, purchase_text):
        vm = validate_model(parse_text(purchase_text), 3)
        for name in ("x", "s", "objective_function"):
            assert vm.kind(name) is StageKind.STOCHASTIC
            assert vm.stages(name) == (0, 1, 2, 3)
        assert vm.kind("a") is StageKind.DETERMINISTIC
        assert vm.stages("a") == (3,)
        assert vm.stages("non_anticitpativity") == (1, 2, 3)
        assert vm.implicit_params == ("V",)

    def test_idempotent(self, purchase_text):
        m = parse_text(purchase_text)
        first = validate_model(m, 2)
        assert validate_model(first.model, 2) == first

    def test_recourse_above_root(self):
        m = parse_text("var s; minimize f: s; subject to c: s - s(-1) = 0; stochastic s, f, c: 0;")
        issues = issues_of(m, 1)
        assert len(issues) == 1
        assert issues[0][0] == "c"
        assert "recourse depth exceeds root" in issues[0][1]

    def test_misspelt_annotation(self):
        issues = issues_of(build_model(BUILDER_CALLS_MISSPELT), 3)
        assert ("non_anticipativity", "annotation references unknown object") in issues
        # the misspelt annotation leaves the real constraint unannotated
        assert ("non_anticitpativity", "object has no stage annotation") in issues

    def test_exhaustive(self):
        m = parse_text(
            """
            var x, y;
            minimize f: x;
            subject to c1: x * y = 0;
            subject to c2: p(-1) + x = 0;
            stochastic x, y, f, c2: 0..T;
            stochastic ghost: 0;
            """
        )
        issues = issues_of(m, 2)
        names = [n for n, _ in issues]
        assert "c1" in names  # bilinear and unannotated
        assert any("bilinear" in r for _, r in issues)
        assert any("recourse reference p(-1) on parameter" in r for _, r in issues)
        assert ("ghost", "annotation references unknown object") in issues
        assert ("c1", "object has no stage annotation") in issues
        assert ("f", "stochastic objective must be wrapped in E()") in issues

    def test_missing_objective(self):
        assert ("<model>", "model has no objective") in issues_of(MetaModel(), 1)

    def test_double_annotation(self):
        m = parse_text("var x; minimize f: E(x); stochastic x, f: 0..T; deterministic x: 0;")
        assert ("x", "object annotated more than once") in issues_of(m, 1)

    def test_variable_outside_its_stages(self):
        m = parse_text("var x; minimize f: E(x); subject to c: x = 0; stochastic x: 1..T; stochastic f: 1..T; stochastic c: 0;")
        issues = issues_of(m, 2)
        assert any(n == "c" and "not defined" in r for n, r in issues)

    def test_parameter_outside_its_stages(self):
        m = parse_text(
            "param a; var x; minimize f: E(x); subject to c: x = a; deterministic a: T; stochastic x, f, c: 0..T;"
        )
        issues = issues_of(m, 2)
        assert any(n == "c" and "parameter a is not defined at stage(s) [0, 1]" in r for n, r in issues)

    def test_empty_range_annotates_nothing(self, purchase_text):
        vm = validate_model(parse_text(purchase_text), 0)
        assert vm.stages("non_anticitpativity") == ()
        assert vm.stages("terminal_stage") == (0,)

    def test_stage_error_reported_as_issue(self):
        m = parse_text("var x; minimize f: E(x); stochastic x, f: 0..T; stochastic ghost_free: 5;")
        issues = issues_of(m, 2)
        assert any(n == "ghost_free" and "leaves [0, 2]" in r for n, r in issues)


class TestBuilder:
    def test_builder_equals_text(self, purchase_text):
        assert build_model(BUILDER_CALLS) == parse_text(purchase_text)

    def test_empty(self):
        assert build_model([]) == MetaModel()
        assert ModelBuilder().build() == MetaModel()

    def test_duplicate_variable(self):
        b = ModelBuilder().variable("x", lb=0)
        with pytest.raises(DuplicateName):
            b.variable("x", lb=0)

    def test_expression_errors_propagate(self):
        with pytest.raises(ParseError):
            ModelBuilder().subject_to("c", "s - = x")
        with pytest.raises(ParseError):
            ModelBuilder().minimize("f", "E(x")

    def test_fluent_calls(self, purchase_text):
        m = (
            ModelBuilder()
            .parameter("a")
            .variable("x", lb=0)
            .variable("s", lb=0)
            .minimize("objective_function", "E(V * x)")
            .subject_to("non_anticitpativity", "s - s(-1) = x")
            .subject_to("root_stage", "s = 0")
            .subject_to("terminal_stage", "s = a")
            .deterministic("T", "a")
            .stochastic("0..T", "x", "s", "objective_function")
            .stochastic("1..T", "non_anticitpativity")
            .stochastic("0", "root_stage")
            .stochastic("T", "terminal_stage")
            .build()
        )
        assert m == parse_text(purchase_text)
