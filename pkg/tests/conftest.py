import json

import pytest

from stagelp.lp import KERNELS

# Verbatim modeling text of the purchase example, typo included.
PURCHASE_TEXT = """\
deterministic a: T;
stochastic x, s, objective_function: 0..T;
stochastic non_anticitpativity: 1..T;
stochastic root_stage: 0;
stochastic terminal_stage: T;

param a;
var x >= 0, s >= 0; 

minimize objective_function: E(V * x);
subject to non_anticitpativity: s - s(-1) = x;
subject to root_stage: s = 0;
subject to terminal_stage: s = a;
"""

# The builder calls for the same model. Names are corrected so the result can
# equal PURCHASE_TEXT: the annotation "non_anticipativity" and objective "objective".
BUILDER_CALLS = [
    ("parameter", "a"),
    ("variable", "x", {"lb": 0}),
    ("variable", "s", {"lb": 0}),
    ("minimize", "objective_function", "E(V * x)"),
    ("subject_to", "non_anticitpativity", "s - s(-1) = x"),
    ("subject_to", "root_stage", "s = 0"),
    ("subject_to", "terminal_stage", "s = a"),
    ("deterministic", "T", "a"),
    ("stochastic", "0..T", "x", "s", "objective_function"),
    ("stochastic", "1..T", "non_anticitpativity"),
    ("stochastic", "0", "root_stage"),
    ("stochastic", "T", "terminal_stage"),
]

BUILDER_CALLS_MISSPELT = [
    ("parameter", "a"),
    ("variable", "x", {"lb": 0}),
    ("variable", "s", {"lb": 0}),
    ("minimize", "objective", "E(V * x)"),
    ("subject_to", "non_anticitpativity", "s - s(-1) = x"),
    ("subject_to", "root_stage", "s = 0"),
    ("subject_to", "terminal_stage", "s = a"),
    ("deterministic", "T", "a"),
    ("stochastic", "0..T", "x", "s", "objective"),
    ("stochastic", "1..T", "non_anticipativity"),
    ("stochastic", "0", "root_stage"),
    ("stochastic", "T", "terminal_stage"),
]


def _node(i, stage, parent, prob, V):
    return {"id": i, "stage": stage, "parent": parent, "prob": prob, "params": {"V": V}}


def tree_doc_t1(a=1.0):
    return {
        "T": 1,
        "stage_params": [{"name": "a", "stage": 1, "value": a}],
        "nodes": [_node(0, 0, None, 1.0, 5.0), _node(1, 1, 0, 0.5, 4.0), _node(2, 1, 0, 0.5, 8.0)],
    }


def tree_doc_t2(a=1.0):
    """Stage 1: A (V=5) with leaves 4/8, B (V=7) with leaves 2/6; all splits even."""
    return {
        "T": 2,
        "stage_params": [{"name": "a", "stage": 2, "value": a}],
        "nodes": [
            _node(0, 0, None, 1.0, 6.0),
            _node(1, 1, 0, 0.5, 5.0),
            _node(2, 1, 0, 0.5, 7.0),
            _node(3, 2, 1, 0.5, 4.0),
            _node(4, 2, 1, 0.5, 8.0),
            _node(5, 2, 2, 0.5, 2.0),
            _node(6, 2, 2, 0.5, 6.0),
        ],
    }


def tree_doc_single(a=0.0, V=3.0):
    return {"T": 0, "stage_params": [{"name": "a", "stage": 0, "value": a}], "nodes": [_node(0, 0, None, 1.0, V)]}


@pytest.fixture
def purchase_text():
    return PURCHASE_TEXT


@pytest.fixture
def t1_text():
    return json.dumps(tree_doc_t1())


@pytest.fixture
def t2_text():
    return json.dumps(tree_doc_t2())


@pytest.fixture(params=sorted(KERNELS))
def backend(request):
    return request.param
