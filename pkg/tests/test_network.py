import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bnctrl.expr import FALSE, TRUE, And, ExprSyntaxError, Not, Or, Var, parse_expr, truth_table
from bnctrl.network import (
    BnetError,
    BooleanNetwork,
    augment_phenotype,
    load_cnf_sidecar,
    make_network,
    parse_bnet,
    read_bnet,
)
from bnctrl.random_networks import random_network

from conftest import TOY_BNET


def test_parse_toy():
    bn = parse_bnet(TOY_BNET)
    assert bn.genes == ("x1", "x2", "x3")
    assert bn.controllable == ("x1", "x2", "x3")
    assert str(bn.transition("x1")) == "(!x1 | !x2) & x3"
    assert str(bn.phenotype) == "x2 & x3"
    assert bn.phenotype_gene is None


def test_blank_lines_and_comments():
    # each gene on its own line; blank lines and comments are skipped
    bn = parse_bnet("\n# a comment\na, a\n\n")
    assert bn.genes == ("a",)
    assert bn.transition("a") == Var("a")


def test_identity_network():
    bn = parse_bnet("a, a")
    assert bn.n == 1 and bn.phenotype is None


def test_undeclared_gene_error_has_line():
    with pytest.raises(BnetError, match="undeclared gene") as exc:
        parse_bnet("a, a\nb, a & c\n")
    assert exc.value.line == 2


@pytest.mark.parametrize("text, fragment", [
    ("a, a &", "syntax error"),
    ("a a", "expected"),
    ("a, a\na, !a", "duplicate gene"),
    ("", "no genes"),
    ("a, a\n# phenotype: b", "undeclared"),
    ("a, a\n# uncontrollable: z", "undeclared"),
    ("1a, a", "invalid gene name"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(BnetError, match=fragment):
        parse_bnet(text)


def test_uncontrollable_directive():
    bn = parse_bnet("a, b\nb, a\n# uncontrollable: b\n")
    assert bn.controllable == ("a",)
    assert bn.uncontrollable == ("b",)


def test_cnf_sidecar(tmp_path):
    (tmp_path / "c.json").write_text('{"a": {"f": [["b"]], "not_f": [["!b"]]}}')
    (tmp_path / "m.bnet").write_text("a, b\nb, a\n# cnf: c.json\n")
    bn = read_bnet(tmp_path / "m.bnet")
    assert dict(bn.cnf_overrides)["a"] == ((("b",),), (("!b",),))
    with pytest.raises(BnetError):
        load_cnf_sidecar('{"a": {"f": []}}')


def test_augment_toy():
    bn = augment_phenotype(parse_bnet(TOY_BNET))
    assert bn.n == 4
    assert bn.phenotype_gene == "phenotype" == bn.genes[-1]
    assert "phenotype" not in bn.controllable
    assert str(bn.transition("phenotype")) == "x2 & x3"
    # idempotent
    assert augment_phenotype(bn) is bn


def test_augment_constant_phenotypes():
    assert make_network({"a": "!a"}, TRUE).transition("phenotype") == TRUE
    assert make_network({"a": "!a"}, FALSE).transition("phenotype") == FALSE


def test_augment_name_clash_and_errors():
    bn = make_network({"phenotype": "phenotype"}, "phenotype")
    assert bn.phenotype_gene == "phenotype_"
    with pytest.raises(ValueError, match="undeclared"):
        augment_phenotype(BooleanNetwork(("a",), (Var("a"),), ("a",)), Var("b"))
    with pytest.raises(ValueError):
        augment_phenotype(BooleanNetwork(("a",), (Var("a"),), ("a",)))


def test_network_validation():
    with pytest.raises(ValueError, match="undeclared"):
        BooleanNetwork(("a",), (Var("b"),), ())
    with pytest.raises(ValueError, match="duplicate"):
        BooleanNetwork(("a", "a"), (Var("a"), Var("a")), ())


def test_expr_parsing_precedence():
    e = parse_expr("!a | b & c")
    assert e == Or((Not(Var("a")), And((Var("b"), Var("c")))))
    assert parse_expr("~a") == Not(Var("a"))
    assert parse_expr("0") == FALSE and parse_expr("1") == TRUE
    with pytest.raises(ExprSyntaxError):
        parse_expr("a & (b")
    with pytest.raises(ExprSyntaxError):
        parse_expr("a $ b")


def test_truth_table_order():
    # first input is the most significant bit
    assert truth_table(parse_expr("a & !b"), ("a", "b")).tolist() == [False, False, True, False]


def test_substitute_simplifies():
    e = parse_expr("(a | b) & c")
    assert e.substitute({"c": False}) == FALSE
    assert e.substitute({"a": True}) == Var("c")


def _tables_equal(a: BooleanNetwork, b: BooleanNetwork) -> bool:
    if a.genes != b.genes:
        return False
    for g in a.genes:
        if not np.array_equal(truth_table(a.transition(g), a.genes), truth_table(b.transition(g), b.genes)):
            return False
    return True


@given(st.integers(0, 10_000))
def test_roundtrip_random(seed):
    bn = random_network(seed, 3, 7)
    back = augment_phenotype(parse_bnet(bn.to_bnet()))
    assert _tables_equal(bn, back)
    assert back.controllable == bn.controllable


def test_evaluate_array_matches_scalar():
    e = parse_expr("(!x1 | !x2) & x3")
    genes = ("x1", "x2", "x3")
    table = truth_table(e, genes)
    for i, bits in enumerate(itertools.product((False, True), repeat=3)):
        assert table[i] == e.evaluate(dict(zip(genes, bits)))
