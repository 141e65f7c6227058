import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssforge.expr import (
    BinOp,
    Call,
    Const,
    FUNCTIONS,
    Neg,
    ParseError,
    Var,
    binop,
    eval_jet,
    neg,
    parse,
    to_source,
)
from ssforge.jet import JetDomainError

from conftest import random_points

Z = Var()


def test_complex_coefficient_affine():
    tree = parse("(1+2*i)*z + 3")
    assert tree == BinOp("+", BinOp("*", Const(1 + 2j), Z), Const(3))
    assert eval_jet(tree, 1).v == 4 + 2j


@pytest.mark.parametrize(
    "src, tree",
    [
        ("z", Z),
        ("z^2", BinOp("^", Z, Const(2))),
        ("-z", Neg(Z)),
        ("exp(z)", Call("exp", Z)),
        ("2^3^z", BinOp("^", Const(2), BinOp("^", Const(3), Z))),
        ("z - 1 - 2", BinOp("-", BinOp("-", Z, Const(1)), Const(2))),
        ("z/2*3", BinOp("*", BinOp("/", Z, Const(2)), Const(3))),
        ("-z^2", Neg(BinOp("^", Z, Const(2)))),
        ("z^-1", BinOp("^", Z, Const(-1))),
        ("1.5e-3*i", Const(1.5e-3j)),
    ],
)
def test_parse_shapes(src, tree):
    assert parse(src) == tree


@pytest.mark.parametrize(
    "src, message, position",
    [
        ("2z", "unexpected", 1),
        ("sin(z", "unbalanced", 3),
        ("z)", "", 1),
        ("foo(z)", "unknown identifier", 0),
        ("w + 1", "unknown identifier", 0),
        ("", "empty", 0),
        ("z +", "", 3),
        ("z $ 1", "", 2),
    ],
)
def test_parse_errors_carry_position(src, message, position):
    with pytest.raises(ParseError) as info:
        parse(src)
    assert message in str(info.value)
    assert info.value.position == position


def test_cube_jet():
    j = eval_jet("z^3", 1 + 1j)
    assert j.v == pytest.approx(-2 + 2j)
    assert j.d1 == pytest.approx(6j)
    assert j.d2 == pytest.approx(6 + 6j)


def test_domain_error_names_subexpression():
    with pytest.raises(JetDomainError) as info:
        eval_jet("1/(z - 1)", 1)
    assert "z - 1" in str(info.value)


def test_log_and_general_power():
    z0 = 0.7 + 0.4j
    assert eval_jet("log(z)", z0).d1 == pytest.approx(1 / z0)
    j = eval_jet("z^(1/2)", z0)
    assert j.v == pytest.approx(np.sqrt(z0))
    assert j.d1 == pytest.approx(0.5 / np.sqrt(z0))


@pytest.mark.parametrize("src", ["z^3 - 2*z", "exp(z)*sin(z)", "cos(z^2)/(2 + z)", "exp(i*z) + log(3 + z)"])
def test_eval_derivative_against_differences(src, rng):
    tree = parse(src)
    z = random_points(rng, 300, -1, 1)
    d = 1e-5
    j = eval_jet(tree, z)
    d1_fd = (eval_jet(tree, z + d).v - eval_jet(tree, z - d).v) / (2 * d)
    assert np.max(np.abs(j.d1 - d1_fd)) <= 1e-6
    d2_fd = (eval_jet(tree, z + d).d1 - eval_jet(tree, z - d).d1) / (2 * d)
    assert np.max(np.abs(j.d2 - d2_fd)) <= 1e-6


# -- printer round trip on random trees ----------------------------------------

real_consts = st.one_of(st.integers(0, 20).map(float), st.sampled_from([0.5, 0.25, 1.5, 2.75, 1e-3, 1e6]))
consts = st.builds(lambda r, m, s: Const(complex(s * r, m)), real_consts,
                   st.sampled_from([0.0, 0.0, 1.0, -1.0, 2.0, -0.5]), st.sampled_from([1, -1]))
leaves = st.one_of(st.just(Z), consts)


def _extend(children):
    return st.one_of(
        st.builds(neg, children),
        st.builds(binop, st.sampled_from("+-*/^"), children, children),
        st.builds(Call, st.sampled_from(FUNCTIONS), children),
    )


def _depth(node):
    if isinstance(node, (Var, Const)):
        return 0
    if isinstance(node, (Neg, Call)):
        return 1 + _depth(node.operand if isinstance(node, Neg) else node.arg)
    return 1 + max(_depth(node.left), _depth(node.right))


trees = st.recursive(leaves, _extend, max_leaves=24).filter(lambda t: _depth(t) <= 6)


@settings(max_examples=500, deadline=None)
@given(trees)
def test_print_parse_round_trip(tree):
    assert parse(to_source(tree)) == tree
