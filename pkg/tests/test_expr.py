import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from semigroup_calculus.errors import ExpressionSyntaxError, UnknownIdentifierError
from semigroup_calculus.expr import (
    Add, Div, Exp, Mul, Neg, Num, Pow, Sub, Var, constants, evaluate, is_conjugate_symmetric,
    parse, to_text
)

CANONICAL = [
    "z",
    "2/((z+1.5)^3)",
    "1/((z+1.5)^2)",
    "exp(-0.5*z)",
    "-z",
    "-z^2",
    "--z",
    "(-z)^2",
    "z^-3",
    "z-(-2)",
    "z+-2*z",
    "-(z+1)",
    "z*(z+1)",
    "z/(2*z)",
    "z/z/z",
    "z*z*z",
    "z*(z*z)",
    "(z+1)*z",
    "2i*z",
    "1e-05*z",
    "exp(z)^2",
    "exp(-z)/((z+1)^2)",
]

EXPRESSIONS = CANONICAL + [
    "1/(z+1)^2",
    "((z))",
    "z + 1",
    " exp( - z ) ",
    "3*exp(-2*z)/(z+4)^5",
    "(z+0.5)^-1",
    "1.5e3*z",
    "1E-3",
    "2.5i+z",
    "-(-(z))",
    "z-z-z",
    "z-(z-z)",
    "z/(z/z)",
    "z*-1",
    "-1*-z",
    "(1-z)/(1+z)",
    "exp(exp(-z))",
    "z^0",
    "(z^2)^3",
    "-(z^2)^3",
    "1/((z+1)*(z+2))",
    "(z+1)/(z+2)-(z+3)/(z+4)",
    "exp(-0.5*z)*(z+1)^-2",
    "0*z+0",
    "(3)",
    "4-3i*z",
    "z/-2",
    "-z/-z",
]

leaves = st.one_of(
    st.just(Var()),
    st.floats(min_value=0.0, max_value=1e6).map(lambda x: Num(complex(x))),
    st.floats(min_value=0.0, max_value=1e6).map(lambda x: Num(complex(-x))),
    st.floats(min_value=0.0, max_value=1e6).map(lambda x: Num(complex(0.0, x))),
)


def _extend(children):
    return st.one_of(
        st.builds(Add, children, children),
        st.builds(Sub, children, children),
        st.builds(Mul, children, children),
        st.builds(Div, children, children),
        st.builds(Pow, children, st.integers(min_value=-4, max_value=4)),
        st.builds(Exp, children),
        # parse folds negated numbers into the constant
        st.builds(Neg, children).filter(lambda n: not isinstance(n.operand, Num)),
    )


trees = st.recursive(leaves, _extend, max_leaves=12)


def test_exp_example():
    assert parse("exp(-0.5*z)") == Exp(Mul(Num(-0.5), Var()))


def test_rational_example():
    assert parse("1/((z+1.5)^2)") == Div(Num(1.0), Pow(Add(Var(), Num(1.5)), 2))


@pytest.mark.parametrize("src", CANONICAL)
def test_canonical_forms_print_back(src):
    assert to_text(parse(src)) == src


@pytest.mark.parametrize("src", EXPRESSIONS)
def test_printing_preserves_the_tree(src):
    tree = parse(src)
    assert parse(to_text(tree)) == tree


@given(trees)
def test_generated_trees_round_trip(tree):
    assert parse(to_text(tree)) == tree


@pytest.mark.parametrize("src, position", [
    ("1/(z+", 5),
    ("z*)", 2),
    ("z^1.5", 2),
    ("z $", 2),
    ("(z+1", 4),
    ("z z", 2),
    ("", 0),
])
def test_syntax_errors_carry_the_position(src, position):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse(src)
    assert info.value.position == position


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as info:
        parse("1+sin(z)")
    assert info.value.position == 2


def test_evaluate():
    z = np.array([1.0, 2.0 + 1.0j])
    np.testing.assert_allclose(evaluate(parse("1/((z+1)^2)"), z), 1.0 / (z + 1.0) ** 2)
    assert complex(evaluate(parse("exp(-0.5*z)"), 2.0)) == pytest.approx(math.exp(-1.0))
    np.testing.assert_allclose(evaluate(parse("z^-2"), z), z ** -2.0)
    assert np.isinf(evaluate(parse("1/z"), 0.0))


def test_constants_and_symmetry():
    tree = parse("2*exp(-z)/(z+3i)")
    assert constants(tree) == [2.0, -1.0, 3.0j]
    assert not is_conjugate_symmetric(tree)
    assert is_conjugate_symmetric(parse("1/((z+1.5)^2)"))
