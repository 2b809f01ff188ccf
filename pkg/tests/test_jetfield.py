import math

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from rswlie import jetfield as jf
from rswlie import models as md
from rswlie import symkernel as sk

R = md.REDUCED
t, x, h, v, g, eps = sk.symbols("t x h v gamma epsilon")


@pytest.fixture(scope="module")
def cat():
    return md.catalog("reduced")


def test_jet_naming_and_decoding():
    s = R.jet("v", (1, 1))
    assert s.name == "v_tx"
    assert R.decode(s) == ("v", (1, 1))
    assert R.jet_order(s) == 2 and R.is_jet(s) and not R.is_jet(v)


def test_prolongation_beyond_space_order_rejected(cat):
    with pytest.raises(jf.OrderOverflowError):
        jf.prolong(cat["X1"], R.order + 1)


def test_total_derivative_examples():
    assert jf.total_derivative(v, "t", R) == R.jet("v", (1, 0))
    d = jf.total_derivative(h ** (g - 1), "x", R)
    assert sk.is_zero(d - (g - 1) * h ** (g - 2) * R.jet("h", (0, 1))).zero


def test_total_derivatives_commute():
    e = h**2 * v + sp.sin(t) * R.jet("v", (0, 1))
    dtx = jf.total_derivative(jf.total_derivative(e, "t", _space3()), "x", _space3())
    dxt = jf.total_derivative(jf.total_derivative(e, "x", _space3()), "t", _space3())
    assert sk.simplify(dtx - dxt) == 0


def _space3():
    return jf.VariableSpace(("t", "x"), ("h", "v"), order=3, name="I3")


def test_brackets_from_the_table(cat):
    assert jf.lie_bracket(cat["X1"], cat["X3"]).equals(cat["X4"] * -1)
    assert jf.lie_bracket(cat["X2"], cat["X5"]).equals(cat["X2"] * (g + 1))
    assert jf.lie_bracket(cat["X5"], cat["X5"]).is_zero()


def test_symmetry_residuals(cat):
    s = md.build_system("reduced")
    assert jf.symmetry_residual(s, cat["X5"]) == [0, 0]
    dv = jf.VectorField.make(R, {"v": 1}, "dv")
    res = jf.symmetry_residual(s, dv)
    assert res[0] == 0 and res[1] != 0


def test_euler_y3_is_a_symmetry():
    s = md.build_system("euler")
    assert jf.symmetry_residual(s, md.catalog("euler")["Y3"]) == [0, 0, 0]


def test_flows(cat):
    p = {"t": 0.3, "x": 1.2, "h": 0.7, "v": -0.4, "gamma": 2.0}
    q = jf.flow(cat["X1"], 0.5, p)
    assert math.isclose(q[t], 0.8) and q[x] == 1.2
    q = jf.flow(cat["X5"], 0.1, p)
    assert math.isclose(q[x], math.exp(0.3) * 1.2, rel_tol=1e-9)
    assert math.isclose(q[h], math.exp(0.2) * 0.7, rel_tol=1e-9)
    assert math.isclose(q[v], math.exp(0.1) * -0.4, rel_tol=1e-9)
    q = jf.flow(cat["X3"], 0.0, p)
    assert all(math.isclose(q[sk.sym(k)], val) for k, val in p.items())


def test_flow_expr_matches_numeric_flow(cat):
    e = jf.flow_expr(cat["X5"], eps)
    assert sk.is_zero(e[x] - sp.exp((g + 1) * eps) * x).zero


def test_adjoint_examples(cat):
    A = jf.adjoint(cat["X1"], cat["X3"], eps)
    assert A.result.equals(cat["X3"] * sp.cos(eps) + cat["X4"] * sp.sin(eps))
    A = jf.adjoint(cat["X5"], cat["X2"], eps)
    assert A.result.equals(cat["X2"] * sp.exp(eps * (g + 1)))
    assert jf.adjoint(cat["X4"], cat["X4"], eps).result.equals(cat["X4"])


def test_determining_equations_vanish_on_the_catalog(cat):
    s = md.build_system("reduced")
    eqs = jf.determining_equations(s)
    assert len(eqs) > 10
    for X in cat.basis:
        assert all(sk.is_zero(e).zero for e in jf.substitute_field(eqs, s, X))


def test_determining_equations_reject_non_symmetry():
    s = md.build_system("reduced")
    eqs = jf.determining_equations(s)
    dv = jf.VectorField.make(R, {"v": 1}, "dv")
    assert not all(e == 0 for e in jf.substitute_field(eqs, s, dv))


weights = st.lists(st.integers(-3, 3), min_size=5, max_size=5).filter(any)


@given(weights, weights)
def test_bracket_antisymmetry(a, b):
    cat = md.catalog("reduced")
    X, Y = cat.combination(a), cat.combination(b)
    assert (jf.lie_bracket(X, Y) + jf.lie_bracket(Y, X)).is_zero()


@given(weights)
def test_combinations_remain_symmetries(a):
    cat = md.catalog("reduced", 2)
    s = md.build_system("reduced", 2)
    assert all(r == 0 for r in jf.symmetry_residual(s, cat.combination(a)))
