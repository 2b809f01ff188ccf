import math

import pytest
import sympy as sp

from rswlie import jetfield as jf
from rswlie import models as md
from rswlie import symkernel as sk

t, x, h, v, g = sk.symbols("t x h v gamma")
R = md.REDUCED


def test_reduced_residuals():
    s = md.build_system("reduced")
    want = [R.jet("v", (1, 1)) - h**-2 * R.jet("h", (1, 0)),
            R.jet("v", (2, 0)) - h ** (g - 1) * R.jet("h", (0, 1)) + v]
    assert all(sk.is_zero(a - b).zero for a, b in zip(s.residuals, want))


def test_reduced_follows_from_lagrangian():
    d = md.lagrangian_to_reduced()
    assert all(c.zero for c in d["checks"])


def test_euler_at_gamma_one_has_linear_pressure():
    s = md.build_system("euler", 1)
    hx = md.EULER.jet("h", (0, 1))
    assert s.residuals[1].coeff(hx) != 0
    assert not s.residuals[1].has(sp.log)


def test_negative_gamma_rejected():
    with pytest.raises(ValueError):
        md.build_system("reduced", -1)


def test_euler_gamma_zero_rejected():
    with pytest.raises(ValueError):
        md.build_system("euler", 0)


def test_catalog_contents():
    cat = md.catalog("reduced")
    assert cat.labels == ["X1", "X2", "X3", "X4", "X5"]
    X5 = cat["X5"]
    assert X5.coeff(x) == (g + 1) * x and X5.coeff(h) == 2 * h and sk.simplify(X5.coeff(v) - (g - 1) * v) == 0
    Y3 = md.catalog("euler")["Y3"]
    assert Y3.coeff(x) == sp.sin(t) and Y3.coeff(sk.sym("u")) == sp.cos(t) and Y3.coeff(v) == -sp.sin(t)


@pytest.mark.parametrize("gamma", [None, 0.5, 1, 1.1, 1.5, 2, 3])
def test_catalog_verifies_at_each_gamma(gamma):
    md.catalog("reduced", gamma)
    md.catalog("euler", gamma)


def test_gamma_field_in_basis():
    c = md.gamma_in_basis()
    assert len(c) == 2


def test_extended_generators_are_symmetries_of_the_first_order_form():
    cat = md.catalog("reduced")
    ext = md.extend(cat)
    assert [X.label for X in ext] == cat.labels


def test_generic_transformation_examples():
    p = {"t": 0.2, "x": 1.5, "h": 0.8, "v": 0.3}
    T = md.generic_1ppt(0.25, (1, 0, 0, 0, 0), gamma=2)
    q = T(p)
    assert math.isclose(q[t], 0.45) and q[x] == 1.5 and q[h] == 0.8 and q[v] == 0.3
    T = md.generic_1ppt(0.1, (0, 0, 0, 0, 1), gamma=2)
    q = T(p)
    assert math.isclose(q[x], math.exp(0.3) * 1.5, rel_tol=1e-9)
    assert math.isclose(q[h], math.exp(0.2) * 0.8, rel_tol=1e-9)
    assert math.isclose(q[v], math.exp(0.1) * 0.3, rel_tol=1e-9)
    T = md.generic_1ppt(0.0, gamma=2)
    q = T(p)
    assert all(math.isclose(q[sk.sym(k)], val) for k, val in p.items())


def test_generic_transformation_closed_form_agrees_with_flows():
    T = md.generic_1ppt(sp.Rational(1, 5), (1, 1, 1, 1, 1), gamma=2)
    exprs = T.exprs()
    p = {"t": 0.2, "x": 1.5, "h": 0.8, "v": 0.3}
    q = T(p)
    for s, e in exprs.items():
        assert math.isclose(sk.eval_numeric(e, p), q[s], rel_tol=1e-8, abs_tol=1e-10)


def test_wrong_weight_count():
    with pytest.raises(ValueError):
        md.generic_1ppt(0.1, (1, 1))
