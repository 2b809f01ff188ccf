import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from rswlie import reductions as rd
from rswlie import symkernel as sk

g, c, H0 = sk.symbols("gamma c H0")


def _equal_up_to_sign(a, b):
    return sk.is_zero(a - b).zero or sk.is_zero(a + b).zero


def test_travelwave_residuals():
    red = rd.reduce("travelwave")
    H, V = red.space.symbol("H"), red.space.symbol("V")
    Hx, Vxx = red.space.jet("H", (1,)), red.space.jet("V", (2,))
    want = [Vxx - H**-2 * Hx, c**2 * Vxx - H ** (g - 1) * Hx + V]
    assert all(_equal_up_to_sign(a, b) for a, b in zip(red.residuals, want))


def test_point_reduction_is_the_oscillator():
    red = rd.reduce("point")
    V = red.space.symbol("V")
    assert red.residuals == [V + red.space.jet("V", (2,))]


def test_static_reduction_at_gamma_one():
    red = rd.reduce("static")
    e = red.residuals[0].subs(g, 1)
    assert sk.simplify(e - (red.space.jet("H", (1,)) - red.space.symbol("V"))) == 0


def test_unknown_reduction():
    with pytest.raises((KeyError, ValueError)):
        rd.reduce("no-such-reduction")


def test_name_aliases():
    assert rd.normalize_name("X2+βΓ") == "X2+betaGamma"


CONSISTENT = ["static", "point", "travelwave", "travelwave-first-order", "X2+betaGamma",
              "X5+betaGamma-gamma1", "travelwave-master", "scaling-master", "scaling-first-order"]
CLAIMED_DEFECTIVE = ["scaling", "scaling-gamma1", "alphaX1+X5", "euler-scaling",
                     "alphaX1+X5-gamma1", "alphaX1+X5-lambda"]


@pytest.mark.parametrize("name", CONSISTENT)
def test_claimed_forms_consistent(name):
    assert rd.consistency_report(name).verdict == "consistent"


@pytest.mark.parametrize("name", CLAIMED_DEFECTIVE)
def test_defective_claims_have_verified_corrections(name):
    rep = rd.consistency_report(name)
    assert rep.verdict == "claimed form inconsistent; derived form verified"
    bad = [f for f in rep.forms if f.kind == "claimed" and not f.consistent]
    assert bad and all(f.witness is not None for f in bad)


def test_euler_generic_reduction_has_only_a_derived_form():
    assert rd.consistency_report("euler-aY2+Y3").verdict == "no claimed form; derived form verified"


def test_consistency_report_serializes():
    d = rd.consistency_report("scaling").to_dict()
    assert d["reduction"] == "scaling" and len(d["forms"]) == 4


def test_travelwave_master_equation():
    ode = rd.derive_master_ode(rd.reduce("travelwave"))
    M = ode.space
    V, W, V2 = M.symbol("V"), M.jet("V", (1,)), M.jet("V", (2,))
    want = (c**2 - (H0 - W) ** (-g - 1)) * V2 + V
    assert sk.is_zero(ode.expr - want, ranges={"H0": (3, 5), "V_xi": (-1, 1)}).zero
    assert ode.matches_claimed


def test_scaling_master_equation():
    ode = rd.derive_master_ode(rd.reduce("scaling"))
    M = ode.space
    Z, Z2, V0 = M.symbol("Z"), M.jet("Z", (2,)), sk.sym("V0")
    want = Z2 + Z - (g**2 - 1) / (g + 1) ** 2 * V0 + 2 * (g - 1) / (g + 1) ** 2 * Z**-g
    assert sk.is_zero(ode.expr - want).zero and ode.matches_claimed


def test_ermakov_pinney_flag():
    ode = rd.derive_master_ode(rd.reduce("scaling"), {"V0": 0, "gamma": 3})
    assert "Ermakov-Pinney" in ode.flags
    assert not rd.derive_master_ode(rd.reduce("scaling"), {"V0": 1, "gamma": 3}).flags


EXPECTED = {
    "oscillator": "verified-symbolic",
    "travelwave-height": "verified-symbolic",
    "travelwave-integral": "refuted",
    "travelwave-lambert": "verified-numeric",
    "scaling-velocity": "verified-symbolic",
    "scaling-integral": "refuted",
    "boost-height": "refuted",
    "boost-velocity": "verified-numeric",
    "log-height": "verified-numeric",
    "log-velocity": "refuted",
    "power-law": "verified-symbolic",
    "power-law-gamma1": "verified-symbolic",
    "sigma-first-order": "refuted",
    "euler-generic": "verified-numeric",
}


def test_catalog_is_covered():
    assert sorted(EXPECTED) == sorted(c.name for c in rd.CANDIDATES)


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_candidate_verdicts(name):
    rep = rd.verify_candidate(name)
    assert rep.verdict == EXPECTED[name]
    assert rep.accepted
    if rep.verdict == "refuted":
        assert rep.witness is not None and rep.correction is not None and rep.correction.verified
    if rep.verdict == "verified-numeric":
        assert rep.max_residual < 1e-9


def test_power_law_constraint_is_rederived():
    rep = rd.verify_candidate("power-law")
    assert rep.verdict == "verified-symbolic"
    text = str(rep.to_dict()["extra"])
    assert "V0" in text


def test_constraint_violation_rejected():
    with pytest.raises(rd.ConstraintError):
        rd.verify_candidate("scaling-integral", grid={"gamma": 0.5, "V0": 1.0, "z": 1.0, "w": 0.0})


def test_scaling_first_integral_correction():
    rep = rd.first_integral_check("scaling-first-order")
    ex = rep.extra
    assert ex["derived_integral_conserved"] and ex["correction_matches_derived"]
    assert ex["drift"]["relative_drift"] < 1e-6
    assert abs(ex["witness_gamma2_V0_0_z1"]["difference"]) > 0.1


def test_conservation_drift_of_derived_integral():
    assert rd.conservation_drift()["relative_drift"] < 1e-6


def test_lambda_equation_is_second_order():
    e = rd.lambda_ode()
    assert any(s.name.endswith("lambdalambda") for s in e.free_symbols)


z = sk.sym("z")
exponents = st.fractions(min_value=-4, max_value=4, max_denominator=6).filter(lambda q: q != -1)


@given(exponents, st.integers(1, 9))
def test_antiderivative_of_powers(p, k):
    e = sp.Integer(k) * z ** sp.Rational(p.numerator, p.denominator)
    F = rd.antiderivative(e, z)
    assert sk.is_zero(sp.diff(F, z) - e).zero


@given(exponents)
def test_antiderivative_symbolic_exponent(p):
    e = 2 / (g + 1) ** 2 * z ** (-g + sp.Rational(p.numerator, p.denominator))
    F = rd.antiderivative(e, z)
    assert sk.is_zero(sp.diff(F, z) - e, ranges={"gamma": (1.1, 1.9)}).zero


def test_power_split():
    coeff, p = rd.power_split(3 * g * z ** (g - 1), z)
    assert sk.simplify(coeff - 3 * g) == 0 and sk.simplify(p - (g - 1)) == 0
