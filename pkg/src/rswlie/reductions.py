"""Similarity reductions, closed-form candidates and their residual checks.

Every reduction stores two sets of reduced equations: the *claimed* forms
(as published, kept verbatim in grammar text) and the *derived* forms
(recomputed here from the ansatz).  Consistency means each claimed form is
a combination ``sum_i m_i S_i`` of the substituted source residuals
``S_i`` with jet-free multipliers ``m_i``, and that the combination can be
inverted.  Claimed forms that fail are reported with a witness point on the
derived solution manifold.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Mapping, Sequence

import sympy as sp

from . import symkernel as sk
from .jetfield import VariableSpace, total_derivative
from .models import EULER, REDUCED, build_system

__all__ = [
    "CANDIDATES",
    "ConsistencyReport",
    "ConstraintError",
    "DerivedOde",
    "FormCheck",
    "REDUCTION_NAMES",
    "Reduction",
    "ResidualReport",
    "SUBFORM_NAMES",
    "SolutionCandidate",
    "antiderivative",
    "candidate",
    "consistency_report",
    "conservation_drift",
    "derive_master_ode",
    "first_integral_check",
    "integrate_exact",
    "lambda_ode",
    "normalize_name",
    "power_split",
    "reduce",
    "tidy",
    "verify_candidate",
]

G = sk.sym("gamma")
NUMERIC_TOL = 1e-9


def _p(text: str, space: VariableSpace | None = None, **names) -> sp.Expr:
    return sk.parse(text, space, names or None)


# --------------------------------------------------------------------------
# ansatz machinery

def _chain(F: sp.Expr, y: sp.Symbol, phi: sp.Expr, R: VariableSpace) -> sp.Expr:
    """D_y of F(t, x, reduced jets) where reduced functions depend on phi(t, x)."""
    out = sp.diff(F, y)
    dphi = sp.diff(phi, y)
    if dphi == 0:
        return out
    for s in F.free_symbols:
        dec = R.decode(s)
        if dec is None:
            continue
        dep, (k,) = dec
        out += R.jet(dep, (k + 1,)) * sp.diff(F, s) * dphi
    return out


def substitute_ansatz(
    residuals: Sequence[sp.Expr],
    source: VariableSpace,
    R: VariableSpace,
    phi: sp.Expr,
    ansatz: Mapping[str, sp.Expr],
    eliminate: Mapping[sp.Symbol, sp.Expr] | None = None,
) -> list[sp.Expr]:
    """Push an invariant ansatz through PDE residuals.

    ``ansatz`` maps each source dependent to an expression in the original
    coordinates and the reduced variables of ``R``; ``eliminate`` rewrites
    a leftover original coordinate in terms of the new one.
    """
    ind = source.independent_symbols
    values: dict[sp.Symbol, sp.Expr] = {}
    for r in residuals:
        for s in r.free_symbols:
            if s in values:
                continue
            dec = source.decode(s)
            if dec is None:
                continue
            dep, counts = dec
            e = ansatz[dep]
            for y, k in zip(ind, counts):
                for _ in range(k):
                    e = _chain(e, y, phi, R)
            values[s] = e
    out = []
    for r in residuals:
        e = r.xreplace(values)
        if eliminate:
            e = e.xreplace(dict(eliminate))
        e = sp.powsimp(sp.powdenest(sp.expand(e), force=True), force=True)
        out.append(sk.simplify(e))
    return out


@dataclass
class FormCheck:
    label: str
    kind: str  # claimed | derived
    expr: sp.Expr
    consistent: bool
    multipliers: list[sp.Expr] | None
    max_residual: float = 0.0
    witness: dict | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "label": self.label, "kind": self.kind, "form": sk.render(self.expr),
            "consistent": self.consistent,
            "multipliers": None if self.multipliers is None else [sk.render(m) for m in self.multipliers],
            "max_residual": self.max_residual, "witness": self.witness, "note": self.note,
        }


@dataclass
class ConsistencyReport:
    name: str
    forms: list[FormCheck]
    invertible: dict[str, bool]
    notes: list[str] = field(default_factory=list)

    @property
    def claimed_ok(self) -> bool:
        cl = [f for f in self.forms if f.kind == "claimed"]
        return bool(cl) and all(f.consistent for f in cl) and self.invertible.get("claimed", False)

    @property
    def derived_ok(self) -> bool:
        dv = [f for f in self.forms if f.kind == "derived"]
        return all(f.consistent for f in dv) and self.invertible.get("derived", False)

    @property
    def verdict(self) -> str:
        if self.claimed_ok:
            return "consistent"
        if not any(f.kind == "claimed" for f in self.forms):
            return "no claimed form; derived form verified" if self.derived_ok else "inconsistent"
        if self.derived_ok:
            return "claimed form inconsistent; derived form verified"
        return "inconsistent"

    def to_dict(self) -> dict:
        return {"reduction": self.name, "verdict": self.verdict, "invertible": self.invertible,
                "forms": [f.to_dict() for f in self.forms], "notes": self.notes}


def _jets_of(e: sp.Expr, R: VariableSpace) -> list[sp.Symbol]:
    return sorted((s for s in e.free_symbols if R.is_jet(s)), key=lambda s: s.name)


def _sample(syms, seed: int, ranges=None) -> dict:
    return sk.sample_point(syms, random.Random(seed), ranges)


def _opaque_atoms(E: sp.Expr, R: VariableSpace) -> dict:
    """Jet-dependent subexpressions that are not polynomial in the jets."""
    jets = set(_jets_of(E, R))
    out = {}
    for a in sp.preorder_traversal(E):
        if a in out or not (a.free_symbols & jets):
            continue
        if isinstance(a, sp.Pow) and a.base in jets and a.exp.is_Integer and a.exp > 0:
            continue
        if isinstance(a, sp.Pow) or (isinstance(a, sp.Function) and not isinstance(a, sp.Derivative)):
            if not any(a.has(b) for b in out):
                out[a] = sp.Dummy("q")
    return out


def _coefficient_equations(E: sp.Expr, R: VariableSpace) -> list[sp.Expr]:
    gens = _jets_of(E, R)
    if not gens:
        return [E]
    try:
        return [c for _, c in sp.Poly(E, *gens).terms()]
    except sp.PolynomialError:
        pass
    # treat non-polynomial jet subexpressions as extra independent generators
    atoms = _opaque_atoms(E, R)
    E2 = sp.expand(E.xreplace(atoms))
    gens2 = _jets_of(E2, R) + list(atoms.values())
    try:
        return [c for _, c in sp.Poly(E2, *gens2).terms()]
    except sp.PolynomialError:
        num = sp.numer(sp.together(E2))
        return [c for _, c in sp.Poly(sp.expand(num), *gens2).terms()]


def match_combination(
    C: sp.Expr, S: Sequence[sp.Expr], R: VariableSpace, ranges=None, seed: int = sk.DEFAULT_SEED
) -> tuple[list[sp.Expr] | None, sk.ZeroTest]:
    """Jet-free multipliers m with C = sum m_i S_i, verified by the zero test."""
    ms = [sp.Dummy(f"m{i}") for i in range(len(S))]
    E = sp.expand(C - sum(m * s for m, s in zip(ms, S)))
    eqs = _coefficient_equations(E, R)
    # pick independent rows numerically, solve those exactly, then verify all
    A = [[sp.diff(e, m) for m in ms] for e in eqs]
    b = [-e.subs({m: 0 for m in ms}) for e in eqs]
    free = set().union(*(sp.sympify(a).free_symbols for row in A for a in row)) if A else set()
    free |= set().union(*(sp.sympify(v).free_symbols for v in b)) if b else set()
    pt = _sample(free, seed + 1, ranges)
    chosen, rows = [], []
    for i, row in enumerate(A):
        num = [complex(sp.sympify(a).subs(pt).evalf()).real for a in row]
        trial = rows + [num]
        if sp.Matrix(trial).rank(iszerofunc=lambda x: abs(x) < 1e-9) > len(rows):
            rows.append(num)
            chosen.append(i)
        if len(rows) == len(ms):
            break
    sol = {}
    if chosen:
        pivot_ms = []
        # unknowns whose column is numerically zero in every chosen row stay 0
        for j, m in enumerate(ms):
            if any(abs(r[j]) > 1e-12 for r in rows):
                pivot_ms.append(m)
        res = sp.solve([eqs[i] for i in chosen], pivot_ms, dict=True)
        if not res:
            return None, sk.ZeroTest(False, "symbolic", float("inf"))
        sol = res[0]
    mult = [sk.simplify(sp.sympify(sol.get(m, 0)).subs({mm: 0 for mm in ms})) for m in ms]
    test = sk.is_zero(C - sum(m * s for m, s in zip(mult, S)), ranges=ranges, seed=seed)
    return (mult if test.zero else None), test


def _invertible(M: list[list[sp.Expr]], S: Sequence[sp.Expr], ranges=None, seed: int = 5) -> bool:
    nonzero = [i for i, s in enumerate(S) if s != 0]
    if not M:
        return not nonzero
    cols = [[row[i] for i in nonzero] for row in M]
    free = set().union(*(sp.sympify(c).free_symbols for row in cols for c in row)) if cols else set()
    pt = _sample(free, seed, ranges)
    num = sp.Matrix([[complex(sp.sympify(c).subs(pt).evalf()).real for c in row] for row in cols])
    return num.rank(iszerofunc=lambda x: abs(x) < 1e-9) == len(nonzero)




# --------------------------------------------------------------------------
# reductions

class EliminationError(ValueError):
    """A first integral or elimination step could not be carried out."""


class ConsistencyError(AssertionError):
    """The derived reduced equations do not follow from the ansatz."""


def _strip_factors(e: sp.Expr, R: VariableSpace) -> sp.Expr:
    """``e`` with jet-free overall factors removed."""
    e = sk.simplify(e)
    if e == 0:
        return e
    num = sp.factor_terms(sp.expand(e))
    if isinstance(num, sp.Mul):
        keep = [f for f in num.args if any(R.is_jet(s) or R.decode(s) for s in f.free_symbols)]
        num = sp.Mul(*keep) if keep else sp.Integer(1)
    return sk.simplify(num)


@dataclass(eq=False)
class Reduction:
    """A similarity reduction with claimed and derived reduced equations.

    ``claimed`` holds the equations as published (``None`` when nothing was
    published); ``derived`` holds the forms this package stands behind.
    ``integrals`` records reduced unknowns that a trivial equation fixes to
    a constant, such as ``H = H0`` for the point reduction.
    """

    name: str
    symmetry: str
    source: str
    coordinate: str
    coordinate_def: str
    ansatz: dict[str, str]
    space: VariableSpace
    claimed: list[sp.Expr] | None
    derived: list[sp.Expr]
    params: tuple[str, ...]
    gamma: sp.Expr
    substituted_fn: Callable[[], list[sp.Expr]]
    integrals: dict[str, str] = field(default_factory=dict)
    ranges: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    subforms: tuple[str, ...] = ()
    _S: list[sp.Expr] | None = field(default=None, repr=False)

    def substituted(self) -> list[sp.Expr]:
        """Source residuals after the ansatz (or parent elimination) is applied."""
        if self._S is None:
            self._S = [sk.simplify(e) for e in self.substituted_fn()]
        return self._S

    @property
    def residuals(self) -> list[sp.Expr]:
        out = []
        fix = {}
        for dep, const in self.integrals.items():
            fix[self.space.symbol(dep)] = sk.parse(const)
            for j in self.space.jets(self.space.order):
                if self.space.decode(j)[0] == dep:
                    fix[j] = sp.Integer(0)
        for e in self.derived:
            e = sk.simplify(e.xreplace(fix)) if fix else e
            if e != 0:
                out.append(e)
        return out

    def consistency(self, seed: int = sk.DEFAULT_SEED) -> ConsistencyReport:
        S = self.substituted()
        forms: list[FormCheck] = []
        inv = {}
        for kind, exprs in (("claimed", self.claimed), ("derived", self.derived)):
            if exprs is None:
                continue
            M = []
            for k, C in enumerate(exprs):
                mult, test = match_combination(C, S, self.space, self.ranges, seed)
                fc = FormCheck(f"{kind}[{k}]", kind, C, mult is not None, mult, test.max_residual, test.witness)
                if mult is None and kind == "claimed":
                    w = self.manifold_witness(C, seed)
                    if w is not None and not w.zero:
                        fc.max_residual, fc.witness = w.max_residual, w.witness
                        fc.note = "nonzero on the derived solution manifold"
                forms.append(fc)
                M.append(mult if mult is not None else [sp.Integer(0)] * len(S))
            inv[kind] = all(f.consistent for f in forms if f.kind == kind) and _invertible(M, S, self.ranges)
        return ConsistencyReport(self.name, forms, inv, list(self.notes))

    def manifold_witness(self, C: sp.Expr, seed: int = sk.DEFAULT_SEED) -> sk.ZeroTest | None:
        """Zero test of C after eliminating the derived system's leading jets."""
        solved = solve_leading(self.derived, self.space)
        if not solved:
            return None
        e = C
        for _ in range(4):
            e = e.xreplace(solved)
        try:
            return sk.is_zero(e, ranges=self.ranges, seed=seed)
        except (sk.DomainError, TypeError, ValueError):
            return None

    def solve_first_order(self, exprs: Sequence[sp.Expr] | None = None) -> list[sp.Expr]:
        """Solve a first-order reduced system for the derivatives of its unknowns."""
        exprs = self.derived if exprs is None else exprs
        lead = [self.space.jet(d, (1,)) for d in self.space.dependents]
        sol = sp.solve(list(exprs), lead, dict=True)
        if len(sol) != 1:
            raise EliminationError("system is not solvable for first derivatives")
        return [sk.simplify(sol[0][j]) for j in lead]

    def describe(self, fmt: str = "text") -> dict:
        return {
            "name": self.name,
            "symmetry": self.symmetry,
            "source": self.source,
            "coordinate": f"{self.coordinate} = {self.coordinate_def}",
            "ansatz": dict(self.ansatz),
            "parameters": list(self.params),
            "gamma": sk.render(self.gamma, fmt),
            "claimed": None if self.claimed is None else [sk.render(e, fmt) for e in self.claimed],
            "derived": [sk.render(e, fmt) for e in self.derived],
            "residuals": [sk.render(e, fmt) for e in self.residuals],
            "integrals": dict(self.integrals),
            "subforms": list(self.subforms),
            "notes": list(self.notes),
        }


def solve_leading(exprs: Sequence[sp.Expr], R: VariableSpace) -> dict | None:
    """Solve each equation for its highest jet (ties broken by name)."""
    nz = [e for e in exprs if e != 0]
    if not nz:
        return {}
    lead = []
    for e in nz:
        jets = [s for s in _jets_of(e, R) if s not in lead]
        if jets:
            lead.append(max(jets, key=lambda s: (R.jet_order(s), s.name)))
    if not lead:
        return None
    try:
        sol = sp.solve(nz, lead, dict=True)
    except NotImplementedError:
        return None
    return sol[0] if sol else None


def _space(var: str, deps: Sequence[str], order: int = 3) -> VariableSpace:
    return VariableSpace((var,), tuple(deps), order=order, name=f"reduced({var})")


def _parse_list(texts, R, gamma) -> list[sp.Expr] | None:
    if texts is None:
        return None
    return [sk.parse(t, R, {"gamma": gamma}) for t in texts]


def _pde_builder(source, gamma, R, var_def, ansatz, eliminate):
    names = {"gamma": gamma}

    def build() -> list[sp.Expr]:
        system = build_system(source, gamma)
        phi = sk.parse(var_def, None, names)
        exprs = {k: sk.parse(v, None, names) for k, v in ansatz.items()}
        elim = None
        if eliminate:
            elim = {sk.sym(k): sk.parse(v, None, names) for k, v in eliminate.items()}
        return substitute_ansatz(system.residuals, system.space, R, phi, exprs, elim)

    return build


def _from_pde(name, symmetry, source, var, var_def, deps, ansatz, claimed, derived, params,
              gamma=G, eliminate=None, integrals=None, notes=(), ranges=None, subforms=()) -> Reduction:
    R = _space(var, deps)
    builder = _pde_builder(source, gamma, R, var_def, ansatz, eliminate)
    red = Reduction(
        name=name, symmetry=symmetry, source=source, coordinate=var, coordinate_def=var_def,
        ansatz=dict(ansatz), space=R, claimed=_parse_list(claimed, R, gamma), derived=[],
        params=tuple(params), gamma=gamma, substituted_fn=builder, integrals=dict(integrals or {}),
        ranges=dict(ranges or {}), notes=list(notes), subforms=tuple(subforms),
    )
    red.derived = _parse_list(derived, R, gamma) if derived is not None else [
        _strip_factors(e, R) for e in red.substituted() if e != 0]
    return red


def _mapped(name, symmetry, parent, var, var_def, deps, jet_map, claimed, params, gamma=G,
            derived=None, notes=(), ranges=None, source_fn=None) -> Reduction:
    """A reduction obtained by rewriting a parent ODE in new variables."""
    R = _space(var, deps)

    def build() -> list[sp.Expr]:
        exprs = source_fn() if source_fn is not None else derive_master_ode(reduce(parent)).exprs
        mp = {sk.sym(k) if isinstance(k, str) else k: sk.parse(v, R, {"gamma": gamma}) for k, v in jet_map.items()}
        return [sk.simplify(e.xreplace(mp)) for e in exprs]

    red = Reduction(
        name=name, symmetry=symmetry, source=parent, coordinate=var, coordinate_def=var_def,
        ansatz=dict(jet_map), space=R, claimed=_parse_list(claimed, R, gamma), derived=[],
        params=tuple(params), gamma=gamma, substituted_fn=build, ranges=dict(ranges or {}),
        notes=list(notes),
    )
    red.derived = _parse_list(derived, R, gamma) if derived is not None else [
        _strip_factors(e, R) for e in red.substituted() if e != 0]
    return red


# claimed forms, transcribed verbatim into the expression grammar
_SW = {
    "static": ["H^(gamma-1)*H_x - V"],
    "point": ["H_t", "V_tt + V"],
    "travelwave": ["V_xixi - H^(-2)*H_xi", "c^2*V_xixi - H^(gamma-1)*H_xi + V"],
    "travelwave-master": ["(c^2 - (H0 - V_xi)^(-gamma-1))*V_xixi + V"],
    "travelwave-first-order": ["w/(H0 - w)*w_z - z*((H0 - w)^(-gamma) - c^2*(H0 - w))^(-1)"],
    "scaling": ["(gamma-1)/(gamma+1)*V_t + H^(-2)*H_t", "V_tt - 2/(gamma+1)*H^gamma + V"],
    "scaling-master": ["Z_tt + Z - (gamma^2-1)/(gamma+1)^2*V0 + 2*(gamma-1)/(gamma+1)^2*Z^(-gamma)"],
    "scaling-first-order": ["w*w_z - ((gamma^2-1)/(gamma+1)^2*V0 - 2*(gamma-1)/(gamma+1)^2*z^(-gamma) - z)"],
    "scaling-gamma1": ["H_t", "V_tt + V"],
    "X2+betaGamma": ["H^(-2)*H_t + beta*sin(t+t0)", "V_tt + V"],
    "X5+betaGamma-gamma1": ["2*H^(-2)*H_t + beta*sin(t+t0)", "V_tt + V - H"],
    "alphaX1+X5": [
        "sigma*H^2*(gamma^2-1)*V_sigma - ((gamma-1)^2 + alpha^2)*H^2*V - (gamma+1)^2*sigma^2*H_sigma"
        " + alpha^2*H^(gamma+1)*H_sigma + 2*sigma*H",
        "(gamma+1)*sigma*H^2*V_sigmasigma - (gamma+1)*sigma*H_sigma + 2*H + 2*H^2*V_sigma",
    ],
    "alphaX1+X5-gamma1": [
        "alpha^2*H^2*V - 4*sigma*H + (4*sigma^2 - alpha^2)*H_sigma",
        "-4*sigma^2*V_sigmasigma - 4*sigma*V_sigma + alpha^2*(H_sigma - V)",
    ],
    "alphaX1+X5-lambda": [
        "Z_lambdalambda + (alpha^2*lambda^3 + 24*Z^(1/2))/(lambda*(alpha^2*lambda^2 - 4)*Z^(1/2))*Z_lambda"
        " + 2*(alpha^2*lambda^2 + 24*Z)/(lambda^2*(alpha^2*lambda^2 - 4))",
    ],
    "alphaX1+X5-first-order": [
        "(alpha^2*lambda^2 - 4)*Z_lambda + (2*alpha*lambda^2*(1 + lambda*sqrt(Z)) + 16*Z)/lambda + Z0*lambda^2",
    ],
    "euler-scaling": [
        "(gamma-1)*H_t + (gamma+1)*H*U",
        "(gamma-1)*(H_t*U + H*U_t - H*V) + 2*gamma*(H*U^2 + H^gamma)",
        "(gamma-1)*(H_t*V + H*V_t) + (gamma-1)*U*V + 2*gamma*H*U*V",
    ],
}

# derived forms (recomputed from the ansatz; equal to the claimed ones where those hold)
_DERIVED = {
    "scaling": ["(gamma-1)/(gamma+1)*V_t - H^(-2)*H_t", "V_tt - 2/(gamma+1)*H^gamma + V"],
    "scaling-gamma1": ["H_t", "V_tt + V - H"],
    "alphaX1+X5": [
        "sigma*H^2*(gamma^2-1)*V_sigma - ((gamma-1)^2 + alpha^2)*H^2*V - (gamma+1)^2*sigma^2*H_sigma"
        " + alpha^2*H^(gamma+1)*H_sigma + 2*(gamma+1)*sigma*H",
        "(gamma+1)*sigma*H^2*V_sigmasigma - (gamma+1)*sigma*H_sigma + 2*H + 2*H^2*V_sigma",
    ],
    "alphaX1+X5-gamma1": [
        "alpha^2*H^2*V - 4*sigma*H + (4*sigma^2 - alpha^2*H^2)*H_sigma",
        "-4*sigma^2*V_sigmasigma - 4*sigma*V_sigma + alpha^2*(H_sigma - V)",
    ],
    "euler-scaling": [
        "(gamma-1)*H_t + (gamma+1)*H*U",
        "(gamma-1)*(H_t*U + H*U_t - H*V) + 2*gamma*H*U^2 + 2*H^gamma",
        "(gamma-1)*(H_t*V + H*V_t) + (gamma-1)*H*U + 2*gamma*H*U*V",
    ],
    "euler-aY2+Y3": [
        "H_t + H*cos(t)/(a + sin(t))",
        "U_t - V + U*cos(t)/(a + sin(t))",
        "V_t + a*U/(a + sin(t))",
    ],
}

_ONE = sp.Integer(1)


def _build(name: str) -> Reduction:
    if name == "static":
        return _from_pde(name, "X1", "reduced", "x", "x", ("H", "V"), {"h": "H", "v": "V"},
                         _SW[name], _SW[name], ("gamma",))
    if name == "point":
        return _from_pde(name, "X2", "reduced", "t", "t", ("H", "V"), {"h": "H", "v": "V"},
                         _SW[name], _SW[name], ("gamma",), integrals={"H": "H0"})
    if name == "travelwave":
        return _from_pde(name, "X1 + c*X2", "reduced", "xi", "x - c*t", ("H", "V"), {"h": "H", "v": "V"},
                         _SW[name], _SW[name], ("gamma", "c"), eliminate={"x": "xi + c*t"},
                         subforms=("travelwave-master",))
    if name == "travelwave-master":
        return _mapped(name, "X1 + c*X2", "travelwave", "xi", "x - c*t", ("V",), {},
                       _SW[name], ("gamma", "c", "H0"), ranges={"H0": (3.0, 4.0), "V_xi": (-1.0, 1.0)},
                       source_fn=lambda: derive_master_ode(reduce("travelwave")).exprs,
                       notes=["first integral H^(-1) + V_xi = H0 eliminates H"])
    if name == "travelwave-first-order":
        return _mapped(name, "d/dxi on the master equation", "travelwave-master", "z", "V(xi), w = V_xi",
                       ("w",), {"V": "z", "V_xi": "w", "V_xixi": "w*w_z"}, _SW[name], ("gamma", "c", "H0"),
                       ranges={"H0": (3.0, 4.0), "w": (-1.0, 1.0)},
                       source_fn=lambda: derive_master_ode(reduce("travelwave")).exprs)
    if name == "scaling":
        return _from_pde(name, "X5", "reduced", "t", "t", ("H", "V"),
                         {"h": "H*x^(2/(gamma+1))", "v": "V*x^((gamma-1)/(gamma+1))"},
                         _SW[name], _DERIVED[name], ("gamma",), ranges={"gamma": (1.2, 3.0)},
                         subforms=("scaling-master", "scaling-first-order"),
                         notes=["the claimed first equation has the opposite sign on H^(-2)*H_t"])
    if name == "scaling-master":
        return _mapped(name, "X5", "scaling", "t", "t, Z = 1/H", ("Z",), {}, _SW[name],
                       ("gamma", "V0"), ranges={"gamma": (1.2, 3.0)},
                       source_fn=lambda: derive_master_ode(reduce("scaling")).exprs)
    if name == "scaling-first-order":
        return _mapped(name, "d/dt on the master equation", "scaling-master", "z", "Z(t), w = Z_t", ("w",),
                       {"Z": "z", "Z_t": "w", "Z_tt": "w*w_z"}, _SW[name], ("gamma", "V0"),
                       ranges={"gamma": (1.2, 3.0)},
                       source_fn=lambda: derive_master_ode(reduce("scaling")).exprs)
    if name == "scaling-gamma1":
        return _from_pde(name, "X5 at gamma=1", "reduced", "t", "t", ("H", "V"), {"h": "H*x", "v": "V"},
                         _SW[name], _DERIVED[name], (), gamma=_ONE, integrals={"H": "H0"},
                         notes=["the claimed oscillator drops the forcing by H = H0"])
    if name == "X2+betaGamma":
        return _from_pde(name, "X2 + beta*Gamma", "reduced", "t", "t", ("H", "V"),
                         {"h": "H", "v": "beta*x*cos(t+t0) + V"}, _SW[name], _SW[name],
                         ("gamma", "beta", "t0"))
    if name == "X5+betaGamma-gamma1":
        return _from_pde(name, "X5 + beta*Gamma at gamma=1", "reduced", "t", "t", ("H", "V"),
                         {"h": "H*x", "v": "beta/2*cos(t+t0)*ln(x) + V"}, _SW[name], _SW[name],
                         ("beta", "t0"), gamma=_ONE)
    if name == "alphaX1+X5":
        return _from_pde(name, "alpha*X1 + X5", "reduced", "sigma", "x*exp(-(gamma+1)*t/alpha)", ("H", "V"),
                         {"h": "H*exp(2*t/alpha)", "v": "V*exp((gamma-1)*t/alpha)"},
                         _SW[name], _DERIVED[name], ("gamma", "alpha"),
                         eliminate={"x": "sigma*exp((gamma+1)*t/alpha)"},
                         subforms=("alphaX1+X5-gamma1", "alphaX1+X5-lambda"),
                         notes=["the claimed first equation carries 2*sigma*H where 2*(gamma+1)*sigma*H follows"])
    if name == "alphaX1+X5-gamma1":
        return _from_pde(name, "alpha*X1 + X5 at gamma=1", "reduced", "sigma", "x*exp(-2*t/alpha)", ("H", "V"),
                         {"h": "H*exp(2*t/alpha)", "v": "V"}, _SW[name], _DERIVED[name], ("alpha",),
                         gamma=_ONE, eliminate={"x": "sigma*exp(2*t/alpha)"},
                         notes=["the claimed first equation drops H^2 on alpha^2*H_sigma"])
    if name == "alphaX1+X5-lambda":
        return _mapped(name, "sigma scaling of the gamma=1 system", "alphaX1+X5-gamma1", "lambda",
                       "H/sigma, Z^2 = H/sigma - H_sigma", ("Z",), {}, _SW[name], ("alpha",), gamma=_ONE,
                       source_fn=lambda: [lambda_ode(in_z=True)],
                       ranges={"lambda": (0.3, 2.5), "Z": (0.3, 2.5)})
    if name == "euler-scaling":
        return _from_pde(name, "Y5", "euler", "t", "t", ("H", "U", "V"),
                         {"h": "H*x^(2/(gamma-1))", "u": "U*x", "v": "V*x"}, _SW[name], _DERIVED[name],
                         ("gamma",), ranges={"gamma": (1.2, 3.0)},
                         notes=["claimed second equation: 2*gamma*H^gamma where 2*H^gamma follows",
                                "claimed third equation: (gamma-1)*U*V where (gamma-1)*H*U follows"])
    if name == "euler-aY2+Y3":
        return _from_pde(name, "a*Y2 + Y3", "euler", "t", "t", ("H", "U", "V"),
                         {"h": "H", "u": "x*cos(t)/(a + sin(t)) + U", "v": "-x*sin(t)/(a + sin(t)) + V"},
                         None, _DERIVED[name], ("gamma", "a"), ranges={"a": (1.5, 3.0)},
                         notes=["no reduced system is published; only its general solution"])
    raise KeyError(name)


REDUCTION_NAMES = (
    "static", "point", "travelwave", "travelwave-first-order", "scaling", "scaling-gamma1",
    "X2+betaGamma", "X5+betaGamma-gamma1", "alphaX1+X5", "euler-scaling", "euler-aY2+Y3",
)
SUBFORM_NAMES = ("travelwave-master", "scaling-master", "scaling-first-order",
                 "alphaX1+X5-gamma1", "alphaX1+X5-lambda")

_ALIASES = {"γ": "gamma", "β": "beta", "Γ": "Gamma", "α": "alpha", "γ1": "gamma1"}


def normalize_name(name: str) -> str:
    n = name.strip()
    for a, b in _ALIASES.items():
        n = n.replace(a, b)
    n = n.replace("*", "").replace(" ", "")
    table = {k.lower(): k for k in REDUCTION_NAMES + SUBFORM_NAMES}
    key = n.lower()
    if key not in table:
        raise KeyError(f"unknown reduction {name!r}; known: {', '.join(REDUCTION_NAMES + SUBFORM_NAMES)}")
    return table[key]


@lru_cache(maxsize=None)
def _reduce(name: str) -> Reduction:
    red = _build(name)
    rep = red.consistency()
    if not rep.derived_ok:
        raise ConsistencyError(f"{name}: derived forms do not follow from the ansatz")
    red._report = rep
    return red


def reduce(name: str) -> Reduction:
    """Look up a catalogued reduction; its derived forms are checked on first use."""
    return _reduce(normalize_name(name))


def consistency_report(name: str) -> ConsistencyReport:
    return reduce(name)._report


# --------------------------------------------------------------------------
# antiderivatives and first integrals

def power_split(term: sp.Expr, var: sp.Symbol) -> tuple[sp.Expr, sp.Expr]:
    """Write a single term as ``k * var**p``; raises if it is not of that form."""
    if var not in term.free_symbols:
        return term, sp.Integer(0)

    def mixed(t):
        return any((a.is_Add or isinstance(a, sp.Function)) and var in a.free_symbols
                   for a in sp.preorder_traversal(t))

    if mixed(term):
        term = sp.factor_terms(term)
        if mixed(term):
            raise EliminationError(f"term {term} is not of power form in {var}")
    # exponent from the logarithmic derivative, so k*var**p survives any rewriting
    p = sk.simplify(sp.powsimp(sp.expand(var * sp.diff(term, var) / term), force=True))
    if var in p.free_symbols:
        p = sp.simplify(p)
    p = sp.cancel(sp.together(p))
    k = sk.simplify(sp.powsimp(term * var ** (-p), force=True))
    if var in k.free_symbols:
        k = sp.simplify(k)
    if var in k.free_symbols or var in p.free_symbols:
        raise EliminationError(f"term {term} is not of power form in {var}")
    return k, p


def tidy(e: sp.Expr, variables: Sequence[sp.Symbol]) -> sp.Expr:
    """Group a sum of monomials in ``variables`` and factor each coefficient."""
    groups: dict = {}
    for term in sp.Add.make_args(sp.expand(e)):
        k, mono = term, sp.Integer(1)
        for v in variables:
            try:
                k, p = power_split(k, v)
            except EliminationError:
                return e
            mono *= v**p
        groups[mono] = groups.get(mono, 0) + k
    return sp.Add(*(sp.factor(k) * m for m, k in groups.items()))


def antiderivative(e: Any, var: sp.Symbol) -> sp.Expr:
    """Term-by-term power-rule antiderivative of a sum of ``k*var**p`` terms."""
    e = sp.expand(sp.sympify(e), power_base=False, power_exp=True)
    out = sp.Integer(0)
    for term in sp.Add.make_args(e):
        k, p = power_split(term, var)
        if sk.is_zero(p + 1).zero:
            out += k * sp.log(var)
        else:
            out += k * var ** (p + 1) / (p + 1)
    return out


def integrate_exact(e: sp.Expr, R: VariableSpace) -> sp.Expr:
    """F with D(F) = e for an e linear in top jets, each coefficient a power of the jet below."""
    (y,) = R.independent_symbols
    e = sp.expand(e)
    F = sp.Integer(0)
    for term in sp.Add.make_args(e):
        top = [s for s in term.free_symbols if R.is_jet(s) or R.decode(s)]
        if not top:
            raise EliminationError(f"term {term} has no derivative factor")
        lead = max(top, key=lambda s: R.jet_order(s) if R.is_jet(s) else 0)
        dep, (k,) = R.decode(lead)
        if k == 0:
            raise EliminationError(f"term {term} is not a total derivative")
        below = R.jet(dep, (k - 1,))
        coeff = sp.simplify(term / lead)
        F += antiderivative(coeff, below)
    if not sk.is_zero(total_derivative(F, y, R) - e).zero:
        raise EliminationError("expression is not an exact total derivative")
    return F


@dataclass
class DerivedOde:
    reduction: str
    first_integral: sp.Expr
    constant: str
    expr: sp.Expr
    claimed: sp.Expr | None
    matches_claimed: bool
    flags: list[str] = field(default_factory=list)
    space: VariableSpace | None = None

    @property
    def exprs(self) -> list[sp.Expr]:
        return [self.expr]

    def to_dict(self) -> dict:
        return {"reduction": self.reduction, "first_integral": f"{sk.render(self.first_integral)} = {self.constant}",
                "master": sk.render(self.expr), "claimed": None if self.claimed is None else sk.render(self.claimed),
                "matches_claimed": self.matches_claimed, "flags": self.flags}


def _same_equation(a: sp.Expr, b: sp.Expr, R: VariableSpace, ranges=None) -> bool:
    """a == k*b for a jet-free nonzero k."""
    mult, _ = match_combination(a, [b], R, ranges)
    return mult is not None and mult[0] != 0


def derive_master_ode(red: Reduction, params: Mapping[str, Any] | None = None) -> DerivedOde:
    """Eliminate one unknown via the first integral and return the single master ODE."""
    params = dict(params or {})
    if red.name == "travelwave":
        R = red.space
        F = integrate_exact(red.derived[0], R)
        H, Hxi = R.symbol("H"), R.jet("H", (1,))
        sol = sp.solve(sp.Eq(F, sk.sym("H0")), H)
        if len(sol) != 1:
            raise EliminationError("first integral not solvable for H")
        Hexpr = sol[0]
        Hx = total_derivative(Hexpr, R.independent_symbols[0], R)
        # name the positive base H0 - V_xi so its powers combine
        base = sp.Dummy("s", positive=True)
        den = 1 / Hexpr
        Hexpr, Hx = Hexpr.xreplace({den: base}), sk.simplify(Hx * den**2) / base**2
        master = sk.simplify(red.derived[1].xreplace({Hxi: Hx, H: Hexpr})).xreplace({base: den})
        M = _space("xi", ("V",))
        master = master.xreplace({R.symbol("V"): M.symbol("V")})
        out = DerivedOde(red.name, F, "H0", master, None, False, space=M)
        claimed = sk.parse(_SW["travelwave-master"][0], M)
    elif red.name == "scaling":
        R = red.space
        Zs = _space("t", ("Z", "V"))
        Z, t = Zs.symbol("Z"), Zs.independent_symbols[0]
        Hexpr = 1 / Z
        mp = {R.symbol("H"): Hexpr, R.symbol("V"): Zs.symbol("V")}
        d = Hexpr
        for k in (1, 2):
            d = total_derivative(d, t, Zs)
            mp[R.jet("H", (k,))] = d
            mp[R.jet("V", (k,))] = Zs.jet("V", (k,))
        eqs = [sk.simplify(e.xreplace(mp)) for e in red.derived]
        F = integrate_exact(eqs[0], Zs)
        V0 = sk.sym("V0")
        sol = sp.solve(sp.Eq(F, F.xreplace({Zs.symbol("V"): V0, Z: 0})), Zs.symbol("V"))
        if len(sol) != 1:
            raise EliminationError("first integral not solvable for V")
        Vexpr = sol[0]
        sub = {Zs.symbol("V"): Vexpr}
        dv = Vexpr
        for k in (1, 2):
            dv = total_derivative(dv, t, Zs)
            sub[Zs.jet("V", (k,))] = dv
        master = sk.simplify(eqs[1].xreplace(sub))
        M = _space("t", ("Z",))
        master = master.xreplace({Zs.jet("Z", (k,)): M.jet("Z", (k,)) for k in (1, 2)} | {Z: M.symbol("Z")})
        lead = M.jet("Z", (2,))
        master = sp.expand(master / sp.expand(master).coeff(lead))
        master = sp.collect(master, [lead, M.symbol("Z"), V0], sp.factor)
        out = DerivedOde(red.name, F, f"({sk.render(F.xreplace({Zs.symbol('V'): V0, Z: 0}))})", master, None,
                         False, space=M)
        claimed = sk.parse(_SW["scaling-master"][0], M)
    else:
        raise EliminationError(f"reduction {red.name!r} has no first integral to eliminate with")
    out.claimed = claimed
    out.matches_claimed = _same_equation(claimed, out.expr, out.space, red.ranges)
    if params:
        bind = {sk.sym(k): sp.nsimplify(v) for k, v in params.items()}
        out.expr = sk.simplify(out.expr.xreplace(bind))
        out.claimed = sk.simplify(out.claimed.xreplace(bind))
        if red.name == "scaling":
            Z = out.space.symbol("Z")
            rest = sk.simplify((out.expr - out.space.jet("Z", (2,)) - Z) * Z**3)
            if rest != 0 and Z not in rest.free_symbols:
                out.flags.append("Ermakov-Pinney")
    return out


def lambda_ode(in_z: bool = False) -> sp.Expr:
    """Second-order ODE in lambda = H/sigma for the gamma = 1 power-law family.

    The unknown is Y = H/sigma - H_sigma (or Z with Y = Z**2 when ``in_z``).
    Obtained by solving the derived first gamma = 1 equation for V and
    substituting into the second, with d/dsigma = -(Y/sigma) d/dlambda + d/dsigma|explicit.
    """
    return _lambda_ode(in_z)


def _lambda_parts():
    lam, sig = sk.sym("lambda"), sk.sym("sigma")
    L = _space("lambda", ("Y",))
    Y, Y1, Y2 = L.symbol("Y"), L.jet("Y", (1,)), L.jet("Y", (2,))

    def Ds(F):
        return sp.diff(F, sig) + (-Y / sig) * (sp.diff(F, lam) + Y1 * sp.diff(F, Y) + Y2 * sp.diff(F, Y1))

    red = reduce("alphaX1+X5-gamma1")
    R = red.space
    first, second = red.derived
    (Vsol,) = sp.solve(first, R.symbol("V"))
    H, Hs = lam * sig, lam - Y
    V = sk.simplify(Vsol.xreplace({R.symbol("H"): H, R.jet("H", (1,)): Hs}))
    Vs = sk.simplify(Ds(V))
    Vss = sk.simplify(Ds(Vs))
    eq = second.xreplace({R.jet("V", (2,)): Vss, R.jet("V", (1,)): Vs, R.symbol("V"): V,
                          R.jet("H", (1,)): Hs, R.symbol("H"): H})
    return L, sk.simplify(eq), V


@lru_cache(maxsize=None)
def _lambda_ode(in_z: bool) -> sp.Expr:
    L, eq, _ = _lambda_parts()
    Y, Y1, Y2 = L.symbol("Y"), L.jet("Y", (1,)), L.jet("Y", (2,))
    (f,) = sp.solve(eq, Y2)
    f = sk.simplify(f)
    if sk.sym("sigma") in f.free_symbols:
        raise EliminationError("sigma does not drop out of the lambda equation")
    if not in_z:
        return sk.simplify(Y2 - f)
    Zs = _space("lambda", ("Z",))
    Z, Z1, Z2 = Zs.symbol("Z"), Zs.jet("Z", (1,)), Zs.jet("Z", (2,))
    fz = f.xreplace({Y: Z**2, Y1: 2 * Z * Z1})
    return sk.simplify(Z2 - (fz - 2 * Z1**2) / (2 * Z))


# --------------------------------------------------------------------------
# closed-form candidates

class ConstraintError(ValueError):
    """A verification grid violates the candidate's validity constraints."""


@dataclass(frozen=True)
class SolutionCandidate:
    """A published closed form, tied to the reduced system it should solve.

    ``form`` is ``explicit`` (unknowns given as functions), ``implicit``
    (``F = 0`` with one free constant eliminated through ``F`` itself),
    ``first-integral`` (``F`` constant along solutions) or ``map-back``
    (a transformed ODE checked through the original variables).
    """

    name: str
    reduction: str
    form: str
    solution: Mapping[str, str]
    constants: tuple[str, ...] = ()
    constraints: tuple[str, ...] = ()
    grid: Mapping[str, Any] = field(default_factory=dict)
    mode: str = "symbolic"
    target: tuple[int, ...] | None = None
    bind: Mapping[str, Any] = field(default_factory=dict)
    relations: Mapping[str, str] = field(default_factory=dict)
    eliminate: str | None = None
    correction: Mapping[str, str] | None = None
    correction_form: str | None = None
    description: str = ""


_T20 = (0.0, 20.0)

CANDIDATES: tuple[SolutionCandidate, ...] = (
    SolutionCandidate(
        "oscillator", "point", "explicit", {"V": "V1*cos(t) + V2*sin(t)"}, ("V1", "V2"),
        grid={"t": _T20, "V1": (-2, 2), "V2": (-2, 2)}, target=(1,),
        description="harmonic solution of the point reduction"),
    SolutionCandidate(
        "travelwave-height", "travelwave", "first-integral", {"F": "H^(-1) + V_xi"}, ("H0",),
        grid={"c": (0.5, 2), "gamma": (0.5, 3)}, target=(0,),
        description="height in terms of the wave slope"),
    SolutionCandidate(
        "travelwave-integral", "travelwave-first-order", "implicit",
        {"F": "gamma*(gamma-1)*(z^2 + c^2*w^2 + w0) + (H0 - w)^(1-gamma)"}, ("w0",),
        constraints=("gamma != 1", "H0 - w > 0"),
        grid={"gamma": (1.2, 3), "c": (0.5, 2), "H0": (3, 4), "z": (-1, 1), "w": (-1, 1)},
        eliminate="w0",
        correction={"F": "c^2*w^2/2 - H0*(H0 - w)^(-gamma)/gamma + (H0 - w)^(1-gamma)/(gamma-1) + z^2/2"},
        correction_form="first-integral",
        description="implicit phase-plane solution of the travelling wave"),
    SolutionCandidate(
        "travelwave-lambert", "travelwave-first-order", "explicit",
        {"w": "exp(-lambertW(-c^2*exp(z^2 + 2*w0))/2 + z^2/2 + w0)"}, ("w0",),
        constraints=("c^2*exp(z^2 + 2*w0) <= exp(-1)",),
        grid={"z": (0.1, 2.0), "c": 1.0, "w0": -3.0}, mode="numeric", bind={"gamma": 1, "H0": 0},
        description="Lambert-W phase-plane solution at gamma = 1, H0 = 0"),
    SolutionCandidate(
        "scaling-velocity", "scaling", "first-integral", {"F": "V + (gamma+1)/(gamma-1)*H^(-1)"}, ("V0",),
        constraints=("gamma > 1",), grid={"gamma": (1.2, 3)}, target=(0,),
        description="velocity amplitude from the scaling first integral"),
    SolutionCandidate(
        "scaling-integral", "scaling-first-order", "first-integral",
        {"F": "w^2 - (2*(gamma^2-1)/(gamma+1)^2*V0*z - 4/(gamma+1)^3*z^(1-gamma) - z^2)"}, (),
        constraints=("gamma > 1",), grid={"gamma": (1.2, 3), "V0": (-2, 2), "z": (0.3, 2.5), "w": (-2, 2)},
        correction={"F": "w^2 - 2*(gamma-1)/(gamma+1)*V0*z - 4/(gamma+1)^2*z^(1-gamma) + z^2"},
        correction_form="first-integral",
        description="energy integral of the scaling oscillator"),
    SolutionCandidate(
        "boost-height", "X2+betaGamma", "explicit", {"H": "-(H0 - beta*cos(t+t0))^(-1)"}, ("H0",),
        constraints=("beta < H0", "H0 != 0"), grid={"t": _T20, "beta": 1.0, "H0": 2.0, "t0": 0.0},
        mode="numeric", target=(0,),
        correction={"H": "(H0 - beta*cos(t+t0))^(-1)"},
        description="height under the Galilean-rotation boost"),
    SolutionCandidate(
        "boost-velocity", "X2+betaGamma", "explicit", {"V": "V1*cos(t+t1)"}, ("V1", "t1"),
        grid={"t": _T20, "V1": (-2, 2), "t1": (0, 6.283)}, mode="numeric", target=(1,),
        description="velocity under the Galilean-rotation boost"),
    SolutionCandidate(
        "log-height", "X5+betaGamma-gamma1", "explicit", {"H": "2/(H0 - beta*cos(t+t0))"}, ("H0",),
        constraints=("beta < H0",), grid={"t": _T20, "beta": 1.0, "H0": 2.0, "t0": 0.0},
        mode="numeric", target=(0,),
        description="height of the logarithmic-velocity solution"),
    SolutionCandidate(
        "log-velocity", "X5+betaGamma-gamma1", "explicit",
        {"H": "2/(H0 - beta*cos(t+t0))",
         "V": "V1*cos(t+t0+t1) + 2/beta*(2*sin(t+t0)*atan((cos(t+t0) - 1)/sin(t+t0))"
              " - cos(t+t0)*ln(beta*cos(t+t0) - 2*H0))"
              " - 8*(beta*sqrt(4*H0^2 - beta^2))^(-1)*H0*sin(t+t0)"
              "*atan((2*H0 + beta)/sqrt(4*H0^2 - beta^2)*(cos(t+t0) - 1)/sin(t+t0))"},
        ("V1", "t1", "H0"), constraints=("beta < H0", "beta > 0"),
        grid={"t": _T20, "beta": 1.0, "H0": 2.0, "t0": 0.0, "V1": 0.5, "t1": 0.3},
        mode="numeric", target=(1,),
        correction={
            "H": "2/(H0 - beta*cos(t+t0))",
            "V": "V1*cos(t+t0+t1) - 2/beta*cos(t+t0)*ln(H0 - beta*cos(t+t0))"
                 " + 2/beta*sin(t+t0)*(-(t+t0) + 2*H0/sqrt(H0^2 - beta^2)"
                 "*atan(sqrt((H0 + beta)/(H0 - beta))*tan((t+t0)/2)))"},
        description="velocity of the logarithmic-velocity solution"),
    SolutionCandidate(
        "power-law", "alphaX1+X5", "explicit",
        {"H": "H0*sigma^(2/(gamma+1))", "V": "V0*sigma^((gamma-1)/(gamma+1))"}, ("H0", "V0"),
        grid={"gamma": (1.2, 3), "H0": (0.3, 2.5), "alpha": (0.5, 2), "sigma": (0.3, 2.5)},
        relations={"V0": "2*H0^gamma/(gamma+1)"},
        description="power-law similarity solution with its amplitude constraint"),
    SolutionCandidate(
        "power-law-gamma1", "alphaX1+X5-gamma1", "explicit", {"H": "H0*sigma", "V": "H0"}, ("H0",),
        grid={"H0": (0.3, 2.5), "alpha": (0.5, 2), "sigma": (0.3, 2.5)},
        description="power-law solution at gamma = 1"),
    SolutionCandidate(
        "sigma-first-order", "alphaX1+X5-lambda", "map-back",
        {"Z_lambda": "-((2*alpha*lambda^2*(1 + lambda*sqrt(Z)) + 16*Z)/lambda + Z0*lambda^2)/(alpha^2*lambda^2 - 4)"},
        ("Z0",), constraints=("alpha*lambda < 2",),
        grid={"alpha": 1.0, "Z0": 0.5, "lambda": (0.5, 1.0), "Z": 0.5, "sigma": 1.0, "Y_lambda": 0.1},
        mode="numeric", correction_form="map-back",
        correction={"ODE": "second-order lambda equation (derived)"},
        description="first-order lambda equation of the gamma = 1 family"),
    SolutionCandidate(
        "euler-generic", "euler-aY2+Y3", "explicit",
        {"h": "h0/(a + sin(t))",
         "u": "cos(t)/(a + sin(t))*x + (U1*a*cos(t) + U2*(a*sin(t) + 1))/(a*(a + sin(t)))",
         "v": "-sin(t)/(a + sin(t))*x + (U2*cos(t) - U1*sin(t))/(a + sin(t))"},
        ("h0", "U1", "U2"), constraints=("a > 1",),
        grid={"t": _T20, "x": (-3, 3), "a": 2.0, "h0": 1.0, "U1": 0.4, "U2": -0.3, "gamma": 2.0},
        mode="numeric",
        description="general aY2+Y3 solution of the Eulerian system"),
)


def candidate(name: str) -> SolutionCandidate:
    for c in CANDIDATES:
        if c.name == name:
            return c
    raise KeyError(f"unknown candidate {name!r}; known: {', '.join(c.name for c in CANDIDATES)}")


@dataclass
class ResidualEntry:
    label: str
    method: str
    zero: bool
    max_residual: float
    witness: dict | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return {"label": self.label, "method": self.method, "zero": self.zero,
                "max_residual": self.max_residual, "witness": self.witness, "note": self.note}


@dataclass
class ResidualReport:
    candidate: str
    reduction: str
    form: str
    verdict: str
    entries: list[ResidualEntry]
    grid: dict
    seed: int
    notes: list[str] = field(default_factory=list)
    correction: "ResidualReport | None" = None
    extra: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max((e.max_residual for e in self.entries), default=0.0)

    @property
    def witness(self) -> dict | None:
        for e in self.entries:
            if not e.zero:
                return e.witness
        return None

    @property
    def verified(self) -> bool:
        return self.verdict.startswith("verified") or self.verdict == "constrained"

    @property
    def accepted(self) -> bool:
        """Verified as claimed, or refuted with a derived correction that verifies."""
        return self.verified or (self.correction is not None and self.correction.verified)

    def to_dict(self) -> dict:
        return {
            "candidate": self.candidate, "reduction": self.reduction, "form": self.form,
            "verdict": self.verdict, "max_residual": self.max_residual, "witness": self.witness,
            "entries": [e.to_dict() for e in self.entries], "grid": _jsonable(self.grid), "seed": self.seed,
            "notes": list(self.notes), "extra": _jsonable(self.extra),
            "correction": None if self.correction is None else self.correction.to_dict(),
        }


def _jsonable(x):
    if isinstance(x, Mapping):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, sp.Basic):
        try:
            return float(x)
        except TypeError:
            return sk.render(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def _witness(w: Mapping | None) -> dict | None:
    if w is None:
        return None
    return {str(k): float(v) for k, v in w.items()}


_REL = ("<=", ">=", "!=", "<", ">")


def _check_constraints(c: SolutionCandidate, points: Sequence[Mapping[str, float]]) -> None:
    for text in c.constraints:
        op = next(o for o in _REL if o in text)
        lhs, rhs = (sk.parse(s.strip()) for s in text.split(op, 1))
        syms = (lhs - rhs).free_symbols
        for pt in points:
            if not all(s.name in pt for s in syms):
                continue
            a = sk.eval_numeric(lhs, {s: pt[s.name] for s in lhs.free_symbols})
            b = sk.eval_numeric(rhs, {s: pt[s.name] for s in rhs.free_symbols})
            ok = {"<=": a <= b, ">=": a >= b, "!=": a != b, "<": a < b, ">": a > b}[op]
            if not ok:
                raise ConstraintError(f"{c.name}: grid point {dict(pt)} violates {text}")


def _grid_points(grid: Mapping[str, Any], n: int, seed: int) -> list[dict[str, float]]:
    rng = random.Random(seed)
    pts = []
    for _ in range(n):
        pt = {}
        for k in sorted(grid):
            v = grid[k]
            pt[k] = rng.uniform(*v) if isinstance(v, tuple) else float(v)
        pts.append(pt)
    return pts


def _ranges(grid: Mapping[str, Any]) -> dict:
    return {k: (v if isinstance(v, tuple) else (float(v), float(v))) for k, v in grid.items()}


def _target(c: SolutionCandidate, which: str = "derived"):
    red = reduce(c.reduction)
    exprs = red.derived if which == "derived" else red.claimed
    if exprs is None:
        return red, red.space, None
    if c.target is not None:
        exprs = [exprs[i] for i in c.target]
    if c.bind:
        b = {sk.sym(k): sp.nsimplify(v) for k, v in c.bind.items()}
        exprs = [sk.simplify(e.xreplace(b)) for e in exprs]
    return red, red.space, exprs


def _substitute_solution(e: sp.Expr, space: VariableSpace, sol: Mapping[str, sp.Expr]) -> sp.Expr:
    ind = space.independent_symbols
    rep = {}
    for s in e.free_symbols:
        dec = space.decode(s)
        if dec is None:
            continue
        dep, counts = dec
        if dep not in sol:
            raise ValueError(f"solution does not provide {dep}")
        d = sol[dep]
        for y, k in zip(ind, counts):
            if k:
                d = sp.diff(d, y, k)
        rep[s] = d
    return e.xreplace(rep)


def _numeric_entry(label: str, e: sp.Expr, points: Sequence[Mapping[str, float]]) -> ResidualEntry:
    worst, wpt, domain = 0.0, None, None
    syms = sorted(e.free_symbols, key=lambda s: s.name)
    missing = [s.name for s in syms if s.name not in points[0]]
    if missing:
        raise ValueError(f"grid does not bind {missing}")
    fn = sk.compile_exprs([e], syms)
    for pt in points:
        try:
            r = abs(fn([pt[s.name] for s in syms])[0])
        except sk.DomainError as err:
            domain = (pt, err)
            break
        if not math.isfinite(r):
            domain = (pt, None)
            break
        if r > worst:
            worst, wpt = r, pt
    if domain is not None:
        pt, err = domain
        note = "domain error" + (f" in {sk.render(err.subtree)}" if err is not None and getattr(err, "subtree", None) is not None else "")
        return ResidualEntry(label, "numeric", False, float("inf"), dict(pt), note)
    ok = worst < NUMERIC_TOL
    return ResidualEntry(label, "numeric", ok, worst, None if ok else dict(wpt))


def _force_simplify(e: sp.Expr) -> sp.Expr:
    """Combine powers assuming positive bases (all reduced unknowns and sigma are positive here)."""
    def canon(x):
        x = sp.powsimp(sp.powdenest(sp.expand(x), force=True), force=True)
        return x.replace(lambda a: a.is_Pow and not a.exp.is_Number,
                         lambda a: sp.Pow(a.base, sp.cancel(sp.together(a.exp))))

    e = sk.simplify(canon(canon(e)))
    if e != 0 and len(sp.Add.make_args(e)) < 40:
        e = sp.simplify(e)
    return e


def _symbolic_entry(label: str, e: sp.Expr, grid: Mapping[str, Any], seed: int) -> ResidualEntry:
    if sk.simplify(e) != 0 and _force_simplify(e) == 0:
        return ResidualEntry(label, "symbolic", True, 0.0)
    z = sk.is_zero(e, ranges=_ranges(grid), seed=seed)
    return ResidualEntry(label, z.method, z.zero, z.max_residual, _witness(z.witness))


def _reduce_by(e: sp.Expr, exprs: Sequence[sp.Expr], space: VariableSpace) -> sp.Expr:
    solved = solve_leading(exprs, space)
    if solved is None:
        raise EliminationError("target system cannot be solved for its leading jets")
    for _ in range(3):
        e = e.xreplace(solved)
    return sk.simplify(e)


def _verdict(entries: Sequence[ResidualEntry]) -> str:
    if not all(e.zero for e in entries):
        return "refuted"
    if all(e.method == "symbolic" for e in entries):
        return "verified-symbolic"
    return "verified-numeric"


def _check_form(c: SolutionCandidate, form: str, solution: Mapping[str, str], exprs, space, grid, seed,
                label: str, n: int = 200) -> list[ResidualEntry]:
    names = {"gamma": sk.parse(str(grid["gamma"])) if "gamma" in grid and not isinstance(grid["gamma"], tuple) else G}
    if form == "explicit":
        sol = {k: sk.parse(v, None, names) for k, v in solution.items()}
        if c.bind:
            b = {sk.sym(k): sp.nsimplify(v) for k, v in c.bind.items()}
            sol = {k: v.xreplace(b) for k, v in sol.items()}
        rel = {sk.sym(k): sk.parse(v, None, names) for k, v in c.relations.items()}
        out = []
        for i, r in enumerate(exprs):
            e = _substitute_solution(r, space, sol)
            if rel:
                e = e.xreplace(rel)
            if c.mode == "numeric":
                out.append(_numeric_entry(f"{label}[{i}]", e, _grid_points(grid, n, seed)))
            else:
                out.append(_symbolic_entry(f"{label}[{i}]", e, grid, seed))
        return out
    F = sk.parse(solution["F"], space, names)
    (y,) = space.independent_symbols
    dF = _reduce_by(total_derivative(F, y, space), exprs, space)
    if form == "implicit":
        w0 = sk.sym(c.eliminate)
        sol = sp.solve(F, w0)
        if len(sol) != 1:
            raise EliminationError(f"cannot eliminate {c.eliminate}")
        dF = sk.simplify(dF.xreplace({w0: sol[0]}))
    return [_symbolic_entry(f"{label}: d/d{y.name} along solutions", dF, grid, seed)]


def verify_candidate(c: SolutionCandidate | str, grid: Mapping[str, Any] | None = None,
                     seed: int = sk.DEFAULT_SEED) -> ResidualReport:
    """Adjudicate a closed form against the derived reduced equations it should solve."""
    if isinstance(c, str):
        c = candidate(c)
    grid = dict(c.grid if grid is None else grid)
    _check_constraints(c, _grid_points(grid, 50, seed))
    if c.form == "map-back":
        return _map_back_report(c, grid, seed)
    if c.reduction == "euler-aY2+Y3":
        system = build_system("euler", grid.get("gamma", G))
        red, space, exprs = reduce(c.reduction), system.space, system.residuals
        where = "Eulerian PDE residuals"
    else:
        red, space, exprs = _target(c)
        where = "derived reduced equations"
    entries = _check_form(c, c.form, c.solution, exprs, space, grid, seed, "claimed")
    rep = ResidualReport(c.name, c.reduction, c.form, _verdict(entries), entries, grid, seed,
                         notes=[f"checked against the {where}"])
    # the claimed reduced equations, where they differ, are reported alongside
    if red.claimed is not None and c.reduction != "euler-aY2+Y3":
        _, _, claimed = _target(c, "claimed")
        if claimed is not None and [sk.render(e) for e in claimed] != [sk.render(e) for e in exprs]:
            try:
                alt = _check_form(c, c.form, c.solution, claimed, space, grid, seed, "vs claimed")
                ok = all(e.zero for e in alt)
                rep.notes.append("against the claimed reduced equations: " + ("satisfied" if ok else "not satisfied"))
                rep.extra["against_claimed"] = [e.to_dict() for e in alt]
            except (EliminationError, ValueError):
                pass
    if c.relations:
        rep.extra["constraint"] = _rederive_constraint(c, exprs, space, grid, seed)
    if rep.verdict == "refuted" and c.correction is not None:
        form = c.correction_form or c.form
        centries = _check_form(c, form, c.correction, exprs, space, grid, seed, "derived")
        rep.correction = ResidualReport(c.name + " (derived)", c.reduction, form, _verdict(centries),
                                        centries, grid, seed,
                                        notes=["derived correction: " + "; ".join(f"{k} = {v}" for k, v in c.correction.items())])
    return rep


def _power_coefficients(e: sp.Expr, y: sp.Symbol) -> list[sp.Expr]:
    """Coefficients of the distinct powers of y in e."""
    groups: dict = {}
    for term in sp.Add.make_args(sp.expand(_force_simplify(e))):
        k, p = power_split(term, y)
        key = sk.simplify(p)
        groups[key] = groups.get(key, 0) + k
    return [c for c in (sk.simplify(v) for v in groups.values()) if c != 0]


def _rederive_constraint(c: SolutionCandidate, exprs, space, grid, seed) -> dict:
    """Collect the power coefficients of the substituted residuals and solve for the constrained constant."""
    sol = {k: sk.parse(v) for k, v in c.solution.items()}
    (y,) = space.independent_symbols
    found = {}
    for name, rel in c.relations.items():
        target = sk.sym(name)
        subbed = [_substitute_solution(r, space, sol) for r in exprs]
        eqs = [q for e in subbed for q in _power_coefficients(e, y)]
        derived = sp.solve(eqs, target, dict=True) if eqs else []
        derived = [sk.simplify(d[target]) for d in derived if target in d]
        claimed = sk.parse(rel)
        agree = len(derived) == 1 and sk.is_zero(derived[0] - claimed, ranges=_ranges(grid), seed=seed).zero
        # necessity: scaling the constrained constant by 1.1 leaves a nonzero residual
        bad = {target: sp.Rational(11, 10) * claimed}
        resid = [_symbolic_entry("violated", e.xreplace(bad), grid, seed) for e in subbed]
        viol = next((r for r in resid if not r.zero), None)
        found[name] = {"coefficient_equations": [sk.render(q) for q in eqs],
                       "derived": [sk.render(d) for d in derived], "claimed": sk.render(claimed),
                       "agree": agree, "violation_witness": None if viol is None else viol.witness,
                       "violation_residual": None if viol is None else viol.max_residual}
    return found


def _map_back_report(c: SolutionCandidate, grid: Mapping[str, Any], seed: int) -> ResidualReport:
    """Integrate the claimed lambda equation, map back through lambda = H/sigma, and test
    the gamma = 1 system; the derived second-order equation is checked the same way."""
    from .numerics import OdeProblem, integrate

    L, eq, _ = _lambda_parts()
    lam, sig = sk.sym("lambda"), sk.sym("sigma")
    Y, Y1, Y2 = L.symbol("Y"), L.jet("Y", (1,)), L.jet("Y", (2,))
    Zs = _space("lambda", ("Z",))
    Z = Zs.symbol("Z")
    g = sk.parse(c.solution["Z_lambda"], Zs)
    dg = sp.diff(g, lam) + sp.diff(g, Z) * g
    readings = {
        "Y = Z^2": (Z**2, 2 * Z * g, 2 * g**2 + 2 * Z * dg),
        "Y = Z": (Z, g, dg),
    }
    params = {k: float(grid[k]) for k in ("alpha", "Z0")}
    lo, hi = grid["lambda"]
    entries: list[ResidualEntry] = []
    for label, (y0, y1, y2) in readings.items():
        resid = sk.simplify(eq.xreplace({Y2: y2, Y1: y1, Y: y0}))
        prob = OdeProblem(("Z", "sigma"), (g, -sig / y0), (float(grid["Z"]), float(grid["sigma"])),
                          (lo, hi), independent="lambda", params=params)
        ts = integrate(prob, samples=201)
        pts = [{"lambda": float(s), "Z": float(a), "sigma": float(b), **params}
               for s, a, b in zip(ts.t, ts.column("Z"), ts.column("sigma"))]
        entries.append(_numeric_entry(f"claimed, {label}", resid, pts))
    # is the claimed Z0 a first integral of the derived second-order equation?
    Z1, Z2 = Zs.jet("Z", (1,)), Zs.jet("Z", (2,))
    claimed = reduce("alphaX1+X5-lambda").space
    Fz = sk.parse(_SW["alphaX1+X5-first-order"][0], Zs)
    (Phi,) = sp.solve(Fz, sk.sym("Z0"))
    (z2,) = sp.solve(lambda_ode(in_z=True), Z2)
    dPhi = sk.simplify((sp.diff(Phi, lam) + Z1 * sp.diff(Phi, Z) + Z2 * sp.diff(Phi, Z1)).xreplace({Z2: z2}))
    e = _symbolic_entry("claimed Z0 conserved by the derived second-order equation", dPhi,
                        {"alpha": (0.5, 1.0), "lambda": (0.3, 1.5), "Z": (0.3, 2.0), "Z_lambda": (-1, 1)}, seed)
    entries.append(e)
    any_ok = any(x.zero for x in entries[:2])
    verdict = "verified-numeric" if any_ok else "refuted"
    rep = ResidualReport(c.name, c.reduction, "map-back", verdict, entries, dict(grid), seed,
                         notes=["solutions are mapped back through lambda = H/sigma and "
                                "H/sigma - H_sigma = Y, then tested in the derived gamma = 1 system"])
    del claimed
    # derived correction: the second-order lambda equation itself
    (f,) = sp.solve(lambda_ode(), Y2)
    resid = sk.simplify(eq.xreplace({Y2: f}))
    y0 = float(grid["Z"]) ** 2
    prob = OdeProblem(("Y", "Y_lambda", "sigma"), (Y1, f, -sig / Y), (y0, float(grid["Y_lambda"]), float(grid["sigma"])),
                      (lo, hi), independent="lambda", params={"alpha": params["alpha"]})
    ts = integrate(prob, samples=201)
    pts = [{"lambda": float(s), "Y": float(a), "Y_lambda": float(b), "sigma": float(d), "alpha": params["alpha"]}
           for s, a, b, d in zip(ts.t, ts.column("Y"), ts.column("Y_lambda"), ts.column("sigma"))]
    ce = _numeric_entry("derived second-order equation mapped back", resid, pts)
    rep.correction = ResidualReport(c.name + " (derived)", c.reduction, "map-back", _verdict([ce]), [ce], dict(grid),
                                    seed, notes=["derived correction: Y_lambdalambda = " + sk.render(f)])
    return rep


def _separate(f: sp.Expr, z: sp.Symbol, w: sp.Symbol) -> tuple[sp.Expr, sp.Expr]:
    sep = sp.separatevars(f, [z, w], dict=True)
    if not sep:
        raise EliminationError("first-order equation is not separable")
    return sep["coeff"] * sep[z], sep[w]


def _antiderivative_shifted(e: sp.Expr, w: sp.Symbol) -> sp.Expr:
    """Power-rule antiderivative in w, retrying with s = H0 - w for shifted powers."""
    try:
        return antiderivative(e, w)
    except EliminationError:
        H0 = sk.sym("H0")
        s = sp.Dummy("s", positive=True)
        inner = sp.expand(sk.simplify(-e.xreplace({w: H0 - s})), power_base=False)
        return sp.expand(antiderivative(inner, s).xreplace({s: H0 - w}))


def _same_level_sets(F: sp.Expr, G_: sp.Expr, z: sp.Symbol, w: sp.Symbol, ranges) -> bool:
    """F and G are functions of each other (parallel gradients with constant ratio)."""
    cross = sk.is_zero(sp.diff(F, z) * sp.diff(G_, w) - sp.diff(F, w) * sp.diff(G_, z), ranges=ranges)
    ratio = sp.diff(F, w) / sp.diff(G_, w)
    rng = random.Random(sk.DEFAULT_SEED)
    # ratio of the w-gradients must not vary across the phase plane
    fixed = sk.sample_point(ratio.free_symbols - {z, w}, rng, ranges)
    r = ratio.xreplace(fixed)
    vals = [sk.eval_numeric(r, {z: rng.uniform(*ranges.get("z", (0.3, 2.0))), w: rng.uniform(*ranges.get("w", (0.3, 2.0)))})
            for _ in range(10)]
    const = max(vals) - min(vals) <= 1e-9 * (1 + max(abs(v) for v in vals))
    return cross.zero and const


def first_integral_check(red: Reduction | str, seed: int = sk.DEFAULT_SEED) -> ResidualReport:
    """Antidifferentiate the first-order equation independently and adjudicate the published integral."""
    name = red.name if isinstance(red, Reduction) else normalize_name(red)
    if name == "travelwave-first-order":
        cname = "travelwave-integral"
    elif name in ("scaling", "scaling-first-order"):
        name, cname = "scaling-first-order", "scaling-integral"
    else:
        raise ValueError(f"no first-order form to integrate for {name!r}")
    red = reduce(name)
    R = red.space
    (z,) = R.independent_symbols
    w, wz = R.symbol("w"), R.jet("w", (1,))
    (f,) = sp.solve(red.derived[0], wz)
    A, B = _separate(sk.simplify(f), z, w)
    Iw = _antiderivative_shifted(sp.expand(1 / B), w)
    Iz = antiderivative(A, z)
    F = tidy(sk.simplify(Iw - Iz), [w, z])
    c = candidate(cname)
    ranges = _ranges(c.grid)
    conserved = sk.is_zero(_reduce_by(total_derivative(F, z, R), red.derived, R), ranges=ranges, seed=seed)
    rep = verify_candidate(c, seed=seed)
    corr = sk.parse(c.correction["F"], R)
    rep.extra["derived_integral"] = f"{sk.render(F)} = const"
    rep.extra["derived_integral_conserved"] = conserved.zero
    rep.extra["correction_matches_derived"] = _same_level_sets(F, corr, z, w, ranges)
    if cname == "travelwave-integral":
        deg = sk.simplify(sk.parse(c.solution["F"], R).xreplace({G: 1}))
        rep.extra["gamma=1"] = f"prefactor gamma*(gamma-1) vanishes; the implicit form reduces to {sk.render(deg)}"
        rep.notes.append("at gamma = 1 the implicit form degenerates; see the Lambert-W candidate")
    else:
        rep.extra["witness_gamma2_V0_0_z1"] = _rhs_witness(c, red, {"gamma": 2, "V0": 0, "z": 1})
        rep.extra["drift"] = conservation_drift(F)
    return rep


def _rhs_witness(c: SolutionCandidate, red: Reduction, point: Mapping[str, float]) -> dict:
    R = red.space
    (z,) = R.independent_symbols
    w, wz = R.symbol("w"), R.jet("w", (1,))
    claimed_w2 = sk.parse(c.solution["F"], R).xreplace({w: 0}) * -1
    lhs = sp.diff(claimed_w2 / 2, z)
    (f,) = sp.solve(red.derived[0], wz)
    rhs = sk.simplify(f * w)
    b = {sk.sym(k): sp.nsimplify(v) for k, v in point.items()}
    a, r = float(lhs.xreplace(b)), float(rhs.xreplace(b))
    return {"point": dict(point), "d(w^2/2)/dz from the claimed integral": a, "right side": r,
            "difference": a - r}


def conservation_drift(F: sp.Expr | None = None, gamma: float = 2.0, V0: float = 6.0, Z0: float = 2.0,
                       W0: float = 0.0, span: float = 20.0) -> dict:
    """Relative drift of a scaling-oscillator integral F(z, w) along a numerical solution."""
    from .numerics import OdeProblem, integrate

    ode = derive_master_ode(reduce("scaling"))
    M = ode.space
    Z, Z2 = M.symbol("Z"), M.jet("Z", (2,))
    (acc,) = sp.solve(ode.expr, Z2)
    W = sk.sym("W")
    if F is None:
        F = first_integral_check("scaling-first-order").extra["derived_integral"]
    if isinstance(F, str):
        F = sk.parse(F.split("=")[0])
    F = sp.sympify(F)
    Fzw = F.xreplace({sk.sym("z"): Z, sk.sym("w"): W})
    prob = OdeProblem(("Z", "W"), (W, acc), (Z0, W0), (0.0, span), params={"gamma": gamma, "V0": V0})
    ts = integrate(prob, samples=2001)
    tape = sk.compile_exprs([Fzw], [Z, W, G, sk.sym("V0")])
    vals = [tape([a, b, gamma, V0])[0] for a, b in zip(ts.column("Z"), ts.column("W"))]
    F0 = vals[0]
    drift = max(abs(v - F0) for v in vals) / max(1.0, abs(F0))
    return {"gamma": gamma, "V0": V0, "Z(0)": Z0, "W(0)": W0, "span": span, "relative_drift": drift,
            "passes": drift < 1e-6, "events": [e.to_dict() for e in ts.events]}
