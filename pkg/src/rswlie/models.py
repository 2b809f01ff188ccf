"""The three shallow-water PDE systems and their symmetry generators."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Mapping, Sequence

import sympy as sp

from . import symkernel as sk
from .jetfield import (
    ProlongedField,
    VariableSpace,
    VectorField,
    flow,
    flow_expr,
    prolong,
    symmetry_residual,
    total_derivative,
)

__all__ = [
    "EULER",
    "EXTENDED",
    "GeneratorCatalog",
    "LAGRANGIAN",
    "PdeSystem",
    "PointTransformation",
    "REDUCED",
    "SymmetryCheckError",
    "build_system",
    "catalog",
    "extend",
    "gamma_field",
    "generic_1ppt",
    "lagrangian_to_reduced",
]

REDUCED = VariableSpace(("t", "x"), ("h", "v"), order=2, name="I")
LAGRANGIAN = VariableSpace(("t", "x"), ("h", "u", "v"), order=1, name="J")
EULER = VariableSpace(("t", "x"), ("h", "u", "v"), order=1, name="euler")
EXTENDED = VariableSpace(("t", "x"), ("h", "v", "v_t"), order=1, name="I'")

GAMMA = sk.sym("gamma")


@dataclass(frozen=True, eq=False)
class PdeSystem:
    name: str
    space: VariableSpace
    residuals: tuple[sp.Expr, ...]
    solved: Mapping[sp.Symbol, sp.Expr]
    gamma: sp.Expr = GAMMA
    parameter_ranges: Mapping[str, tuple[float, float]] = field(
        default_factory=lambda: {"gamma": (0.0, float("inf"))}
    )

    @property
    def order(self) -> int:
        return max(self.space.jet_order(s) for r in self.residuals for s in r.free_symbols)

    def check_solved_forms(self) -> bool:
        return all(sk.is_zero(r.xreplace(dict(self.solved))).zero for r in self.residuals)

    def render(self, fmt: str = "text") -> list[str]:
        return [sk.render(r, fmt) for r in self.residuals]


def _gamma_value(gamma: Any) -> sp.Expr:
    if gamma is None or (isinstance(gamma, str) and gamma == "symbolic"):
        return GAMMA
    g = sp.nsimplify(gamma, rational=True) if not isinstance(gamma, sp.Basic) else gamma
    if g.is_number and g < 0:
        raise ValueError(f"gamma must be non-negative, got {gamma}")
    return g


def _solve(residuals: Sequence[sp.Expr], leading: Sequence[sp.Symbol]) -> dict[sp.Symbol, sp.Expr]:
    sol = sp.solve(list(residuals), list(leading), dict=True)
    if len(sol) != 1:
        raise ValueError(f"cannot solve for leading jets {leading}")
    return {k: sk.simplify(v) for k, v in sol[0].items()}


def _lagrangian_residuals(g: sp.Expr) -> list[sp.Expr]:
    p = lambda s: sk.parse(s, LAGRANGIAN, {"gamma": g})  # noqa: E731
    return [p("h_t + h^2*u_x"), p("u_t + h^(gamma-1)*h_x - v"), p("v_t + u")]


def _reduced_residuals(g: sp.Expr) -> list[sp.Expr]:
    p = lambda s: sk.parse(s, REDUCED, {"gamma": g})  # noqa: E731
    return [p("v_tx - h^(-2)*h_t"), p("v_tt - h^(gamma-1)*h_x + v")]


def lagrangian_to_reduced(gamma: Any = None) -> dict[str, Any]:
    """Rebuild the two second-order equations from the first-order system.

    With r1, r2, r3 the Lagrangian residuals, ``D_x r3 - h^-2 r1`` and
    ``D_t r3 - r2`` are free of u and equal the reduced residuals
    identically.  Returns both combinations and the zero tests.
    """
    g = _gamma_value(gamma)
    r1, r2, r3 = _lagrangian_residuals(g)
    h = sk.sym("h")
    first = total_derivative(r3, "x", LAGRANGIAN) - h**-2 * r1
    second = total_derivative(r3, "t", LAGRANGIAN) - r2
    target = _reduced_residuals(g)
    checks = [sk.is_zero(a - b) for a, b in zip((first, second), target)]
    return {"combinations": [sk.simplify(first), sk.simplify(second)], "target": target, "checks": checks}


def build_system(which: str, gamma: Any = None) -> PdeSystem:
    """Return one of ``lagrangian``, ``reduced`` or ``euler`` at the given gamma."""
    g = _gamma_value(gamma)
    if which == "lagrangian":
        res = _lagrangian_residuals(g)
        space = LAGRANGIAN
        leading = sk.symbols("h_t u_t v_t")
    elif which == "reduced":
        res = _reduced_residuals(g)
        derived = lagrangian_to_reduced(g)
        if not all(c.zero for c in derived["checks"]):
            raise AssertionError("reduced system does not follow from the Lagrangian system")
        space = REDUCED
        leading = sk.symbols("v_tx v_tt")
    elif which == "euler":
        if g == 0:
            raise ValueError("the Euler system divides by gamma; gamma = 0 is excluded")
        h, u, v = sk.symbols("h u v")
        D = lambda e, y: total_derivative(e, y, EULER)  # noqa: E731
        res = [
            D(h, "t") + D(h * u, "x"),
            D(h * u, "t") + D(h * u**2 + h**g / g, "x") - h * v,
            D(h * v, "t") + D(h * u * v, "x") + h * u,
        ]
        space = EULER
        leading = sk.symbols("h_t u_t v_t")
    else:
        raise ValueError(f"unknown system {which!r}")
    res = tuple(sk.simplify(r) for r in res)
    return PdeSystem(which, space, res, _solve(res, leading), g)


# --------------------------------------------------------------------------
# generator catalogs

class SymmetryCheckError(AssertionError):
    def __init__(self, label: str, residuals: Sequence[sp.Expr]):
        super().__init__(f"{label} is not a symmetry; residuals {[sk.render(r) for r in residuals]}")
        self.label = label
        self.residuals = list(residuals)


@dataclass(frozen=True, eq=False)
class GeneratorCatalog:
    system: PdeSystem
    basis: tuple[VectorField, ...]
    named: Mapping[str, VectorField] = field(default_factory=dict)

    @property
    def labels(self) -> list[str]:
        return [X.label for X in self.basis]

    def __getitem__(self, label: str) -> VectorField:
        for X in self.basis:
            if X.label == label:
                return X
        return self.named[label]

    def combination(self, coeffs: Sequence[Any]) -> VectorField:
        out = self.basis[0] * coeffs[0]
        for c, X in zip(coeffs[1:], self.basis[1:]):
            out = out + X * c
        return out


def _basis(which: str, g: sp.Expr) -> list[VectorField]:
    t = sk.sym("t")
    if which == "reduced":
        S = REDUCED
        raw = [
            {"t": 1},
            {"x": 1},
            {"v": sp.cos(t)},
            {"v": sp.sin(t)},
            {"x": (g + 1) * sk.sym("x"), "v": (g - 1) * sk.sym("v"), "h": 2 * sk.sym("h")},
        ]
        labels = ["X1", "X2", "X3", "X4", "X5"]
    elif which == "lagrangian":
        # lifted through u = -v_t
        S = LAGRANGIAN
        raw = [
            {"t": 1},
            {"x": 1},
            {"v": sp.cos(t), "u": sp.sin(t)},
            {"v": sp.sin(t), "u": -sp.cos(t)},
            {"x": (g + 1) * sk.sym("x"), "v": (g - 1) * sk.sym("v"), "h": 2 * sk.sym("h"),
             "u": (g - 1) * sk.sym("u")},
        ]
        labels = ["X1", "X2", "X3", "X4", "X5"]
    elif which == "euler":
        S = EULER
        x, u, v, h = sk.symbols("x u v h")
        raw = [
            {"t": 1},
            {"x": 1},
            {"x": sp.sin(t), "v": -sp.sin(t), "u": sp.cos(t)},
            {"x": sp.cos(t), "v": -sp.cos(t), "u": -sp.sin(t)},
            {"x": (g - 1) * x, "u": (g - 1) * u, "v": (g - 1) * v, "h": 2 * h},
        ]
        labels = ["Y1", "Y2", "Y3", "Y4", "Y5"]
    else:
        raise ValueError(f"unknown system {which!r}")
    return [VectorField.make(S, c, lab) for c, lab in zip(raw, labels)]


def gamma_field(t0: Any = None, space: VariableSpace = REDUCED) -> VectorField:
    """cos(t + t0) d_v, the phase-shifted oscillation symmetry."""
    t0 = sk.sym("t0") if t0 is None else sp.sympify(t0)
    return VectorField.make(space, {"v": sp.cos(sk.sym("t") + t0)}, "Gamma")


def gamma_in_basis(t0: Any = None) -> tuple[sp.Expr, sp.Expr]:
    """(c3, c4) with cos(t + t0) d_v = c3 X3 + c4 X4."""
    t0 = sk.sym("t0") if t0 is None else sp.sympify(t0)
    return sp.cos(t0), -sp.sin(t0)


@lru_cache(maxsize=None)
def _catalog(which: str, gamma: sp.Expr, verify: bool) -> GeneratorCatalog:
    system = build_system(which, gamma)
    basis = _basis(which, system.gamma)
    if verify:
        for X in basis:
            res = symmetry_residual(system, X)
            if any(not sk.is_zero(r).zero for r in res):
                raise SymmetryCheckError(X.label, res)
    named = {}
    if which == "reduced":
        named["Gamma"] = gamma_field()
    return GeneratorCatalog(system, tuple(basis), named)


def catalog(system: PdeSystem | str, gamma: Any = None, verify: bool = True) -> GeneratorCatalog:
    """Symmetry basis of a registered system, verified on construction."""
    if isinstance(system, PdeSystem):
        return _catalog(system.name, system.gamma, verify)
    return _catalog(system, _gamma_value(gamma), verify)


def extend(cat: GeneratorCatalog, space: VariableSpace = EXTENDED) -> list[VectorField]:
    """Carry reduced-system generators to the space (t, x, h, v, v_t)."""
    if cat.system.space != REDUCED:
        raise ValueError("extension is defined for the reduced system")
    vt = sk.sym("v_t")
    out = []
    for X in cat.basis:
        P = prolong(X, 1)
        coeffs = {s: c for s, c in X.coeffs.items()}
        coeffs[vt] = sk.simplify(P.coeff(vt))
        out.append(VectorField(space, {k: v for k, v in coeffs.items() if v != 0}, X.label))
    return out


# --------------------------------------------------------------------------
# generic one-parameter transformation

@dataclass(frozen=True, eq=False)
class PointTransformation:
    """Composition of flows of c_i X_i, applied X1 first and X5 last."""

    eps: Any
    weights: tuple[Any, ...]
    catalog: GeneratorCatalog

    def _fields(self) -> list[VectorField]:
        return [X * c for X, c in zip(self.catalog.basis, self.weights) if c != 0]

    def exprs(self) -> dict[sp.Symbol, sp.Expr]:
        """Closed form of the composite map on the base variables."""
        space = self.catalog.system.space
        current = {s: s for s in space.base}
        for X in self._fields():
            step = flow_expr(X, self.eps)
            nxt = dict(current)
            for z, e in step.items():
                nxt[z] = sk.simplify(e.xreplace(current))
            current = nxt
        return current

    def __call__(self, point: Mapping[Any, float]) -> dict[sp.Symbol, float]:
        pt = {(sk.sym(k) if isinstance(k, str) else k): float(v) for k, v in point.items()}
        for X in self._fields():
            pt = flow(X, float(self.eps), pt)
        return pt

    def transport_jets(self, point: Mapping[Any, float], order: int = 2) -> dict[sp.Symbol, float]:
        """Move a jet point (base values plus derivatives) with the prolonged flows."""
        pt = {(sk.sym(k) if isinstance(k, str) else k): float(v) for k, v in point.items()}
        for X in self._fields():
            pt = flow(prolong(X, order), float(self.eps), pt)
        return pt


def generic_1ppt(eps: Any, weights: Sequence[Any] = (1, 1, 1, 1, 1), gamma: Any = None,
                 cat: GeneratorCatalog | None = None) -> PointTransformation:
    cat = cat or catalog("reduced", gamma)
    if len(weights) != len(cat.basis):
        raise ValueError(f"expected {len(cat.basis)} weights")
    return PointTransformation(eps, tuple(sp.sympify(w) for w in weights), cat)
