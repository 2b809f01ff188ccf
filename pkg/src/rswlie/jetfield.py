"""Vector fields on jet space.

A :class:`VariableSpace` fixes independent and dependent variables and a
maximum jet order.  Jet coordinates are ordinary symbols named
``<dependent>_<independents>``, e.g. ``v_tx``; the suffix is written in the
declared order of independents so every jet has exactly one symbol.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import sympy as sp

from . import symkernel as sk

__all__ = [
    "AdjointMap",
    "OrderOverflowError",
    "ProlongedField",
    "SpaceMismatchError",
    "UnsupportedPatternError",
    "VariableSpace",
    "VectorField",
    "adjoint",
    "determining_equations",
    "determining_system",
    "flow",
    "flow_expr",
    "lie_bracket",
    "prolong",
    "symmetry_residual",
    "total_derivative",
]


class OrderOverflowError(ValueError):
    pass


class SpaceMismatchError(ValueError):
    pass


class UnsupportedPatternError(ValueError):
    pass


@dataclass(frozen=True)
class VariableSpace:
    independents: tuple[str, ...]
    dependents: tuple[str, ...]
    order: int = 2
    name: str = ""

    def __post_init__(self):
        names = list(self.independents) + list(self.dependents)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")

    # symbols ---------------------------------------------------------------
    def symbol(self, name: str) -> sp.Symbol:
        return sk.sym(name)

    @property
    def independent_symbols(self) -> tuple[sp.Symbol, ...]:
        return tuple(sk.sym(n) for n in self.independents)

    @property
    def dependent_symbols(self) -> tuple[sp.Symbol, ...]:
        return tuple(sk.sym(n) for n in self.dependents)

    @property
    def base(self) -> tuple[sp.Symbol, ...]:
        return self.independent_symbols + self.dependent_symbols

    def jet(self, dep: str, counts: Sequence[int]) -> sp.Symbol:
        counts = tuple(counts)
        if len(counts) != len(self.independents):
            raise ValueError("multi-index length must match the independents")
        if not any(counts):
            return sk.sym(dep)
        suffix = "".join(n * k for n, k in zip(self.independents, counts))
        return sk.sym(f"{dep}_{suffix}")

    def _split_suffix(self, suffix: str) -> tuple[int, ...] | None:
        counts = [0] * len(self.independents)
        order = sorted(range(len(self.independents)), key=lambda i: -len(self.independents[i]))
        i = 0
        while i < len(suffix):
            for k in order:
                n = self.independents[k]
                if suffix.startswith(n, i):
                    counts[k] += 1
                    i += len(n)
                    break
            else:
                return None
        return tuple(counts)

    def decode(self, s: sp.Symbol | str) -> tuple[str, tuple[int, ...]] | None:
        """(dependent, multi-index) for a dependent or jet symbol, else None."""
        name = s if isinstance(s, str) else s.name
        if name in self.dependents:
            return name, (0,) * len(self.independents)
        if "_" not in name:
            return None
        for dep in sorted(self.dependents, key=len, reverse=True):
            if name.startswith(dep + "_"):
                counts = self._split_suffix(name[len(dep) + 1:])
                if counts is not None and any(counts):
                    return dep, counts
        return None

    def resolve(self, name: str) -> sp.Symbol | None:
        """Symbol for a declared variable or jet (any suffix order), else None."""
        if name in self.independents or name in self.dependents:
            return sk.sym(name)
        dec = self.decode(name)
        if dec is None:
            return None
        return self.jet(*dec)

    def jet_order(self, s: sp.Symbol) -> int:
        dec = self.decode(s)
        return 0 if dec is None else sum(dec[1])

    def jets(self, order: int | None = None, minimum: int = 1) -> list[sp.Symbol]:
        order = self.order if order is None else order
        out = []
        n = len(self.independents)
        for k in range(minimum, order + 1):
            for combo in itertools.combinations_with_replacement(range(n), k):
                counts = [0] * n
                for c in combo:
                    counts[c] += 1
                for dep in self.dependents:
                    out.append(self.jet(dep, counts))
        return out

    def is_jet(self, s: sp.Symbol) -> bool:
        dec = self.decode(s)
        return dec is not None and any(dec[1])


# --------------------------------------------------------------------------
# vector fields

def _coeff_dict(space: VariableSpace, coeffs: Mapping[Any, Any]) -> dict[sp.Symbol, sp.Expr]:
    out = {}
    for k, v in coeffs.items():
        s = sk.sym(k) if isinstance(k, str) else k
        if s not in space.base:
            raise KeyError(f"{s} is not a base variable of space {space.name or space}")
        v = sp.sympify(v) if not isinstance(v, str) else sk.parse(v, space)
        if v != 0:
            out[s] = v
    return out


@dataclass(frozen=True, eq=False)
class VectorField:
    """Point vector field: coefficients over the base variables of ``space``."""

    space: VariableSpace
    coeffs: Mapping[sp.Symbol, sp.Expr]
    label: str = ""

    @classmethod
    def make(cls, space: VariableSpace, coeffs: Mapping[Any, Any], label: str = "") -> "VectorField":
        field_ = cls(space, _coeff_dict(space, coeffs), label)
        bad = {s for c in field_.coeffs.values() for s in sp.sympify(c).free_symbols if space.is_jet(s)}
        if bad:
            raise ValueError(f"point field coefficients depend on jets {sorted(map(str, bad))}")
        return field_

    def coeff(self, s: sp.Symbol | str) -> sp.Expr:
        s = sk.sym(s) if isinstance(s, str) else s
        return self.coeffs.get(s, sp.Integer(0))

    def components(self) -> list[sp.Expr]:
        return [self.coeff(s) for s in self.space.base]

    def apply(self, f: Any) -> sp.Expr:
        f = sp.sympify(f)
        return sp.Add(*[c * sp.diff(f, s) for s, c in self.coeffs.items()])

    def _check(self, other: "VectorField") -> None:
        if other.space != self.space:
            raise SpaceMismatchError(f"{self.space.name} vs {other.space.name}")

    def __add__(self, other: "VectorField") -> "VectorField":
        self._check(other)
        keys = dict.fromkeys([*self.coeffs, *other.coeffs])
        return VectorField(self.space, {k: sk.simplify(self.coeff(k) + other.coeff(k)) for k in keys})

    def __neg__(self) -> "VectorField":
        return VectorField(self.space, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def __mul__(self, scalar: Any) -> "VectorField":
        scalar = sp.sympify(scalar)
        return VectorField(self.space, {k: sk.simplify(scalar * v) for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def simplify(self) -> "VectorField":
        out = {k: sk.simplify(v) for k, v in self.coeffs.items()}
        return VectorField(self.space, {k: v for k, v in out.items() if v != 0}, self.label)

    def subs(self, bindings: Mapping[Any, Any]) -> "VectorField":
        b = {(sk.sym(k) if isinstance(k, str) else k): v for k, v in bindings.items()}
        return VectorField(self.space, {k: sk.simplify(sp.sympify(v).subs(b)) for k, v in self.coeffs.items()},
                           self.label)

    def is_zero(self, **kw) -> bool:
        return all(sk.is_zero(v, **kw).zero for v in self.coeffs.values())

    def equals(self, other: "VectorField", **kw) -> bool:
        return (self - other).is_zero(**kw)

    def render(self, fmt: str = "text") -> str:
        parts = []
        for s in self.space.base:
            c = self.coeff(s)
            if c == 0:
                continue
            cs = sk.render(c, fmt)
            if fmt == "latex":
                d = rf"\partial_{{{sk.render(s, 'latex')}}}"
                parts.append(d if c == 1 else rf"\left({cs}\right){d}")
            else:
                d = f"d_{s.name}"
                parts.append(d if c == 1 else f"({cs})*{d}")
        if not parts:
            return "0"
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"VectorField({self.label + ': ' if self.label else ''}{self.render()})"


@dataclass(frozen=True, eq=False)
class ProlongedField:
    """A point field together with its prolongation coefficients on jets."""

    base: VectorField
    order: int
    coeffs: Mapping[sp.Symbol, sp.Expr]

    def coeff(self, s: sp.Symbol | str) -> sp.Expr:
        s = sk.sym(s) if isinstance(s, str) else s
        return self.coeffs.get(s, sp.Integer(0))

    def apply(self, f: Any) -> sp.Expr:
        f = sp.sympify(f)
        free = f.free_symbols
        return sp.Add(*[c * sp.diff(f, s) for s, c in self.coeffs.items() if s in free])

    @property
    def space(self) -> VariableSpace:
        return self.base.space


def total_derivative(e: Any, y: sp.Symbol | str, space: VariableSpace) -> sp.Expr:
    """D_y e: explicit derivative plus the chain rule through every jet in ``e``."""
    e = sp.sympify(e)
    y = sk.sym(y) if isinstance(y, str) else y
    idx = space.independent_symbols.index(y)
    out = sp.diff(e, y)
    for s in e.free_symbols:
        dec = space.decode(s)
        if dec is None:
            continue
        dep, counts = dec
        new = list(counts)
        new[idx] += 1
        if sum(new) > space.order + 1:
            raise OrderOverflowError(f"D_{y} of {s} exceeds jet order {space.order + 1}")
        out += space.jet(dep, new) * sp.diff(e, s)
    return out


def prolong(X: VectorField, order: int) -> ProlongedField:
    """Prolongation via eta_{J+i} = D_i eta_J - sum_j u_{J+j} D_i xi^j."""
    space = X.space
    if order > space.order:
        raise OrderOverflowError(f"prolongation order {order} exceeds space order {space.order}")
    ind = space.independent_symbols
    n = len(ind)
    xi = [X.coeff(s) for s in ind]
    dxi = [[total_derivative(xi[j], ind[i], space) for j in range(n)] for i in range(n)]
    coeffs: dict[sp.Symbol, sp.Expr] = {s: c for s, c in X.coeffs.items()}
    eta: dict[tuple[str, tuple[int, ...]], sp.Expr] = {}
    for dep in space.dependents:
        eta[(dep, (0,) * n)] = X.coeff(dep)
    for k in range(1, order + 1):
        for combo in itertools.combinations_with_replacement(range(n), k):
            counts = [0] * n
            for c in combo:
                counts[c] += 1
            i = combo[-1]
            prev = list(counts)
            prev[i] -= 1
            for dep in space.dependents:
                val = total_derivative(eta[(dep, tuple(prev))], ind[i], space)
                for j in range(n):
                    if dxi[i][j] != 0:
                        up = list(prev)
                        up[j] += 1
                        val -= space.jet(dep, up) * dxi[i][j]
                val = sp.expand(val)
                eta[(dep, tuple(counts))] = val
                if val != 0:
                    coeffs[space.jet(dep, counts)] = val
    return ProlongedField(X, order, coeffs)


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]^k = X(Y^k) - Y(X^k)."""
    if X.space != Y.space:
        raise SpaceMismatchError(f"{X.space.name} vs {Y.space.name}")
    out = {}
    for s in X.space.base:
        c = sk.simplify(X.apply(Y.coeff(s)) - Y.apply(X.coeff(s)))
        if c != 0:
            out[s] = c
    return VectorField(X.space, out)


# --------------------------------------------------------------------------
# symmetry condition

def reduce_on_solutions(e: Any, solved: Mapping[sp.Symbol, sp.Expr], max_rounds: int = 6) -> sp.Expr:
    """Replace leading jets by their solved forms until none remain."""
    e = sp.sympify(e)
    for _ in range(max_rounds):
        if not (e.free_symbols & set(solved)):
            break
        e = e.xreplace(dict(solved))
    return e


def symmetry_residual(system: Any, X: VectorField, simplify: bool = True) -> list[sp.Expr]:
    """X^[n] applied to each residual of ``system``, restricted to its solutions.

    ``system`` needs ``space``, ``order``, ``residuals`` and ``solved``
    (leading jet to expression).  All-zero output certifies a point symmetry.
    """
    P = prolong(X, system.order)
    out = []
    for r in system.residuals:
        e = reduce_on_solutions(P.apply(r), system.solved)
        out.append(sk.simplify(e) if simplify else e)
    return out


def generic_field(space: VariableSpace) -> tuple[VectorField, dict[sp.Symbol, sp.Function]]:
    """Field whose coefficients are unknown functions ``xi__t(t, x, h, v)`` etc."""
    base = space.base
    unknowns = {}
    coeffs = {}
    for s in space.independent_symbols:
        f = sp.Function(f"xi__{s.name}")
        unknowns[s] = f
        coeffs[s] = f(*base)
    for s in space.dependent_symbols:
        f = sp.Function(f"eta__{s.name}")
        unknowns[s] = f
        coeffs[s] = f(*base)
    return VectorField(space, coeffs, "generic"), unknowns


def determining_system(system: Any) -> dict[sp.Expr, sp.Expr]:
    """Monomial in the remaining jets -> coefficient (one determining equation each)."""
    if system.order > 2:
        raise ValueError("determining equations are generated for systems of order <= 2")
    X, _ = generic_field(system.space)
    P = prolong(X, system.order)
    jets = [s for s in system.space.jets(system.order) if s not in system.solved]
    out: dict[sp.Expr, sp.Expr] = {}
    for r in system.residuals:
        e = sp.expand(reduce_on_solutions(P.apply(r), system.solved))
        present = [s for s in jets if s in e.free_symbols]
        if not present:
            coeffs = {sp.Integer(1): e}
        else:
            poly = sp.Poly(e, *present)
            coeffs = {sp.Mul(*[g**k for g, k in zip(present, m)]): c for m, c in poly.terms()}
        for mono, c in coeffs.items():
            c = sp.expand(c)
            if c == 0:
                continue
            key = mono
            while key in out:
                # same monomial from a different residual: keep both equations
                key = sp.Mul(key, sp.Symbol(f"_eq{len(out)}"), evaluate=False)
            out[key] = c
    return out


def determining_equations(system: Any) -> list[sp.Expr]:
    return list(determining_system(system).values())


def substitute_field(eqs: Iterable[Any], system: Any, X: VectorField) -> list[sp.Expr]:
    """Plug the coefficients of ``X`` into determining equations."""
    _, unknowns = generic_field(system.space)
    base = system.space.base
    reps = {}
    for s, f in unknowns.items():
        reps[f] = sp.Lambda(base, X.coeff(s))
    return [sk.simplify(sp.sympify(e).subs(reps).doit()) for e in eqs]


# --------------------------------------------------------------------------
# flows

FLOW_RTOL = 1e-10


def flow(X: VectorField | ProlongedField, eps: float, point: Mapping[Any, float]) -> dict[sp.Symbol, float]:
    """Numerically transport ``point`` along X for parameter ``eps``.

    ``point`` must assign every coordinate the field acts on plus any
    parameters appearing in its coefficients.  Coordinates the field does
    not move are passed through unchanged.
    """
    from .numerics import OdeProblem, integrate

    pt = {(sk.sym(k) if isinstance(k, str) else k): float(v) for k, v in point.items()}
    if eps == 0:
        return dict(pt)
    coeffs = dict(X.coeffs)
    sign = 1.0 if eps > 0 else -1.0
    states = sorted({s for s in coeffs} | {s for c in coeffs.values() for s in sp.sympify(c).free_symbols
                                           if not sk.is_parameter(s)}, key=lambda s: s.name)
    missing = [s.name for s in states if s not in pt]
    if missing:
        raise KeyError(f"no value for {missing}")
    params = {s.name: v for s, v in pt.items() if s not in states}
    prob = OdeProblem(
        states=tuple(s.name for s in states),
        rhs=tuple(sign * coeffs.get(s, sp.Integer(0)) for s in states),
        initial=tuple(pt[s] for s in states),
        span=(0.0, abs(float(eps))),
        independent="epsilon",
        params=params,
    )
    ts = integrate(prob, rtol=FLOW_RTOL, atol=1e-13, samples=[0.0, abs(float(eps))])
    if ts.events or ts.t[-1] != abs(float(eps)):
        raise ArithmeticError(f"flow integration failed: {ts.events}")
    out = dict(pt)
    out.update({s: float(v) for s, v in zip(states, ts.y[-1])})
    return out


def flow_expr(X: VectorField | ProlongedField, eps: Any, depth: int = 8) -> dict[sp.Symbol, sp.Expr]:
    """Closed-form flow by Lie series, for coordinates whose series terminates
    or becomes geometric (``X^(k+1) z = lam X^k z`` with constant ``lam``)."""
    eps = sp.sympify(eps)
    out = {}
    for z in X.coeffs:
        terms = [z]
        closed = None
        for k in range(depth):
            nxt = sk.simplify(X.apply(terms[-1]))
            if nxt == 0:
                closed = sp.Add(*[eps**j / sp.factorial(j) * T for j, T in enumerate(terms)])
                break
            lam = sk.simplify(sp.cancel(nxt / terms[-1]))
            if lam.free_symbols.isdisjoint(X.space.base) and not any(
                X.space.is_jet(s) for s in lam.free_symbols
            ):
                m = len(terms) - 1
                head = sp.Add(*[eps**j / sp.factorial(j) * T for j, T in enumerate(terms[:m])])
                tail = sp.exp(lam * eps) - sp.Add(*[(lam * eps) ** j / sp.factorial(j) for j in range(m)])
                closed = head + terms[m] * tail / lam**m
                break
            terms.append(nxt)
        if closed is None:
            raise UnsupportedPatternError(f"Lie series for {z} does not close within depth {depth}")
        out[z] = sk.simplify(closed)
    return out


# --------------------------------------------------------------------------
# adjoint action

@dataclass(frozen=True, eq=False)
class AdjointMap:
    acting: VectorField
    target: VectorField
    eps: sp.Expr
    result: VectorField
    pattern: str  # terminating | exponential | rotation | hyperbolic


def _ratio(A: VectorField, B: VectorField) -> sp.Expr | None:
    """Constant c with A = c B, if one exists."""
    if B.is_zero():
        return None
    for s in B.space.base:
        b = B.coeff(s)
        if b != 0:
            c = sk.simplify(sp.cancel(A.coeff(s) / b))
            break
    if not c.free_symbols.isdisjoint(B.space.base):
        return None
    return c if (A - B * c).is_zero() else None


def adjoint(Xi: VectorField, Xj: VectorField, eps: Any = None, depth: int = 8) -> AdjointMap:
    """Ad(exp(eps Xi)) Xj = sum_k (-eps)^k/k! ad_Xi^k Xj, summed in closed form."""
    eps = sk.sym("epsilon") if eps is None else sp.sympify(eps)
    B = [Xj]
    for k in range(1, depth + 1):
        nxt = lie_bracket(Xi, B[-1])
        if nxt.is_zero():
            res = B[0]
            for j in range(1, len(B)):
                res = res + B[j] * ((-eps) ** j / sp.factorial(j))
            return AdjointMap(Xi, Xj, eps, res.simplify(), "terminating")
        lam = _ratio(nxt, B[-1])
        if lam is not None:
            m = len(B) - 1
            res = B[0] if m else None
            for j in range(1, m):
                res = res + B[j] * ((-eps) ** j / sp.factorial(j))
            tail = (sp.exp(-lam * eps) - sp.Add(*[(-lam * eps) ** j / sp.factorial(j) for j in range(m)])) / lam**m
            tail_field = B[m] * tail
            res = tail_field if res is None else res + tail_field
            return AdjointMap(Xi, Xj, eps, res.simplify(), "exponential")
        if len(B) == 2:
            kappa = _ratio(nxt, B[0])
            if kappa is not None and kappa.is_number and kappa != 0:
                if kappa < 0:
                    w = sp.sqrt(-kappa)
                    res = B[0] * sp.cos(w * eps) + B[1] * (-sp.sin(w * eps) / w)
                    pattern = "rotation"
                else:
                    w = sp.sqrt(kappa)
                    res = B[0] * sp.cosh(w * eps) + B[1] * (-sp.sinh(w * eps) / w)
                    pattern = "hyperbolic"
                return AdjointMap(Xi, Xj, eps, res.simplify(), pattern)
        B.append(nxt)
    raise UnsupportedPatternError(f"adjoint series of {Xi.label} on {Xj.label} does not close by depth {depth}")
