"""Symbolic kernel shared by every other module.

Expressions are plain :mod:`sympy` trees.  This module fixes the symbol
table (which names are positive, which are parameters), the text grammar
used on the command line and in catalog data, a deterministic normal form,
a zero test that falls back to random numeric sampling, and a small
numeric evaluator that reports domain errors instead of returning NaN or
complex numbers.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import sympy as sp

__all__ = [
    "DomainError",
    "ParseError",
    "Tape",
    "UnknownSymbolError",
    "ZeroTest",
    "compile_exprs",
    "diff",
    "eval_numeric",
    "is_parameter",
    "is_zero",
    "parse",
    "render",
    "sample_point",
    "simplify",
    "substitute",
    "sym",
    "symbols",
]

# Names that denote strictly positive quantities (heights, scaled coordinates).
POSITIVE_NAMES = frozenset(
    {"h", "H", "x", "sigma", "lambda", "z", "Z", "Y", "gamma", "h0"}
)

PARAMETER_NAMES = frozenset(
    {
        "gamma", "c", "alpha", "beta", "a", "H0", "V0", "V1", "V2", "U1", "U2",
        "t0", "t1", "w0", "Z0", "epsilon", "h0",
        "a1", "a2", "a3", "a4", "a5", "c1", "c2", "c3", "c4", "c5",
    }
)

ALIASES = {"g": "gamma", "eps": "epsilon", "γ": "gamma", "ε": "epsilon",
           "α": "alpha", "β": "beta", "σ": "sigma", "λ": "lambda", "ξ": "xi"}

_CACHE: dict[str, sp.Symbol] = {}


def sym(name: str) -> sp.Symbol:
    """Canonical symbol for ``name``; the same name always yields the same object."""
    name = ALIASES.get(name, name)
    s = _CACHE.get(name)
    if s is None:
        if name in POSITIVE_NAMES:
            s = sp.Symbol(name, positive=True)
        else:
            s = sp.Symbol(name, real=True)
        _CACHE[name] = s
    return s


def symbols(names: str) -> tuple[sp.Symbol, ...]:
    return tuple(sym(n) for n in names.replace(",", " ").split())


def is_parameter(s: sp.Symbol) -> bool:
    return s.name in PARAMETER_NAMES


# --------------------------------------------------------------------------
# parsing

class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


class UnknownSymbolError(ParseError):
    pass


_FUNCTIONS = {
    "sin": sp.sin,
    "cos": sp.cos,
    "tan": sp.tan,
    "arctan": sp.atan,
    "atan": sp.atan,
    "exp": sp.exp,
    "ln": sp.log,
    "log": sp.log,
    "sqrt": sp.sqrt,
    "abs": sp.Abs,
    "lambertW": sp.LambertW,
    "W": sp.LambertW,
}

_CONSTANTS = {"pi": sp.pi, "E": sp.E}


@dataclass
class _Token:
    kind: str  # num, name, op, end
    text: str
    pos: int  # character index


def _tokenize(text: str) -> list[_Token]:
    out: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE" and j + 1 < n and (
                text[j + 1].isdigit() or (text[j + 1] in "+-" and j + 2 < n and text[j + 2].isdigit())
            ):
                j += 2
                while j < n and text[j].isdigit():
                    j += 1
            out.append(_Token("num", text[i:j], i))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(_Token("name", text[i:j], i))
            i = j
        elif ch in "+-*/^(),":
            out.append(_Token("op", ch, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", len(text[:i].encode()))
    out.append(_Token("end", "", n))
    return out


class _Parser:
    def __init__(self, text: str, space: Any, extra: Mapping[str, sp.Symbol] | None):
        self.text = text
        self.toks = _tokenize(text)
        self.k = 0
        self.space = space
        self.extra = dict(extra or {})

    def offset(self, tok: _Token) -> int:
        return len(self.text[: tok.pos].encode())

    @property
    def tok(self) -> _Token:
        return self.toks[self.k]

    def take(self) -> _Token:
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, text: str) -> None:
        if self.tok.text != text:
            raise ParseError(f"expected {text!r}", self.offset(self.tok))
        self.k += 1

    def parse(self) -> sp.Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self.tok.text!r}", self.offset(self.tok))
        return e

    def expr(self) -> sp.Expr:
        e = self.term()
        while self.tok.text in ("+", "-"):
            op = self.take().text
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> sp.Expr:
        e = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.take().text
            rhs = self.unary()
            e = e * rhs if op == "*" else e / rhs
        return e

    def unary(self) -> sp.Expr:
        if self.tok.text == "-":
            self.take()
            return -self.unary()
        if self.tok.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> sp.Expr:
        base = self.atom()
        if self.tok.text == "^":
            self.take()
            return sp.Pow(base, self.unary())
        return base

    def atom(self) -> sp.Expr:
        tok = self.tok
        if tok.kind == "num":
            self.take()
            return sp.Rational(tok.text)
        if tok.kind == "name":
            self.take()
            if self.tok.text == "(":
                return self.call(tok)
            return self.name(tok)
        if tok.text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected {tok.text or 'end of input'!r}", self.offset(tok))

    def call(self, tok: _Token) -> sp.Expr:
        fn = _FUNCTIONS.get(tok.text)
        if fn is None:
            raise ParseError(f"unknown function {tok.text!r}", self.offset(tok))
        self.expect("(")
        args = [self.expr()]
        while self.tok.text == ",":
            self.take()
            args.append(self.expr())
        self.expect(")")
        if fn is sp.LambertW:
            if len(args) == 2 and args[1] not in (0, -1):
                raise ParseError("lambertW branch must be 0 or -1", self.offset(tok))
            if len(args) == 2 and args[1] == 0:
                args = args[:1]
        elif len(args) != 1:
            raise ParseError(f"{tok.text} takes one argument", self.offset(tok))
        elif fn is sp.log and args[0].is_number and not args[0].is_positive:
            # keep ln(-1) as written so evaluation can report the domain error
            return fn(args[0], evaluate=False)
        return fn(*args)

    def name(self, tok: _Token) -> sp.Expr:
        name = ALIASES.get(tok.text, tok.text)
        if name in _CONSTANTS:
            return _CONSTANTS[name]
        if name in self.extra:
            return self.extra[name]
        if self.space is None:
            return sym(name)
        s = self.space.resolve(name)
        if s is None:
            if name in PARAMETER_NAMES:
                return sym(name)
            raise UnknownSymbolError(f"unknown symbol {tok.text!r}", self.offset(tok))
        return s


def parse(text: str, space: Any = None, names: Mapping[str, sp.Symbol] | None = None) -> sp.Expr:
    """Parse infix text into an expression.

    Without ``space`` every identifier becomes a symbol.  With a variable
    space, identifiers must be declared variables, jet coordinates of the
    space (``v_tx`` and ``v_xt`` both resolve to the same jet), parameters,
    or entries of ``names``.
    """
    return _Parser(text, space, names).parse()


# --------------------------------------------------------------------------
# rendering

_TEXT_FUNCS = {
    sp.sin: "sin", sp.cos: "cos", sp.tan: "tan", sp.atan: "arctan",
    sp.exp: "exp", sp.log: "ln", sp.Abs: "abs", sp.LambertW: "lambertW",
}


def _text(e: sp.Expr) -> tuple[str, int]:
    """Return (text, precedence): 1 sum, 2 product, 3 power, 4 atom."""
    if e.is_Integer:
        return (str(e), 4) if e >= 0 else (str(e), 1)
    if e.is_Rational:
        s = f"{e.p}/{e.q}"
        return s, (2 if e > 0 else 1)
    if e.is_Symbol:
        return e.name, 4
    if e is sp.pi:
        return "pi", 4
    if e is sp.E:
        return "E", 4
    if e.is_Add:
        parts = []
        for i, term in enumerate(e.as_ordered_terms()):
            coeff, rest = term.as_coeff_Mul()
            if coeff.is_negative:
                s, _ = _text(-term)
                s = _paren(-term, s, 2)
                parts.append(("- " if i else "-") + s)
            else:
                s, p = _text(term)
                parts.append(("+ " if i else "") + (s if p > 1 else f"({s})"))
        return " ".join(parts), 1
    if e.is_Mul:
        coeff, rest = e.as_coeff_Mul()
        if coeff.is_negative:
            s, _ = _text(-e)
            return "-" + _paren(-e, s, 2), 1
        num, den = [], []
        for f in sp.Mul.make_args(e):
            if f.is_Rational and not f.is_Integer:
                if f.p != 1:
                    num.append(sp.Integer(f.p))
                den.append(sp.Integer(f.q))
            elif f.is_Pow and f.exp.is_Rational and f.exp.is_negative:
                den.append(sp.Pow(f.base, -f.exp))
            else:
                num.append(f)
        ns = "*".join(_paren(f, _text(f)[0], 3) for f in num) or "1"
        if not den:
            return ns, 2
        ds = "*".join(_paren(f, _text(f)[0], 3) for f in den)
        if len(den) > 1:
            ds = f"({ds})"
        return f"{ns}/{ds}", 2
    if e.is_Pow:
        if e.exp == sp.Rational(1, 2):
            return f"sqrt({_text(e.base)[0]})", 4
        b = _paren(e.base, _text(e.base)[0], 4)
        xs, xp = _text(e.exp)
        x = xs if xp >= 4 else f"({xs})"
        return f"{b}^{x}", 3
    if isinstance(e, sp.LambertW):
        args = [_text(a)[0] for a in e.args]
        if len(args) == 2 and e.args[1] == 0:
            args = args[:1]
        return f"lambertW({', '.join(args)})", 4
    if isinstance(e, sp.Function) and e.func in _TEXT_FUNCS:
        return f"{_TEXT_FUNCS[e.func]}({', '.join(_text(a)[0] for a in e.args)})", 4
    if isinstance(e, sp.Function):
        return f"{e.func.__name__}({', '.join(_text(a)[0] for a in e.args)})", 4
    if isinstance(e, sp.Derivative):
        inner = _text(e.expr)[0]
        wrt = ", ".join(f"{v}" if k == 1 else f"{v}, {k}" for v, k in e.variable_count)
        return f"D({inner}; {wrt})", 4
    return str(e), 4


def _paren(e: sp.Expr, s: str, need: int) -> str:
    return s if _text(e)[1] >= need else f"({s})"


def _latex_names(e: sp.Expr) -> dict:
    out = {}
    for s in e.free_symbols:
        if "_" in s.name:
            head, tail = s.name.split("_", 1)
            head = sp.latex(sp.Symbol(head))
            out[s] = f"{head}_{{{tail}}}"
    return out


def render(e: Any, fmt: str = "text") -> str:
    """Render as grammar text (re-parseable) or LaTeX."""
    e = sp.sympify(e)
    if fmt == "latex":
        return sp.latex(e, symbol_names=_latex_names(e), ln_notation=True)
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    return _text(e)[0]


# --------------------------------------------------------------------------
# calculus and normal form

def diff(e: Any, s: sp.Symbol, n: int = 1) -> sp.Expr:
    """Partial derivative; jet coordinates are independent symbols."""
    if isinstance(s, sp.Symbol) and is_parameter(s):
        raise ValueError(f"{s} is a parameter; parameters are constants")
    return sp.diff(sp.sympify(e), s, n)


def substitute(e: Any, bindings: Mapping[Any, Any], space: Any = None) -> sp.Expr:
    """Simultaneous substitution followed by :func:`simplify`.

    When a binding targets a dependent variable of ``space`` and the
    expression contains jets of that variable, the jets are bound to the
    matching partial derivatives of the replacement.
    """
    e = sp.sympify(e)
    subs = {(sym(k) if isinstance(k, str) else k): (parse(v, space) if isinstance(v, str) else sp.sympify(v))
            for k, v in bindings.items()}
    if space is not None:
        for s in e.free_symbols:
            dec = space.decode(s)
            if dec is None:
                continue
            dep, counts = dec
            base = space.symbol(dep)
            if base in subs and s not in subs and any(counts):
                d = subs[base]
                for var, k in zip(space.independent_symbols, counts):
                    if k:
                        d = sp.diff(d, var, k)
                subs[s] = d
    return simplify(e.subs(subs, simultaneous=True))


def _canon_exponent(x: sp.Expr) -> sp.Expr:
    if x.is_Rational:
        return x
    return sp.cancel(sp.together(sp.expand(x)))


def _canon_pows(e: sp.Expr) -> sp.Expr:
    def fix(p):
        if p.is_Pow and not p.exp.is_Rational:
            return sp.Pow(p.base, _canon_exponent(p.exp))
        if isinstance(p, sp.exp):
            return sp.exp(sp.expand(p.args[0]))
        return p
    return e.replace(lambda p: p.is_Pow or isinstance(p, sp.exp), fix)


def _pythagoras(e: sp.Expr) -> sp.Expr:
    def fix(p):
        n = int(p.exp)
        c = sp.cos(p.base.args[0])
        return (1 - c**2) ** (n // 2) * p.base ** (n % 2)
    return e.replace(
        lambda p: p.is_Pow and isinstance(p.base, sp.sin) and p.exp.is_Integer and p.exp >= 2,
        fix,
    )


def _pass(e: sp.Expr) -> sp.Expr:
    e = sp.expand(e, deep=True, power_base=True, power_exp=False, log=False)
    e = _canon_pows(e)
    e = sp.powsimp(e, combine="exp", deep=True)
    e = _canon_pows(e)
    e = _pythagoras(e)
    return sp.expand(e, deep=True, power_base=True, power_exp=False, log=False)


def simplify(e: Any, max_passes: int = 8) -> sp.Expr:
    """Normal form: expanded sum of products of powers with collected coefficients.

    Exponents are brought to a single cancelled fraction, exponentials are
    merged, and ``sin(a)^2`` is rewritten to ``1 - cos(a)^2``.  Passes are
    repeated until a fixed point, so the result is idempotent.
    """
    e = sp.sympify(e)
    for _ in range(max_passes):
        new = _pass(e)
        if new == e:
            return e
        e = new
    return e


# --------------------------------------------------------------------------
# numeric evaluation

class DomainError(ArithmeticError):
    def __init__(self, message: str, subtree: Any):
        super().__init__(f"{message}: {render(subtree) if isinstance(subtree, sp.Basic) else subtree}")
        self.subtree = subtree


def _lambert(x: float, k: int) -> float:
    from .numerics import lambert_w

    return lambert_w(k, x)


def _fpow(b: float, x: float, node: Any, integer: bool) -> float:
    if integer:
        if b == 0.0 and x < 0:
            raise DomainError("zero to a negative power", node)
        try:
            return b ** int(x)
        except OverflowError:
            raise DomainError("overflow", node) from None
    if b < 0.0:
        raise DomainError("negative base with non-integer exponent", node)
    if b == 0.0 and x < 0:
        raise DomainError("zero to a negative power", node)
    try:
        return math.pow(b, x)
    except OverflowError:
        raise DomainError("overflow", node) from None


def _fexp(x: float, node: Any) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        raise DomainError("overflow in exp", node) from None


def _flog(x: float, node: Any) -> float:
    if x <= 0.0:
        raise DomainError("logarithm of a non-positive number", node)
    return math.log(x)


def _fw(x: float, k: float, node: Any) -> float:
    if x < -1.0 / math.e:
        raise DomainError("lambertW argument below -1/e", node)
    if k == -1 and x >= 0.0:
        raise DomainError("lambertW branch -1 needs a negative argument", node)
    return _lambert(x, int(k))


def _ftan(x: float, node: Any) -> float:
    if math.cos(x) == 0.0:
        raise DomainError("tan pole", node)
    return math.tan(x)


_UNARY = {
    sp.sin: lambda x, n: math.sin(x),
    sp.cos: lambda x, n: math.cos(x),
    sp.tan: _ftan,
    sp.atan: lambda x, n: math.atan(x),
    sp.exp: _fexp,
    sp.log: _flog,
    sp.Abs: lambda x, n: abs(x),
    sp.sign: lambda x, n: float((x > 0) - (x < 0)),
}


def _lookup(assignment: Mapping[Any, float], s: sp.Symbol) -> float:
    if s in assignment:
        return float(assignment[s])
    if s.name in assignment:
        return float(assignment[s.name])
    raise KeyError(f"no value for symbol {s.name!r}")


def eval_numeric(e: Any, assignment: Mapping[Any, float]) -> float:
    """Evaluate in IEEE doubles.

    Sums and products are accumulated left to right over ``e.args``; powers
    with integer exponents use repeated multiplication semantics
    (``float ** int``), other powers ``math.pow``.  Leaving the real domain
    raises :class:`DomainError` naming the offending subtree.
    """
    e = sp.sympify(e)
    if e.is_Number or isinstance(e, sp.NumberSymbol):
        return float(e)
    if e.is_Symbol:
        return _lookup(assignment, e)
    if e.is_Add:
        acc = 0.0
        for a in e.args:
            acc += eval_numeric(a, assignment)
        return acc
    if e.is_Mul:
        acc = 1.0
        for a in e.args:
            acc *= eval_numeric(a, assignment)
        return acc
    if e.is_Pow:
        b = eval_numeric(e.base, assignment)
        x = eval_numeric(e.exp, assignment)
        return _fpow(b, x, e, e.exp.is_Integer is True)
    if isinstance(e, sp.LambertW):
        k = eval_numeric(e.args[1], assignment) if len(e.args) > 1 else 0.0
        return _fw(eval_numeric(e.args[0], assignment), k, e)
    fn = _UNARY.get(getattr(e, "func", None))
    if fn is not None:
        return fn(eval_numeric(e.args[0], assignment), e)
    raise TypeError(f"cannot evaluate {e!r} numerically")


@dataclass
class Tape:
    """Flat evaluation program for a list of expressions over fixed inputs.

    Instructions mirror :func:`eval_numeric` operation by operation, so both
    paths produce identical doubles.
    """

    inputs: tuple[sp.Symbol, ...]
    code: list[tuple]
    outputs: list[int]
    nslots: int

    def __call__(self, values: Sequence[float] | Mapping[Any, float]) -> list[float]:
        if isinstance(values, Mapping):
            values = [_lookup(values, s) for s in self.inputs]
        slots: list[float] = [0.0] * self.nslots
        slots[: len(self.inputs)] = [float(v) for v in values]
        for op, out, args, node in self.code:
            if op == "const":
                slots[out] = args
            elif op == "add":
                acc = 0.0
                for a in args:
                    acc += slots[a]
                slots[out] = acc
            elif op == "mul":
                acc = 1.0
                for a in args:
                    acc *= slots[a]
                slots[out] = acc
            elif op == "pow":
                slots[out] = _fpow(slots[args[0]], slots[args[1]], node, False)
            elif op == "ipow":
                slots[out] = _fpow(slots[args[0]], slots[args[1]], node, True)
            elif op == "lambertw":
                slots[out] = _fw(slots[args[0]], slots[args[1]], node)
            else:
                slots[out] = op(slots[args[0]], node)
        return [slots[i] for i in self.outputs]


def compile_exprs(exprs: Iterable[Any], inputs: Sequence[sp.Symbol]) -> Tape:
    """Compile expressions into a :class:`Tape` with shared subexpressions."""
    inputs = tuple(inputs)
    index: dict[Any, int] = {s: i for i, s in enumerate(inputs)}
    code: list[tuple] = []
    n = [len(inputs)]

    def emit(op, args, node) -> int:
        slot = n[0]
        n[0] += 1
        code.append((op, slot, args, node))
        return slot

    def walk(e: sp.Expr) -> int:
        if e in index:
            return index[e]
        if e.is_Number or isinstance(e, sp.NumberSymbol):
            slot = emit("const", float(e), e)
        elif e.is_Symbol:
            raise KeyError(f"symbol {e.name!r} is not a tape input")
        elif e.is_Add:
            slot = emit("add", tuple(walk(a) for a in e.args), e)
        elif e.is_Mul:
            slot = emit("mul", tuple(walk(a) for a in e.args), e)
        elif e.is_Pow:
            op = "ipow" if e.exp.is_Integer else "pow"
            slot = emit(op, (walk(e.base), walk(e.exp)), e)
        elif isinstance(e, sp.LambertW):
            k = e.args[1] if len(e.args) > 1 else sp.Integer(0)
            slot = emit("lambertw", (walk(e.args[0]), walk(k)), e)
        elif getattr(e, "func", None) in _UNARY:
            slot = emit(_UNARY[e.func], (walk(e.args[0]),), e)
        else:
            raise TypeError(f"cannot compile {e!r}")
        index[e] = slot
        return slot

    outputs = [walk(sp.sympify(e)) for e in exprs]
    return Tape(inputs, code, outputs, n[0])


# --------------------------------------------------------------------------
# zero testing

DEFAULT_SEED = 1729


def _default_range(s: sp.Symbol) -> tuple[float, float]:
    if s.name == "gamma":
        return (0.5, 3.0)
    if s.is_positive:
        return (0.3, 2.5)
    return (-2.0, 2.0)


def sample_point(
    syms: Iterable[sp.Symbol],
    rng: random.Random,
    ranges: Mapping[Any, tuple[float, float]] | None = None,
) -> dict[sp.Symbol, float]:
    ranges = ranges or {}
    out = {}
    for s in sorted(syms, key=lambda s: s.name):
        lo, hi = ranges.get(s, ranges.get(s.name, _default_range(s)))
        out[s] = rng.uniform(lo, hi)
    return out


@dataclass
class ZeroTest:
    zero: bool
    method: str  # "symbolic" or "numeric"
    max_residual: float = 0.0
    witness: dict | None = None
    points: int = 0
    normal_form: Any = field(default=None, repr=False)

    def __bool__(self) -> bool:
        return self.zero


def _scale(e: sp.Expr, point: Mapping) -> float:
    terms = sp.Add.make_args(e)
    tot = 0.0
    for t in terms:
        try:
            tot += abs(eval_numeric(t, point))
        except DomainError:
            pass
    return tot


def numeric_zero_test(
    e: sp.Expr,
    npoints: int = 20,
    tol: float = 1e-10,
    seed: int = DEFAULT_SEED,
    ranges: Mapping[Any, tuple[float, float]] | None = None,
    max_tries: int = 400,
) -> ZeroTest:
    """Random-point test: |e| <= tol * (1 + sum |terms|) at every sample."""
    rng = random.Random(seed)
    free = e.free_symbols
    worst, witness, good, tries = 0.0, None, 0, 0
    while good < npoints:
        tries += 1
        if tries > max_tries:
            raise DomainError("could not find enough admissible sample points", e)
        pt = sample_point(free, rng, ranges)
        try:
            val = eval_numeric(e, pt)
        except DomainError:
            continue
        if math.isnan(val):
            continue
        good += 1
        rel = abs(val) / (1.0 + _scale(e, pt))
        if rel > worst:
            worst = rel
            witness = {s.name: v for s, v in pt.items()}
        if rel > tol:
            return ZeroTest(False, "numeric", rel, witness, good)
    return ZeroTest(True, "numeric", worst, None, good)


def is_zero(
    e: Any,
    npoints: int = 20,
    tol: float = 1e-10,
    seed: int = DEFAULT_SEED,
    ranges: Mapping[Any, tuple[float, float]] | None = None,
) -> ZeroTest:
    """Decide ``e == 0``: structural normal form first, then random sampling."""
    e = sp.sympify(e)
    nf = simplify(e)
    if nf == 0:
        return ZeroTest(True, "symbolic", normal_form=nf)
    try:
        if sp.cancel(sp.together(nf)) == 0:
            return ZeroTest(True, "symbolic", normal_form=nf)
    except sp.PolynomialError:
        pass
    if nf.is_Number:
        return ZeroTest(False, "symbolic", abs(float(nf)), {}, normal_form=nf)
    res = numeric_zero_test(nf, npoints, tol, seed, ranges)
    res.normal_form = nf
    return res
