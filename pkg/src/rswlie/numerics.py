"""Adaptive ODE integration with events, Lambert W, period estimation and figure runs."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import sympy as sp
from scipy.integrate import DOP853, RK45
from scipy.optimize import brentq

from . import symkernel as sk

__all__ = [
    "Event",
    "FigureRun",
    "Guard",
    "NonOscillatoryError",
    "OdeProblem",
    "PeriodEstimate",
    "TimeSeries",
    "fig1_problem",
    "fig2_problem",
    "integrate",
    "lambert_w",
    "period_estimate",
    "run_figure",
]

BLOWUP_RATE = 1e8


# --------------------------------------------------------------------------
# Lambert W

def _branch_point_series(p: float) -> float:
    # expansion of W around -1/e in p = +-sqrt(2(e x + 1))
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3 - 43.0 / 540.0 * p**4


def lambert_w(branch: int, x: float) -> float:
    """Real Lambert W on branch 0 (x >= -1/e) or branch -1 (-1/e <= x < 0).

    Starting guesses: the branch-point series when e*x + 1 < 0.3, the
    asymptotic ``L1 - L2 + L2/L1`` form for large |ln|x||, otherwise
    ``log1p(x)`` on branch 0.  Halley iteration then converges in a handful
    of steps.
    """
    x = float(x)
    if branch not in (0, -1):
        raise ValueError("branch must be 0 or -1")
    q = math.e * x + 1.0
    if q < 0.0:
        if q > -1e-15:
            q = 0.0
        else:
            raise sk.DomainError("lambertW argument below -1/e", x)
    if branch == -1 and x >= 0.0:
        raise sk.DomainError("lambertW branch -1 needs a negative argument", x)
    if q == 0.0:
        return -1.0
    if branch == 0:
        if x == 0.0:
            return 0.0
        if q < 0.3:
            w = _branch_point_series(math.sqrt(2.0 * q))
        elif x > 3.0:
            l1 = math.log(x)
            l2 = math.log(l1)
            w = l1 - l2 + l2 / l1
        else:
            w = math.log1p(x)
    else:
        if q < 0.3:
            w = _branch_point_series(-math.sqrt(2.0 * q))
        else:
            l1 = math.log(-x)
            l2 = math.log(-l1)
            w = l1 - l2 + l2 / l1
    for _ in range(60):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            break
        dw = f / denom
        w -= dw
        if abs(dw) <= 4e-16 * (1.0 + abs(w)):
            break
    return w


# --------------------------------------------------------------------------
# problems and series

@dataclass(frozen=True)
class Guard:
    """Scalar expression whose sign change marks an event."""

    label: str
    expr: Any
    kind: str = "shock-guard"
    terminal: bool = True


@dataclass(frozen=True)
class Event:
    kind: str  # shock-guard | blow-up | domain-error
    time: float
    value: float
    label: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind, "time": self.time, "value": self.value, "label": self.label}


@dataclass(frozen=True)
class OdeProblem:
    """First-order system ``y' = f(s, y)`` with symbolic right-hand sides."""

    states: tuple[str, ...]
    rhs: tuple[Any, ...]
    initial: tuple[float, ...]
    span: tuple[float, float]
    independent: str = "t"
    params: Mapping[str, float] = field(default_factory=dict)
    guards: tuple[Guard, ...] = ()
    blowup_rate: float = BLOWUP_RATE

    def __post_init__(self):
        if len(self.states) != len(self.rhs) or len(self.states) != len(self.initial):
            raise ValueError("states, rhs and initial must have equal length")
        allowed = {sk.sym(n) for n in self.states} | {sk.sym(self.independent)}
        allowed |= {sk.sym(n) for n in self.params}
        for r in self.rhs:
            extra = sp.sympify(r).free_symbols - allowed
            if extra:
                raise ValueError(f"right-hand side has unbound symbols {sorted(map(str, extra))}")
        if not all(math.isfinite(v) for v in self.initial):
            raise ValueError("initial state must be finite")

    def bound(self, exprs: Sequence[Any]) -> list[sp.Expr]:
        subs = {sk.sym(k): sp.Float(v, 17) if not isinstance(v, (int, sp.Rational)) else v
                for k, v in self.params.items()}
        return [sp.sympify(e).xreplace(subs) for e in exprs]

    def inputs(self) -> list[sp.Symbol]:
        return [sk.sym(self.independent)] + [sk.sym(n) for n in self.states]


@dataclass
class TimeSeries:
    names: tuple[str, ...]
    independent: str
    t: np.ndarray
    y: np.ndarray  # shape (len(t), len(names))
    events: list[Event] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return self.y[:, self.names.index(name)]

    @property
    def shock(self) -> bool:
        return any(e.kind == "shock-guard" and e.label.endswith("(terminal)") for e in self.events)


def integrate(
    p: OdeProblem,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    samples: int | Sequence[float] = 2001,
    method: str = "DOP853",
) -> TimeSeries:
    """Adaptive embedded Runge-Kutta integration with event handling.

    Guards are checked after every accepted step; a sign change is
    localised with Brent's method on the step's dense output.  A terminal
    guard, a right-hand side larger than ``p.blowup_rate``, a step-size
    underflow, or a domain error ends the run early; the partial series up
    to the event is returned.
    """
    if rtol < 1e-13:
        raise ValueError("rtol must be at least 1e-13")
    t0, t1 = (float(v) for v in p.span)
    grid = np.linspace(t0, t1, samples) if isinstance(samples, int) else np.asarray(samples, float)
    inputs = p.inputs()
    f_tape = sk.compile_exprs(p.bound(p.rhs), inputs)
    g_tape = sk.compile_exprs(p.bound([g.expr for g in p.guards]), inputs) if p.guards else None
    nfev = [0]

    def fun(s, y):
        nfev[0] += 1
        return np.array(f_tape([s, *y]))

    def guards(s, y):
        return g_tape([s, *y]) if g_tape else []

    stepper_cls = {"DOP853": DOP853, "RK45": RK45}[method]
    y0 = np.array(p.initial, float)
    events: list[Event] = []
    ts: list[float] = []
    ys: list[np.ndarray] = []
    k = 0
    while k < len(grid) and grid[k] <= t0:
        ts.append(float(grid[k]))
        ys.append(y0.copy())
        k += 1
    try:
        stepper = stepper_cls(fun, t0, y0, t1, rtol=rtol, atol=atol)
        g_prev = guards(t0, y0)
    except sk.DomainError as err:
        events.append(Event("domain-error", t0, float("nan"), str(err)))
        return TimeSeries(tuple(p.states), p.independent, np.array(ts), np.array(ys).reshape(len(ts), -1), events,
                          {"nfev": nfev[0], "nsteps": 0})
    nsteps = 0
    stop_at: float | None = None
    while stepper.status == "running":
        t_old = stepper.t
        try:
            msg = stepper.step()
        except sk.DomainError as err:
            events.append(Event("domain-error", t_old, float("nan"), str(err)))
            break
        if stepper.status == "failed":
            events.append(Event("blow-up", stepper.t, float("nan"), f"step-size underflow: {msg}"))
            events.extend(_near_guards(p, guards, stepper.t, stepper.y))
            break
        nsteps += 1
        dense = stepper.dense_output()
        t_new, y_new = stepper.t, stepper.y
        try:
            g_new = guards(t_new, y_new)
            rate = float(np.max(np.abs(fun(t_new, y_new))))
        except sk.DomainError as err:
            events.append(Event("domain-error", t_new, float("nan"), str(err)))
            stop_at = t_old
            while k < len(grid) and grid[k] <= t_old:
                ts.append(float(grid[k]))
                ys.append(np.asarray(dense(grid[k]), float))
                k += 1
            break
        hit = None
        for i, (a, b) in enumerate(zip(g_prev, g_new)):
            if a == 0.0 or (a > 0) == (b > 0):
                continue
            try:
                root = brentq(lambda s: guards(s, dense(s))[i], t_old, t_new, xtol=1e-14, rtol=1e-14)
            except (ValueError, sk.DomainError):
                root = t_new
            guard = p.guards[i]
            label = guard.label + (" (terminal)" if guard.terminal else "")
            events.append(Event(guard.kind, float(root), float(a), label))
            if guard.terminal and (hit is None or root < hit):
                hit = root
        if hit is not None:
            stop_at = hit
        elif not math.isfinite(rate) or rate > p.blowup_rate:
            events.append(Event("blow-up", t_new, rate, "right-hand side exceeds blow-up rate"))
            events.extend(_near_guards(p, guards, t_new, y_new))
            stop_at = t_new
        end = t_new if stop_at is None else stop_at
        while k < len(grid) and grid[k] <= end:
            ts.append(float(grid[k]))
            ys.append(np.asarray(dense(grid[k]), float))
            k += 1
        if stop_at is not None:
            if not ts or ts[-1] < stop_at:
                ts.append(float(stop_at))
                ys.append(np.asarray(dense(stop_at), float))
            break
        g_prev = g_new
    events.sort(key=lambda e: e.time)
    y_arr = np.array(ys, float).reshape(len(ts), len(p.states))
    return TimeSeries(tuple(p.states), p.independent, np.array(ts), y_arr, events,
                      {"nfev": nfev[0], "nsteps": nsteps, "method": method, "rtol": rtol, "atol": atol})


GUARD_PROXIMITY = 1e-3


def _near_guards(p: OdeProblem, guards, s: float, y) -> list[Event]:
    # A singular coefficient stalls the stepper before its sign can change;
    # a terminal guard that is almost zero at the stall is the cause.
    try:
        vals = guards(s, y)
    except sk.DomainError:
        return []
    out = []
    for g, v in zip(p.guards, vals):
        if g.terminal and abs(v) < GUARD_PROXIMITY:
            out.append(Event(g.kind, float(s), float(v), g.label + " approached (terminal)"))
    return out


# --------------------------------------------------------------------------
# periods

class NonOscillatoryError(ValueError):
    pass


@dataclass(frozen=True)
class PeriodEstimate:
    period: float
    std: float
    crossings: int

    def __iter__(self):
        return iter((self.period, self.std, self.crossings))


def mean_crossings(values: np.ndarray) -> int:
    d = np.asarray(values) - np.mean(values)
    s = np.sign(d)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def period_estimate(ts: TimeSeries, state: str) -> PeriodEstimate:
    """Mean spacing of upward crossings of the mean, with its standard deviation."""
    x = ts.column(state)
    t = ts.t
    d = x - x.mean()
    if mean_crossings(x) < 3:
        raise NonOscillatoryError(f"{state} has fewer than 3 mean crossings")
    up = np.nonzero((d[:-1] < 0) & (d[1:] >= 0))[0]
    times = t[up] - d[up] * (t[up + 1] - t[up]) / (d[up + 1] - d[up])
    if len(times) < 2:
        raise NonOscillatoryError(f"{state} has fewer than two upward crossings")
    gaps = np.diff(times)
    std = float(np.std(gaps, ddof=1)) if len(gaps) > 1 else float("inf")
    return PeriodEstimate(float(np.mean(gaps)), std, len(times))


# --------------------------------------------------------------------------
# figure problems

FIG1_DEFAULTS = {"c": 1.0, "H0": 2.0, "V(0)": 0.01, "V_xi(0)": -0.2, "span": 50.0}
FIG2_DEFAULTS = {"H(0)": 0.02, "U(0)": 0.01, "V(0)": 0.01, "span": 100.0}


def fig1_problem(gamma: float, overrides: Mapping[str, float] | None = None) -> OdeProblem:
    """Travelling-wave master equation as a first-order system in (V, V_xi).

    Guards: the leading coefficient ``c^2 - (H0 - V_xi)^(-gamma-1)`` (the
    ODE is singular at its root) and the same coefficient minus one, the
    threshold quoted in the figure caption, monitored but not terminal.
    """
    o = {**FIG1_DEFAULTS, **(overrides or {})}
    V, W, c, H0, g = sk.symbols("V V_xi c H0 gamma")
    coeff = c**2 - (H0 - W) ** (-g - 1)
    return OdeProblem(
        states=("V", "V_xi"),
        rhs=(W, -V / coeff),
        initial=(o["V(0)"], o["V_xi(0)"]),
        span=(0.0, o["span"]),
        independent="xi",
        params={"c": o["c"], "H0": o["H0"], "gamma": gamma},
        guards=(
            Guard("singular coefficient c^2-(H0-V_xi)^(-gamma-1)=0", coeff, "shock-guard", True),
            Guard("caption threshold c^2-(H0-V_xi)^(-gamma-1)=1", coeff - 1, "shock-guard", False),
        ),
    )


def fig2_problem(gamma: float, overrides: Mapping[str, float] | None = None,
                 variant: str = "claimed") -> OdeProblem:
    """Euler scaling system solved for (H', U', V').

    ``variant='claimed'`` integrates the system as published;
    ``variant='derived'`` integrates the reduction recomputed from the PDEs.
    """
    from .reductions import reduce

    o = {**FIG2_DEFAULTS, **(overrides or {})}
    red = reduce("euler-scaling")
    system = red.claimed if variant == "claimed" else red.derived
    rhs = red.solve_first_order(system)
    return OdeProblem(
        states=("H", "U", "V"),
        rhs=tuple(rhs),
        initial=(o["H(0)"], o["U(0)"], o["V(0)"]),
        span=(0.0, o["span"]),
        independent="t",
        params={"gamma": gamma},
    )


# --------------------------------------------------------------------------
# figure runner

@dataclass
class FigureRun:
    which: str
    gamma: float
    series: TimeSeries
    files: dict[str, Path]
    params: dict


def default_out_dir() -> Path:
    return Path(os.environ.get("RSWLIE_OUT", "rswlie-out"))


def _fmt(v: float) -> str:
    return format(float(v), ".6g")


def _write_csv(path: Path, ts: TimeSeries, extra: Mapping[str, np.ndarray]) -> None:
    cols = [ts.independent, *ts.names, *extra]
    data = [ts.t, *(ts.y[:, i] for i in range(len(ts.names))), *extra.values()]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in zip(*data):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _write_events(path: Path, ts: TimeSeries, params: Mapping) -> None:
    with open(path, "w") as fh:
        fh.write("# " + " ".join(f"{k}={_fmt(v)}" for k, v in params.items()) + "\n")
        fh.write(f"# steps={ts.stats.get('nsteps')} nfev={ts.stats.get('nfev')}\n")
        if not ts.events:
            fh.write("no events\n")
        for e in ts.events:
            fh.write(f"{e.kind}\t{e.time!r}\t{e.value!r}\t{e.label}\n")


def _write_svg(path: Path, ts: TimeSeries, curves: Mapping[str, np.ndarray], title: str, params: Mapping) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "rswlie", "svg.fonttype": "none"}):
        fig, axes = plt.subplots(len(curves), 1, figsize=(7, 2.2 * len(curves)), sharex=True)
        axes = np.atleast_1d(axes)
        legend = ", ".join(f"{k}={_fmt(v)}" for k, v in params.items())
        for ax, (name, vals) in zip(axes, curves.items()):
            ax.plot(ts.t, vals, lw=1.0, label=name)
            ax.set_ylabel(name)
            for e in ts.events:
                ax.axvline(e.time, color="red", ls="--", lw=0.8)
            ax.legend(loc="upper right", fontsize=8)
        axes[0].set_title(f"{title}\n{legend}", fontsize=9)
        for e in ts.events:
            axes[-1].annotate(e.kind, (e.time, 0), xycoords=("data", "axes fraction"),
                              fontsize=7, color="red")
        axes[-1].set_xlabel(ts.independent)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def run_figure(
    which: str,
    gamma: float,
    overrides: Mapping[str, float] | None = None,
    out_dir: str | Path | None = None,
    variant: str = "claimed",
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> FigureRun:
    """Integrate one figure panel and write ``<which>_gamma<g>.{csv,svg,events.txt}``."""
    out = Path(out_dir) if out_dir is not None else default_out_dir()
    out.mkdir(parents=True, exist_ok=True)
    tag = f"{which}_gamma{_fmt(gamma)}" + ("" if variant == "claimed" else f"_{variant}")
    if which == "fig1":
        p = fig1_problem(gamma, overrides)
        ts = integrate(p, rtol, atol)
        H0 = p.params["H0"]
        H = 1.0 / (H0 - ts.column("V_xi"))
        extra = {"H": H}
        curves = {"V": ts.column("V"), "H": H}
        title = "travelling wave: V(xi) and H(xi) = 1/(H0 - V_xi)"
        params = {"gamma": gamma, **p.params, "V(0)": p.initial[0], "V_xi(0)": p.initial[1]}
        params.pop("gamma")
        params = {"gamma": gamma, **params}
    elif which == "fig2":
        p = fig2_problem(gamma, overrides, variant)
        ts = integrate(p, rtol, atol)
        extra = {}
        curves = {n: ts.column(n) for n in ts.names}
        title = f"Euler scaling reduction ({variant} system)"
        params = {"gamma": gamma, "H(0)": p.initial[0], "U(0)": p.initial[1], "V(0)": p.initial[2]}
    else:
        raise ValueError(f"unknown figure {which!r}")
    files = {"csv": out / f"{tag}.csv", "svg": out / f"{tag}.svg", "events": out / f"{tag}.events.txt"}
    _write_csv(files["csv"], ts, extra)
    _write_svg(files["svg"], ts, curves, title, params)
    _write_events(files["events"], ts, params)
    return FigureRun(which, gamma, ts, files, dict(params))
