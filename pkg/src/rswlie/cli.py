"""Batch command-line surface: symmetry checks, tables, reductions, closed forms, figures.

Every subcommand builds a report (a plain dict), prints it in the requested
format and writes the same bytes under the output directory.  Exit codes:
0 success, 1 usage error, 2 verification failure, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import sympy as sp

from . import jetfield as jf
from . import liealg as la
from . import models as md
from . import numerics as nm
from . import reductions as rd
from . import symkernel as sk

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_NUMERIC = 0, 1, 2, 3
SYSTEMS = ("reduced", "lagrangian", "euler")
FORMATS = ("text", "json", "latex")
_EXT = {"text": "txt", "json": "json", "latex": "tex"}
NUMERIC_FAILURES = ("blow-up", "domain-error")
REFUTED_OK = "refuted, derived form verified"


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    target: str | None = None
    gamma: str = "symbolic"
    overrides: tuple[tuple[str, float], ...] = ()
    out_dir: Path = field(default_factory=nm.default_out_dir)
    fmt: str = "text"
    seed: int = sk.DEFAULT_SEED
    commutators: bool = False
    adjoint: bool = False
    reduce: str | None = None
    variant: str = "claimed"

    def __post_init__(self):
        if self.fmt not in FORMATS:
            raise UsageError(f"unknown format {self.fmt!r}")
        if self.gamma != "symbolic":
            try:
                g = float(sp.sympify(self.gamma))
            except (sp.SympifyError, TypeError, ValueError) as exc:
                raise UsageError(f"gamma must be 'symbolic' or a number, got {self.gamma!r}") from exc
            if not math.isfinite(g) or g < 0:
                raise UsageError(f"gamma must be a finite number >= 0, got {self.gamma!r}")

    @property
    def gamma_value(self) -> Any:
        return None if self.gamma == "symbolic" else sp.nsimplify(self.gamma, rational=True)

    @property
    def gamma_float(self) -> float | None:
        return None if self.gamma == "symbolic" else float(sp.sympify(self.gamma))

    def to_dict(self) -> dict:
        return {"subcommand": self.subcommand, "target": self.target, "gamma": self.gamma,
                "overrides": dict(self.overrides), "format": self.fmt, "seed": self.seed,
                "commutators": self.commutators, "adjoint": self.adjoint,
                "reduce": self.reduce, "variant": self.variant}


@dataclass
class Outcome:
    code: int
    report: dict
    lines: list[str]


# --------------------------------------------------------------------------
# subcommands

def _render(e: Any, cfg: RunConfig) -> str:
    return sk.render(sp.sympify(e), "latex" if cfg.fmt == "latex" else "text")


def cmd_verify(cfg: RunConfig) -> Outcome:
    which = cfg.target or "reduced"
    if which not in SYSTEMS:
        raise UsageError(f"unknown system {which!r}; choose from {', '.join(SYSTEMS)}")
    system = md.build_system(which, cfg.gamma_value)
    cat = md.catalog(which, cfg.gamma_value, verify=False)
    entries, lines = [], [f"system {which} at gamma={cfg.gamma}"]
    for X in cat.basis:
        res = jf.symmetry_residual(system, X)
        tests = [sk.is_zero(r, seed=cfg.seed) for r in res]
        ok = all(t.zero for t in tests)
        worst = max((t.max_residual for t in tests), default=0.0)
        entries.append({"generator": X.label, "field": _render_field(X, cfg), "verified": ok,
                        "max_residual": worst,
                        "residuals": [_render(r, cfg) for r in res]})
        lines.append(f"  {X.label}: {'verified' if ok else 'FAILED'} (max residual {worst:.3g})  {X.render()}")
    n_ok = sum(e["verified"] for e in entries)
    lines.append(f"{n_ok}/{len(entries)} generators verified")
    code = EXIT_OK if n_ok == len(entries) else EXIT_VERIFY
    return Outcome(code, {"system": which, "generators": entries, "verified": n_ok,
                          "count": len(entries)}, lines)


def _render_field(X: jf.VectorField, cfg: RunConfig) -> str:
    return X.render("latex" if cfg.fmt == "latex" else "text")


def _reference_entry(text: str, labels: Sequence[str], gamma: Any, eps: Any = None) -> list[sp.Expr]:
    coeffs = la.parse_combination(text, labels)
    reps = {}
    if gamma is not None:
        reps[md.GAMMA] = gamma
    if eps is not None:
        reps[sk.sym("eps")] = eps
    return [sp.sympify(c).subs(reps) for c in coeffs]


def cmd_table(cfg: RunConfig) -> Outcome:
    if cfg.commutators == cfg.adjoint:
        raise UsageError("table needs exactly one of --commutators or --adjoint")
    cat = md.catalog("reduced", cfg.gamma_value)
    labels = tuple(cat.labels)
    fmt = "latex" if cfg.fmt == "latex" else "text"
    if cfg.commutators:
        tab = la.commutator_table(cat.basis)
        ref, kind = la.REFERENCE_COMMUTATORS, "commutators"
        entry = lambda i, j: tab.entries[i][j]  # noqa: E731
        render = tab.render_entry
    else:
        tab = la.adjoint_table(cat.basis)
        ref, kind = la.REFERENCE_ADJOINT, "adjoint"
        entry = lambda i, j: tab.coeffs[i][j]  # noqa: E731
        render = tab.render_entry
    rows, mismatches = [], []
    for i, li in enumerate(labels):
        row = []
        for j, lj in enumerate(labels):
            got = entry(i, j)
            want = _reference_entry(ref[i][j], labels, cfg.gamma_value)
            if not all(sk.is_zero(a - b, seed=cfg.seed).zero for a, b in zip(got, want)):
                mismatches.append({"row": li, "column": lj, "derived": render(i, j), "expected": ref[i][j]})
            row.append(render(i, j, fmt))
        rows.append(row)
    lines = [f"{kind} table at gamma={cfg.gamma}"]
    width = max(len(c) for r in rows for c in r)
    head = "row\\col" if kind == "commutators" else "Ad\\X"
    lines.append("  ".join([head.ljust(8)] + [lab.ljust(width) for lab in labels]))
    for li, row in zip(labels, rows):
        lines.append("  ".join([li.ljust(8)] + [c.ljust(width) for c in row]).rstrip())
    extra: dict[str, Any] = {}
    if kind == "commutators":
        extra = {"antisymmetric": tab.antisymmetric(), "jacobi": tab.jacobi()}
        lines.append(f"antisymmetric: {extra['antisymmetric']}  jacobi: {extra['jacobi']}")
    lines.append("matches expected table" if not mismatches else f"{len(mismatches)} entries differ")
    for m in mismatches:
        lines.append(f"  [{m['row']},{m['column']}]: derived {m['derived']}, expected {m['expected']}")
    ok = not mismatches and all(extra.values())
    return Outcome(EXIT_OK if ok else EXIT_VERIFY,
                   {"kind": kind, "labels": list(labels), "rows": rows, "mismatches": mismatches, **extra},
                   lines)


def cmd_optimal(cfg: RunConfig) -> Outcome:
    regime = la.regime_of(cfg.gamma_value if cfg.gamma_value is not None else md.GAMMA)
    opt = la.optimal_system(regime)
    fmt = "latex" if cfg.fmt == "latex" else "text"
    report: dict[str, Any] = {"regime": regime, "representatives": opt.render(fmt)}
    lines = [f"optimal system ({regime}):"] + [f"  {r}" for r in opt.render(fmt)]
    code = EXIT_OK
    if cfg.reduce:
        try:
            coeffs = [sp.nsimplify(c.strip(), rational=True) for c in cfg.reduce.split(",")]
        except (sp.SympifyError, TypeError) as exc:
            raise UsageError(f"cannot parse --reduce {cfg.reduce!r}") from exc
        if len(coeffs) != 5:
            raise UsageError("--reduce needs five comma-separated coefficients a1,...,a5")
        if all(c == 0 for c in coeffs):
            raise UsageError("--reduce needs a nonzero vector")
        cat = md.catalog("reduced", cfg.gamma_value)
        table = la.adjoint_table(cat.basis)
        res = la.reduce_to_representative(coeffs, table, cfg.gamma_value)
        report["reduction"] = res.to_dict()
        lines.append(f"start: {la.GenericVector(tuple(coeffs)).render()}  (case {res.case})")
        for lab, e in res.steps:
            lines.append(f"  apply Ad(exp(eps {lab})) with eps = {_render(e, cfg)}")
        rep = res.representative.render(fmt) if res.representative else "irreducible"
        lines.append(f"representative: {rep}  (template {res.template})")
        lines.append(f"round trip verified: {res.verified}")
        lines.extend(f"note: {n}" for n in res.notes)
        if not res.verified:
            code = EXIT_VERIFY
    return Outcome(code, report, lines)


def cmd_reduce(cfg: RunConfig) -> Outcome:
    if not cfg.target:
        raise UsageError("reduce needs a reduction name or 'all'")
    names = rd.REDUCTION_NAMES if cfg.target == "all" else (cfg.target,)
    reports, lines, code = [], [], EXIT_OK
    fmt = "latex" if cfg.fmt == "latex" else "text"
    for name in names:
        try:
            key = rd.normalize_name(name)
        except (KeyError, ValueError) as exc:
            raise UsageError(str(exc)) from exc
        try:
            rep = rd.consistency_report(key)
            red = rd.reduce(key)
        except rd.ConsistencyError as exc:
            reports.append({"reduction": key, "verdict": "inconsistent", "error": str(exc)})
            lines.append(f"{key}: inconsistent ({exc})")
            code = EXIT_VERIFY
            continue
        d = {**red.describe(fmt), **rep.to_dict()}
        reports.append(d)
        lines.append(f"{key}: {rep.verdict}")
        lines.append(f"  symmetry {red.symmetry}; {d['coordinate']}")
        for k, v in red.ansatz.items():
            lines.append(f"  ansatz {k} = {v}")
        for f in rep.forms:
            state = "matches" if f.consistent else "does not match"
            lines.append(f"  {f.kind} {f.label}: {_render(f.expr, cfg)}  [{state}]")
        if rep.verdict == "inconsistent":
            code = EXIT_VERIFY
    return Outcome(code, {"reductions": reports}, lines)


def _candidate_names(target: str) -> list[str]:
    names = [c.name for c in rd.CANDIDATES]
    if target == "all":
        return names
    if target in names:
        return [target]
    try:
        key = rd.normalize_name(target)
    except (KeyError, ValueError):
        key = target
    hits = [c.name for c in rd.CANDIDATES if c.reduction == key]
    if not hits:
        raise UsageError(f"no solution candidate or reduction named {target!r}")
    return hits


def verdict_of(rep: rd.ResidualReport) -> str:
    if rep.verified:
        return rep.verdict
    if rep.correction is not None and rep.correction.verified:
        return REFUTED_OK
    return rep.verdict


def cmd_check_solution(cfg: RunConfig) -> Outcome:
    if not cfg.target:
        raise UsageError("check-solution needs a candidate name, a reduction name or 'all'")
    names = _candidate_names(cfg.target)
    if cfg.target == "all" and len(names) != len(rd.CANDIDATES):
        raise AssertionError("candidate sweep does not cover the catalog")
    reports, lines, code = [], [], EXIT_OK
    for name in names:
        rep = rd.verify_candidate(name, seed=cfg.seed)
        verdict = verdict_of(rep)
        d = rep.to_dict()
        d["summary"] = verdict
        reports.append(d)
        lines.append(f"{name} ({rep.reduction}, {rep.form}): {verdict}; max residual {rep.max_residual:.3g}")
        if rep.witness is not None and not rep.verified:
            lines.append(f"  witness {json.dumps(rep.witness, sort_keys=True)}")
        if rep.correction is not None:
            c = rep.correction
            lines.append(f"  correction: {c.verdict}; max residual {c.max_residual:.3g}")
        if not rep.accepted:
            code = EXIT_VERIFY
    lines.append(f"{sum(r['summary'] != 'refuted' for r in reports)}/{len(reports)} candidates settled")
    return Outcome(code, {"candidates": reports, "count": len(reports),
                          "catalog_size": len(rd.CANDIDATES)}, lines)


_FIG_GAMMAS = {"fig1": (1.1, 2.0), "fig2": (2.0, 1.5)}


def cmd_simulate(cfg: RunConfig) -> Outcome:
    if cfg.target not in _FIG_GAMMAS:
        raise UsageError("simulate needs 'fig1' or 'fig2'")
    if cfg.variant not in ("claimed", "derived"):
        raise UsageError("--variant must be 'claimed' or 'derived'")
    known = nm.FIG1_DEFAULTS if cfg.target == "fig1" else nm.FIG2_DEFAULTS
    unknown = sorted(k for k, _ in cfg.overrides if k not in known)
    if unknown:
        raise UsageError(f"unknown parameter(s) {', '.join(unknown)}; known: {', '.join(known)}")
    gammas = _FIG_GAMMAS[cfg.target] if cfg.gamma_float is None else (cfg.gamma_float,)
    runs, lines, code = [], [], EXIT_OK
    for g in gammas:
        try:
            fr = nm.run_figure(cfg.target, g, dict(cfg.overrides) or None, cfg.out_dir,
                               variant=cfg.variant)
        except (ArithmeticError, ValueError, RuntimeError) as exc:
            runs.append({"gamma": g, "error": str(exc)})
            lines.append(f"gamma={g}: numeric failure: {exc}")
            code = EXIT_NUMERIC
            continue
        ts = fr.series
        crossings = {n: nm.mean_crossings(ts.column(n)) for n in ts.names}
        finite = all(math.isfinite(float(v)) for v in ts.y.ravel())
        entry = {"gamma": g, "params": {k: float(v) for k, v in fr.params.items()},
                 "files": {k: p.name for k, p in fr.files.items()},
                 "samples": len(ts.t), "end": float(ts.t[-1]), "finite": finite,
                 "mean_crossings": crossings, "events": [e.to_dict() for e in ts.events]}
        if cfg.target == "fig1":
            try:
                pe = nm.period_estimate(ts, "V")
                entry["period"] = {"value": pe.period, "std": pe.std, "crossings": pe.crossings}
            except nm.NonOscillatoryError as exc:
                entry["period"] = {"error": str(exc)}
        runs.append(entry)
        ev = ", ".join(f"{e.kind}@{e.time:.4g}" for e in ts.events) or "none"
        lines.append(f"gamma={g}: {entry['samples']} samples to {entry['end']:.4g}; "
                     f"crossings {crossings}; events {ev}")
        lines.append(f"  wrote {', '.join(entry['files'].values())}")
        # a shock is a physical outcome (the ODE stalls at its singular
        # coefficient); blow-up or domain errors without one are not
        kinds = {e.kind for e in ts.events}
        if not finite or (kinds & set(NUMERIC_FAILURES) and "shock-guard" not in kinds):
            code = EXIT_NUMERIC
    return Outcome(code, {"figure": cfg.target, "variant": cfg.variant, "runs": runs}, lines)


def cmd_determining(cfg: RunConfig) -> Outcome:
    which = cfg.target or "reduced"
    if which not in SYSTEMS:
        raise UsageError(f"unknown system {which!r}; choose from {', '.join(SYSTEMS)}")
    system = md.build_system(which, cfg.gamma_value)
    cat = md.catalog(which, cfg.gamma_value, verify=False)
    eqs = jf.determining_equations(system)
    checks = {}
    for X in cat.basis:
        vals = jf.substitute_field(eqs, system, X)
        checks[X.label] = all(v == 0 or sk.is_zero(v, seed=cfg.seed).zero for v in vals)
    lines = [f"{len(eqs)} determining equations for the {which} system"]
    lines += [f"  {i + 1}: {_render(e, cfg)} = 0" for i, e in enumerate(eqs)]
    lines += [f"{lab}: {'satisfies all' if ok else 'FAILS'}" for lab, ok in checks.items()]
    code = EXIT_OK if all(checks.values()) else EXIT_VERIFY
    return Outcome(code, {"system": which, "equations": [_render(e, cfg) for e in eqs],
                          "generators": checks}, lines)


COMMANDS: dict[str, Callable[[RunConfig], Outcome]] = {
    "verify": cmd_verify,
    "table": cmd_table,
    "optimal": cmd_optimal,
    "reduce": cmd_reduce,
    "check-solution": cmd_check_solution,
    "simulate": cmd_simulate,
    "determining": cmd_determining,
}


# --------------------------------------------------------------------------
# argument handling and output

def _override(text: str) -> tuple[str, float]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    k, v = text.split("=", 1)
    try:
        return k.strip(), float(v)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {v!r}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--gamma", default="symbolic", help="'symbolic' or a number >= 0")
    common.add_argument("--seed", type=int, default=sk.DEFAULT_SEED,
                        help=f"seed for numeric zero tests (default {sk.DEFAULT_SEED})")
    common.add_argument("--format", dest="fmt", choices=FORMATS, default="text")
    common.add_argument("--out", type=Path, default=None,
                        help="output directory (default $RSWLIE_OUT or ./rswlie-out)")
    common.add_argument("--set", dest="overrides", type=_override, action="append", default=[],
                        metavar="NAME=VALUE", help="parameter override for simulate")

    p = _Parser(prog="rswlie", description="Symmetry analysis of rotating shallow-water models.")
    sub = p.add_subparsers(dest="subcommand", parser_class=_Parser)
    s = sub.add_parser("verify", parents=[common], help="symmetry residuals for a generator catalog")
    s.add_argument("target", nargs="?", default="reduced", choices=SYSTEMS)
    s = sub.add_parser("table", parents=[common], help="commutator or adjoint table")
    s.add_argument("--commutators", action="store_true")
    s.add_argument("--adjoint", action="store_true")
    s = sub.add_parser("optimal", parents=[common], help="optimal system and reduction to it")
    s.add_argument("--reduce", default=None, metavar="a1,a2,a3,a4,a5")
    s = sub.add_parser("reduce", parents=[common], help="similarity reduction and its consistency")
    s.add_argument("target", metavar="name")
    s = sub.add_parser("check-solution", parents=[common], help="adjudicate closed-form solutions")
    s.add_argument("target", metavar="name")
    s = sub.add_parser("simulate", parents=[common], help="reproduce a figure")
    s.add_argument("target", choices=tuple(_FIG_GAMMAS))
    s.add_argument("--variant", choices=("claimed", "derived"), default="claimed")
    s = sub.add_parser("determining", parents=[common], help="determining equations")
    s.add_argument("target", nargs="?", default="reduced", choices=SYSTEMS)
    return p


def parse_config(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(list(argv))
    if ns.subcommand is None:
        raise UsageError("missing subcommand")
    return RunConfig(
        subcommand=ns.subcommand,
        target=getattr(ns, "target", None),
        gamma=str(ns.gamma),
        overrides=tuple(ns.overrides),
        out_dir=ns.out if ns.out is not None else nm.default_out_dir(),
        fmt=ns.fmt,
        seed=ns.seed,
        commutators=getattr(ns, "commutators", False),
        adjoint=getattr(ns, "adjoint", False),
        reduce=getattr(ns, "reduce", None),
        variant=getattr(ns, "variant", "claimed"),
    )


def report_path(cfg: RunConfig) -> Path:
    parts = [cfg.subcommand]
    if cfg.target:
        parts.append(cfg.target.replace("+", "p").replace("/", "_"))
    if cfg.subcommand == "table":
        parts.append("commutators" if cfg.commutators else "adjoint")
    if cfg.gamma != "symbolic":
        parts.append(f"gamma{cfg.gamma}")
    return Path(cfg.out_dir) / ("_".join(parts) + "." + _EXT[cfg.fmt])


def format_outcome(cfg: RunConfig, out: Outcome) -> str:
    if cfg.fmt == "json":
        doc = {"config": cfg.to_dict(), "exit_code": out.code, "report": out.report}
        return json.dumps(rd._jsonable(doc), indent=2, sort_keys=False) + "\n"
    return "\n".join(out.lines) + "\n"


def execute(cfg: RunConfig) -> Outcome:
    out_dir = Path(cfg.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"output directory {out_dir} is not writable: {exc}") from exc
    if not os.access(out_dir, os.W_OK):
        raise UsageError(f"output directory {out_dir} is not writable")
    return COMMANDS[cfg.subcommand](cfg)


def run(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        out = execute(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FloatingPointError, OverflowError, ZeroDivisionError, sk.DomainError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (AssertionError, md.SymmetryCheckError, la.ClosureError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    text = format_outcome(cfg, out)
    path = report_path(cfg)
    path.write_text(text)
    sys.stdout.write(text)
    return out.code


def main() -> None:
    sys.exit(run())
