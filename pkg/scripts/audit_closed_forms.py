"""Audit every reduction and closed-form candidate; write one JSON report per item."""

from __future__ import annotations

import argparse
import json
from dataclasses import dataclass, field
from pathlib import Path

from rswlie import numerics as nm
from rswlie import reductions as rd
from rswlie import symkernel as sk


@dataclass
class AuditConfig:
    seed: int = sk.DEFAULT_SEED
    out: Path = field(default_factory=lambda: nm.default_out_dir() / "audit")
    reductions: tuple[str, ...] = rd.REDUCTION_NAMES + rd.SUBFORM_NAMES
    candidates: tuple[str, ...] = tuple(c.name for c in rd.CANDIDATES)


def _dump(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, default=str) + "\n")


def main(cfg: AuditConfig) -> dict:
    cfg.out.mkdir(parents=True, exist_ok=True)
    table = {"reductions": {}, "candidates": {}}
    for name in cfg.reductions:
        rep = rd.consistency_report(name)
        _dump(cfg.out / f"reduction_{name.replace('+', 'p')}.json", rep.to_dict())
        table["reductions"][name] = rep.verdict
        print(f"{name:28s} {rep.verdict}")
    for name in cfg.candidates:
        rep = rd.verify_candidate(name, seed=cfg.seed)
        _dump(cfg.out / f"candidate_{name}.json", rep.to_dict())
        corr = "" if rep.correction is None else f" (correction {rep.correction.verdict})"
        table["candidates"][name] = rep.verdict + corr
        print(f"{name:28s} {rep.verdict}{corr}  max residual {rep.max_residual:.3g}")
    for name in ("travelwave-first-order", "scaling-first-order"):
        rep = rd.first_integral_check(name, seed=cfg.seed)
        _dump(cfg.out / f"first_integral_{name}.json", rep.to_dict())
        table.setdefault("first_integrals", {})[name] = rep.verdict
    _dump(cfg.out / "summary.json", table)
    return table


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=sk.DEFAULT_SEED)
    ap.add_argument("--out", type=Path, default=None)
    a = ap.parse_args()
    cfg = AuditConfig(seed=a.seed)
    if a.out is not None:
        cfg.out = a.out
    main(cfg)
