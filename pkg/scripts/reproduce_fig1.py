"""Travelling-wave runs at two polytropic indices plus a shock-triggering start.

Writes CSV/SVG/event files and a summary JSON under the output directory.
"""

from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from rswlie import numerics as nm


@dataclass
class Fig1Config:
    gammas: tuple[float, ...] = (1.1, 2.0)
    c: float = 1.0
    H0: float = 2.0
    V0: float = 0.01
    W0: float = -0.2
    span: float = 50.0
    shock_W0: float = -1.2
    out: Path = field(default_factory=lambda: nm.default_out_dir() / "fig1")

    def overrides(self, W0: float | None = None) -> dict:
        return {"c": self.c, "H0": self.H0, "V(0)": self.V0,
                "V_xi(0)": self.W0 if W0 is None else W0, "span": self.span}


def main(cfg: Fig1Config) -> dict:
    summary = {"config": {k: (str(v) if isinstance(v, Path) else v) for k, v in asdict(cfg).items()}, "runs": []}
    for g in cfg.gammas:
        fr = nm.run_figure("fig1", g, cfg.overrides(), cfg.out)
        pe = nm.period_estimate(fr.series, "V")
        summary["runs"].append({"gamma": g, "period": pe.period, "period_std": pe.std,
                                "mean_crossings_V": nm.mean_crossings(fr.series.column("V")),
                                "files": [p.name for p in fr.files.values()]})
        print(f"gamma={g}: period {pe.period:.5f} +- {pe.std:.1e}")
    shock = nm.integrate(nm.fig1_problem(cfg.gammas[-1], cfg.overrides(cfg.shock_W0)))
    summary["shock_run"] = {"V_xi(0)": cfg.shock_W0, "events": [e.to_dict() for e in shock.events]}
    print(f"V_xi(0)={cfg.shock_W0}: " + ", ".join(f"{e.kind} at xi={e.time:.4f}" for e in shock.events))
    (cfg.out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gammas", type=float, nargs="+", default=[1.1, 2.0])
    ap.add_argument("--out", type=Path, default=None)
    a = ap.parse_args()
    cfg = Fig1Config(gammas=tuple(a.gammas))
    if a.out is not None:
        cfg.out = a.out
    main(cfg)
