"""Scan both family boxes and summarise the admissible and extremal regions.

    python3 scripts/region_scan.py --steps 100 --outdir results/
"""

from __future__ import annotations

import argparse
import json
import os
from dataclasses import asdict, dataclass

from chsh_extremal import cli


@dataclass
class RegionScanConfig:
    steps: int = 100
    outdir: str = "results"
    threads: int = 4


def summarise(family: str, rows: list[list]) -> dict:
    admissible = [r for r in rows if r[4]]
    out = {
        "family": family,
        "cells": len(rows),
        "admissible": len(admissible),
        "admissible_and_both_extremal": sum(1 for r in admissible if r[5] and r[6]),
    }
    if family == "wolfe-yelin":
        out["extended_only"] = sum(1 for r in rows if r[7] and not r[4])
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=RegionScanConfig.steps)
    ap.add_argument("--outdir", default=RegionScanConfig.outdir)
    ap.add_argument("--threads", type=int, default=RegionScanConfig.threads)
    cfg = RegionScanConfig(**vars(ap.parse_args()))
    os.makedirs(cfg.outdir, exist_ok=True)
    report = {"config": asdict(cfg), "families": []}
    for family, header in (("double-tilted", cli.DT_HEADER), ("wolfe-yelin", cli.WY_HEADER)):
        path = os.path.join(cfg.outdir, f"{family}.csv")
        scan = cli.ScanConfig(family, *cli.FAMILY_DEFAULTS[family], cfg.steps, path, threads=cfg.threads)
        rows = cli.run_scan(scan)
        cli._write_csv(path, header, rows)
        report["families"].append({**summarise(family, rows), "csv": path})
    print(json.dumps(report, indent=2))


if __name__ == "__main__":
    main()
