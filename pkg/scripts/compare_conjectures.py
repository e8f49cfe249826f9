"""Judge random realisations with both extremality predicates and the exposing LP.

    python3 scripts/compare_conjectures.py --samples 10000 --seed 2024 --certify-every 50
"""

from __future__ import annotations

import argparse
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass

from chsh_extremal import cli
from chsh_extremal.core_model import Realization
from chsh_extremal.exposing_lp import PROVEN_EXPOSED, certify_exposed


@dataclass
class CompareConfig:
    samples: int = 10_000
    seed: int = 2024
    threads: int = 4
    certify_every: int = 0  # run the full certificate on every k-th LP candidate; 0 disables


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in asdict(CompareConfig()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=type(default), default=default)
    cfg = CompareConfig(**vars(ap.parse_args()))

    rows, summary = cli.run_compare(cfg.samples, cfg.seed, threads=cfg.threads)
    report = {"config": asdict(cfg), "summary": summary.to_dict()}

    # LP candidates versus the predicates
    candidates = [r for r in rows if r[10] == "exposed-candidate"]
    report["lp_candidates_judged_extremal"] = sum(1 for r in candidates if r[7] and r[8])
    report["extremal_without_lp_candidate"] = sum(1 for r in rows if r[7] and r[8] and r[10] != "exposed-candidate")
    report["max_i_max"] = max((r[11] for r in rows if not math.isnan(r[11])), default=None)

    if cfg.certify_every > 0:
        verdicts = Counter()
        for row in candidates[:: cfg.certify_every]:
            cert = certify_exposed(Realization(*row[1:6]))
            verdicts[cert.verdict] += 1
            if cert.verdict == PROVEN_EXPOSED and not (row[7] and row[8]):
                verdicts["exposed_but_not_extremal"] += 1
        report["certificates"] = dict(sorted(verdicts.items()))
    print(json.dumps(report, indent=2))


if __name__ == "__main__":
    main()
