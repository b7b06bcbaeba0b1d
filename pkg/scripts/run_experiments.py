"""Run every built-in scenario and write CSV traces plus a summary.

    python scripts/run_experiments.py --out results

Equivalent to ``ik-exp run <id>`` for each scenario, but collects all
scenarios into one ``summary.csv``.
"""

from __future__ import annotations

import argparse
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from aiik import experiments as ex
from aiik.solver import Status

log = logging.getLogger("run_experiments")


@dataclass
class RunConfig:
    out: Path = Path("results")
    scenarios: list[str] = field(default_factory=lambda: [s.id for s in ex.builtin_scenarios()])
    seeds_count: int | None = None
    max_iters: int | None = None


def run(cfg: RunConfig) -> list[ex.RunRecord]:
    records = []
    for sid in cfg.scenarios:
        s = ex.with_overrides(ex.get_scenario(sid), seeds_count=cfg.seeds_count, max_iters=cfg.max_iters)
        t0 = time.perf_counter()
        recs = ex.run_scenario(s)
        log.info("%s: %d runs in %.1f s", sid, len(recs), time.perf_counter() - t0)
        records += recs
    ex.emit_traces(records, cfg.out, cfg.scenarios)
    return records


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=RunConfig.out)
    p.add_argument("--scenario", action="append", help="scenario id (repeatable; default all)")
    p.add_argument("--seeds-count", type=int)
    p.add_argument("--max-iters", type=int)
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    cfg = RunConfig(out=args.out, seeds_count=args.seeds_count, max_iters=args.max_iters)
    if args.scenario:
        cfg.scenarios = args.scenario
    records = run(cfg)
    by_method: dict[tuple[str, str], list[Status]] = {}
    for r in records:
        by_method.setdefault((r.scenario, r.method), []).append(r.outcome.status)
    for (sid, method), statuses in by_method.items():
        counts = {st.value: statuses.count(st) for st in Status if st in statuses}
        print(f"{sid:14s} {method:22s} " + ", ".join(f"{k} {v}" for k, v in counts.items()))
    print(f"CSV files in {cfg.out}/")


if __name__ == "__main__":
    main()
