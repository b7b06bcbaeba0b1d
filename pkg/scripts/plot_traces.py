"""Plot error-vs-iteration curves from a ``<scenario>_traces.csv`` file.

    python scripts/plot_traces.py results/iiwa-xz_traces.csv -o iiwa-xz.png

Deterministic starts are drawn solid; random-perturbation runs are drawn
thin, one line per seed, in the colour of their method. Needs matplotlib
(``pip install .[plot]``).
"""

from __future__ import annotations

import argparse
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from aiik.experiments import read_traces  # noqa: E402


def plot(path: Path, out: Path, horizon: int) -> None:
    runs = defaultdict(list)
    for row in read_traces(path):
        if row["iter"] <= horizon:
            runs[(row["method"], row["seed"])].append(row)
    colours = {}
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for (method, seed), rows in sorted(runs.items(), key=lambda kv: (kv[0][0], -1 if kv[0][1] is None else kv[0][1])):
        colour = colours.setdefault(method, f"C{len(colours)}")
        it = [r["iter"] for r in rows]
        # clip exact zeros so they show on the log axis
        err = [max(r["error_norm"], 1e-17) for r in rows]
        label = method if seed in (None, 0) else None
        ax.semilogy(it, err, color=colour, lw=0.6 if seed is not None else 1.8, alpha=0.6 if seed is not None else 1.0, label=label)
    ax.set_xlabel("iteration")
    ax.set_ylabel("error norm")
    ax.set_title(path.stem.removesuffix("_traces"))
    ax.grid(True, which="both", lw=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("traces", type=Path)
    p.add_argument("-o", "--output", type=Path)
    p.add_argument("--horizon", type=int, default=15)
    args = p.parse_args()
    out = args.output or args.traces.with_suffix(".png")
    plot(args.traces, out, args.horizon)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
