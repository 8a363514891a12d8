#!/usr/bin/env python3
"""Plot a sweep directory written by `trmoa_cli sweep`.

Reads summary.csv and draws one panel per swept parameter: mean total regret
per algorithm, with the excessive/unsatisfied split as a stacked bar for the
first parameter that varies. Parameters held fixed across the sweep are skipped.
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

PARAMS = ["alpha", "beta", "delta", "gamma", "epsilon", "omega"]


def varying(summary: pd.DataFrame) -> list[str]:
    return [p for p in PARAMS if summary[p].nunique() > 1]


def plot_total(ax, summary: pd.DataFrame, param: str) -> None:
    for algo, g in summary.groupby("algorithm", sort=False):
        g = g.groupby(param, as_index=False)[["total_mean", "total_stddev"]].mean()
        ax.errorbar(g[param], g["total_mean"], yerr=g["total_stddev"], marker="o",
                    capsize=3, label=algo)
    ax.set_xlabel(param)
    ax.set_ylabel("total regret")
    ax.legend()


def plot_split(ax, summary: pd.DataFrame, param: str) -> None:
    algos = list(dict.fromkeys(summary["algorithm"]))
    values = sorted(summary[param].unique())
    width = 0.8 / len(algos)
    for k, algo in enumerate(algos):
        g = (summary[summary["algorithm"] == algo]
             .groupby(param)[["excessive_mean", "unsatisfied_mean"]].mean()
             .reindex(values))
        xs = [i + k * width for i in range(len(values))]
        ax.bar(xs, g["excessive_mean"], width, label=f"{algo} excessive")
        ax.bar(xs, g["unsatisfied_mean"], width, bottom=g["excessive_mean"],
               label=f"{algo} unsatisfied", hatch="//", alpha=0.6)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(values))])
    ax.set_xticklabels([f"{v:g}" for v in values])
    ax.set_xlabel(param)
    ax.set_ylabel("regret")
    ax.legend(fontsize="small", ncol=2)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("sweep_dir", type=Path)
    ap.add_argument("--out", type=Path, help="PNG path; default <sweep_dir>/plots.png")
    args = ap.parse_args()

    summary = pd.read_csv(args.sweep_dir / "summary.csv")
    params = varying(summary) or ["alpha"]
    fig, axes = plt.subplots(1, len(params) + 1, figsize=(5 * (len(params) + 1), 4),
                             squeeze=False)
    for ax, p in zip(axes[0], params):
        plot_total(ax, summary, p)
    plot_split(axes[0][-1], summary, params[0])
    fig.tight_layout()
    out = args.out or args.sweep_dir / "plots.png"
    fig.savefig(out, dpi=120)
    print(out)


if __name__ == "__main__":
    main()
