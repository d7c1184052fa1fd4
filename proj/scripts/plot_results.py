#!/usr/bin/env python3
"""Plot the *.summary.csv files written by `gfse_cli reproduce`.

Usage: plot_results.py <figure output dir> [--out plot.png]

Budget curves are drawn against the trajectory budget (log axis), online
curves (cumulative mean return) against the episode; shaded bands are the
95% intervals of the plotted point (per-episode for online curves). Fixed
baselines without a budget or episode are drawn as horizontal lines.
"""

import argparse
import csv
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def load(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("figure_dir", type=pathlib.Path)
    ap.add_argument("--out", type=pathlib.Path)
    args = ap.parse_args()

    summaries = sorted(args.figure_dir.glob("*.summary.csv"))
    if not summaries:
        raise SystemExit(f"no *.summary.csv under {args.figure_dir}")

    fig, ax = plt.subplots(figsize=(7, 4.5))
    flat = []
    x_label = "budget"
    for path in summaries:
        rows = load(path)
        label = path.name[: -len(".summary.csv")]
        key = "episode" if rows[0]["episode"] else "budget" if rows[0]["budget"] else None
        if key is None:
            flat.append((label, float(rows[0]["mean"])))
            continue
        x_label = key
        xs = [int(r[key]) for r in rows]
        mean = [float(r["mean"]) for r in rows]
        ci = [float(r["ci95"]) for r in rows]
        if key == "episode":
            # The running mean of per-episode means is the seed-averaged
            # cumulative mean; bands stay per-episode.
            run = 0.0
            for i, m in enumerate(mean):
                run += m
                mean[i] = run / (i + 1)
        line, = ax.plot(xs, mean, marker="o" if key == "budget" else None, label=label)
        ax.fill_between(xs, [m - c for m, c in zip(mean, ci)], [m + c for m, c in zip(mean, ci)],
                        color=line.get_color(), alpha=0.2)
        if key == "budget":
            ax.set_xscale("log")
    for i, (label, value) in enumerate(flat, start=len(summaries) - len(flat)):
        ax.axhline(value, linestyle="--", linewidth=1, label=label, color=f"C{i % 10}")

    ax.set_xlabel("trajectory budget" if x_label == "budget" else "episode")
    ax.set_ylabel("mean return" if x_label == "budget" else "cumulative mean return")
    ax.set_title(args.figure_dir.name)
    ax.legend(fontsize=8)
    fig.tight_layout()
    out = args.out or args.figure_dir / f"{args.figure_dir.name}.png"
    fig.savefig(out, dpi=120)
    print(out)


if __name__ == "__main__":
    main()
