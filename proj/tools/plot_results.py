#!/usr/bin/env python3
"""Render learning curves, fits and mode-activation stems from a reproduce
output directory (CSV files next to manifest.json)."""

import argparse
import csv
import json
import os
import sys

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit("matplotlib is required: pip install matplotlib")


def read_csv(path):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    return rows


def fnum(s, default=float("nan")):
    try:
        return float(s)
    except (TypeError, ValueError):
        return default


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("run_dir", help="directory containing manifest.json")
    ap.add_argument("--out", default=None, help="output image directory")
    args = ap.parse_args()
    out_dir = args.out or args.run_dir
    os.makedirs(out_dir, exist_ok=True)

    with open(os.path.join(args.run_dir, "manifest.json")) as f:
        manifest = json.load(f)
    models = [m["name"] for m in manifest["models"]]

    # learning curves
    fig, ax = plt.subplots(figsize=(7, 4))
    for name in models:
        rows = read_csv(os.path.join(args.run_dir, f"trace_{name}.csv"))
        it = [int(r["iteration"]) for r in rows if r["rel_l2"]]
        rel = [fnum(r["rel_l2"]) for r in rows if r["rel_l2"]]
        if it:
            ax.semilogy(it, rel, label=name)
    ax.set_xlabel("iteration")
    ax.set_ylabel("relative L2 error")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "learning_curves.png"), dpi=150)

    # regression fits over the data
    fig, ax = plt.subplots(figsize=(9, 4))
    first = True
    for name in models:
        rows = read_csv(os.path.join(args.run_dir, f"pred_{name}.csv"))
        theta = [fnum(r["theta"]) for r in rows]
        if first:
            ax.plot(theta, [fnum(r["y"]) for r in rows], ".", ms=1, color="0.8", label="noisy")
            if "y_clean" in rows[0]:
                ax.plot(theta, [fnum(r["y_clean"]) for r in rows], "k-", lw=0.8, label="clean")
            first = False
        ax.plot(theta, [fnum(r["pred"]) for r in rows], lw=0.8, label=name)
    ax.set_xlim(-0.2, 0.2)
    ax.set_xlabel("theta")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "fits.png"), dpi=150)

    # mode activation stems
    fig, axes = plt.subplots(len(models), 1, figsize=(7, 2.2 * len(models)), squeeze=False)
    for ax, name in zip(axes[:, 0], models):
        rows = read_csv(os.path.join(args.run_dir, f"weights_{name}.csv"))
        freq = [int(r["frequency"]) * (1 if r["kind"] != "s" else -1) for r in rows]
        val = [fnum(r["value"]) for r in rows]
        ax.stem(freq, val, markerfmt=" ", basefmt=" ")
        ax.set_ylabel(name, fontsize=8)
    axes[-1, 0].set_xlabel("frequency (negative axis: sine modes)")
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "weight_distribution.png"), dpi=150)

    print(f"wrote plots to {out_dir}")


if __name__ == "__main__":
    main()
