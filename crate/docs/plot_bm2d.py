"""Entry-time map and stopped positions for a 2-d disc run.

usage: python docs/plot_bm2d.py out/bm2d-demo [out.png]
"""
import csv
import sys

import matplotlib.pyplot as plt


def main(run, target=None):
    with open(f"{run}/barrier2d.csv") as f:
        rows = list(csv.DictReader(f))
    with open(f"{run}/samples.csv") as f:
        hits = [r for r in csv.DictReader(f) if r["hit"] == "1"]
    fin = [r for r in rows if r["entry_time"] != "inf"]
    fig, ax = plt.subplots(1, 2, figsize=(11, 5))
    sc = ax[0].scatter([float(r["x1"]) for r in fin], [float(r["x2"]) for r in fin],
                       c=[float(r["entry_time"]) for r in fin], s=6, cmap="viridis")
    fig.colorbar(sc, ax=ax[0], label="entry time")
    ax[0].set(title="barrier entry time", aspect="equal")
    ax[1].scatter([float(r["x1"]) for r in hits], [float(r["x2"]) for r in hits], s=1, alpha=0.4)
    ax[1].set(title=f"stopped positions (n = {len(hits)})", aspect="equal", xlim=(-1, 1), ylim=(-1, 1))
    fig.tight_layout()
    if target:
        fig.savefig(target, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main(*sys.argv[1:])
