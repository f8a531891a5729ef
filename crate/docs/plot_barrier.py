"""Barrier, potentials and stopped-value QQ plot for a 1-d run directory.

usage: python docs/plot_barrier.py out/fig4-stable [out.png]
"""
import csv
import json
import sys

import matplotlib.pyplot as plt


def read(path):
    with open(path) as f:
        return list(csv.DictReader(f))


def num(s):
    return float("inf") if s == "inf" else float(s)


def main(run, target=None):
    barrier = read(f"{run}/barrier.csv")
    pots = read(f"{run}/potentials.csv")
    stats = json.load(open(f"{run}/stats.json"))
    samples = [r for r in read(f"{run}/samples.csv") if r["hit"] == "1"]

    fig, ax = plt.subplots(1, 3, figsize=(15, 4.5))
    pts = [(num(r["entry_time"]), float(r["x"])) for r in barrier]
    fin = [(t, x) for t, x in pts if t < float("inf")]
    horizon = stats["dp"]["horizon"]
    ax[0].scatter([t for t, _ in fin], [x for _, x in fin], s=2)
    for t, x in fin:
        ax[0].plot([t, horizon], [x, x], lw=0.3, color="C0")
    ax[0].set(xlabel="t", ylabel="x", title="barrier (shaded: stopping region)")

    xs = [float(r["x"]) for r in pots]
    ax[1].plot(xs, [num(r["mu_potential"]) for r in pots], label="μÛ")
    ax[1].plot(xs, [num(r["nu_potential"]) for r in pots], label="νÛ")
    ax[1].legend()
    ax[1].set(xlabel="x", title="potentials")

    q = stats["simulation"]["quantile_table"]
    ax[2].plot([r["target"] for r in q], [r["empirical"] for r in q], "o")
    lo, hi = q[0]["target"], q[-1]["target"]
    ax[2].plot([lo, hi], [lo, hi], "k--", lw=0.8)
    ax[2].set(xlabel="target quantile", ylabel="empirical quantile",
              title=f"stopped values (n = {len(samples)})")
    fig.tight_layout()
    if target:
        fig.savefig(target, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main(*sys.argv[1:])
