"""Heat map of f(t, x) − νÛ(x) from surface.bin / surface.json.

usage: python docs/plot_surface.py out/fig1-ctmc [out.png]
"""
import csv
import json
import sys

import matplotlib.pyplot as plt
import numpy as np


def main(run, target=None):
    h = json.load(open(f"{run}/surface.json"))
    f = np.fromfile(f"{run}/surface.bin", dtype="<f8").reshape(h["rows"], h["cols"])
    with open(f"{run}/potentials.csv") as fh:
        nu = np.array([float(r["nu_potential"]) for r in csv.DictReader(fh)])
    g = h["grid"]
    gap = np.maximum(f - nu[None, :], 1e-16)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    im = ax.imshow(np.log10(gap).T, origin="lower", aspect="auto",
                   extent=[0, h["dt"] * h["n_steps"], g["x_min"], g["x_max"]])
    fig.colorbar(im, label="log10(f − νÛ)")
    ax.set(xlabel="t", ylabel="x", title="distance to the obstacle")
    fig.tight_layout()
    if target:
        fig.savefig(target, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main(*sys.argv[1:])
