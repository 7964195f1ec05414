#!/usr/bin/env python3
"""Plots the CSV outputs of a radflow run directory. Usage: python3 plot.py [run-dir]"""
import csv
import glob
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

root = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))


def read(path):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) for r in rows] for k in rows[0]} if rows else {}


levels = sorted(glob.glob(os.path.join(root, "level_*")), key=lambda p: int(p.rsplit("_", 1)[1]))
if not levels and os.path.exists(os.path.join(root, "diagnostics.csv")):
    levels = [root]

if levels:
    keys = ["energy", "mass", "bd_entropy", "sqrt_rho_h1", "log_moment", "diss_exact"]
    fig, axes = plt.subplots(2, 3, figsize=(13, 7))
    for d in levels:
        data = read(os.path.join(d, "diagnostics.csv"))
        for ax, k in zip(axes.flat, keys):
            ax.plot(data["t"], data[k], label=os.path.basename(d))
    for ax, k in zip(axes.flat, keys):
        ax.set_title(k)
        ax.set_xlabel("t")
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(os.path.join(root, "diagnostics.png"), dpi=120)

    fig, ax = plt.subplots(figsize=(6, 4))
    for d in levels:
        snaps = sorted(glob.glob(os.path.join(d, "snapshots", "snap_*.txt")))
        if not snaps:
            continue
        with open(snaps[-1]) as f:
            lines = [l.split() for l in f if l.strip() and not l.startswith("#")]
        cells = lines[lines.index(["cells"]) + 1:]
        ax.plot([float(c[0]) for c in cells], [float(c[1]) for c in cells], label=os.path.basename(d))
    ax.set_xlabel("r")
    ax.set_ylabel("rho (final)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(os.path.join(root, "density.png"), dpi=120)

path = os.path.join(root, "distances.csv")
if os.path.exists(path):
    data = read(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    for k in ["rho_l1_max", "momentum_l2_lbeta", "sqrt_rho_u_l2"]:
        ax.semilogy(data["fine"], data[k], "o-", label=k)
    ax.set_xlabel("finer level")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(os.path.join(root, "distances.png"), dpi=120)

path = os.path.join(root, "residuals.csv")
if os.path.exists(path):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    for tid in sorted({r["test_id"] for r in rows}):
        sel = [r for r in rows if r["test_id"] == tid]
        lv = [int(r["level"]) for r in sel]
        for ax, k in zip(axes, ["mass_residual", "momentum_residual"]):
            ax.semilogy(lv, [abs(float(r[k])) for r in sel], "o-", label=tid)
    for ax, k in zip(axes, ["mass_residual", "momentum_residual"]):
        ax.set_title("|" + k + "|")
        ax.set_xlabel("level")
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(os.path.join(root, "residuals.png"), dpi=120)
