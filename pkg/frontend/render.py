#!/usr/bin/env python3
"""Render figure-style plots from the experiment CSV outputs.

Usage:
    python render.py --csv results.csv --kind converge-A --out figA.png

Kinds: converge-A, converge-W, sweep-gamma, contour, hist. The CSV schema is
the one written by the computation CLI; `hist` instead takes a states dump
(step,x1,...). Rendering is a pure function of the CSV content: the plotted
series are extracted first (and are unit-testable), then drawn.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

RESULT_COLUMNS = ["experiment", "system", "gamma1", "gamma2", "N", "A", "W", "seed",
                  "param", "SC", "UC", "deriv", "rho_phi", "fd_deriv", "fd_se",
                  "wall_ms"]
SCHEMA_VERSION = 1
KINDS = ("converge-A", "converge-W", "sweep-gamma", "contour", "hist")


class SchemaError(RuntimeError):
    pass


def _float(text):
    return None if text == "" else float(text)


def read_result_rows(path: Path) -> list[dict]:
    """Parse a results CSV, failing loudly on schema problems."""
    sidecar = path.with_suffix(".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        version = meta.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaError(f"schema_version {version} != {SCHEMA_VERSION}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty CSV: no header row") from None
        missing = [col for col in RESULT_COLUMNS if col not in header]
        if missing:
            raise SchemaError(f"missing column(s): {', '.join(missing)}")
        idx = {col: header.index(col) for col in RESULT_COLUMNS}
        rows = []
        for raw in reader:
            rows.append({
                "experiment": raw[idx["experiment"]],
                "system": raw[idx["system"]],
                "gamma1": float(raw[idx["gamma1"]]),
                "gamma2": _float(raw[idx["gamma2"]]),
                "A": int(raw[idx["A"]]),
                "W": int(raw[idx["W"]]),
                "param": raw[idx["param"]],
                "deriv": _float(raw[idx["deriv"]]),
                "rho_phi": _float(raw[idx["rho_phi"]]),
                "fd_deriv": _float(raw[idx["fd_deriv"]]),
                "fd_se": _float(raw[idx["fd_se"]]),
            })
    if not rows:
        raise SchemaError("empty CSV: no data rows")
    return rows


def _std(values):
    n = len(values)
    mean = sum(values) / n
    return math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1)) if n > 1 else 0.0


def convergence_series(rows: list[dict], key: str):
    """Scatter points and per-group standard deviations for converge plots.

    ``key`` is 'A' or 'W'. Returns (points, groups) where points is the exact
    (key value, derivative) list from the CSV and groups maps key value to
    the sample standard deviation.
    """
    points = [(row[key], row["deriv"]) for row in rows if row["deriv"] is not None]
    if not points:
        raise SchemaError("no derivative rows to plot")
    grouped = defaultdict(list)
    for val, deriv in points:
        grouped[val].append(deriv)
    stds = {val: _std(vals) for val, vals in sorted(grouped.items())}
    return points, stds


def render_convergence(rows, key, reference, out_path):
    points, stds = convergence_series(rows, key)
    fig, (left, right) = plt.subplots(1, 2, figsize=(9, 3.6))
    left.scatter([p[0] for p in points], [p[1] for p in points], s=8, alpha=0.5,
                 color="k")
    left.set_xscale("log")
    left.set_xlabel(key)
    left.set_ylabel("derivative")

    xs = sorted(stds)
    right.loglog(xs, [stds[x] for x in xs], "ko-", label="sample std")
    right.loglog(xs, [reference(x) for x in xs], "k--", label="reference")
    right.set_xlabel(key)
    right.set_ylabel("std of derivative")
    right.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return points, stds


def sweep_series(rows: list[dict]):
    """Per-experiment lists of (gamma, mean rho, mean derivative)."""
    grouped = defaultdict(lambda: defaultdict(list))
    for row in rows:
        if row["deriv"] is None:
            continue
        grouped[row["experiment"]][row["gamma1"]].append(
            (row["rho_phi"], row["deriv"]))
    if not grouped:
        raise SchemaError("no derivative rows to plot")
    out = {}
    for exp, by_gamma in grouped.items():
        series = []
        for gamma in sorted(by_gamma):
            vals = by_gamma[gamma]
            rho = sum(v[0] for v in vals) / len(vals)
            deriv = sum(v[1] for v in vals) / len(vals)
            series.append((gamma, rho, deriv))
        out[exp] = series
    return out


def render_sweep(rows, out_path):
    groups = sweep_series(rows)
    fig, axes = plt.subplots(1, len(groups), figsize=(4.2 * len(groups), 3.4),
                             squeeze=False)
    for ax, (exp, series) in zip(axes[0], sorted(groups.items())):
        gammas = [s[0] for s in series]
        rhos = [s[1] for s in series]
        ax.plot(gammas, rhos, "ko-", ms=4)
        span = (max(gammas) - min(gammas)) / max(len(gammas) - 1, 1) * 0.8 or 0.01
        for gamma, rho, deriv in series:
            ax.plot([gamma - span / 2, gamma + span / 2],
                    [rho - deriv * span / 2, rho + deriv * span / 2],
                    color="grey", lw=1)
        ax.set_title(exp, fontsize=9)
        ax.set_xlabel("gamma")
        ax.set_ylabel("objective average")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return groups


def contour_series(rows: list[dict]):
    """Level values and mean gradients per (gamma1, gamma2) grid point."""
    levels = defaultdict(list)
    grads = defaultdict(lambda: defaultdict(list))
    for row in rows:
        point = (row["gamma1"], row["gamma2"])
        if row["param"] == "rho":
            levels[point].append(row["rho_phi"])
        elif row["param"] in ("gamma1", "gamma2") and row["deriv"] is not None:
            grads[point][row["param"]].append(row["deriv"])
    if not grads:
        raise SchemaError("no gradient rows to plot")
    if not levels:
        # fall back to the rho_phi carried by the gradient rows
        for row in rows:
            if row["param"] == "gamma1" and row["rho_phi"] is not None:
                levels[(row["gamma1"], row["gamma2"])].append(row["rho_phi"])
    points = {}
    for point, comps in grads.items():
        g1 = sum(comps["gamma1"]) / len(comps["gamma1"])
        g2 = sum(comps["gamma2"]) / len(comps["gamma2"])
        rho = sum(levels[point]) / len(levels[point])
        points[point] = (rho, g1, g2)
    return points


def render_contour(rows, out_path, arrow_scale=1.0 / 15.0):
    points = contour_series(rows)
    xs = sorted({p[0] for p in points})
    ys = sorted({p[1] for p in points})
    fig, ax = plt.subplots(figsize=(4.6, 4.0))
    if len(xs) > 1 and len(ys) > 1:
        grid = [[points[(x, y)][0] for x in xs] for y in ys]
        ctr = ax.contourf(xs, ys, grid, levels=12, cmap="viridis")
        fig.colorbar(ctr, ax=ax)
    for (x, y), (rho, g1, g2) in points.items():
        ax.annotate("", xy=(x + arrow_scale * g1, y + arrow_scale * g2),
                    xytext=(x, y), arrowprops=dict(arrowstyle="->", color="red"))
    ax.set_xlabel("gamma1")
    ax.set_ylabel("gamma2")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return points


def read_states_dump(path: Path) -> tuple[list[str], list[list[float]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty CSV: no header row") from None
        if not header or header[0] != "step" or len(header) < 2:
            raise SchemaError("missing column(s): step, x1")
        data = [[float(v) for v in row[1:]] for row in reader]
    if not data:
        raise SchemaError("empty CSV: no data rows")
    return header[1:], data


def render_hist(path: Path, out_path, coord: int = 1, bins: int = 100):
    names, data = read_states_dump(path)
    if coord < 1 or coord > len(names):
        raise SchemaError(f"missing column(s): x{coord}")
    values = [row[coord - 1] for row in data]
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    ax.hist(values, bins=bins, density=True, color="0.4")
    ax.set_xlabel(names[coord - 1])
    ax.set_ylabel("density")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return values


def render(kind: str, csv_paths: list[Path], out_path: Path, coord: int = 1):
    """Dispatch one figure kind; returns the plotted data series."""
    if kind == "hist":
        return render_hist(csv_paths[0], out_path, coord=coord)
    rows = []
    for path in csv_paths:
        rows.extend(read_result_rows(path))
    if kind == "converge-A":
        return render_convergence(rows, "A", lambda a: a ** -0.5, out_path)
    if kind == "converge-W":
        return render_convergence(rows, "W", lambda w: 0.005 * w ** 0.5, out_path)
    if kind == "sweep-gamma":
        return render_sweep(rows, out_path)
    if kind == "contour":
        return render_contour(rows, out_path)
    raise SchemaError(f"unknown kind {kind!r}; choose from {KINDS}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="render.py", description=__doc__)
    parser.add_argument("--csv", action="append", required=True, type=Path)
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--coord", type=int, default=1,
                        help="1-based state coordinate for hist")
    args = parser.parse_args(argv)
    try:
        render(args.kind, args.csv, args.out, coord=args.coord)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"render.py: error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
