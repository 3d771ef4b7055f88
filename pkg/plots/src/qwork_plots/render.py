"""Render figures from qwork CSV outputs.

This package never recomputes physics: it reads the delimited files the
engine writes, checks their column schema, and draws.  Figures are saved
in both vector (pdf) and raster (png) form using the checked-in style
file, with no embedded timestamps, so byte-identical inputs render
byte-identical images.
"""

from __future__ import annotations

import csv
import math
import os
import sys
from dataclasses import dataclass

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE_FILE = os.path.join(os.path.dirname(__file__), "qwork.mplstyle")


class SchemaError(ValueError):
    """Input columns do not match the declared figure kind."""


@dataclass
class Table:
    header: list[str]
    columns: dict[str, np.ndarray]
    comments: dict[str, str]

    def __len__(self):
        return next(iter(self.columns.values())).size if self.columns else 0


def read_table(path):
    """Read a qwork CSV: '#' comments (key = value remembered), header, rows."""
    comments = {}
    rows = []
    header = None
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("# ")
                if "=" in body:
                    key, val = body.split("=", 1)
                    comments[key.strip()] = val.strip()
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                continue
            rows.append(line.split(","))
    if header is None or not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.array(rows, dtype=float)
    columns = {name: data[:, i] for i, name in enumerate(header)}
    return Table(header=header, columns=columns, comments=comments)


def require_columns(table, expected, path):
    if table.header != list(expected):
        raise SchemaError(
            f"{path}: expected columns {list(expected)}, found {table.header}")


def _save(fig, out_path):
    """Write <stem>.pdf and <stem>.png next to the requested path."""
    stem, _ = os.path.splitext(out_path)
    written = []
    for ext, meta in ((".pdf", {"CreationDate": None}), (".png", {})):
        target = stem + ext
        fig.savefig(target, metadata=meta)
        written.append(target)
    plt.close(fig)
    return written


def render_workdist(in_path, out_path):
    """Stem plot of an atom file (W, p) or line plot of a density file
    (W, p_density); the atom at W = 0 is drawn distinctly."""
    table = read_table(in_path)
    if table.header == ["W", "p"]:
        kind = "atoms"
    elif table.header == ["W", "p_density"]:
        kind = "density"
    else:
        raise SchemaError(
            f"{in_path}: expected columns ['W', 'p'] or ['W', 'p_density'], "
            f"found {table.header}")

    with plt.style.context(STYLE_FILE):
        fig, ax = plt.subplots()
        w = table.columns["W"]
        if kind == "atoms":
            p = table.columns["p"]
            at_zero = np.isclose(w, 0.0, atol=1e-12)
            if np.any(~at_zero):
                ax.stem(w[~at_zero], p[~at_zero], basefmt=" ")
            if np.any(at_zero):
                ax.stem(w[at_zero], p[at_zero], linefmt="C3-",
                        markerfmt="C3s", basefmt=" ",
                        label="atom at W = 0")
                ax.legend()
            ax.set_ylabel("p")
        else:
            ax.plot(w, table.columns["p_density"])
            atom = float(table.comments.get("atom_at_zero", "0") or 0.0)
            if atom > 0.0:
                ax.annotate(f"atom at 0: {atom:.4g}", xy=(0.0, 0.0),
                            xytext=(0.05, 0.9), textcoords="axes fraction",
                            arrowprops={"arrowstyle": "->"})
            ax.set_ylabel("p density")
        ax.set_xlabel("W")
        ax.set_title("work distribution")
        return _save(fig, out_path)


@dataclass
class CrooksResult:
    paths: list[str]
    n_points: int
    n_skipped: int
    max_deviation: float
    marker_radius_data: float


def render_crooks(in_path, out_path, beta=None, floor=1e-14):
    """Detailed-balance plot: ln(p(W)/p(-W)) against beta W with the y = x
    line; atoms without a resolvable mirror are omitted with a note.

    Returns geometry numbers so callers can assert that the points sit on
    the identity line within the plotted marker radius.
    """
    table = read_table(in_path)
    require_columns(table, ["W", "p"], in_path)
    if beta is None:
        if "beta" not in table.comments:
            raise SchemaError(f"{in_path}: no beta given and none recorded "
                              "in the file comments")
        beta = float(table.comments["beta"])

    w = table.columns["W"]
    p = table.columns["p"]
    order = np.argsort(w)
    w, p = w[order], p[order]
    xs, ys = [], []
    skipped = 0
    scale = max(1.0, float(np.max(np.abs(w))))
    for wi, pi in zip(w, p):
        if wi <= 0.0 or pi < floor:
            continue
        j = np.searchsorted(w, -wi)
        hit = None
        for k in (j - 1, j, j + 1):
            if 0 <= k < w.size and abs(w[k] + wi) <= 1e-9 * scale:
                hit = k
                break
        if hit is None or p[hit] < floor:
            skipped += 1
            continue
        xs.append(beta * wi)
        ys.append(math.log(pi / p[hit]))
    if skipped:
        print(f"note: {skipped} atoms without a resolvable mirror omitted",
              file=sys.stderr)
    xs = np.array(xs)
    ys = np.array(ys)

    with plt.style.context(STYLE_FILE):
        fig, ax = plt.subplots()
        marker_size = 36.0
        if xs.size:
            lim = 1.1 * max(float(np.max(xs)), float(np.max(np.abs(ys))), 1e-12)
        else:
            lim = 1.0
        ax.plot([0, lim], [0, lim], "k--", lw=1, label="y = x")
        ax.scatter(xs, ys, s=marker_size, zorder=3, label="atom pairs")
        ax.set_xlabel(r"beta W")
        ax.set_ylabel("ln p(W) / p(-W)")
        ax.set_title("detailed balance")
        ax.legend()
        ax.set_xlim(0, lim)
        ax.set_ylim(0, lim)
        # marker radius expressed in data units of the drawn axes
        fig.canvas.draw()
        bbox = ax.get_window_extent()
        radius_pts = math.sqrt(marker_size) / 2.0
        radius_px = radius_pts * fig.dpi / 72.0
        marker_radius_data = radius_px * lim / min(bbox.width, bbox.height)
        paths = _save(fig, out_path)

    max_dev = float(np.max(np.abs(ys - xs))) if xs.size else 0.0
    return CrooksResult(paths=paths, n_points=int(xs.size),
                        n_skipped=skipped, max_deviation=max_dev,
                        marker_radius_data=marker_radius_data)


SWEEP_COLUMNS = ["mean", "second_moment", "variance", "fdr_ratio",
                 "jarzynski_error"]


def render_sweep(in_path, out_path, columns=None, fdr_reference_omega=None):
    """Line plots of sweep columns against the swept axis.

    When fdr_ratio is drawn over a beta axis and ``fdr_reference_omega``
    is given, the reference curve tanh(beta omega/2)/(beta omega/2) is
    overlaid for visual comparison (drawn from the axis values only, not
    recomputed from the data).
    """
    table = read_table(in_path)
    if len(table.header) < 2 or table.header[1:] != SWEEP_COLUMNS:
        raise SchemaError(
            f"{in_path}: expected columns [axis] + {SWEEP_COLUMNS}, "
            f"found {table.header}")
    axis = table.header[0]
    wanted = list(columns) if columns else SWEEP_COLUMNS
    unknown = [c for c in wanted if c not in SWEEP_COLUMNS]
    if unknown:
        raise SchemaError(f"{in_path}: unknown sweep columns {unknown}")

    x = table.columns[axis]
    order = np.argsort(x)
    with plt.style.context(STYLE_FILE):
        fig, ax = plt.subplots()
        for name in wanted:
            ax.plot(x[order], table.columns[name][order], marker="o",
                    ms=3, label=name)
        if ("fdr_ratio" in wanted and axis == "beta"
                and fdr_reference_omega is not None):
            xx = np.linspace(float(np.min(x)), float(np.max(x)), 200)
            arg = 0.5 * xx * fdr_reference_omega
            ax.plot(xx, np.tanh(arg) / arg, "k--", lw=1,
                    label="tanh(x)/x reference")
        ax.set_xlabel(axis)
        ax.set_title(f"sweep over {axis}")
        ax.legend()
        return _save(fig, out_path)
