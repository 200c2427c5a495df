"""Render band diagrams and stability charts from solver CSV output.

The input contract is the documented CSV schema of the band engine: one
row per (sample, band) with columns path_parameter, alpha_x, alpha_y,
band_index, re_omega, im_omega, ep_condition, regime; stability charts
use columns a, q, re_nu, im_nu.  Rendering is deterministic: fixed
styles, no timestamps, metadata stripped from the image files.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "plotkit"
import matplotlib.pyplot as plt
import numpy as np

__all__ = ["PlotSpec", "MissingColumn", "EmptyInput", "render", "break_wraps"]

PANEL_KINDS = ("bands-re", "bands-im", "ep-cond", "mathieu-chart")

_REQUIRED = {
    "bands-re": ("path_parameter", "band_index", "re_omega", "im_omega"),
    "bands-im": ("path_parameter", "band_index", "im_omega"),
    "ep-cond": ("path_parameter", "band_index", "re_omega", "ep_condition"),
    "mathieu-chart": ("a", "q", "re_nu", "im_nu"),
}


class MissingColumn(Exception):
    """A required CSV column is absent."""


class EmptyInput(Exception):
    """The CSV carries a header but no data rows."""


@dataclass(frozen=True)
class PlotSpec:
    """What to draw: input CSV, panel kind, ticks and output path.

    ``ticks`` maps symmetry-point labels to path-parameter positions; all
    positions must lie inside the sampled parameter range.  ``omega`` is
    the folding frequency used to break wrapped band lines; when absent,
    half the visible spread of the real parts is used.
    """

    input_csv: Path
    kind: str
    output: Path
    ticks: dict = field(default_factory=dict)
    omega: float | None = None

    def __post_init__(self):
        if self.kind not in PANEL_KINDS:
            raise ValueError(f"unknown panel kind {self.kind!r}; expected one of {PANEL_KINDS}")


def _read_csv(path: Path, required) -> dict:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise MissingColumn(f"column {column!r} missing from {path}")
        rows = list(reader)
    if not rows:
        raise EmptyInput(f"{path} has no data rows")
    data = {}
    for column in header:
        values = [row[column] for row in rows]
        try:
            data[column] = np.array([float(v) for v in values])
        except ValueError:
            data[column] = np.array(values)
    return data


def break_wraps(x: np.ndarray, y: np.ndarray, threshold: float):
    """Insert NaN separators where consecutive y values jump by more than
    ``threshold``, so folded bands are not joined across the zone edge."""
    out_x, out_y = [x[0]], [y[0]]
    for k in range(1, len(x)):
        if abs(y[k] - y[k - 1]) > threshold:
            out_x.append(np.nan)
            out_y.append(np.nan)
        out_x.append(x[k])
        out_y.append(y[k])
    return np.array(out_x), np.array(out_y)


def _band_series(data: dict, value_column: str):
    bands = np.unique(data["band_index"].astype(int))
    for band in bands:
        mask = data["band_index"].astype(int) == band
        order = np.argsort(data["path_parameter"][mask], kind="stable")
        yield band, data["path_parameter"][mask][order], data[value_column][mask][order]


def _wrap_threshold(spec: PlotSpec, values: np.ndarray) -> float:
    if spec.omega is not None:
        return spec.omega / 2.0
    spread = float(np.max(values) - np.min(values))
    return spread / 2.0 if spread > 0 else np.inf


def _apply_ticks(ax, spec: PlotSpec, params: np.ndarray) -> None:
    if not spec.ticks:
        return
    lo, hi = float(np.min(params)), float(np.max(params))
    span = hi - lo
    for label, pos in spec.ticks.items():
        if not lo - 1e-9 * max(span, 1.0) <= pos <= hi + 1e-9 * max(span, 1.0):
            raise ValueError(f"tick {label!r} at {pos} outside the path range [{lo}, {hi}]")
    positions = list(spec.ticks.values())
    ax.set_xticks(positions)
    ax.set_xticklabels(list(spec.ticks.keys()))


def _draw_band_panel(ax, spec: PlotSpec, data: dict, column: str, ylabel: str,
                     log: bool = False) -> None:
    threshold = _wrap_threshold(spec, data[column]) if not log else np.inf
    for band, x, y in _band_series(data, column):
        if log:
            ax.semilogy(x, np.maximum(y, 1.0), lw=0.9, color="C0")
        else:
            bx, by = break_wraps(x, y, threshold)
            ax.plot(bx, by, lw=0.9, color=f"C{band % 10}")
    ax.set_ylabel(ylabel)
    _apply_ticks(ax, spec, data["path_parameter"])
    ax.grid(True, alpha=0.25, lw=0.4)


def _render_bands(spec: PlotSpec, data: dict) -> int:
    if spec.kind == "bands-im":
        fig, axes = plt.subplots(1, 1, figsize=(4.2, 3.2), constrained_layout=True)
        _draw_band_panel(axes, spec, data, "im_omega", "Im $\\omega$")
        panels = 1
    elif spec.kind == "bands-re":
        fig, axes = plt.subplots(2, 1, figsize=(4.2, 5.4), sharex=True, constrained_layout=True)
        _draw_band_panel(axes[0], spec, data, "re_omega", "Re $\\omega$")
        _draw_band_panel(axes[1], spec, data, "im_omega", "Im $\\omega$")
        panels = 2
    else:  # ep-cond
        fig, axes = plt.subplots(2, 1, figsize=(4.2, 5.4), sharex=True, constrained_layout=True)
        _draw_band_panel(axes[0], spec, data, "re_omega", "Re $\\omega$")
        _draw_band_panel(axes[1], spec, data, "ep_condition", "eigenvector condition", log=True)
        panels = 2
    fig.axes[-1].set_xlabel("path parameter")
    _save(fig, spec)
    return panels


def _render_mathieu(spec: PlotSpec, data: dict) -> int:
    a_values = np.unique(data["a"])
    q_values = np.unique(data["q"])
    re = np.full((len(q_values), len(a_values)), np.nan)
    im = np.full_like(re, np.nan)
    a_index = {v: i for i, v in enumerate(a_values)}
    q_index = {v: i for i, v in enumerate(q_values)}
    for a, q, r, i in zip(data["a"], data["q"], data["re_nu"], data["im_nu"]):
        re[q_index[q], a_index[a]] = r
        im[q_index[q], a_index[a]] = abs(i)
    extent = (a_values[0], a_values[-1], q_values[0], q_values[-1])
    fig, axes = plt.subplots(1, 2, figsize=(7.4, 3.2), constrained_layout=True)
    for ax, grid, title in ((axes[0], re, "Re $\\nu$"), (axes[1], im, "|Im $\\nu$|")):
        image = ax.imshow(grid, origin="lower", extent=extent, aspect="auto", cmap="viridis")
        fig.colorbar(image, ax=ax, shrink=0.85)
        ax.set_xlabel("a")
        ax.set_ylabel("q")
        ax.set_title(title)
    _save(fig, spec)
    return 2


def _save(fig, spec: PlotSpec) -> None:
    suffix = spec.output.suffix.lower()
    metadata = {"Software": None} if suffix == ".png" else {"Date": None, "Creator": None}
    fig.savefig(spec.output, dpi=150, metadata=metadata)
    plt.close(fig)


def render(spec: PlotSpec) -> dict:
    """Render the figure described by ``spec``; returns a small summary."""
    data = _read_csv(spec.input_csv, _REQUIRED[spec.kind])
    if spec.kind == "mathieu-chart":
        panels = _render_mathieu(spec, data)
    else:
        panels = _render_bands(spec, data)
    return {"output": str(spec.output), "panels": panels, "rows": len(data["path_parameter" if spec.kind != "mathieu-chart" else "a"])}
