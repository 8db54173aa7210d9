"""Build convergence panels from benchmark trace CSVs.

The input contract is the file format of the benchmark harness and nothing
else: trace CSVs with the header

    k,value_evals,f_val,g_norm,step_norm,lyapunov_H,descent_ok

and a ``summary.json`` whose cells name their problem, dimension, noise
flag, method, and per-seed runs with CSV paths and the known optimal value.
One rendered panel per (problem, n, noise) group, one line per method,
cumulative function evaluations on x. The y column is either the best value
seen so far (default; the raw values are not monotone under momentum) or
the gap to the known optimum.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "CSV_HEADER",
    "METHOD_ORDER",
    "PanelSpec",
    "FigureSpec",
    "AllSeriesMissingError",
    "read_curve",
    "figure_spec_from_summaries",
    "render",
]

logger = logging.getLogger(__name__)

CSV_HEADER = "k,value_evals,f_val,g_norm,step_norm,lyapunov_H,descent_ok"

METHOD_ORDER = (
    "DF-fordif", "DF-cendif",
    "DFn-fordif", "DFn-cendif",
    "DFp-fordif", "DFp-cendif",
)

Y_MODES = ("best", "gap")


class AllSeriesMissingError(RuntimeError):
    """Raised when not a single series of the figure could be read."""


@dataclass(frozen=True)
class PanelSpec:
    """One panel: a problem cell and the trace file for each method."""

    problem: str
    n: int
    noise: bool
    series: dict[str, Path] = field(default_factory=dict)
    fstar: float | None = None

    @property
    def title(self) -> str:
        return f"{self.problem}{self.n} {'noisy' if self.noise else 'clean'}"


@dataclass(frozen=True)
class FigureSpec:
    cells: list[PanelSpec]
    y_mode: str = "best"
    log_y: bool = True

    def __post_init__(self) -> None:
        if self.y_mode not in Y_MODES:
            raise ValueError(f"y_mode must be one of {Y_MODES}")
        if self.y_mode == "gap":
            for cell in self.cells:
                if cell.fstar is None:
                    raise ValueError(
                        f"gap mode needs a known optimal value, none recorded "
                        f"for {cell.title}")


def read_curve(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative evaluations and objective values from one trace CSV.

    Raises ``ValueError`` for anything that does not parse against the
    documented schema; the caller decides whether that skips a series or
    aborts.
    """
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: not a trace CSV (unexpected header)")
    evals, f_vals = [], []
    for ln, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 7:
            raise ValueError(f"{path}:{ln}: expected 7 columns, got {len(parts)}")
        evals.append(int(parts[1]))
        f_vals.append(float(parts[2]))
    if not evals:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(evals, dtype=np.int64), np.asarray(f_vals, dtype=np.float64)


def _median_run(runs: list[dict]) -> dict:
    # The representative trace per cell: the run with the median final best
    # value (lower middle for even counts, unreached values last, seed as
    # the deterministic tie-break).
    def key(r):
        fb = r.get("final_best")
        return (fb is None, fb if fb is not None else 0.0, r.get("seed", 0))

    ordered = sorted(runs, key=key)
    return ordered[(len(ordered) - 1) // 2]


def figure_spec_from_summaries(
    summary_paths: list[str | Path],
    y_mode: str = "best",
) -> FigureSpec:
    """Panel layout from one or more ``summary.json`` files.

    A single benchmark matrix is entirely clean or entirely noisy, so the
    full eight-cell layout comes from passing both summaries. CSV paths are
    resolved relative to each summary's directory.
    """
    panels: dict[tuple, dict] = {}
    for spath in summary_paths:
        spath = Path(spath)
        summary = json.loads(spath.read_text())
        for cell in summary.get("cells", []):
            key = (cell["problem"], cell["n"], cell["noise"])
            panel = panels.setdefault(key, {"series": {}, "fstar": None})
            runs = cell.get("runs", [])
            if not runs:
                continue
            chosen = _median_run(runs)
            panel["series"][cell["method"]] = spath.parent / chosen["csv"]
            if panel["fstar"] is None:
                panel["fstar"] = chosen.get("fstar")
    if not panels:
        raise ValueError("no cells found in the given summaries")

    def method_rank(name: str) -> tuple:
        if name in METHOD_ORDER:
            return (0, METHOD_ORDER.index(name))
        return (1, name)

    cells = []
    for key in sorted(panels, key=lambda k: (k[2], k[0], k[1])):
        problem, n, noise = key
        series = dict(sorted(panels[key]["series"].items(),
                             key=lambda kv: method_rank(kv[0])))
        cells.append(PanelSpec(problem=problem, n=n, noise=noise,
                               series=series, fstar=panels[key]["fstar"]))
    return FigureSpec(cells=cells, y_mode=y_mode)


def _series_y(f_vals: np.ndarray, spec: FigureSpec, cell: PanelSpec) -> np.ndarray:
    if spec.y_mode == "gap":
        return f_vals - cell.fstar
    return np.minimum.accumulate(f_vals)


def render(spec: FigureSpec, out_path: str | Path):
    """Draw every panel, save ``out_path``, return the figure.

    Unreadable series are skipped with a warning; only a figure with no
    series at all is an error.
    """
    if not spec.cells or not any(cell.series for cell in spec.cells):
        raise ValueError("figure spec contains no series")

    n_panels = len(spec.cells)
    ncols = min(4, n_panels)
    nrows = math.ceil(n_panels / ncols)
    fig, axes = plt.subplots(nrows, ncols,
                             figsize=(3.6 * ncols, 3.0 * nrows),
                             squeeze=False)

    drawn_total = 0
    for idx, cell in enumerate(spec.cells):
        ax = axes[idx // ncols][idx % ncols]
        for method, path in cell.series.items():
            try:
                evals, f_vals = read_curve(path)
            except (OSError, ValueError) as err:
                logger.warning("skipping %s: %s", method, err)
                continue
            ax.plot(evals, _series_y(f_vals, spec, cell), label=method,
                    linewidth=1.2)
            drawn_total += 1
        ax.set_title(cell.title)
        ax.set_xlabel("function evaluations")
        ax.set_ylabel("gap to optimum" if spec.y_mode == "gap"
                      else "best value so far")
        if spec.log_y:
            ax.set_yscale("log")
        if ax.lines:
            ax.legend(fontsize=7)
    for idx in range(n_panels, nrows * ncols):
        axes[idx // ncols][idx % ncols].axis("off")

    if drawn_total == 0:
        plt.close(fig)
        raise AllSeriesMissingError("no series could be read")

    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    return fig
