"""Static SVG figures for test reports, simulated trains and Monte Carlo tables.

Figures are built on bare matplotlib Figure objects (no pyplot state), so
rendering is safe from worker threads. A fixed hash salt and a blank date keep
the SVG text byte-identical for identical inputs.
"""
from __future__ import annotations

import io
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from gof import Battery, TestReport
from harness import CoverageRow, JointRow
from intensity import IntensityModel
from rescale import counting_on_lambda
from trains import SpikeTrain, TransformedTrain

logger = logging.getLogger(__name__)

_SVG_RC = {"svg.hashsalt": "spikegof", "svg.fonttype": "none"}
_FIGSIZE = (5.0, 3.5)
_BOUNDARY_STYLE = {"color": "black", "linestyle": ":", "linewidth": 1.2}
_BAND_COLOR = "0.85"


def _to_svg(fig: Figure) -> str:
    buf = io.StringIO()
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def _figure() -> tuple[Figure, object]:
    fig = Figure(figsize=_FIGSIZE)
    ax = fig.add_subplot(1, 1, 1)
    return fig, ax


def _ecdf_axes(ax, data: dict, xlabel: str) -> None:
    x = np.asarray(data["x"], dtype=float)
    ecdf = np.asarray(data["ecdf"], dtype=float)
    ax.step(x, ecdf, where="post", color="tab:blue", linewidth=1.0)
    diag = np.linspace(0.0, 1.0, 2)
    ax.plot(diag, diag, color="black", linewidth=0.8)
    for key in ("band_95", "band_99"):
        if key in data:
            half = float(data[key])
            ax.plot(diag, diag + half, **_BOUNDARY_STYLE)
            ax.plot(diag, diag - half, **_BOUNDARY_STYLE)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("empirical CDF")


def _plot_uniform(report: TestReport) -> Figure:
    fig, ax = _figure()
    _ecdf_axes(ax, report.plot_data, r"$\Lambda / \Lambda_n$")
    ax.set_title(f"Uniform test (D = {report.statistics['D']:.3f})")
    return fig


def _plot_berman(report: TestReport) -> Figure:
    fig, ax = _figure()
    _ecdf_axes(ax, report.plot_data, "$u_k$")
    ax.set_title(f"Berman test (D = {report.statistics['D']:.3f})")
    return fig


def _plot_serial(report: TestReport) -> Figure:
    fig, ax = _figure()
    ax.scatter(report.plot_data["u_k"], report.plot_data["u_next"], s=4, color="tab:blue")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel("$u_k$")
    ax.set_ylabel("$u_{k+1}$")
    ax.set_title(f"Serial correlation (rho = {report.statistics['rho']:.3f})")
    return fig


def _plot_variance_time(report: TestReport) -> Figure:
    data = report.plot_data
    fig, ax = _figure()
    w = np.asarray(data["window"], dtype=float)
    ax.fill_between(w, data["band_low"], data["band_high"], color=_BAND_COLOR, linewidth=0)
    ax.plot(w, w, color="black", linewidth=0.8)
    ax.plot(w, data["variance"], marker="o", linestyle="none", color="tab:blue", markersize=3)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("window length w")
    ax.set_ylabel("variance of counts")
    ax.set_title("Variance-time test")
    return fig


def _plot_wiener(report: TestReport) -> Figure:
    data = report.plot_data
    fig, ax = _figure()
    t = np.concatenate(([0.0], np.asarray(data["step_times"], dtype=float)))
    values = np.concatenate(([0.0], np.asarray(data["values"], dtype=float)))
    ax.step(t, values, where="post", color="tab:blue", linewidth=1.0)
    ax.plot(data["curve_t"], data["upper"], **_BOUNDARY_STYLE)
    ax.plot(data["curve_t"], data["lower"], **_BOUNDARY_STYLE)
    if data.get("first_exit") is not None:
        ax.axvline(data["first_exit"], color="tab:red", linewidth=0.8)
    ax.set_xlim(0, 1)
    ax.set_xlabel("t")
    ax.set_ylabel("$X^n_t$")
    ax.set_title("Wiener process test")
    return fig


_RENDERERS = {
    "uniform": _plot_uniform,
    "berman": _plot_berman,
    "serial": _plot_serial,
    "variance_time": _plot_variance_time,
    "wiener": _plot_wiener,
}


def _write(svgs: dict[str, str], out_dir: str | Path | None) -> None:
    if out_dir is None:
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in svgs.items():
        (out / f"{name}.svg").write_text(text, encoding="utf-8")
    logger.info(f"Wrote {len(svgs)} SVG files to {out}")


def render_plots(
    reports: Battery | Iterable[TestReport],
    out_dir: str | Path | None = None,
) -> dict[str, str]:
    """One SVG per report, keyed by test name; written to out_dir when given."""
    svgs: dict[str, str] = {}
    for report in reports:
        renderer = _RENDERERS.get(report.test_name)
        if renderer is None or not report.plot_data:
            logger.warning(f"No plot data for {report.test_name}; skipping its figure")
            continue
        svgs[report.test_name] = _to_svg(renderer(report))
    _write(svgs, out_dir)
    return svgs


def render_simulation(
    train: SpikeTrain,
    model: IntensityModel,
    tt: TransformedTrain | None = None,
    out_dir: str | Path | None = None,
    points: int = 2000,
) -> dict[str, str]:
    """Conditional intensity over the train and, given the transformed train,
    the counting process against Λ."""
    svgs: dict[str, str] = {}
    if train.n == 0 or train.horizon <= 0:
        logger.warning("Empty train; skipping the intensity figure")
        return svgs
    grid = np.linspace(0.0, train.horizon, points)[1:]
    fig, ax = _figure()
    ax.plot(grid, model.intensity_path(train, grid), color="tab:blue", linewidth=0.8)
    ax.plot(train.times, np.zeros(train.n), "|", color="black", markersize=6)
    ax.set_xlabel("time (s)")
    ax.set_ylabel(r"$\lambda(t \mid H_t)$ (1/s)")
    ax.set_title("Conditional intensity")
    svgs["intensity"] = _to_svg(fig)

    if tt is not None and tt.n > 1:
        path = counting_on_lambda(tt)
        fig, ax = _figure()
        ax.step(path.lambdas, path.counts, where="post", color="tab:blue", linewidth=1.0)
        top = float(path.lambdas[-1])
        ax.plot([0.0, top], [0.0, top], color="black", linewidth=0.8)
        ax.set_xlabel(r"$\Lambda$")
        ax.set_ylabel(r"$N(\Lambda)$")
        ax.set_title("Counting process on the transformed axis")
        svgs["counting"] = _to_svg(fig)
    _write(svgs, out_dir)
    return svgs


def render_coverage(
    rows: Sequence[CoverageRow], out_dir: str | Path | None = None
) -> dict[str, str]:
    """Empirical coverage against n with gray binomial bands, one series per level."""
    if not rows:
        logger.warning("No coverage rows; skipping the coverage figure")
        return {}
    fig, ax = _figure()
    for level in sorted({r.level for r in rows}):
        sel = sorted((r for r in rows if r.level == level), key=lambda r: r.n)
        n = [r.n for r in sel]
        ax.fill_between(
            n, [r.band_low for r in sel], [r.band_high for r in sel],
            color=_BAND_COLOR, linewidth=0,
        )
        ax.plot(n, [r.empirical for r in sel], marker="o", linestyle="none",
                markersize=3, label=f"{level:.0%} band")
    ax.set_xlabel("sample size n")
    ax.set_ylabel("empirical coverage")
    ax.legend(loc="lower right", frameon=False)
    ax.set_title("Wiener band coverage")
    svgs = {"coverage": _to_svg(fig)}
    _write(svgs, out_dir)
    return svgs


def render_joint(rows: Sequence[JointRow], out_dir: str | Path | None = None) -> dict[str, str]:
    """Joint rejection counts per test pair against the independence band."""
    pairs = [r for r in rows if r.pair != "union"]
    if not pairs:
        logger.warning("No joint rows; skipping the joint rejection figure")
        return {}
    fig, ax = _figure()
    names = sorted({r.pair for r in pairs})
    for i, name in enumerate(names):
        sel = [r for r in pairs if r.pair == name]
        x = np.full(len(sel), i, dtype=float)
        ax.fill_between([i - 0.3, i + 0.3], sel[0].band_low, sel[0].band_high,
                        color=_BAND_COLOR, linewidth=0)
        ax.plot(x, [r.joint_count for r in sel], marker="o", linestyle="none", markersize=4)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names)
    ax.set_ylabel("replicates rejected by both")
    ax.set_title("Joint rejections")
    svgs = {"joint": _to_svg(fig)}
    _write(svgs, out_dir)
    return svgs
