"""Optional PNG rendering for command results.

Each renderer takes the finished result rows of one subcommand and
writes one figure next to the delimited output file (or into the
working directory when results went to stdout).  Rendering is strictly
read-only with respect to the numbers: figures are built from the same
row dictionaries that the CSV/JSON writers receive, so a plot can never
show anything the tabular output does not contain.
"""

from __future__ import annotations

import math
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = ["render"]


def _column(rows: Sequence[Dict], key: str) -> np.ndarray:
    """Extract one column as floats, with missing/failed cells as NaN."""
    out = []
    for row in rows:
        value = row.get(key)
        try:
            out.append(float(value))
        except (TypeError, ValueError):
            out.append(math.nan)
    return np.asarray(out, dtype=float)


def _style(ax, xlabel: str, ylabel: str) -> None:
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)


def _render_bounds(rows: Sequence[Dict], base: str) -> str:
    a = _column(rows, "a")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.semilogy(a, _column(rows, "A_est"), "o-", label="A_est")
    ax1.semilogy(a, _column(rows, "B_est"), "s-", label="B_est")
    ax1.semilogy(a, _column(rows, "walnut_upper"), "--", label="walnut_upper")
    ax1.semilogy(a, _column(rows, "b_lower_probe"), ":", label="b_lower_probe")
    dual = _column(rows, "dual_lower")
    if np.isfinite(dual).any():
        ax1.semilogy(a, dual, "^-", label="dual_lower")
    _style(ax1, "a", "bound")
    ax1.set_title("frame bounds vs lattice spacing")
    ax2.plot(a, _column(rows, "ratio_A"), "o-", label="A_est / (1 - a^2)")
    _style(ax2, "a", "scaled lower bound")
    ax2.set_title("lower bound against the density gap")
    path = base + "_bounds.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _render_extremal(rows: Sequence[Dict], base: str) -> str:
    R = _column(rows, "R")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.loglog(R, _column(rows, "fock_norm_sq"), "o-", label="fock_norm_sq")
    if np.isfinite(R).sum() >= 2 and np.nanmin(R) > 0:
        ref = np.nanmax(_column(rows, "fock_norm_sq")) / np.nanmax(R) ** 1.5
        ax1.loglog(R, ref * R ** 1.5, "--", label="R^{3/2} reference")
    _style(ax1, "R", "squared norm")
    ax1.set_title("witness growth vs construction radius")
    a = _column(rows, "a")
    ax2.plot(a, _column(rows, "ratio_over_gap"), "o-", label="ratio / (1 - a^2)")
    ax2.plot(a, _column(rows, "defect_sup"), "s-", label="defect_sup")
    _style(ax2, "a", "value")
    ax2.set_title("scaled ratio and growth defect")
    path = base + "_extremal.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _render_dual(rows: Sequence[Dict], base: str) -> str:
    a = _column(rows, "a")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(a, _column(rows, "kappa_over_gap"), "o-", label="kappa_fit / (1 - a^2)")
    _style(ax1, "a", "scaled decay rate")
    ax1.set_title("dual-window decay against the density gap")
    ax2.semilogy(a, _column(rows, "dual_lower"), "o-", label="dual_lower")
    ax2.semilogy(a, _column(rows, "recon_error"), "s-", label="recon_error")
    _style(ax2, "a", "value")
    ax2.set_title("dual-route lower bound and reconstruction residual")
    path = base + "_dual.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _render_sigma(rows: Sequence[Dict], base: str) -> str:
    a = _column(rows, "a")
    sup = _column(rows, "sup_dev")
    inf = _column(rows, "inf_dev")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(a, sup, "o-", label="sup_dev")
    ax1.plot(a, inf, "s-", label="inf_dev")
    order = np.argsort(a)
    ax1.fill_between(a[order], inf[order], sup[order], alpha=0.2)
    _style(ax1, "a", "deviation from quadratic growth")
    ax1.set_title("sigma growth-check envelope")
    ax2.plot(a, _column(rows, "spread"), "o-", label="sup_dev - inf_dev")
    _style(ax2, "a", "spread")
    ax2.set_title("envelope width")
    path = base + "_sigma.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


_RENDERERS = {
    "bounds": _render_bounds,
    "sweep": _render_bounds,
    "extremal": _render_extremal,
    "dual": _render_dual,
    "sigma-check": _render_sigma,
}


def render(subcommand: str, rows: Sequence[Dict], base: str) -> List[str]:
    """Write the figure(s) for one subcommand's rows.

    ``base`` is the output path without extension; the figure lands at
    ``base_<kind>.png``.  Rows carrying an error are skipped; with no
    clean rows nothing is written.  Returns the list of written paths.
    """
    clean = [row for row in rows if not row.get("error")]
    renderer = _RENDERERS.get(subcommand)
    if renderer is None or not clean:
        return []
    return [renderer(clean, base)]
