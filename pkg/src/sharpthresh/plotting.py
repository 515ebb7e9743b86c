"""Deterministic SVG plots of sweeps and window-scaling fits."""
from __future__ import annotations

import io
import json
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .thresholds import fit_loglog, read_sweep_csv  # noqa: E402


def _svg(fig, description: str) -> bytes:
    buf = io.BytesIO()
    with plt.rc_context({"svg.hashsalt": "sharpthresh", "svg.fonttype": "none"}):
        fig.savefig(buf, format="svg", metadata={"Date": None, "Description": description.strip()})
    plt.close(fig)
    return buf.getvalue()


def plot_sweep(rows: list[dict], description: str = "") -> bytes:
    """Expectation against p with CI bands, one curve per (family, size)."""
    if len(rows) < 2:
        raise ValueError("need at least two sweep records")
    groups = defaultdict(list)
    for r in rows:
        groups[(r["family"], r["size"])].append(r)
    fig, ax = plt.subplots(figsize=(6, 4))
    for (family, size), rs in sorted(groups.items()):
        rs.sort(key=lambda r: r["p"])
        p = np.array([r["p"] for r in rs])
        ax.plot(p, [r["estimate"] for r in rs], marker="o", ms=3, label=f"{family} {size}")
        ax.fill_between(p, [r["ci_lo"] for r in rs], [r["ci_hi"] for r in rs], alpha=0.25)
    ax.set_xlabel("p")
    ax.set_ylabel("E_p f")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8)
    return _svg(fig, description)


def plot_scaling(sizes, epsilons, description: str = "") -> bytes:
    """Log-log window against size, with the least-squares line and its slope."""
    if len(sizes) < 2:
        raise ValueError("need at least two points")
    slope, stderr, intercept = fit_loglog(sizes, epsilons)
    x = np.asarray(sizes, float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(x, epsilons, "o", label="measured")
    ax.loglog(x, np.exp(intercept) * x ** slope, "-", label=f"slope {slope:.3f} ± {stderr:.3f}")
    ax.set_xlabel("size")
    ax.set_ylabel("window epsilon")
    ax.legend(fontsize=8)
    return _svg(fig, description)


def plot_file(text: str, kind: str = "sweep", header: str = "") -> bytes:
    if kind == "sweep":
        return plot_sweep(read_sweep_csv(text), header)
    doc = json.loads(text)
    return plot_scaling(doc["sizes"], doc["epsilons"], header)
