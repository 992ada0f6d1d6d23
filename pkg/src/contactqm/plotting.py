"""PNG figures drawn next to the CSV output (non-interactive Agg backend)."""

import os
import tempfile
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.dpi": 120,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.5,
    "legend.frameon": False,
}

_MARKERS = {"center": "o", "stable focus": "s", "unstable focus": "D", "stable node": "v",
            "unstable node": "^", "saddle": "X", "non-hyperbolic": "*"}


def _save(fig, path) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".png")
    os.close(fd)
    try:
        fig.savefig(tmp, format="png", bbox_inches="tight")
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    finally:
        plt.close(fig)


def plot_observables(table, path, title: str = "") -> None:
    """e_H, variance of H and population P against time."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(3, 1, figsize=(6, 7), sharex=True)
        for ax, y, label in zip(axes, (table.e_H, table.var_H, table.P),
                                (r"$e_H$", r"$\sigma^2_H$", r"$\mathcal{P}$")):
            ax.plot(table.t, y)
            ax.set_ylabel(label)
        axes[-1].set_xlabel(r"$t$")
        if title:
            axes[0].set_title(title)
        _save(fig, path)


def plot_portrait(portrait, path, title: str = "") -> None:
    """Chart-2 field directions with critical points, and the Bloch-sphere view (x1, x3)."""
    with plt.rc_context(STYLE):
        fig, (ax, ax_s) = plt.subplots(1, 2, figsize=(11, 5))
        m = portrait.chart == 2
        d = portrait.dz[m]
        norm = np.abs(d)
        norm[norm == 0] = 1.0
        ax.quiver(portrait.x[m], portrait.y[m], d.real / norm, d.imag / norm, np.log10(np.abs(d) + 1e-12),
                  cmap="viridis", angles="xy", pivot="mid")
        for p in portrait.critical_points:
            if p.chart == 2:
                ax.plot(p.z.real, p.z.imag, _MARKERS[p.classification], color="crimson", ms=8,
                        label=p.classification)
        ax.set_xlim(portrait.x.min(), portrait.x.max())
        ax.set_ylim(portrait.y.min(), portrait.y.max())
        ax.set_aspect("equal")
        ax.set_xlabel(r"Re $z$")
        ax.set_ylabel(r"Im $z$")
        handles, labels = ax.get_legend_handles_labels()
        if handles:
            uniq = dict(zip(labels, handles))
            ax.legend(uniq.values(), uniq.keys(), loc="upper right", fontsize=8)

        th = np.linspace(0, 2 * np.pi, 200)
        ax_s.plot(np.cos(th), np.sin(th), color="0.6", lw=0.8)
        for line in portrait.streamlines:
            ax_s.plot(line[:, 0], line[:, 2], color="steelblue", lw=0.8)
        for p in portrait.critical_points:
            b = p.bloch
            ax_s.plot(b[0], b[2], _MARKERS[p.classification], color="crimson", ms=8)
        ax_s.set_aspect("equal")
        ax_s.set_xlabel(r"$x_1$")
        ax_s.set_ylabel(r"$x_3$")
        ax_s.set_title("Bloch sphere (x1-x3 section)")
        if title:
            ax.set_title(title)
        _save(fig, path)
