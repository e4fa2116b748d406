"""Figures for sweep results, rendered headless to PNG."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "figure.figsize": (4.8, 3.4),
    "savefig.dpi": 150,
}

MARKERS = {"ges": "o", "gcs": "x", "dbs": "s", "exhaustive": "D", "random": "v",
           "fixed": "^", "full": "*"}
LABELS = {"ges": "GES", "gcs": "GCS", "dbs": "DBS", "exhaustive": "Exh", "random": "Random",
          "fixed": "Fixed", "full": "Full"}
XLABEL = {"snr": "average SNR (dB)", "k": "active RF chains K", "ee": "active RF chains K"}


def _by_method(records):
    out: dict[str, list] = {}
    for r in records:
        out.setdefault(r.method, []).append(r)
    return out


def plot_records(records, kind: str, path) -> None:
    """Objective (or EE) against the sweep point, or the Pareto trace for ``kind='pareto'``."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for method, rows in _by_method(records).items():
            style = dict(marker=MARKERS.get(method, "."), label=LABELS.get(method, method),
                         markerfacecolor="none", lw=1.0, ms=5)
            if kind == "pareto":
                ax.plot([r.ic_mean for r in rows], [r.is_mean for r in rows], **style)
            elif kind == "ee":
                ax.plot([r.point for r in rows], [r.ee_mean for r in rows], **style)
            else:
                ax.errorbar([r.point for r in rows], [r.objective_mean for r in rows],
                            yerr=[r.objective_se for r in rows], capsize=2, **style)
        if kind == "pareto":
            ax.set_xlabel("normalised communication MI $I_c/T$")
            ax.set_ylabel("normalised sensing MI $I_s/N_s$")
        else:
            ax.set_xlabel(XLABEL.get(kind, "point"))
            ax.set_ylabel("normalised EE" if kind == "ee" else "weighted normalised MI")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
