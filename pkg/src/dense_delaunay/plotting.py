"""Log-log scatter with a fitted power law, written as a standalone SVG."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import InsufficientData  # noqa: E402
from .experiments import _value, fit_exponent  # noqa: E402

MARKERS_ID = "data-markers"
FIT_ID = "fit-line"


def emit_svg(rows, path, x_field="n", y_field="edges", title=None):
    """Scatter of ``y_field`` against ``x_field`` on log axes plus the fitted line.

    The marker collection carries the SVG id ``data-markers`` and the fit the
    id ``fit-line``.  Output bytes depend only on the data.
    """
    rows = [r for r in rows if _value(r, x_field) and _value(r, y_field)]
    if not rows:
        raise InsufficientData("no rows to plot")
    x = np.array([_value(r, x_field) for r in rows], dtype=float)
    y = np.array([_value(r, y_field) for r in rows], dtype=float)
    with plt.rc_context({"svg.hashsalt": "dense-delaunay", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5.0, 3.75))
        try:
            ax.scatter(x, y, s=18, color="k", zorder=3, gid=MARKERS_ID)
            label = None
            if len(rows) >= 3:
                fit = fit_exponent(rows, x_field, y_field)
                xs = np.geomspace(x.min(), x.max(), 32)
                ax.plot(xs, np.exp(fit.intercept) * xs ** fit.slope, color="tab:red",
                        lw=1.2, gid=FIT_ID)
                label = f"slope {fit.slope:.3f}"
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.set_xlabel(x_field)
            ax.set_ylabel(y_field)
            ax.set_title(title or (label or f"{y_field} vs {x_field}"), fontsize=10)
            if title and label:
                ax.text(0.03, 0.95, label, transform=ax.transAxes, va="top", fontsize=9)
            fig.tight_layout()
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
