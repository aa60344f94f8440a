"""Figure rendering for CLI experiment outputs.

Each renderer consumes the same (columns, rows) table that goes into the CSV
artifact and writes a PNG next to it.  The CSV remains the canonical output;
figures are a convenience for eyeballing curves.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _column(columns, rows, name):
    idx = columns.index(name)
    return [row[idx] for row in rows]


def _numeric_series(columns, rows, x_name, y_name):
    xs, ys = [], []
    for x, y in zip(_column(columns, rows, x_name), _column(columns, rows, y_name)):
        if y is None or y == "":
            continue
        xs.append(float(x))
        ys.append(float(y))
    return xs, ys


def _line_figure(columns, rows, x_name, y_names, path, ylabel):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name in y_names:
        xs, ys = _numeric_series(columns, rows, x_name, name)
        if xs:
            ax.plot(xs, ys, marker=".", label=name)
    ax.set_xlabel(x_name)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.4)
    if len(y_names) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render(command: str, columns: list[str], rows: list[list], path: str) -> None:
    """Write the figure for one finished experiment table."""
    if command == "eval":
        _line_figure(columns, rows, "content",
                     ["success_given_request", "contribution"], path, "probability")
    elif command == "optimize":
        names = [c for c in columns if c.startswith("p_tier")]
        _line_figure(columns, rows, "content", names, path, "caching probability")
    elif command in ("sweep", "compare"):
        x_name = columns[0]
        names = [c for c in columns if c.startswith("sdp_")]
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for name in names:
            xs, ys = _numeric_series(columns, rows, x_name, name)
            style = dict(marker="o", linestyle="none") if "sim" in name \
                else dict(marker=".")
            if xs:
                ax.plot(xs, ys, label=name, **style)
        ax.set_xlabel(x_name)
        ax.set_ylabel("successful delivery probability")
        ax.grid(True, alpha=0.4)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
    elif command == "tradeoff":
        x_name = columns[0]
        names = [c for c in columns if not c.startswith("flag_") and c != x_name]
        _line_figure(columns, rows, x_name, names, path, "traded parameter")
    elif command == "simulate":
        idx = {c: k for k, c in enumerate(columns)}
        row = rows[0]
        fig, ax = plt.subplots(figsize=(4.8, 4.2))
        ax.bar(["analytic", "monte-carlo"],
               [float(row[idx["analytic_sdp"]]), float(row[idx["sdp_hat"]])],
               color=["#888888", "#3465a4"])
        ax.errorbar([1], [float(row[idx["sdp_hat"]])],
                    yerr=[3.0 * float(row[idx["stderr"]])],
                    fmt="none", ecolor="black", capsize=4)
        ax.set_ylabel("successful delivery probability")
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
    else:
        raise ValueError(f"no renderer for command {command!r}")
