"""Figure output: gnuplot scripts (always) and matplotlib PNGs (optional).

Scripts reference the CSV next to them by file name, so a result directory can
be moved around and re-plotted with ``gnuplot sweep.gp``.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = [
    "sweep_script",
    "lcurve_script",
    "profile_script",
    "filters_script",
    "write_script",
    "plot_sweep",
    "plot_lcurve",
    "plot_profile",
    "plot_filters",
]

_PREAMBLE = """set datafile separator ','
set datafile commentschars '#'
set key autotitle columnhead
set terminal pngcairo size 1200,900
"""

# Sweep CSV column numbers for the error panels.
_PANELS = (("abs_err_sol", 3), ("rel_err_sol", 4), ("abs_err_data", 5), ("rel_err_data", 6))


def _select(method: str, col: int) -> str:
    return f'(strcol(2) eq "{method}" ? ${col} : 1/0)'


def sweep_script(csv_name: str, methods, png_name: str = "sweep.png") -> str:
    lines = [_PREAMBLE, f"set output '{png_name}'", "set multiplot layout 2,2", "set logscale xy", "set format y '%.0e'"]
    for label, col in _PANELS:
        lines.append(f"set title '{label}'")
        lines.append("set xlabel 'gamma'")
        plots = [f"'{csv_name}' using 1:{_select(m, col)} with linespoints title '{m}'" for m in methods]
        lines.append("plot " + ", \\\n     ".join(plots))
    lines.append("unset multiplot")
    return "\n".join(lines) + "\n"


def lcurve_script(csv_name: str, methods, x_col: int, y_col: int, png_name: str = "lcurve.png") -> str:
    """Seminorm against residual; method labels are in column 2."""
    lines = [_PREAMBLE, f"set output '{png_name}'", "set logscale xy", "set xlabel 'residual norm'", "set ylabel 'seminorm'"]
    plots = [f"'{csv_name}' using {_select(m, x_col)}:{y_col} with linespoints title '{m}'" for m in methods]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def profile_script(csv_name: str, columns, png_name: str) -> str:
    """``columns`` lists the CSV header; column 1 is the index."""
    sol = [c for c in columns[1:] if not c.startswith("a_")]
    data = [c for c in columns[1:] if c.startswith("a_")]
    lines = [_PREAMBLE, f"set output '{png_name}'", "set multiplot layout 1,2", "set xlabel 'i'"]
    for title, group in (("solution", sol), ("data", data)):
        lines.append(f"set title '{title}'")
        plots = [f"'{csv_name}' using 1:{columns.index(c) + 1} with lines title '{c}'" for c in group]
        lines.append("plot " + ", \\\n     ".join(plots))
    lines.append("unset multiplot")
    return "\n".join(lines) + "\n"


def filters_script(csv_name: str, gammas, png_name: str = "filters.png") -> str:
    lines = [
        _PREAMBLE,
        f"set output '{png_name}'",
        "set logscale xy",
        "set xlabel 'sigma'",
        "set ylabel 'filter factor'",
        "set key left top",
    ]
    plots = []
    for g in gammas:
        cond = f"(abs($1 - {g!r}) <= 1e-12 * {g!r}"
        plots.append(f"'{csv_name}' using 2:{cond} ? $3 : 1/0) with lines title 'stabreg {g:g}'")
        plots.append(f"'{csv_name}' using 2:{cond} ? $4 : 1/0) with lines dt 2 title 'tikhonov {g:g}'")
    plots.append(f"'{csv_name}' using 2:5 with lines lw 2 title 'limit'")
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def write_script(path, text: str) -> Path:
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_sweep(results, path, methods) -> Path:
    plt = _pyplot()
    fig, axes = plt.subplots(2, 2, figsize=(10, 8))
    for ax, (label, _) in zip(axes.flat, _PANELS):
        for m in methods:
            rows = [r for r in results if r.method == m and r.status == "ok"]
            ax.loglog([r.gamma for r in rows], [getattr(r, label) for r in rows], marker=".", label=m)
        ax.set_title(label)
        ax.set_xlabel("gamma")
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return Path(path)


def plot_lcurve(results, path, methods) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 5))
    for m in methods:
        rows = [r for r in results if r.method == m and r.status == "ok"]
        ax.loglog([r.residual for r in rows], [r.seminorm for r in rows], marker=".", label=m)
    ax.set_xlabel("residual norm")
    ax.set_ylabel("seminorm")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return Path(path)


def plot_profile(columns: dict, path, title: str = "") -> Path:
    """``columns`` maps header names to arrays; ``"i"`` is the index."""
    plt = _pyplot()
    fig, (ax_u, ax_d) = plt.subplots(1, 2, figsize=(11, 4))
    idx = columns["i"]
    for name, vals in columns.items():
        if name == "i":
            continue
        ax = ax_d if name.startswith("a_") else ax_u
        ax.plot(idx, vals, label=name, lw=1)
    ax_u.set_title(f"solution {title}".strip())
    ax_d.set_title(f"data {title}".strip())
    for ax in (ax_u, ax_d):
        ax.set_xlabel("i")
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return Path(path)


def plot_filters(sigma, table: dict, limit, path) -> Path:
    """``table`` maps gamma to ``(phi_stabreg, phi_tikhonov)``."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 5))
    for gam, (phi, tik) in table.items():
        line = ax.loglog(sigma, phi, label=f"stabreg {gam:g}")[0]
        # Tikhonov factors underflow to 0 at large gamma; clip for log axes.
        ax.loglog(sigma, np.maximum(tik, 1e-300), ls="--", color=line.get_color(), label=f"tikhonov {gam:g}")
    ax.loglog(sigma, limit, color="k", lw=2, label="limit")
    ax.set_xlabel("sigma")
    ax.set_ylabel("filter factor")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return Path(path)
