"""Run artifacts: CSV tables, JSON manifests, two-column data files and PNG figures."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from . import __version__


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def header_comment(command: str, params: dict) -> str:
    items = ";".join(f"{k}={_fmt(params[k])}" for k in sorted(params))
    return f"# gowers-lab {__version__} command={command} {items}"


def write_table(path: Path, columns, rows, command: str, params: dict) -> str:
    buf = io.StringIO()
    buf.write(header_comment(command, params) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    text = buf.getvalue()
    Path(path).write_text(text)
    return text


def write_manifest(path: Path, command: str, params: dict, outputs: list[str]) -> None:
    doc = {"version": __version__, "command": command,
           "params": {k: params[k] for k in sorted(params)}, "outputs": sorted(outputs)}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, default=_fmt) + "\n")


def write_series(path: Path, x, y, command: str, params: dict) -> None:
    """Two whitespace-separated columns, gnuplot style."""
    lines = [header_comment(command, params)]
    lines += [f"{_fmt(a)} {_fmt(b)}" for a, b in zip(np.asarray(x).tolist(), np.asarray(y).tolist())]
    Path(path).write_text("\n".join(lines) + "\n")


def plot_series(path: Path, series: dict, xlabel: str, ylabel: str, title: str,
                logy: bool = False, style: str = "o-") -> None:
    """Render one or more (x, y) series to a PNG with fixed metadata."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=100)
    for label, (x, y) in series.items():
        ax.plot(x, y, style, ms=3, lw=1, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(series) > 1:
        ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)
