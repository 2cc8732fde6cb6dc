"""CSV, table, manifest and SVG output."""

import io as _io
import json
import os
import platform
from importlib import metadata

import numpy as np

from .config import config_hash, serialize_config

FLOAT_FMT = "%.17g"


def package_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        from . import __version__

        return __version__


def csv_text(header, rows):
    """CSV with 17 significant digits, enough to round-trip any float64."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    buf = _io.StringIO()
    np.savetxt(buf, rows, fmt=FLOAT_FMT, delimiter=",", header=",".join(header), comments="")
    return buf.getvalue()


def table_text(header, rows, width=14):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    width = max(width, max(len(h) for h in header) + 1)
    lines = ["".join(h.rjust(width) for h in header)]
    for r in rows:
        lines.append("".join(f"{v:{width}.6g}" for v in r))
    return "\n".join(lines) + "\n"


def render(header, rows, fmt="csv"):
    if fmt == "csv":
        return csv_text(header, rows)
    if fmt == "table":
        return table_text(header, rows)
    raise ValueError(f"unknown format {fmt!r}")


def read_csv(path):
    """Inverse of :func:`write_csv`: ``(header, array)``."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv_text(header, rows))
    return path


def write_manifest(out_dir, cfg, command, files, extra=None):
    """Record what produced the files in ``out_dir``.

    No timestamps or host names are stored, so identical runs give identical
    manifests.
    """
    manifest = {
        "command": command,
        "version": package_version(),
        "config_hash": config_hash(cfg),
        "config": json.loads(serialize_config(cfg)),
        "solver": cfg.solver.model_dump(mode="json"),
        "numpy": np.__version__,
        "python": platform.python_version(),
        "files": sorted(os.path.basename(f) for f in files),
    }
    if extra:
        manifest.update(extra)
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")
    return path


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")


def write_svg_plot(path, x, series, title="", width=640, height=360):
    """Minimal SVG line chart of ``series`` (label -> values) against ``x``."""
    x = np.asarray(x, float)
    ys = {k: np.asarray(v, float) for k, v in series.items()}
    pad = 48
    allv = np.concatenate([v[np.isfinite(v)] for v in ys.values()]) if ys else np.zeros(1)
    lo, hi = float(allv.min()), float(allv.max())
    if hi == lo:
        hi = lo + 1.0
    x0, x1 = float(x.min()), float(x.max()) if x.max() > x.min() else float(x.min()) + 1.0

    def px(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def py(v):
        return height - pad - (v - lo) / (hi - lo) * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14">{title}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" '
        'stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{pad - 4}" y="{pad + 4}" text-anchor="end" font-size="10">{hi:.4g}</text>',
        f'<text x="{pad - 4}" y="{height - pad}" text-anchor="end" font-size="10">{lo:.4g}</text>',
        f'<text x="{width - pad}" y="{height - pad + 14}" text-anchor="end" '
        f'font-size="10">{x1:.4g}</text>',
    ]
    for k, (label, y) in enumerate(ys.items()):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y) if np.isfinite(b))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        parts.append(f'<text x="{width - pad + 4}" y="{pad + 14 * k}" font-size="10" '
                     f'fill="{color}">{label}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
    return path
