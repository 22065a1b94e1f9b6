"""Readers and writers for matrices, spectra and plots.

CSV files may start with ``#`` comment lines (provenance); every reader here
skips them.  The binary matrix format is an 8-byte little-endian unsigned
``n`` followed by ``n * n`` little-endian float64 values in column-major order.
"""
from __future__ import annotations

import hashlib
import io
import math
import struct
from pathlib import Path

import numpy as np

__all__ = [
    "write_matrix_csv",
    "read_matrix_csv",
    "write_matrix_bin",
    "read_matrix_bin",
    "write_spectrum_csv",
    "read_spectrum_csv",
    "write_table_csv",
    "read_table_csv",
    "sha256_file",
    "loglog_svg",
]


def _header(comment: str | None) -> str:
    return "" if not comment else "".join(f"# {line}\n" for line in comment.splitlines())


def _fmt(x: float) -> str:
    return repr(float(x))


def write_matrix_csv(path, a, comment: str | None = None):
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    with open(path, "w", newline="") as fh:
        fh.write(_header(comment))
        for row in a:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", comments="#", ndmin=2, dtype=np.float64)


def write_matrix_bin(path, a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("binary dump expects a square matrix")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", a.shape[0]))
        fh.write(a.astype("<f8").tobytes(order="F"))


def read_matrix_bin(path) -> np.ndarray:
    data = Path(path).read_bytes()
    (n,) = struct.unpack_from("<Q", data, 0)
    if len(data) != 8 + 8 * n * n:
        raise ValueError("binary matrix size does not match header")
    return np.frombuffer(data, dtype="<f8", offset=8).reshape((n, n), order="F").astype(np.float64)


def write_table_csv(path, header: list[str], rows, comment: str | None = None):
    with open(path, "w", newline="") as fh:
        fh.write(_header(comment))
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join("" if v is None else (_fmt(v) if isinstance(v, float) else str(v)) for v in row) + "\n")


def read_table_csv(path) -> tuple[list[str], list[list[str]]]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def write_spectrum_csv(path, spectrum, comment: str | None = None):
    ids = spectrum.group_ids()
    write_table_csv(path, ["index", "eigenvalue", "group"],
                    ([i, float(w), int(g)] for i, (w, g) in enumerate(zip(spectrum.eigenvalues, ids))), comment)


def read_spectrum_csv(path) -> tuple[np.ndarray, np.ndarray]:
    _, rows = read_table_csv(path)
    vals = np.array([float(r[1]) for r in rows])
    groups = np.array([int(r[2]) for r in rows], dtype=np.int64)
    return vals, groups


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def loglog_svg(series: dict[str, list[tuple[float, float]]], title: str, width: int = 480, height: int = 320) -> str:
    """Minimal standalone log-log line plot; the data is embedded as a comment."""
    pts = [(x, y) for s in series.values() for x, y in s if x > 0 and y > 0]
    buf = io.StringIO()
    buf.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    buf.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n')
    buf.write("<!-- data\n")
    for name, s in series.items():
        buf.write(f"{name}: " + " ".join(f"{x!r}:{y!r}" for x, y in s) + "\n")
    buf.write("-->\n")
    buf.write(f'<text x="{width / 2}" y="16" text-anchor="middle" font-size="13">{title}</text>\n')
    if pts:
        lx = [math.log10(x) for x, _ in pts]
        ly = [math.log10(y) for _, y in pts]
        x0, x1 = min(lx), max(lx) if max(lx) > min(lx) else min(lx) + 1
        y0, y1 = min(ly), max(ly) if max(ly) > min(ly) else min(ly) + 1
        pad = 40

        def sx(v):
            return pad + (math.log10(v) - x0) / (x1 - x0) * (width - 2 * pad)

        def sy(v):
            return height - pad - (math.log10(v) - y0) / (y1 - y0) * (height - 2 * pad)

        colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
        buf.write(f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" fill="none" stroke="#888"/>\n')
        for k, (name, s) in enumerate(series.items()):
            s = [(x, y) for x, y in s if x > 0 and y > 0]
            if not s:
                continue
            path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in s)
            buf.write(f'<polyline fill="none" stroke="{colours[k % 4]}" points="{path}"/>\n')
            buf.write(f'<text x="{width - pad}" y="{pad + 14 * (k + 1)}" text-anchor="end" font-size="11" fill="{colours[k % 4]}">{name}</text>\n')
    buf.write("</svg>\n")
    return buf.getvalue()
