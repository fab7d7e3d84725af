"""Text formats: point curves, checkpoints and CSV tables."""
from __future__ import annotations

import csv

import numpy as np

from .exceptions import ConfigError, InvalidArgument
from .flow import KINDS
from .geometry import IntrinsicState, PlanarCurve
from .spectral import CosineField

CHECKPOINT_HEADER = "POLYFLOW 1"
NUM = "%.16e"   # 17 significant digits, round-trips every double


def fmt(x) -> str:
    return NUM % x


def read_points(path: str) -> PlanarCurve:
    """Read a point curve: one 'x y' pair per line, '#' starts a comment."""
    rows = []
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise ConfigError(f"{path}:{lineno}: expected two numbers")
                rows.append((float(parts[0]), float(parts[1])))
    except OSError as exc:
        raise ConfigError(f"cannot read point file {path!r}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return PlanarCurve(np.array(rows))


def write_points(path: str, curve: PlanarCurve) -> None:
    with open(path, "w") as fh:
        fh.write("# x y\n")
        for x, y in curve.points:
            fh.write(f"{fmt(x)} {fmt(y)}\n")


def write_checkpoint(path: str, state: IntrinsicState, kind: str, m: int) -> None:
    lines = [CHECKPOINT_HEADER,
             " ".join([kind, str(m), str(state.N)]
                      + [fmt(v) for v in (state.t, state.L, state.d0, state.anchor_y)])]
    lines += [fmt(a) for a in state.k.coeffs]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_checkpoint(path: str):
    """Returns (state, kind, m)."""
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise ConfigError(f"cannot read checkpoint {path!r}: {exc}") from None
    if not lines or lines[0] != CHECKPOINT_HEADER:
        raise ConfigError(f"{path}: not a version-1 checkpoint")
    try:
        head = lines[1].split()
        kind, m, N = head[0], int(head[1]), int(head[2])
        t, L, d0, anchor_y = (float(v) for v in head[3:7])
        coeffs = np.array([float(v) for v in lines[2:]])
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed checkpoint ({exc})") from None
    if kind not in KINDS or coeffs.size != N or len(head) != 7:
        raise ConfigError(f"{path}: inconsistent checkpoint header")
    try:
        state = IntrinsicState(L=L, k=CosineField(coeffs), anchor_y=anchor_y, d0=d0, t=t)
    except InvalidArgument as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return state, kind, m


class CsvWriter:
    """CSV with a header row; floats in 17-significant-digit scientific notation."""

    def __init__(self, path: str, columns, append: bool = False):
        self.columns = list(columns)
        self._fh = open(path, "a" if append else "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        if not append:
            self._w.writerow(self.columns)

    def row(self, values) -> None:
        self._w.writerow([v if isinstance(v, (int, np.integer, str)) else fmt(v) for v in values])

    def flush(self):
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_table(path: str, columns, rows) -> None:
    with CsvWriter(path, columns) as w:
        for r in rows:
            w.row(r)


def read_table(path: str):
    """(columns, rows); integral text parses as int, other numbers as float, the rest stays text."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [[_cell(c) for c in r] for r in reader]
    return columns, rows


def _cell(text: str):
    if text.lstrip("-").isdigit():
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def truncate_series(path: str, last_step: int) -> None:
    """Keep the header and the rows whose leading step column is <= last_step.

    The row for last_step itself must be present, otherwise appending would
    leave a gap.
    """
    with open(path) as fh:
        lines = fh.readlines()
    keep = lines[:1] + [ln for ln in lines[1:] if int(ln.split(",", 1)[0]) <= last_step]
    if len(keep) < 2 or int(keep[-1].split(",", 1)[0]) != last_step:
        raise ConfigError(f"{path} has no row for step {last_step}; cannot append after it")
    with open(path, "w") as fh:
        fh.writelines(keep)
