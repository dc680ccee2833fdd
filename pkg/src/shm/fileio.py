"""Dataset CSV reading and the text model format."""
from __future__ import annotations

import csv
import math
import re
from pathlib import Path

import numpy as np

from .errors import BadLabel, CorruptField, ParseError, RaggedRow, VersionMismatch
from .model import ShmModel, TrainMeta
from .train import KernelSpec, TrainingSet

FORMAT_VERSION = 1
MAGIC = "shm-model"
_COLUMN = re.compile(r"^(x|y)([1-9][0-9]*)$")


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _parse_header(header, line=1, require_labels=True):
    xs, ys, label_col = {}, {}, None
    for col, name in enumerate(header):
        name = name.strip()
        if name == "d":
            label_col = col
            continue
        match = _COLUMN.match(name)
        if not match:
            raise ParseError(f"unknown column name {name!r}", line, col + 1)
        target = xs if match.group(1) == "x" else ys
        k = int(match.group(2))
        if k in target:
            raise ParseError(f"duplicate column {name!r}", line, col + 1)
        target[k] = col
    for prefix, cols in (("x", xs), ("y", ys)):
        if not cols:
            raise ParseError(f"header has no {prefix} columns", line)
        if sorted(cols) != list(range(1, len(cols) + 1)):
            raise ParseError(f"{prefix} columns must be numbered 1..{len(cols)}", line)
    if require_labels and label_col is None:
        raise ParseError("header has no d column", line)
    x_cols = [xs[k] for k in sorted(xs)]
    y_cols = [ys[k] for k in sorted(ys)]
    return x_cols, y_cols, label_col


def _parse_label(text, line, column):
    try:
        v = float(text)
    except ValueError:
        raise BadLabel(f"label {text!r} is not a number", line, column) from None
    if v not in (1.0, -1.0):
        raise BadLabel(f"label must be -1 or +1, got {text!r}", line, column)
    return v


def read_table(path, require_labels=True):
    """Read a dataset CSV into ``(x, y, d)``; ``d`` is None when absent and allowed."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError("file is empty", 1)
    x_cols, y_cols, label_col = _parse_header(rows[0], 1, require_labels)
    width = len(rows[0])
    xs, ys, ds = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != width:
            raise RaggedRow(f"expected {width} fields, got {len(row)}", lineno)
        values = []
        for col, text in enumerate(row):
            if col == label_col:
                values.append(_parse_label(text.strip(), lineno, col + 1))
                continue
            try:
                v = float(text)
            except ValueError:
                raise ParseError(f"not a number: {text!r}", lineno, col + 1) from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite value {text!r}", lineno, col + 1)
            values.append(v)
        xs.append([values[c] for c in x_cols])
        ys.append([values[c] for c in y_cols])
        if label_col is not None:
            ds.append(values[label_col])
    if not xs:
        raise ParseError("no data rows", 2)
    x = np.array(xs).T
    y = np.array(ys).T
    d = np.array(ds) if label_col is not None else None
    return x, y, d


def load_dataset(path) -> TrainingSet:
    x, y, d = read_table(path, require_labels=True)
    try:
        return TrainingSet(x, y, d)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def write_dataset(ts: TrainingSet, path) -> None:
    header = [f"x{i + 1}" for i in range(ts.m)] + [f"y{t + 1}" for t in range(ts.z)] + ["d"]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(ts.n):
            w.writerow([_fmt(v) for v in ts.x[:, i]] + [_fmt(v) for v in ts.y[:, i]]
                       + [str(int(ts.d[i]))])


# model files

def dump_model(model: ShmModel) -> str:
    meta = model.meta
    lines = [
        MAGIC,
        f"format_version {FORMAT_VERSION}",
        f"mode {model.mode}",
        f"kernel {model.kernel}",
        f"m {model.m}",
        f"z {model.z}",
        f"b {_fmt(model.b)}",
        "inv_xxt " + " ".join(_fmt(v) for v in model.inv_xxt.ravel()),
    ]
    if model.w is not None:
        lines.append("w " + " ".join(_fmt(v) for v in model.w.ravel()))
        lines.append("w0 " + " ".join(_fmt(v) for v in model.w0))
    lines += [
        f"ridge_used {_fmt(meta.ridge_used)}",
        f"objective {_fmt(meta.objective)}",
        f"qp_mode {meta.qp_mode}",
        f"c {_fmt(meta.c)}",
        f"sv_cut {_fmt(meta.sv_cut)}",
        f"kkt_residual {_fmt(meta.kkt_residual)}",
        f"iterations {meta.iterations}",
        f"supports {len(model.sv_alpha)}",
    ]
    for col in range(len(model.sv_alpha)):
        fields = [str(int(model.sv_index[col]))]
        fields += [_fmt(v) for v in model.sv_x[:, col]]
        fields += [_fmt(v) for v in model.sv_y[:, col]]
        fields += [str(int(model.sv_d[col])), _fmt(model.sv_alpha[col])]
        lines.append(" ".join(fields))
    lines.append("end")
    return "\n".join(lines) + "\n"


def save_model(model: ShmModel, path) -> None:
    Path(path).write_text(dump_model(model), encoding="utf-8")


class _Reader:
    def __init__(self, text):
        self.lines = text.splitlines()
        self.pos = 0

    def next_line(self):
        if self.pos >= len(self.lines):
            raise CorruptField("unexpected end of model file")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def field(self, key):
        line = self.next_line()
        name, _, value = line.partition(" ")
        if name != key:
            raise CorruptField(f"line {self.pos}: expected field {key!r}, found {name!r}")
        return value

    def floats(self, key, count):
        try:
            values = [float(v) for v in self.field(key).split()]
        except ValueError:
            raise CorruptField(f"line {self.pos}: field {key!r} is not numeric") from None
        if len(values) != count:
            raise CorruptField(f"line {self.pos}: field {key!r} has {len(values)} values, expected {count}")
        return np.array(values)

    def number(self, key, kind=float):
        try:
            return kind(self.field(key))
        except ValueError:
            raise CorruptField(f"line {self.pos}: field {key!r} is not numeric") from None


def parse_model(text: str) -> ShmModel:
    r = _Reader(text)
    if r.next_line().strip() != MAGIC:
        raise CorruptField("not an SHM model file")
    version = r.number("format_version", int)
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"model format version {version}, expected {FORMAT_VERSION}")
    mode = r.field("mode")
    try:
        kernel = KernelSpec.parse(r.field("kernel"))
    except ValueError as exc:
        raise CorruptField(str(exc)) from None
    m = r.number("m", int)
    z = r.number("z", int)
    b = r.number("b")
    inv = r.floats("inv_xxt", m * m).reshape(m, m)
    w = w0 = None
    if mode == "linear-explicit":
        w = r.floats("w", m * z).reshape(m, z)
        w0 = r.floats("w0", m)
    elif mode != "kernel-expansion":
        raise CorruptField(f"unknown mode {mode!r}")
    meta = TrainMeta(
        ridge_used=r.number("ridge_used"),
        objective=r.number("objective"),
        qp_mode=r.field("qp_mode"),
        c=r.number("c"),
        sv_cut=r.number("sv_cut"),
        kkt_residual=r.number("kkt_residual"),
        iterations=r.number("iterations", int),
    )
    count = r.number("supports", int)
    idx, xs, ys, ds, alphas = [], [], [], [], []
    for _ in range(count):
        parts = r.next_line().split()
        if len(parts) != m + z + 3:
            raise CorruptField(f"line {r.pos}: support record has {len(parts)} fields")
        try:
            idx.append(int(parts[0]))
            xs.append([float(v) for v in parts[1:1 + m]])
            ys.append([float(v) for v in parts[1 + m:1 + m + z]])
            ds.append(float(parts[1 + m + z]))
            alphas.append(float(parts[2 + m + z]))
        except ValueError:
            raise CorruptField(f"line {r.pos}: support record is not numeric") from None
    if r.next_line().strip() != "end":
        raise CorruptField("missing end marker")
    try:
        return ShmModel(
            kernel=kernel, inv_xxt=inv, b=b,
            sv_index=np.array(idx, dtype=int),
            sv_x=np.array(xs, dtype=float).reshape(count, m).T,
            sv_y=np.array(ys, dtype=float).reshape(count, z).T,
            sv_d=np.array(ds), sv_alpha=np.array(alphas),
            w=w, w0=w0, meta=meta,
        )
    except ValueError as exc:
        raise CorruptField(str(exc)) from None


def load_model(path) -> ShmModel:
    return parse_model(Path(path).read_text(encoding="utf-8"))
