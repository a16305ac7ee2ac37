"""Trained predictors: total functions from sparse instances to +-1 labels.

Four node kinds, composed into trees by the composite router node:

* ``table``     -- per-instance majority lookup with a +1 default;
* ``matrix``    -- real score matrix read through a two-sparse cell map;
* ``binary``    -- homogeneous halfspace with +-1 weights;
* ``composite`` -- routes an instance to a per-part child predictor.

Serialization is line-based text: a tagged header per node followed by its
payload (table rows in the sparse-sample instance syntax, matrices row
major).  It round-trips byte-for-byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import BinaryAssignment, Label, SparseVector, parse_entries, sign_pm
from .errors import FormatError
from .realizations import (
    C2Part,
    C3Part,
    C3Residual,
    PartId,
    Router,
    get_router,
    part_of_c2,
    part_sort_key,
    realize_c2,
)


class TrainedPredictor:
    """Base for anything that can label a sparse instance."""

    def predict(self, x: SparseVector) -> Label:
        raise NotImplementedError

    def __call__(self, x: SparseVector) -> Label:
        return self.predict(x)


@dataclass
class MajorityTable(TrainedPredictor):
    """Majority label per distinct seen instance; ties and unseen go to +1."""

    n: int
    k: int
    table: dict[tuple[tuple[int, int], ...], Label]
    default: Label = 1

    def predict(self, x: SparseVector) -> Label:
        return self.table.get(x.entries, self.default)


@dataclass
class MatrixPredictor(TrainedPredictor):
    """sign of a real score matrix read at an instance's cell (0 -> +1).

    ``realization`` names the two-sparse part whose cell map the matrix was
    trained under; without it the predictor only answers ``predict_cell``.
    ``max_trace`` is a training diagnostic (largest capped trace seen).
    """

    n_rows: int
    n_cols: int
    scores: np.ndarray
    realization: int | None = None
    max_trace: float = 0.0
    trace_cap: float = float("inf")

    def __post_init__(self) -> None:
        scores = np.array(self.scores, dtype=float)
        if scores.shape != (self.n_rows, self.n_cols):
            raise ValueError("score matrix shape mismatch")
        self.scores = scores

    def predict_cell(self, row: int, col: int) -> Label:
        return sign_pm(self.scores[row - 1, col - 1])

    def predict(self, x: SparseVector) -> Label:
        if self.realization is None:
            raise ValueError("matrix predictor has no realization tag; use predict_cell")
        part = part_of_c2(x)
        if part.r != self.realization:
            raise ValueError(f"instance belongs to part r={part.r}, predictor is for r={self.realization}")
        cell = realize_c2(x)
        return self.predict_cell(cell.row, cell.col)


@dataclass
class BinaryHalfspacePredictor(TrainedPredictor):
    """x -> sign(<psi, x>) for +-1 weights psi."""

    psi: BinaryAssignment

    def predict(self, x: SparseVector) -> Label:
        if x.n != self.psi.n:
            raise ValueError(f"dimension mismatch: instance {x.n} vs weights {self.psi.n}")
        total = 0
        for idx, val in x.entries:
            total += self.psi.bits[idx - 1] * val
        return sign_pm(total)


@dataclass
class CompositePredictor(TrainedPredictor):
    """Routes an instance to the child trained on its part; empty parts say +1.

    ``router_obj`` keeps the in-process router the composite was trained
    with; deserialized composites fall back to the named-router registry.
    """

    router_name: str
    n: int
    children: dict[PartId, TrainedPredictor] = field(default_factory=dict)
    default: Label = 1
    router_obj: Router | None = field(default=None, repr=False, compare=False)

    @property
    def router(self) -> Router:
        return self.router_obj if self.router_obj is not None else get_router(self.router_name)

    def predict(self, x: SparseVector) -> Label:
        router = self.router
        part = router.part_of(x)
        child = self.children.get(part)
        if child is None:
            return self.default
        return child.predict(router.transform(x, part))


# ---------------------------------------------------------------------------
# Serialization

def _part_key(part: PartId) -> str:
    if isinstance(part, C2Part):
        return f"r={part.r}"
    if isinstance(part, C3Part):
        return f"i={part.i},b={part.b:+d}"
    return "residual"


def _parse_part_key(token: str) -> PartId:
    if token == "residual":
        return C3Residual()
    if token.startswith("r="):
        return C2Part(int(token[2:]))
    if token.startswith("i="):
        left, _, right = token.partition(",")
        if not right.startswith("b="):
            raise FormatError(f"bad part key {token!r}")
        return C3Part(int(left[2:]), int(right[2:]))
    raise FormatError(f"bad part key {token!r}")


def _emit(node: TrainedPredictor, out: list[str]) -> None:
    if isinstance(node, BinaryHalfspacePredictor):
        out.append(f"binary {node.psi.n}")
        out.append(" ".join(f"{b:+d}" for b in node.psi.bits))
    elif isinstance(node, MajorityTable):
        out.append(f"table {node.n} {node.k} {len(node.table)}")
        for entries in sorted(node.table):
            inst = " ".join(f"{i}:{v:+d}" for i, v in entries)
            label = node.table[entries]
            out.append(f"{inst} -> {label:+d}" if inst else f"-> {label:+d}")
    elif isinstance(node, MatrixPredictor):
        tag = "none" if node.realization is None else str(node.realization)
        out.append(f"matrix r={tag} {node.n_rows} {node.n_cols}")
        for row in node.scores:
            out.append(" ".join(f"{v:.17g}" for v in row))
    elif isinstance(node, CompositePredictor):
        out.append(f"composite {node.router_name} {node.n} {len(node.children)}")
        for part in sorted(node.children, key=part_sort_key):
            out.append(f"part {_part_key(part)}")
            _emit(node.children[part], out)
    else:
        raise TypeError(f"cannot serialize predictor of type {type(node).__name__}")


def serialize_predictor(node: TrainedPredictor) -> str:
    out: list[str] = []
    _emit(node, out)
    return "\n".join(out) + "\n"


class _Reader:
    def __init__(self, lines: list[str]):
        self.lines = lines
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.lines):
            raise FormatError("unexpected end of predictor file")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def done(self) -> bool:
        return self.pos >= len(self.lines)


def _read_node(reader: _Reader) -> TrainedPredictor:
    header = reader.next().split()
    if not header:
        raise FormatError("empty node header")
    tag = header[0]

    if tag == "binary":
        if len(header) != 2:
            raise FormatError("binary header is 'binary <n>'")
        n = int(header[1])
        bits = tuple(int(t) for t in reader.next().split())
        if len(bits) != n:
            raise FormatError(f"binary payload has {len(bits)} weights, expected {n}")
        return BinaryHalfspacePredictor(BinaryAssignment(bits))

    if tag == "table":
        if len(header) != 4:
            raise FormatError("table header is 'table <n> <k> <rows>'")
        n, k, rows = int(header[1]), int(header[2]), int(header[3])
        table: dict[tuple[tuple[int, int], ...], Label] = {}
        for _ in range(rows):
            line = reader.next()
            left, sep, right = line.rpartition("->")
            if not sep:
                raise FormatError(f"table row missing '->': {line!r}")
            label = int(right)
            if label not in (-1, 1):
                raise FormatError(f"table row label must be +-1: {line!r}")
            entries = parse_entries(left.split(), n, "table row")
            table[entries] = label
        return MajorityTable(n, k, table)

    if tag == "matrix":
        if len(header) != 4 or not header[1].startswith("r="):
            raise FormatError("matrix header is 'matrix r=<r> <rows> <cols>'")
        rtag = header[1][2:]
        realization = None if rtag == "none" else int(rtag)
        n_rows, n_cols = int(header[2]), int(header[3])
        scores = np.empty((n_rows, n_cols))
        for i in range(n_rows):
            vals = reader.next().split()
            if len(vals) != n_cols:
                raise FormatError(f"matrix row {i + 1} has {len(vals)} entries, expected {n_cols}")
            scores[i] = [float(v) for v in vals]
        return MatrixPredictor(n_rows, n_cols, scores, realization)

    if tag == "composite":
        if len(header) != 4:
            raise FormatError("composite header is 'composite <router> <n> <children>'")
        router_name, n, count = header[1], int(header[2]), int(header[3])
        try:
            get_router(router_name)
        except ValueError as exc:
            raise FormatError(str(exc)) from exc
        children: dict[PartId, TrainedPredictor] = {}
        for _ in range(count):
            part_line = reader.next().split()
            if len(part_line) != 2 or part_line[0] != "part":
                raise FormatError(f"expected 'part <key>' line, got {' '.join(part_line)!r}")
            part = _parse_part_key(part_line[1])
            children[part] = _read_node(reader)
        return CompositePredictor(router_name, n, children)

    raise FormatError(f"unknown predictor node tag {tag!r}")


def parse_predictor(text: str) -> TrainedPredictor:
    lines = [ln for ln in text.splitlines()]
    reader = _Reader(lines)
    node = _read_node(reader)
    while not reader.done():
        if reader.next().strip():
            raise FormatError("trailing content after predictor")
    return node


def write_predictor(path: str, node: TrainedPredictor) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(serialize_predictor(node))


def read_predictor(path: str) -> TrainedPredictor:
    with open(path, "r", encoding="ascii") as fh:
        return parse_predictor(fh.read())
