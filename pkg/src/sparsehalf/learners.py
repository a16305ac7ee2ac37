"""Training procedures: majority table, score-matrix learner, partition glue.

``table_majority_learn`` is the sample-hungry baseline: per-instance majority
with unseen instances defaulting to +1.  ``matrix_mw_learn`` learns +-1 cell
labels of an n x m matrix through a trace-capped positive semidefinite pair,
updated by matrix exponentiated gradient on the hinge loss and converted
online-to-batch by averaging the per-iterate margins.  ``partition_learn``
splits a sample along a router's parts, trains one sub-learner per part, and
routes predictions.  ``learn_h2``/``learn_h3`` compose these into the
efficient learners for at-most-2-sparse and at-most-3-sparse instances.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .core import Example, Label, Sample, empirical_error, erm_binary_halfspace
from .errors import NumericError
from .predictors import (
    BinaryHalfspacePredictor,
    CompositePredictor,
    MajorityTable,
    MatrixPredictor,
    TrainedPredictor,
)
from .realizations import C2_ROUTER, C3_ROUTER, C2Part, PartId, Router, part_sort_key, realize_c2
from .rng import derive_seed, generator

Cell = tuple[int, int]


@dataclass(frozen=True)
class LearnerConfig:
    """Target accuracy, seed, and score-matrix learner hyperparameters.

    ``beta`` is the decomposability budget; when unset the threshold parts
    use ``beta_log_coeff * log2(n)``.  The trace cap defaults to
    ``2 * beta * (rows + cols)``.  ``diag_route`` picks how the singleton
    (diagonal) parts are learned: exact per-cell majority, or the matrix
    machinery for comparison.
    """

    epsilon: float = 0.1
    delta: float = 0.1
    seed: int = 0
    beta: float | None = None
    beta_log_coeff: float = 4.0
    eta: float = 0.5
    epochs: int = 10
    tau: float | None = None
    diag_route: str = "majority"

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.beta is not None and self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.diag_route not in ("majority", "matrix"):
            raise ValueError("diag_route must be 'majority' or 'matrix'")


@dataclass(frozen=True)
class PartitionReport:
    """Per-part example counts, empirical masses, and training errors."""

    counts: dict[PartId, int]
    masses: dict[PartId, Fraction]
    train_errors: dict[PartId, Fraction]
    total: int


def table_majority_learn(sample: Sample) -> MajorityTable:
    """Majority label per distinct instance; ties and unseen instances -> +1."""
    votes: dict[tuple, int] = defaultdict(int)
    for ex in sample.items:
        votes[ex.x.entries] += ex.y
    table = {key: (1 if total >= 0 else -1) for key, total in votes.items()}
    return MajorityTable(sample.n, sample.k, table)


def _resolve_beta(cfg: LearnerConfig, dims: tuple[int, int]) -> float:
    if cfg.beta is not None:
        return cfg.beta
    return cfg.beta_log_coeff * math.log2(max(2, max(dims)))


def _eg_margins(C: np.ndarray, tau: float, d: int) -> tuple[np.ndarray, float]:
    """Margins and capped trace of the exponentiated-gradient iterate.

    The PSD pair is exp(sym(C)) and exp(-sym(C)) rescaled to the trace cap;
    via the SVD C = U S V^T the margin block is 2c U sinh(S) V^T and the raw
    trace is 2 (sum_k 2 cosh(S_k) + d - 2K).  Large spectra are evaluated in
    a scaled domain so nothing overflows.
    """
    U, S, Vt = np.linalg.svd(C, full_matrices=False)
    K = S.size
    smax = float(S[0]) if K else 0.0
    if smax < 600.0:
        trace_raw = 2.0 * (2.0 * np.cosh(S).sum() + (d - 2 * K))
        scale = 1.0 if trace_raw <= tau else tau / trace_raw
        margins = (U * (2.0 * scale * np.sinh(S))) @ Vt
        return margins, float(min(trace_raw, tau))
    up = np.exp(S - smax)
    down = np.exp(-S - smax)
    scaled_trace = 2.0 * ((up + down).sum() + (d - 2 * K) * math.exp(-smax))
    margins = (U * (tau * (up - down) / scaled_trace)) @ Vt
    return margins, tau


def matrix_mw_learn(
    cells: Sequence[tuple[Cell, Label]],
    dims: tuple[int, int],
    cfg: LearnerConfig,
    realization: int | None = None,
) -> MatrixPredictor:
    """Learn +-1 labels of matrix cells by matrix exponentiated gradient.

    Maintains a PSD pair (P, N) of size rows+cols with trace(P) + trace(N)
    capped at tau; each example incurs the hinge loss on the (P - N) margin
    at its cell, the accumulated negative gradient is exponentiated
    spectrally and rescaled to the cap when exceeded.  The returned predictor
    is the sign of the margins averaged over all iterates (0 -> +1).
    Example order is reshuffled every epoch from the config seed, so the
    procedure is deterministic given (cells, cfg).
    """
    n_rows, n_cols = dims
    if n_rows < 1 or n_cols < 1:
        raise ValueError("matrix dimensions must be positive")
    for (row, col), label in cells:
        if not (1 <= row <= n_rows and 1 <= col <= n_cols):
            raise ValueError(f"cell ({row}, {col}) outside {n_rows}x{n_cols}")
        if label not in (-1, 1):
            raise ValueError(f"cell label must be +-1: got {label}")

    beta = _resolve_beta(cfg, dims)
    d = n_rows + n_cols
    tau = cfg.tau if cfg.tau is not None else 2.0 * beta * d
    if tau <= 0:
        raise ValueError("trace cap must be positive")

    C = np.zeros((n_rows, n_cols))
    margin_sum = np.zeros((n_rows, n_cols))
    steps = 0
    max_trace = 0.0
    margins: np.ndarray | None = None
    trace_now = 0.0
    rng = generator(cfg.seed)

    for epoch in range(cfg.epochs):
        order = rng.permutation(len(cells)) if cells else []
        for pos in order:
            (row, col), label = cells[pos]
            if margins is None:
                if not np.isfinite(C).all():
                    raise NumericError(f"non-finite accumulator in epoch {epoch + 1}; reduce eta")
                margins, trace_now = _eg_margins(C, tau, d)
                if not np.isfinite(margins).all():
                    raise NumericError(f"non-finite margins in epoch {epoch + 1}; reduce eta")
            margin_sum += margins
            steps += 1
            if trace_now > max_trace:
                max_trace = trace_now
            if label * margins[row - 1, col - 1] < 1.0:
                C[row - 1, col - 1] += 0.5 * cfg.eta * label
                margins = None  # iterate changed, recompute lazily
    scores = margin_sum / steps if steps else margin_sum
    return MatrixPredictor(n_rows, n_cols, scores, realization, max_trace=max_trace, trace_cap=tau)


def partition_learn(
    sample: Sample,
    router: Router,
    factory: Callable[[PartId], Callable[[Sample], TrainedPredictor]],
) -> tuple[CompositePredictor, PartitionReport]:
    """Split a sample along the router's parts and train one learner per part.

    Slices keep their original order and are transformed by the router before
    training; parts with no examples predict the +1 default.  The report
    carries per-part counts, empirical masses, and training errors.
    """
    slices: dict[PartId, list[Example]] = defaultdict(list)
    for ex in sample.items:
        part = router.part_of(ex.x)
        slices[part].append(Example(router.transform(ex.x, part), ex.y))

    children: dict[PartId, TrainedPredictor] = {}
    counts: dict[PartId, int] = {}
    masses: dict[PartId, Fraction] = {}
    errors: dict[PartId, Fraction] = {}
    total = len(sample)
    for part in sorted(slices, key=part_sort_key):
        part_sample = Sample(router.child_k(part), sample.n, tuple(slices[part]))
        child = factory(part)(part_sample)
        children[part] = child
        counts[part] = len(part_sample)
        masses[part] = Fraction(len(part_sample), total)
        errors[part] = empirical_error(child, part_sample)

    composite = CompositePredictor(router.name, sample.n, children, router_obj=router)
    return composite, PartitionReport(counts, masses, errors, total)


def _check_sparsity(sample: Sample, k: int, what: str) -> None:
    for ex in sample.items:
        if ex.x.nnz > k:
            raise ValueError(f"{what} needs at-most-{k}-sparse instances, found {ex.x.nnz} nonzeros")


def learn_h2(sample: Sample, cfg: LearnerConfig | None = None) -> CompositePredictor:
    """Learner for halfspaces over at-most-2-sparse instances.

    Partitions by coordinate sum.  The sum parts r in {0, +-2} are realized
    as matrix cells and trained with ``matrix_mw_learn`` (sum pairs also fill
    the mirrored cell); the singleton parts r = +-1 are plain per-cell
    majority, which is exact empirical risk minimization there.
    """
    cfg = cfg or LearnerConfig()
    _check_sparsity(sample, 2, "learn_h2")
    n = sample.n

    def factory(part: PartId) -> Callable[[Sample], TrainedPredictor]:
        assert isinstance(part, C2Part)
        child_seed = derive_seed(cfg.seed, 2, C2_ROUTER.part_index(part))
        child_cfg = replace(cfg, seed=child_seed)
        if abs(part.r) == 1 and cfg.diag_route == "majority":
            return table_majority_learn

        def train(part_sample: Sample) -> TrainedPredictor:
            cells: list[tuple[Cell, Label]] = []
            for ex in part_sample.items:
                cell = realize_c2(ex.x)
                cells.append(((cell.row, cell.col), ex.y))
                if abs(part.r) == 2:
                    cells.append(((cell.col, cell.row), ex.y))
            return matrix_mw_learn(cells, (n, n), child_cfg, realization=part.r)

        return train

    composite, _ = partition_learn(sample, C2_ROUTER, factory)
    return composite


def learn_h3(sample: Sample, cfg: LearnerConfig | None = None) -> CompositePredictor:
    """Learner for halfspaces over at-most-3-sparse instances.

    Partitions by first nonzero coordinate; each such part is reduced to an
    at-most-2-sparse problem by zeroing that coordinate and handed to
    ``learn_h2``.  The residual part (first nonzero beyond n-2, or the zero
    vector) is already 2-sparse and learned directly.
    """
    cfg = cfg or LearnerConfig()
    _check_sparsity(sample, 3, "learn_h3")

    def factory(part: PartId) -> Callable[[Sample], TrainedPredictor]:
        child_seed = derive_seed(cfg.seed, 3, C3_ROUTER.part_index(part))
        child_cfg = replace(cfg, seed=child_seed)
        return lambda part_sample: learn_h2(part_sample, child_cfg)

    composite, _ = partition_learn(sample, C3_ROUTER, factory)
    return composite


LEARNER_NAMES = ("table", "h2", "h3", "erm-binary")


def make_learner(name: str, cfg: LearnerConfig, *, force: bool = False) -> Callable[[Sample], TrainedPredictor]:
    """Named training procedure as a Sample -> TrainedPredictor callable."""
    if name == "table":
        return table_majority_learn
    if name == "h2":
        return lambda sample: learn_h2(sample, cfg)
    if name == "h3":
        return lambda sample: learn_h3(sample, cfg)
    if name == "erm-binary":
        def train(sample: Sample) -> TrainedPredictor:
            psi, _ = erm_binary_halfspace(sample, force=force)
            return BinaryHalfspacePredictor(psi)

        return train
    raise ValueError(f"unknown learner {name!r}; choose from {LEARNER_NAMES}")
