"""Decomposable sign matrices: symmetrization, certificates, constructions.

An n x m sign matrix W is beta-decomposable when its symmetrization
[[0, W], [W^T, 0]] splits as P - N with P, N positive semidefinite and every
diagonal entry of both at most beta.  This module provides:

* ``verify_decomposition`` -- the single checker every construction must pass;
* closed-form constructions (spectral split, tensor products, principal
  minors, diagonal and all-ones matrices, row-threshold matrices);
* ``certify_min_beta`` -- a numeric upper-bound certifier that bisects on
  beta and tests feasibility by Dykstra cyclic projection onto the affine
  reconstruction set, the two PSD cones, and the diagonal cap.

The certified value is an upper bound on the true minimal beta up to the
configured tolerances; it is never exact.  Dense float64 matrices only, with
a 256-dimension guard on the certifier.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .errors import FormatError, GuardError, NumericError

#: dimension guard for the dense eigen/projection paths
MAX_CERTIFY_DIM = 256

_KRON_ELEMENT_GUARD = 1 << 24


@dataclass(frozen=True)
class Decomposition:
    """A certified pair (P, N) with P - N equal to some symmetrization.

    ``shape`` records the (rows, cols) of the source sign matrix when known;
    operations that need to map source rows/columns onto symmetrization
    coordinates (minor deletion, tensoring) require it.
    """

    P: np.ndarray
    N: np.ndarray
    beta: float
    shape: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        P = np.array(self.P, dtype=float)
        N = np.array(self.N, dtype=float)
        if P.shape != N.shape or P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError("P and N must be square matrices of equal size")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.shape is not None:
            rows, cols = self.shape
            if rows + cols != P.shape[0]:
                raise ValueError("source shape inconsistent with matrix size")
            object.__setattr__(self, "shape", (int(rows), int(cols)))
        P.setflags(write=False)
        N.setflags(write=False)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def d(self) -> int:
        return int(self.P.shape[0])


@dataclass(frozen=True)
class CertifierConfig:
    """Tolerances and budgets for ``certify_min_beta``.

    ``tolerance`` is the feasibility tolerance Dykstra must reach before a
    beta is declared feasible; ``beta_resolution`` stops the bisection.  When
    ``beta_hi`` is None the spectral-split bound is used, which is always
    feasible.
    """

    tolerance: float = 1e-7
    max_iterations: int = 2000
    beta_lo: float = 0.0
    beta_hi: float | None = None
    beta_resolution: float = 1e-3
    check_every: int = 20

    def __post_init__(self) -> None:
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.beta_lo < 0:
            raise ValueError("beta_lo must be nonnegative")
        if self.beta_hi is not None and self.beta_hi <= self.beta_lo:
            raise ValueError("need beta_lo < beta_hi")
        if self.max_iterations < 1 or self.check_every < 1:
            raise ValueError("iteration counts must be positive")


@dataclass(frozen=True)
class VerifyReport:
    """Worst violation of each decomposition requirement, plus the verdict."""

    ok: bool
    recon_error: float
    min_eigenvalue: float
    diag_excess: float
    sym_error: float

    def __str__(self) -> str:  # pragma: no cover - debugging aid
        status = "pass" if self.ok else "FAIL"
        return (
            f"{status}: recon={self.recon_error:.3e} min_eig={self.min_eigenvalue:.3e} "
            f"diag_excess={self.diag_excess:.3e} sym={self.sym_error:.3e}"
        )


def check_sign_matrix(W: np.ndarray) -> np.ndarray:
    W = np.asarray(W)
    if W.ndim != 2:
        raise ValueError("sign matrix must be 2-dimensional")
    if not np.isin(W, (-1, 1)).all():
        raise ValueError("sign matrix entries must be +-1")
    return W


def symmetrize(W: np.ndarray) -> np.ndarray:
    """The block matrix [[0, W], [W^T, 0]]."""
    W = np.asarray(W, dtype=float)
    n, m = W.shape
    out = np.zeros((n + m, n + m))
    out[:n, n:] = W
    out[n:, :n] = W.T
    return out


def verify_decomposition(
    W: np.ndarray,
    dec: Decomposition,
    *,
    recon_tol: float = 1e-9,
    psd_tol: float = 1e-8,
    diag_tol: float = 1e-9,
    sym_tol: float = 1e-12,
) -> VerifyReport:
    """Check P - N = sym(W), PSD-ness, and the diagonal cap, within tolerances.

    Failures are reported, never raised.
    """
    W = np.asarray(W, dtype=float)
    n, m = W.shape
    if n + m != dec.d:
        raise ValueError(f"decomposition size {dec.d} does not match sym({n}x{m}) = {n + m}")
    S = symmetrize(W)
    sym_error = max(
        float(np.abs(dec.P - dec.P.T).max(initial=0.0)),
        float(np.abs(dec.N - dec.N.T).max(initial=0.0)),
    )
    recon_error = float(np.abs(dec.P - dec.N - S).max(initial=0.0))
    min_eigenvalue = float(
        min(np.linalg.eigvalsh(dec.P).min(), np.linalg.eigvalsh(dec.N).min())
    )
    diag_excess = float(
        max(np.diag(dec.P).max(initial=0.0), np.diag(dec.N).max(initial=0.0)) - dec.beta
    )
    ok = (
        recon_error <= recon_tol
        and min_eigenvalue >= -psd_tol
        and diag_excess <= diag_tol
        and sym_error <= sym_tol
    )
    return VerifyReport(ok, recon_error, min_eigenvalue, diag_excess, sym_error)


def spectral_split(M: np.ndarray, *, shape: tuple[int, int] | None = None) -> Decomposition:
    """Eigen-positive part minus eigen-negative part of a symmetric matrix.

    Always a valid decomposition of M; its beta (the largest diagonal entry
    of either part) is a cheap upper bound for the certifier.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("input must be square")
    if np.abs(M - M.T).max(initial=0.0) > 1e-9:
        raise ValueError("input must be symmetric")
    sym = (M + M.T) / 2.0
    try:
        eigvals, eigvecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed: {exc}") from exc
    pos = np.clip(eigvals, 0.0, None)
    neg = np.clip(-eigvals, 0.0, None)
    P = (eigvecs * pos) @ eigvecs.T
    N = (eigvecs * neg) @ eigvecs.T
    P = (P + P.T) / 2.0
    N = (N + N.T) / 2.0
    beta = float(max(np.diag(P).max(initial=0.0), np.diag(N).max(initial=0.0), 0.0))
    return Decomposition(P, N, beta, shape=shape)


def tensor_product(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product in the standard block layout."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.size * B.size > _KRON_ELEMENT_GUARD:
        raise GuardError(f"tensor product would hold {A.size * B.size} entries")
    return np.kron(A, B)


def tensor_decomposition(dec: Decomposition, A: np.ndarray, *, psd_tol: float = 1e-8) -> Decomposition:
    """Decomposition of W tensor A from a decomposition of W and a PSD factor A.

    Uses sym(W) (x) A = sym(W (x) A): tensoring P and N with A keeps them PSD
    and multiplies the diagonal cap by A's largest diagonal entry.
    """
    if dec.shape is None:
        raise ValueError("decomposition must carry its source shape for tensoring")
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("tensor factor must be square")
    if np.abs(A - A.T).max(initial=0.0) > 1e-9:
        raise ValueError("tensor factor must be symmetric")
    if np.linalg.eigvalsh(A).min() < -psd_tol:
        raise ValueError("tensor factor must be positive semidefinite")
    alpha = float(np.diag(A).max(initial=0.0))
    n, m = dec.shape
    a = A.shape[0]
    return Decomposition(
        tensor_product(dec.P, A),
        tensor_product(dec.N, A),
        dec.beta * alpha,
        shape=(n * a, m * a),
    )


def delete_rowcol_decomposition(
    dec: Decomposition, *, row: int | None = None, col: int | None = None
) -> Decomposition:
    """Decomposition of the source with one row or one column removed.

    Row i of the source maps to symmetrization coordinate i, column j to
    coordinate rows + j (1-based); deleting takes the corresponding principal
    minors of P and N, which stay PSD, so beta is unchanged.
    """
    if dec.shape is None:
        raise ValueError("decomposition must carry its source shape for deletion")
    if (row is None) == (col is None):
        raise ValueError("specify exactly one of row=, col=")
    rows, cols = dec.shape
    if row is not None:
        if not 1 <= row <= rows:
            raise ValueError(f"row {row} out of range [1, {rows}]")
        coord = row - 1
        new_shape = (rows - 1, cols)
    else:
        if not 1 <= col <= cols:
            raise ValueError(f"column {col} out of range [1, {cols}]")
        coord = rows + col - 1
        new_shape = (rows, cols - 1)
    keep = [i for i in range(dec.d) if i != coord]
    sel = np.ix_(keep, keep)
    return Decomposition(dec.P[sel], dec.N[sel], dec.beta, shape=new_shape)


def triangular_matrix(n: int) -> np.ndarray:
    """The n x n sign matrix with +1 on and above the diagonal, -1 below."""
    if n < 1:
        raise ValueError("need n >= 1")
    rows = np.arange(n)[:, None]
    cols = np.arange(n)[None, :]
    return np.where(cols >= rows, 1, -1).astype(np.int8)


def all_ones_decomposition(n: int) -> Decomposition:
    """Rank-one split of the all-ones matrix; both parts have diagonal 1/2."""
    if n < 1:
        raise ValueError("need n >= 1")
    P = np.full((2 * n, 2 * n), 0.5)
    block = np.array([[1.0, -1.0], [-1.0, 1.0]])
    N = 0.5 * np.kron(block, np.ones((n, n)))
    return Decomposition(P, N, 0.5, shape=(n, n))


def diagonal_decomposition(D: np.ndarray) -> Decomposition:
    """Per-index 2x2 split of a real diagonal matrix; beta = max |D_ii|."""
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("input must be square")
    if np.abs(D - np.diag(np.diag(D))).max(initial=0.0) != 0.0:
        raise ValueError("input must be diagonal")
    n = D.shape[0]
    diag = np.diag(D)
    P = np.zeros((2 * n, 2 * n))
    N = np.zeros((2 * n, 2 * n))
    for i, d in enumerate(diag):
        P[i, i] = P[n + i, n + i] = abs(d)
        P[i, n + i] = P[n + i, i] = d
        N[i, i] = N[n + i, n + i] = abs(d)
    beta = float(np.abs(diag).max(initial=0.0))
    return Decomposition(P, N, beta, shape=(n, n))


# ---------------------------------------------------------------------------
# Numeric minimal-beta certifier (Dykstra cyclic projection + bisection)

def _project_affine(P: np.ndarray, N: np.ndarray, S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    residual = S - (P - N)
    return P + residual / 2.0, N - residual / 2.0


def _project_psd(M: np.ndarray) -> np.ndarray:
    sym = (M + M.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(sym)
    clipped = np.clip(eigvals, 0.0, None)
    out = (eigvecs * clipped) @ eigvecs.T
    return (out + out.T) / 2.0


def _project_diag_cap(M: np.ndarray, beta: float) -> np.ndarray:
    out = M.copy()
    diag = np.diag(out)
    np.fill_diagonal(out, np.minimum(diag, beta))
    return out


def _violations(P: np.ndarray, N: np.ndarray, S: np.ndarray, beta: float) -> float:
    recon = np.abs(P - N - S).max(initial=0.0)
    diag = max(np.diag(P).max(initial=0.0), np.diag(N).max(initial=0.0)) - beta
    mineig = min(np.linalg.eigvalsh(P).min(), np.linalg.eigvalsh(N).min())
    return float(max(recon, diag, -mineig, 0.0))


def _dykstra_feasible(
    S: np.ndarray,
    beta: float,
    start: tuple[np.ndarray, np.ndarray],
    cfg: CertifierConfig,
) -> tuple[bool, tuple[np.ndarray, np.ndarray]]:
    """Search for (P, N) with P - N = S, both PSD, diagonals <= beta.

    Dykstra's corrections make the cyclic projections converge to a point of
    the intersection when one exists; with a finite budget, failure to reach
    the tolerance is reported as infeasible (so the certified beta stays an
    upper bound).
    """
    P = start[0].copy()
    N = start[1].copy()
    d = P.shape[0]
    # one correction term per constraint set, per matrix it touches
    inc_aff_P = np.zeros((d, d))
    inc_aff_N = np.zeros((d, d))
    inc_psd_P = np.zeros((d, d))
    inc_psd_N = np.zeros((d, d))
    inc_cap_P = np.zeros((d, d))
    inc_cap_N = np.zeros((d, d))

    prev_P = P.copy()
    prev_N = N.copy()
    for iteration in range(1, cfg.max_iterations + 1):
        vP, vN = P + inc_aff_P, N + inc_aff_N
        P, N = _project_affine(vP, vN, S)
        inc_aff_P, inc_aff_N = vP - P, vN - N

        vP = P + inc_psd_P
        P = _project_psd(vP)
        inc_psd_P = vP - P

        vN = N + inc_psd_N
        N = _project_psd(vN)
        inc_psd_N = vN - N

        vP, vN = P + inc_cap_P, N + inc_cap_N
        P = _project_diag_cap(vP, beta)
        N = _project_diag_cap(vN, beta)
        inc_cap_P, inc_cap_N = vP - P, vN - N

        if iteration % cfg.check_every == 0 or iteration == cfg.max_iterations:
            gap = _violations(P, N, S, beta)
            if gap <= cfg.tolerance:
                return True, (P, N)
            delta = max(np.abs(P - prev_P).max(initial=0.0), np.abs(N - prev_N).max(initial=0.0))
            if delta <= cfg.tolerance * 1e-2:
                return False, (P, N)  # stalled short of the intersection
            prev_P, prev_N = P.copy(), N.copy()
    return False, (P, N)


def _repair(
    S: np.ndarray,
    P: np.ndarray,
    N: np.ndarray,
    beta: float,
    shape: tuple[int, int],
) -> Decomposition:
    """Turn an approximately feasible Dykstra point into a strictly verifying one.

    The affine correction makes the reconstruction exact up to roundoff, a
    uniform eigenvalue shift (which preserves P - N) removes any residual
    PSD deficit, and whatever the diagonals grew to is folded into the
    reported beta, so the result verifies at the default tolerances.
    """
    P = (P + P.T) / 2.0
    N = (N + N.T) / 2.0
    P, N = _project_affine(P, N, S)
    mineig = min(np.linalg.eigvalsh(P).min(), np.linalg.eigvalsh(N).min())
    if mineig < 0:
        shift = (-float(mineig) + 1e-12) * np.eye(P.shape[0])
        P = P + shift
        N = N + shift
    max_diag = float(max(np.diag(P).max(initial=0.0), np.diag(N).max(initial=0.0), 0.0))
    return Decomposition(P, N, max(beta, max_diag), shape=shape)


def certify_min_beta(
    W: np.ndarray, cfg: CertifierConfig | None = None
) -> tuple[float, Decomposition]:
    """Bisect on beta for the smallest value Dykstra can certify feasible.

    Returns the certified beta (an upper bound on the true minimum, never
    exact) and a repaired decomposition that passes ``verify_decomposition``
    at its default tolerances.  Raises :class:`NumericError` when no feasible
    beta is found at or below the configured upper bound.
    """
    cfg = cfg or CertifierConfig()
    W = check_sign_matrix(np.asarray(W))
    n, m = W.shape
    if n + m > MAX_CERTIFY_DIM:
        raise GuardError(f"certifier limited to n+m <= {MAX_CERTIFY_DIM}: got {n + m}")
    S = symmetrize(W)
    spectral = spectral_split(S, shape=(n, m))

    if cfg.beta_hi is None:
        hi = spectral.beta
        best_point = (spectral.P.copy(), spectral.N.copy())
    else:
        hi = float(cfg.beta_hi)
        feasible, point = _dykstra_feasible(S, hi, (spectral.P.copy(), spectral.N.copy()), cfg)
        if not feasible:
            raise NumericError(f"no feasible beta found at or below beta_hi={hi}")
        best_point = point

    lo = float(cfg.beta_lo)
    if lo >= hi:
        lo = 0.0
    while hi - lo > cfg.beta_resolution:
        mid = (hi + lo) / 2.0
        feasible, point = _dykstra_feasible(S, mid, best_point, cfg)
        if feasible:
            hi = mid
            best_point = point
        else:
            lo = mid

    dec = _repair(S, best_point[0], best_point[1], hi, (n, m))
    report = verify_decomposition(W, dec)
    if not report.ok:
        raise NumericError(f"certifier could not repair its decomposition: {report}")
    return dec.beta, dec


_T_CERT_CACHE: dict[int, Decomposition] = {}


def t_certificate(n: int, cfg: CertifierConfig | None = None) -> Decomposition:
    """Certified decomposition of the n x n triangular sign matrix, memoized."""
    if n not in _T_CERT_CACHE:
        _, dec = certify_min_beta(triangular_matrix(n), cfg)
        _T_CERT_CACHE[n] = dec
    return _T_CERT_CACHE[n]


def row_threshold_matrix(thresholds: Iterable[int]) -> np.ndarray:
    t = list(int(v) for v in thresholds)
    n = len(t)
    if n < 1:
        raise ValueError("need at least one threshold")
    if any(not 0 <= v <= n for v in t):
        raise ValueError(f"thresholds must lie in [0, {n}]")
    cols = np.arange(1, n + 1)[None, :]
    return np.where(cols <= np.array(t)[:, None], -1, 1).astype(np.int8)


def row_threshold_decomposition(
    thresholds: Iterable[int],
    base: Decomposition | None = None,
    cfg: CertifierConfig | None = None,
) -> tuple[np.ndarray, Decomposition]:
    """Sign matrix whose row i is -1 up to thresholds[i] then +1, with certificate.

    The matrix is carved out of T (x) J, where T is the certified triangular
    matrix one size up (thresholds may reach n, which needs an extra all
    minus-one block row) and J is all ones: row i picks the block row at level
    thresholds[i], column j picks block column j, and because J is constant
    the principal minor of the tensored decomposition is just an index lookup
    into the base certificate.  Selecting rows in their original order folds
    the sort and un-permute steps into the same lookup.  beta is the base
    certificate's beta.
    """
    t = [int(v) for v in thresholds]
    W = row_threshold_matrix(t)
    n = len(t)
    m = n + 1
    if base is None:
        base = t_certificate(m, cfg)
    if base.shape is None or base.shape != (m, m) or base.d != 2 * m:
        raise ValueError(f"base certificate must decompose the {m}x{m} triangular matrix")
    # symmetrization coordinates in the base: row block for level t_i, then column blocks
    coords = [ti for ti in t] + [m + j for j in range(n)]
    sel = np.ix_(coords, coords)
    dec = Decomposition(base.P[sel], base.N[sel], base.beta, shape=(n, n))
    return W, dec


# ---------------------------------------------------------------------------
# Decomposition cache file format

def serialize_decomposition(dec: Decomposition) -> str:
    lines = [f"dim {dec.d}", f"beta {dec.beta!r}", "P"]
    for row in dec.P:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    lines.append("N")
    for row in dec.N:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def parse_decomposition(text: str) -> Decomposition:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 3 or not lines[0].startswith("dim ") or not lines[1].startswith("beta "):
        raise FormatError("expected 'dim <d>' then 'beta <value>' headers")
    try:
        d = int(lines[0].split()[1])
        beta = float(lines[1].split()[1])
    except (IndexError, ValueError) as exc:
        raise FormatError(f"bad header: {exc}") from exc
    if lines[2] != "P" or len(lines) != 4 + 2 * d or lines[3 + d] != "N":
        raise FormatError("expected 'P' and 'N' blocks of d rows each")

    def block(rows: list[str]) -> np.ndarray:
        out = np.empty((d, d))
        for i, row in enumerate(rows):
            vals = row.split()
            if len(vals) != d:
                raise FormatError(f"matrix row has {len(vals)} entries, expected {d}")
            out[i] = [float(v) for v in vals]
        return out

    P = block(lines[3 : 3 + d])
    N = block(lines[4 + d : 4 + 2 * d])
    return Decomposition(P, N, beta)


def write_decomposition(path: str, dec: Decomposition) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(serialize_decomposition(dec))


def read_decomposition(path: str, shape: tuple[int, int] | None = None) -> Decomposition:
    with open(path, "r", encoding="ascii") as fh:
        dec = parse_decomposition(fh.read())
    if shape is not None:
        dec = replace(dec, shape=shape)
    return dec
