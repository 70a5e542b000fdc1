"""Desk-scale ground truth: exact spectral embeddings and distortion reports.

Everything here goes through a full dense eigendecomposition and is capped
at a few thousand rows; it exists to validate the compressive engine, not
to scale.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .engine import EmbedConfig, EmbeddingMatrix, _apply_expansion, fold_seed, sample_projection
from .errors import OracleCapError, OracleError
from .legendre import expansion_eval, legendre_coefficients
from .sparse import SparseMatrix

ORACLE_CAP = 3000
EIG_RESIDUAL_TOL = 1e-8
PERCENTILE_LEVELS = (1, 5, 25, 50, 75, 95, 99)
DEFAULT_MAX_PAIRS = 100_000
CALIBRATION_BIN_WIDTH = 0.1  # bins centered on -1.0, -0.9, ..., 1.0


@dataclass
class ExactEmbedding:
    """Rows of f(S) in compact form: eigenvector columns scaled by f(eigenvalue),
    with exact-zero weights dropped. Pairwise distances and correlations match
    the full f(S) rows."""

    embedding: np.ndarray
    eigenvalues: np.ndarray
    basis: str = "dense-eigh"

    @property
    def n_rows(self) -> int:
        return self.embedding.shape[0]


def _dense_symmetric(S, cap: int) -> np.ndarray:
    a = S.to_dense() if isinstance(S, SparseMatrix) else np.asarray(S, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if a.shape[0] > cap:
        raise OracleCapError(
            f"matrix of size {a.shape[0]} exceeds the dense-oracle cap {cap}"
        )
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-10:
        raise ValueError("oracle requires a symmetric matrix")
    return a


def exact_embedding(S, f, cap: int = ORACLE_CAP) -> ExactEmbedding:
    """Exact embedding by full eigendecomposition of a dense symmetric matrix."""
    a = _dense_symmetric(S, cap)
    lam, vec = np.linalg.eigh(a)
    residual = float(np.max(np.abs(a @ vec - vec * lam), initial=0.0))
    if residual > EIG_RESIDUAL_TOL:
        raise OracleError(f"eigensolver residual {residual:.3e} above {EIG_RESIDUAL_TOL}")
    weights = np.atleast_1d(np.asarray(f(lam), dtype=np.float64))
    keep = weights != 0.0
    emb = vec[:, keep] * weights[keep]
    return ExactEmbedding(embedding=emb, eigenvalues=lam)


def _rows_of(x) -> np.ndarray:
    if isinstance(x, ExactEmbedding):
        return x.embedding
    if isinstance(x, EmbeddingMatrix):
        return x.values
    return np.asarray(x, dtype=np.float64)


def normalized_correlation(X, i: int, j: int) -> float:
    """Cosine similarity of rows i and j; zero rows correlate as 0."""
    rows = _rows_of(X)
    u, v = rows[i], rows[j]
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v / (nu * nv))


def _pair_correlations(rows: np.ndarray, pairs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(rows, axis=1)
    a, b = pairs[:, 0], pairs[:, 1]
    denom = norms[a] * norms[b]
    zero = denom == 0.0
    dots = np.einsum("ij,ij->i", rows[a], rows[b])
    out = np.zeros(len(pairs))
    np.divide(dots, denom, out=out, where=~zero)
    return out, zero


def sample_pairs(n: int, n_pairs: int | None, seed: int) -> np.ndarray:
    """Uniform vertex pairs (i < j) without replacement, deterministic per seed."""
    total = n * (n - 1) // 2
    if n_pairs is None:
        n_pairs = min(DEFAULT_MAX_PAIRS, total)
    n_pairs = min(n_pairs, total)
    if n_pairs == total:
        iu = np.triu_indices(n, k=1)
        return np.stack(iu, axis=1).astype(np.int64)
    rng = np.random.default_rng(seed)
    codes = np.empty(0, dtype=np.uint64)
    while len(codes) < n_pairs:
        want = n_pairs - len(codes)
        i = rng.integers(0, n, size=2 * want + 16)
        j = rng.integers(0, n, size=2 * want + 16)
        ok = i != j
        lo = np.minimum(i[ok], j[ok]).astype(np.uint64)
        hi = np.maximum(i[ok], j[ok]).astype(np.uint64)
        codes = np.unique(np.concatenate([codes, lo * np.uint64(n) + hi]))
    codes = codes[:n_pairs]
    return np.stack([codes // np.uint64(n), codes % np.uint64(n)], axis=1).astype(np.int64)


@dataclass
class CalibrationBin:
    center: float
    count: int
    percentiles: dict[int, float]


@dataclass
class DistortionReport:
    """Percentiles of correlation deviation, or per-bin calibration curves."""

    mode: str
    pair_sample_size: int
    zero_row_pairs: int = 0
    percentiles: dict[int, float] | None = None
    bins: list[CalibrationBin] = field(default_factory=list)


def distortion_percentiles(
    exact,
    approx,
    n_pairs: int | None = None,
    seed: int = 0,
    mode: str = "deviation",
) -> DistortionReport:
    """Compare normalized correlations of two embeddings over sampled pairs.

    ``deviation`` mode reports percentiles of (approx - exact) correlation;
    ``calibration`` mode bins pairs by exact correlation and reports
    percentiles of the approximate correlation per bin.
    """
    X, Y = _rows_of(exact), _rows_of(approx)
    if X.shape[0] != Y.shape[0]:
        raise ValueError("embeddings must have the same number of rows")
    if mode not in ("deviation", "calibration"):
        raise ValueError("mode must be 'deviation' or 'calibration'")
    pairs = sample_pairs(X.shape[0], n_pairs, seed)
    ex, ez = _pair_correlations(X, pairs)
    ap, az = _pair_correlations(Y, pairs)
    zero_pairs = int(np.sum(ez | az))
    if mode == "deviation":
        dev = ap - ex
        pct = {p: float(v) for p, v in zip(PERCENTILE_LEVELS, np.percentile(dev, PERCENTILE_LEVELS))}
        return DistortionReport(
            mode=mode, pair_sample_size=len(pairs), zero_row_pairs=zero_pairs, percentiles=pct
        )
    centers = np.round(np.arange(-1.0, 1.0 + CALIBRATION_BIN_WIDTH / 2, CALIBRATION_BIN_WIDTH), 10)
    bins = []
    idx = np.clip(np.round((ex + 1.0) / CALIBRATION_BIN_WIDTH).astype(int), 0, len(centers) - 1)
    for k, c in enumerate(centers):
        sel = idx == k
        cnt = int(np.sum(sel))
        if cnt == 0:
            continue
        vals = np.percentile(ap[sel], PERCENTILE_LEVELS)
        bins.append(
            CalibrationBin(
                center=float(c),
                count=cnt,
                percentiles={p: float(v) for p, v in zip(PERCENTILE_LEVELS, vals)},
            )
        )
    return DistortionReport(
        mode=mode, pair_sample_size=len(pairs), zero_row_pairs=zero_pairs, bins=bins
    )


def distance_bound_audit(
    S, f, cfg: EmbedConfig, trials: int, cap: int = ORACLE_CAP
) -> float:
    """Fraction of (trial, pair) events violating the two-sided distance bound.

    For each of ``trials`` fresh projections the audit checks, for every
    vertex pair, that the compressive distance lies within
    sqrt(1 -+ eps) * (exact distance -+ delta sqrt(2)), where delta is the
    expansion's worst error at the true eigenvalues.
    """
    a = _dense_symmetric(S, cap)
    lam, vec = np.linalg.eigh(a)
    weights = np.atleast_1d(np.asarray(f(lam), dtype=np.float64))
    exact = vec * weights
    expansion = legendre_coefficients(f, cfg.L)
    delta = float(np.max(np.abs(weights - expansion_eval(expansion, lam)), initial=0.0))

    d_exact = _pairwise_distances(exact)
    slack = delta * math.sqrt(2.0)
    lower = math.sqrt(1.0 - cfg.epsilon) * (d_exact - slack)
    upper = math.sqrt(1.0 + cfg.epsilon) * (d_exact + slack)

    sp = SparseMatrix.from_dense(a)
    n = a.shape[0]
    violations = 0
    for t in range(trials):
        omega = sample_projection(n, cfg.d, fold_seed(cfg.seed, t))
        emb = _apply_expansion(sp, expansion, omega)
        d_approx = _pairwise_distances(emb)
        violations += int(np.sum((d_approx < lower) | (d_approx > upper)))
    return violations / (trials * len(d_exact))


def _pairwise_distances(rows: np.ndarray) -> np.ndarray:
    sq = np.sum(rows * rows, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (rows @ rows.T)
    iu = np.triu_indices(rows.shape[0], k=1)
    return np.sqrt(np.maximum(d2[iu], 0.0))


# -- report serialization ----------------------------------------------------


def report_to_dict(report: DistortionReport) -> dict:
    out = {
        "mode": report.mode,
        "pair_sample_size": report.pair_sample_size,
        "zero_row_pairs": report.zero_row_pairs,
    }
    if report.percentiles is not None:
        out["percentiles"] = {str(k): v for k, v in report.percentiles.items()}
    if report.bins:
        out["bins"] = [
            {
                "center": b.center,
                "count": b.count,
                "percentiles": {str(k): v for k, v in b.percentiles.items()},
            }
            for b in report.bins
        ]
    return out


def write_percentiles_csv(report: DistortionReport, path) -> None:
    if report.percentiles is None:
        raise ValueError("report has no deviation percentiles")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["percentile", "value"])
        for p in PERCENTILE_LEVELS:
            w.writerow([p, repr(report.percentiles[p])])


def write_calibration_csv(report: DistortionReport, path) -> None:
    if not report.bins:
        raise ValueError("report has no calibration bins")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_center"] + [f"p{p}" for p in PERCENTILE_LEVELS])
        for b in report.bins:
            w.writerow([b.center] + [repr(b.percentiles[p]) for p in PERCENTILE_LEVELS])


def write_report_json(report: DistortionReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
