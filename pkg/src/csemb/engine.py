"""The compressive embedding engine.

Given a symmetric sparse S with spectral norm at most 1, the embedding of
its rows is E = f_L(S) Omega: an order-L Legendre matrix polynomial applied
to a random sign projection block. The iteration mirrors the scalar
recursion exactly,

    Q(0) = Omega,  Q(r) = (2 - 1/r) S Q(r-1) - (1 - 1/r) Q(r-2),
    E = sum_r a(r) Q(r),

costing one multi-vector product per order and nothing else superlinear.
Cascading applies a shorter expansion of the b-th root of f, b times, which
deepens the nulls the plain expansion leaves shallow.

Every random entry is a pure function of (seed, position), so results are
bit-identical for any worker count and any column subset.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError
from .functions import odd_extension, root_function
from .legendre import LegendreExpansion, QuadratureSpec, legendre_coefficients
from .sparse import SparseMatrix, dilate, spmv_multi

logger = logging.getLogger("csemb.engine")

COLUMN_CHUNK = 32  # fixed work unit; must not depend on worker count
_NORM_SEED_TAG = 0x6E6F726D  # "norm"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_MIX_B = np.uint64(0x94D049BB133111EB)
_U64 = (1 << 64) - 1


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer, vectorized over uint64 arrays (wrapping)."""
    with np.errstate(over="ignore"):
        z = z + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX_A
        z = (z ^ (z >> np.uint64(27))) * _MIX_B
        return z ^ (z >> np.uint64(31))


def fold_seed(seed: int, index: int) -> int:
    """Derive a decorrelated sub-seed from (seed, index)."""
    h = _mix64(np.uint64((seed & _U64)) + np.uint64(index & _U64))
    return int(h)


def jl_dimension(n: int, epsilon: float, beta: float) -> int:
    """Smallest d strictly above (4 + 2 beta) ln(n) / (eps^2/2 - eps^3/3)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if not beta > 0.0:
        raise ValueError("beta must be positive")
    bound = (4.0 + 2.0 * beta) * math.log(n) / (epsilon**2 / 2.0 - epsilon**3 / 3.0)
    return math.floor(bound) + 1


def default_dimension(n: int) -> int:
    """The practical operating point ceil(6 ln n), well below the worst-case
    bound of :func:`jl_dimension`."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return max(1, math.ceil(6.0 * math.log(n)))


def sample_projection(n: int, d: int, seed: int) -> np.ndarray:
    """An n x d block with i.i.d. entries +-1/sqrt(d).

    Entry (i, j) is a pure function of (seed, i, j): the sign comes from a
    64-bit hash of the flat position, so regeneration, column subsets, and
    parallel schedules all agree bit-for-bit.
    """
    if n < 1 or d < 1:
        raise ValueError("projection shape must be positive")
    key = _mix64(np.uint64(seed & _U64))
    scale = 1.0 / math.sqrt(d)
    out = np.empty((n, d))
    cols = np.arange(d, dtype=np.uint64)
    step = max(1, (1 << 22) // max(d, 1))
    with np.errstate(over="ignore"):
        for lo in range(0, n, step):
            hi = min(lo + step, n)
            idx = np.arange(lo, hi, dtype=np.uint64)[:, None] * np.uint64(d) + cols
            h = _mix64(idx ^ key)
            out[lo:hi] = np.where(h >> np.uint64(63) & np.uint64(1), scale, -scale)
    return out


@dataclass(frozen=True)
class EmbedConfig:
    """Parameters of one embedding run.

    ``L`` is the total polynomial order, split into ``b`` cascade stages of
    order L/b each; ``d`` is the embedding dimension; ``epsilon``/``beta``
    are the projection's distortion target and failure exponent. The norm_*
    fields drive :func:`estimate_spectral_norm`.
    """

    L: int
    d: int
    b: int = 1
    seed: int = 0
    epsilon: float = 0.5
    beta: float = 1.0
    norm_iters: int = 20
    norm_vectors_factor: float = 6.0
    norm_safety: float = 1.01

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be >= 1")
        if self.b < 1 or self.L % self.b != 0:
            raise ValueError("b must be >= 1 and divide L")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if not self.beta > 0.0:
            raise ValueError("beta must be positive")
        if self.norm_iters < 1 or self.norm_vectors_factor <= 0 or self.norm_safety < 1:
            raise ValueError("bad norm-estimation settings")

    @property
    def stage_order(self) -> int:
        return self.L // self.b


@dataclass
class SpmvCounter:
    """Counts logical multi-vector products (one per recursion step)."""

    products: int = 0


@dataclass
class EmbeddingMatrix:
    """Dense embedding rows plus the provenance needed to reproduce them."""

    values: np.ndarray
    row_labels: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def estimate_spectral_norm(S: SparseMatrix, cfg: EmbedConfig) -> float:
    """Power-iteration estimate of ||S|| for symmetric S.

    Runs ``norm_iters`` iterations on ceil(norm_vectors_factor * ln n) random
    unit vectors, takes the largest Rayleigh-quotient magnitude seen, and
    scales it by ``norm_safety``. The Rayleigh quotient never exceeds ||S||,
    so the estimate never exceeds norm_safety * ||S||.
    """
    if S.n_rows != S.n_cols:
        raise ValueError("spectral norm estimation requires a square matrix")
    if S.nnz == 0:
        return 0.0
    n = S.n_rows
    k = max(1, math.ceil(cfg.norm_vectors_factor * math.log(max(n, 2))))
    rng = np.random.default_rng(fold_seed(cfg.seed, _NORM_SEED_TAG))
    V = rng.standard_normal((n, k))
    V /= np.linalg.norm(V, axis=0)
    best = 0.0
    for _ in range(cfg.norm_iters):
        W = spmv_multi(S, V)
        rayleigh = np.einsum("ij,ij->j", V, W)
        best = max(best, float(np.max(np.abs(rayleigh))))
        norms = np.linalg.norm(W, axis=0)
        alive = norms > 0.0
        if not np.any(alive):
            break
        V = W[:, alive] / norms[alive]
    return best * cfg.norm_safety


def _resolve_expansion(f, order: int, quadrature: QuadratureSpec | None) -> LegendreExpansion:
    if isinstance(f, LegendreExpansion):
        if f.order != order:
            raise ValueError(
                f"expansion order {f.order} does not match requested order {order}"
            )
        return f
    return legendre_coefficients(f, order, quadrature)


def _run_stage(
    S: SparseMatrix, coeffs: np.ndarray, block: np.ndarray, stage: int, col0: int
) -> np.ndarray:
    """Apply one expansion to one contiguous column block."""
    order = len(coeffs) - 1
    q_prev = block.copy()  # Q(0)
    acc = coeffs[0] * block
    q_prev2 = None
    for r in range(1, order + 1):
        q = (2.0 - 1.0 / r) * spmv_multi(S, q_prev)
        if r > 1:
            q -= (1.0 - 1.0 / r) * q_prev2
        peak = float(np.max(np.abs(q), initial=0.0))
        logger.debug(
            "stage=%d cols=%d+%d r=%d max_abs=%.6e", stage, col0, block.shape[1], r, peak
        )
        if not np.isfinite(peak):
            raise DivergenceError(
                f"iteration r={r} produced non-finite values; the matrix likely has "
                "spectral norm > 1 - rescale it (estimate_spectral_norm) and retry"
            )
        acc += coeffs[r] * q
        q_prev2, q_prev = q_prev, q
    return acc


def _apply_expansion(
    S: SparseMatrix,
    expansion: LegendreExpansion,
    block: np.ndarray,
    *,
    stage: int = 0,
    n_workers: int = 1,
    counter: SpmvCounter | None = None,
) -> np.ndarray:
    n, d = block.shape
    out = np.empty_like(block)
    chunks = [(lo, min(lo + COLUMN_CHUNK, d)) for lo in range(0, d, COLUMN_CHUNK)]
    coeffs = expansion.coeffs

    def run(span):
        lo, hi = span
        piece = np.ascontiguousarray(block[:, lo:hi])
        out[:, lo:hi] = _run_stage(S, coeffs, piece, stage, lo)

    if n_workers <= 1 or len(chunks) == 1:
        for span in chunks:
            run(span)
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(run, chunks))
    if counter is not None:
        counter.products += expansion.order
    return out


def fast_embed_eig(
    S: SparseMatrix,
    f,
    L: int,
    omega: np.ndarray,
    *,
    quadrature: QuadratureSpec | None = None,
    n_workers: int = 1,
    counter: SpmvCounter | None = None,
) -> EmbeddingMatrix:
    """Embed the rows of a symmetric S (||S|| <= 1) as f_L(S) @ omega.

    ``f`` may be a SpectralFunction, a plain callable on [-1, 1], or a
    precomputed :class:`LegendreExpansion` of matching order. Exactly ``L``
    multi-vector products are performed.
    """
    if S.n_rows != S.n_cols:
        raise ValueError("fast_embed_eig requires a square (symmetric) matrix")
    omega = np.asarray(omega, dtype=np.float64)
    if omega.ndim != 2 or omega.shape[0] != S.n_rows:
        raise ValueError("projection block must be 2-d with one row per vertex")
    if L < 0:
        raise ValueError("L must be >= 0")
    expansion = _resolve_expansion(f, L, quadrature)
    own_counter = counter if counter is not None else SpmvCounter()
    values = _apply_expansion(
        S, expansion, omega, stage=1, n_workers=n_workers, counter=own_counter
    )
    return EmbeddingMatrix(
        values=values,
        provenance={
            "function": _describe(f),
            "L": L,
            "b": 1,
            "d": omega.shape[1],
            "spmv_products": own_counter.products,
            "coeffs_sha256": expansion.digest(),
        },
    )


def fast_embed_cascaded(
    S: SparseMatrix,
    f,
    cfg: EmbedConfig,
    omega: np.ndarray | None = None,
    *,
    quadrature: QuadratureSpec | None = None,
    n_workers: int = 1,
    counter: SpmvCounter | None = None,
) -> EmbeddingMatrix:
    """Embed via b cascade stages of order L/b applied to the b-th root of f.

    Stage i's output block is stage i+1's input block; with b = 1 this is
    exactly :func:`fast_embed_eig`. SpMV cost is L/b per stage, L in total.
    """
    if S.n_rows != S.n_cols:
        raise ValueError("fast_embed_cascaded requires a square (symmetric) matrix")
    if omega is None:
        omega = sample_projection(S.n_rows, cfg.d, cfg.seed)
    omega = np.asarray(omega, dtype=np.float64)
    if omega.ndim != 2 or omega.shape[0] != S.n_rows:
        raise ValueError("projection block must be 2-d with one row per vertex")
    if cfg.b == 1:
        g = f
    else:
        if isinstance(f, LegendreExpansion):
            raise ValueError("cascading needs the function itself, not an expansion")
        g = root_function(f, cfg.b)
    expansion = _resolve_expansion(g, cfg.stage_order, quadrature)
    own_counter = counter if counter is not None else SpmvCounter()
    block = omega
    for stage in range(1, cfg.b + 1):
        block = _apply_expansion(
            S, expansion, block, stage=stage, n_workers=n_workers, counter=own_counter
        )
    return EmbeddingMatrix(
        values=block,
        provenance={
            "function": _describe(f),
            "L": cfg.L,
            "b": cfg.b,
            "stage_order": cfg.stage_order,
            "d": omega.shape[1],
            "seed": cfg.seed,
            "spmv_products": own_counter.products,
            "coeffs_sha256": expansion.digest(),
        },
    )


def fast_embed_general(
    A: SparseMatrix,
    f,
    cfg: EmbedConfig,
    *,
    quadrature: QuadratureSpec | None = None,
    n_workers: int = 1,
    counter: SpmvCounter | None = None,
) -> tuple[EmbeddingMatrix, EmbeddingMatrix]:
    """Row and column embeddings of a general m x n matrix with ||A|| <= 1.

    Runs the cascaded engine on the symmetric dilation [0 A^T; A 0] with the
    odd extension of ``f``, then splits the output: the first n rows embed
    the columns of A, the last m rows embed its rows. Returns
    ``(row_embedding, column_embedding)``.
    """
    S = dilate(A)
    m, n = A.n_rows, A.n_cols
    omega = sample_projection(m + n, cfg.d, cfg.seed)
    emb = fast_embed_cascaded(
        S,
        odd_extension(f),
        cfg,
        omega,
        quadrature=quadrature,
        n_workers=n_workers,
        counter=counter,
    )
    base = dict(emb.provenance)
    rows = EmbeddingMatrix(
        values=emb.values[n:],
        row_labels=np.arange(m, dtype=np.int64),
        provenance={**base, "side": "rows"},
    )
    cols = EmbeddingMatrix(
        values=emb.values[:n],
        row_labels=np.arange(n, dtype=np.int64),
        provenance={**base, "side": "columns"},
    )
    return rows, cols


def _describe(f) -> str:
    if isinstance(f, LegendreExpansion):
        return f"expansion[{f.order}]"
    d = getattr(f, "describe", None)
    if callable(d):
        return d()
    return getattr(f, "__name__", "callable")
