"""Structured inversion and Tikhonov solves for z-block circulant systems.

Both solvers work slice-by-slice in the transformed domain, where a z-block
circulant matrix is block diagonal.  Dense reference paths operate on the
materialized payload and exist as oracles and benchmark baselines.
"""
from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatch, Singular
from .decomp import hat_scale
from .qmat import TOL_PIVOT, QMatrix, minv, msolve
from .qtensor import BCircZ, QTensor, bcircz, fftq, fold, ibcircz, ifftq, unfold

log = logging.getLogger(__name__)

CSV_HEADER = ("size", "method", "time_s", "err")


def _slice_inverse(S: QMatrix, tol_pivot: float, refine: bool, scale: float = 0.0) -> QMatrix:
    X = minv(S, tol_pivot, scale)
    if refine:
        # One Newton step averaged over the right and left residuals; an
        # uncorrected LU inverse leaves the zero-frequency slice of uniform(0, 1)
        # data (a large rank-one mean) well above the rounding floor.
        I = QMatrix.identity(S.rows)
        X = X + (X @ (I - S @ X) + (I - X @ S) @ X) * 0.5
    return X


def bcircz_inv(M: BCircZ, validate: bool = True, tol_pivot: float = TOL_PIVOT, refine: bool = True) -> BCircZ:
    """Invert a z-block circulant matrix through its generating tensor.

    Steps: recover the generator, transform, invert each hat slice, transform
    back, and rebuild the z-block circulant.
    """
    if M.n1 != M.n2:
        raise ShapeMismatch(f"generator slices must be square, got {M.n1}x{M.n2}")
    T = ibcircz(M, validate=validate)
    That = fftq(T)
    scale = hat_scale(That)  # a slice that is negligible next to the others is singular
    inv_slices = []
    for k, S in enumerate(That.slices()):
        try:
            inv_slices.append(_slice_inverse(S, tol_pivot, refine, scale))
        except Singular as e:
            raise Singular("hat slice is singular", slice=k + 1) from e
    return bcircz(ifftq(QTensor.from_slices(inv_slices)))


def dense_inv(M: BCircZ, tol_pivot: float = TOL_PIVOT) -> QMatrix:
    return minv(M.payload, tol_pivot)


def inv_err(A: QMatrix, B: QMatrix) -> float:
    """``max(||AB - I||_F, ||BA - I||_F)``."""
    if A.rows != A.cols or A.shape != B.shape:
        raise ShapeMismatch(f"inv_err needs equal square shapes, got {A.shape} and {B.shape}")
    n = A.rows
    out = 0.0
    for P in (A @ B, B @ A):
        D = P.D - np.eye(n)
        out = max(out, float(np.sqrt(np.vdot(D, D).real + np.vdot(P.C, P.C).real)))
    return out


# -- Tikhonov -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TikhonovProblem:
    """Minimize ``||B x - b||^2 + lam^2 ||x||^2`` for a z-block circulant B."""

    B: BCircZ
    b: QMatrix
    lam: float = 0.5

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.B.n1 != self.B.n2:
            raise ShapeMismatch(f"B must be square-blocked, got {self.B.n1}x{self.B.n2}")
        n = self.B.n1 * self.B.n3
        if self.b.shape != (n, 1):
            raise ShapeMismatch(f"b must be {n}x1, got {self.b.shape}")
        if self.B.generator is None:
            object.__setattr__(self, "B", BCircZ(self.B.n1, self.B.n2, self.B.n3,
                                                 generator=ibcircz(self.B), payload=self.B.payload))

    def normal_residual(self, x: QMatrix) -> tuple[float, float]:
        """(||(B^H B + lam^2 I) x - B^H b||, ||B^H b||) on the dense payload."""
        P = self.B.payload
        rhs = P.H @ self.b
        r = P.H @ (P @ x) + x * self.lam ** 2 - rhs
        return r.norm(), rhs.norm()


def tikhonov_structured(prob: TikhonovProblem) -> QMatrix:
    T = prob.B.generator
    m, q = T.n1, T.n3
    bhat = fftq(fold(prob.b, q))
    lam2 = prob.lam ** 2
    xs = []
    for Bk, bk in zip(fftq(T).slices(), bhat.slices()):
        Bh = Bk.H
        G = Bh @ Bk
        G = QMatrix(G.D + lam2 * np.eye(m), G.C)
        xs.append(msolve(G, Bh @ bk))
    return unfold(ifftq(QTensor.from_slices(xs)))


def tikhonov_dense(prob: TikhonovProblem) -> QMatrix:
    P = prob.B.payload
    n = P.rows
    G = P.H @ P
    G = QMatrix(G.D + prob.lam ** 2 * np.eye(n), G.C)
    return minv(G) @ (P.H @ prob.b)


# -- benchmark ----------------------------------------------------------------

@dataclass
class BenchRow:
    size: int
    method: str
    time_s: float
    err: float
    mean_s: float = field(default=0.0, compare=False)


def _time(fn, trials):
    fn()  # warm-up, excluded
    times = []
    out = None
    for _ in range(max(1, trials)):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, min(times), float(np.mean(times))


def bench(sizes, trials: int = 1, seed: int = 0, lam: float = 0.5, tikhonov: bool = True) -> list[BenchRow]:
    """Time structured vs dense inversion (and Tikhonov solves) per (m, q)."""
    rows = []
    rng = np.random.default_rng(seed)
    for m, q in sizes:
        n = m * q
        M = bcircz(QTensor.random(m, m, q, rng))
        P = M.payload
        B, t, tm = _time(lambda: bcircz_inv(M), trials)
        rows.append(BenchRow(n, "structured", t, inv_err(P, B.payload), tm))
        Bd, t, tm = _time(lambda: dense_inv(M), trials)
        rows.append(BenchRow(n, "dense", t, inv_err(P, Bd), tm))
        if tikhonov:
            prob = TikhonovProblem(M, QMatrix.random(n, 1, rng), lam)
            for name, fn in (("tikhonov_structured", tikhonov_structured), ("tikhonov_dense", tikhonov_dense)):
                x, t, tm = _time(lambda: fn(prob), trials)
                r, s = prob.normal_residual(x)
                rows.append(BenchRow(n, name, t, r / s, tm))
        for row in rows[-4 if tikhonov else -2:]:
            log.info("n=%d %s best=%.4gs mean=%.4gs err=%.3e", row.size, row.method, row.time_s, row.mean_s, row.err)
    return rows


def bench_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow((r.size, r.method, f"{r.time_s:.6e}", f"{r.err:.6e}"))
    return buf.getvalue()
