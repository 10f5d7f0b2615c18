"""Dense quaternion matrices in split-complex storage ``Q = D + j C``.

Products follow from ``z j = j conj(z)`` for complex ``z``::

    (A_D + j A_C)(B_D + j B_C) = (A_D B_D - conj(A_C) B_C) + j (conj(A_D) B_C + A_C B_D)

The private ``_mul``/``_ct`` kernels accept arrays with leading batch axes so
the tensor module can run them over all frontal slices at once.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NoConvergence, ShapeMismatch, Singular, StructureViolation, ZeroPivot
from .quat import from_pair

TOL_SVD = 1e-11
TOL_INV = 1e-10
TOL_PIVOT = 1e-13
TOL_STRUCT = 1e-12
MAX_SWEEPS = 60

_EPS = np.finfo(float).eps
_PHASE_TOL = 1e-8


# -- batched split-complex kernels -------------------------------------------

def _mul(AD, AC, BD, BC):
    D = AD @ BD - AC.conj() @ BC
    C = AD.conj() @ BC + AC @ BD
    return D, C


def _ct(D, C):
    return np.swapaxes(D, -1, -2).conj(), -np.swapaxes(C, -1, -2)


def _rmul(XD, XC, s1, s2):
    """Right-multiply entries of X by the quaternion ``s1 + j s2`` (broadcast)."""
    return XD * s1 - XC.conj() * s2, XD.conj() * s2 + XC * s1


def _adjoint(D, C):
    top = np.concatenate([D, -C.conj()], axis=-1)
    bot = np.concatenate([C, D.conj()], axis=-1)
    return np.concatenate([top, bot], axis=-2)


def split_pair(w, x, y, z):
    """``(w + x i, y - z i)`` built by part assignment, so inf and nan pass through untouched."""
    w, x, y, z = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (w, x, y, z)))
    D = np.empty(w.shape, complex)
    C = np.empty(w.shape, complex)
    D.real, D.imag = w, x
    C.real, C.imag = y, -z
    return D, C


@dataclass(frozen=True, eq=False)
class QMatrix:
    """Quaternion matrix ``D + j C`` with complex ``D``, ``C`` of equal shape."""

    D: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        D = np.asarray(self.D, dtype=np.complex128)
        C = np.asarray(self.C, dtype=np.complex128)
        if D.ndim != 2 or D.shape != C.shape:
            raise ShapeMismatch(f"D {D.shape} and C {C.shape} must be equal 2-D shapes")
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "C", C)

    # construction
    @classmethod
    def from_components(cls, w, x, y, z) -> QMatrix:
        return cls(*split_pair(w, x, y, z))

    @classmethod
    def from_complex(cls, D) -> QMatrix:
        D = np.asarray(D, dtype=np.complex128)
        return cls(D, np.zeros_like(D))

    @classmethod
    def identity(cls, n: int) -> QMatrix:
        return cls.from_complex(np.eye(n))

    @classmethod
    def zeros(cls, m: int, n: int) -> QMatrix:
        return cls(np.zeros((m, n), complex), np.zeros((m, n), complex))

    @classmethod
    def from_quaternions(cls, rows) -> QMatrix:
        arr = np.array([[tuple(q) for q in row] for row in rows], dtype=float)
        return cls.from_components(*np.moveaxis(arr, -1, 0))

    @classmethod
    def random(cls, m: int, n: int, rng=None) -> QMatrix:
        """Uniform(0, 1) in all four components."""
        rng = np.random.default_rng(rng)
        return cls.from_components(*rng.random((4, m, n)))

    # views
    @property
    def shape(self):
        return self.D.shape

    @property
    def rows(self) -> int:
        return self.D.shape[0]

    @property
    def cols(self) -> int:
        return self.D.shape[1]

    def components(self):
        return self.D.real.copy(), self.D.imag.copy(), self.C.real.copy(), -self.C.imag

    def __getitem__(self, key):
        D, C = self.D[key], self.C[key]
        if np.ndim(D) == 0:
            return from_pair((D, C))
        if np.ndim(D) == 1:
            raise ShapeMismatch("index with slices to keep a 2-D matrix")
        return QMatrix(D, C)

    def norm(self) -> float:
        """Frobenius norm (root of the summed squared quaternion moduli)."""
        return math.sqrt(np.vdot(self.D, self.D).real + np.vdot(self.C, self.C).real)

    # arithmetic
    def __matmul__(self, other: QMatrix) -> QMatrix:
        return mat_mul(self, other)

    def __add__(self, other: QMatrix) -> QMatrix:
        _same_shape(self, other)
        return QMatrix(self.D + other.D, self.C + other.C)

    def __sub__(self, other: QMatrix) -> QMatrix:
        _same_shape(self, other)
        return QMatrix(self.D - other.D, self.C - other.C)

    def __neg__(self) -> QMatrix:
        return QMatrix(-self.D, -self.C)

    def __mul__(self, s: float) -> QMatrix:
        if isinstance(s, complex) or np.iscomplexobj(s):
            raise TypeError("only real scalars commute with quaternion matrices")
        return QMatrix(self.D * s, self.C * s)

    __rmul__ = __mul__

    @property
    def H(self) -> QMatrix:
        return mat_ct(self)

    def adjoint(self) -> np.ndarray:
        return complex_adjoint(self)

    def __repr__(self):
        return f"QMatrix({self.rows}x{self.cols})"


def _same_shape(A: QMatrix, B: QMatrix):
    if A.shape != B.shape:
        raise ShapeMismatch(f"shapes {A.shape} and {B.shape} differ")


def mat_mul(A: QMatrix, B: QMatrix) -> QMatrix:
    if A.cols != B.rows:
        raise ShapeMismatch(f"cannot multiply {A.shape} by {B.shape}")
    return QMatrix(*_mul(A.D, A.C, B.D, B.C))


def mat_ct(A: QMatrix) -> QMatrix:
    return QMatrix(*_ct(A.D, A.C))


def complex_adjoint(A: QMatrix) -> np.ndarray:
    """The ``2m x 2n`` complex matrix ``[[D, -conj(C)], [C, conj(D)]]``."""
    return _adjoint(A.D, A.C)


def adjoint_extract(M, tol: float = TOL_STRUCT) -> QMatrix:
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] % 2 or M.shape[1] % 2:
        raise StructureViolation(f"adjoint must have even dimensions, got {M.shape}")
    m, n = M.shape[0] // 2, M.shape[1] // 2
    E, F = M[:m, :n], M[m:, :n]
    resid = math.hypot(np.linalg.norm(M[:m, n:] + F.conj()), np.linalg.norm(M[m:, n:] - E.conj()))
    if resid > tol * max(np.linalg.norm(M), 1.0):
        raise StructureViolation(f"block symmetry residual {resid:.3e} exceeds tolerance")
    return QMatrix(E.copy(), F.copy())


# -- inverse and solve --------------------------------------------------------

def _lu_adjoint(A: QMatrix, tol_pivot: float, scale: float = 0.0):
    M = complex_adjoint(A)
    if M.size == 0:
        raise ShapeMismatch("empty matrix")
    with warnings.catch_warnings():
        # exact singularity is reported below as Singular
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    scale = max(np.abs(M).max(), scale)
    pivots = np.abs(np.diag(lu))
    if not np.all(np.isfinite(lu)) or np.any(pivots <= tol_pivot * scale):
        raise Singular("quaternion matrix is numerically singular")
    return lu, piv


def minv(A: QMatrix, tol_pivot: float = TOL_PIVOT, scale: float = 0.0) -> QMatrix:
    """Inverse computed through the complex adjoint.

    Pivots at or below ``tol_pivot * max(max|a_ij|, scale)`` count as singular;
    ``scale`` lets a caller judge a block against a larger enclosing problem.
    """
    if A.rows != A.cols:
        raise ShapeMismatch(f"cannot invert non-square {A.shape}")
    lu, piv = _lu_adjoint(A, tol_pivot, scale)
    n = A.rows
    # Only the left block column of the inverse adjoint is needed.
    rhs = np.zeros((2 * n, n), complex)
    rhs[:n] = np.eye(n)
    X = scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)
    return QMatrix(X[:n], X[n:])


def msolve(A: QMatrix, B: QMatrix, tol_pivot: float = TOL_PIVOT, scale: float = 0.0) -> QMatrix:
    """Solve ``A X = B`` for square ``A``."""
    if A.rows != A.cols or A.rows != B.rows:
        raise ShapeMismatch(f"cannot solve {A.shape} against {B.shape}")
    lu, piv = _lu_adjoint(A, tol_pivot, scale)
    n = A.rows
    X = scipy.linalg.lu_solve((lu, piv), np.concatenate([B.D, B.C]), check_finite=False)
    return QMatrix(X[:n], X[n:])


# -- SVD ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MSvd:
    U: QMatrix
    S: np.ndarray
    V: QMatrix

    def reconstruct(self) -> QMatrix:
        m, n = self.U.rows, self.V.rows
        k = len(self.S)
        Sm = np.zeros((m, n))
        Sm[:k, :k] = np.diag(self.S)
        return self.U @ QMatrix.from_complex(Sm) @ self.V.H


def _jacobi(D, C, tol, max_sweeps):
    """One-sided Jacobi on the columns of a tall quaternion matrix.

    Each pair (p, q) is first aligned by a unit quaternion on column q so the
    inner product becomes real, then rotated by an ordinary real Jacobi plane
    rotation.  Returns the orthogonalised columns and the accumulated V.
    """
    GD, GC = D.copy(), C.copy()
    n = GD.shape[1]
    VD, VC = np.eye(n, dtype=complex), np.zeros((n, n), complex)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apd, apc, aqd, aqc = GD[:, p], GC[:, p], GD[:, q], GC[:, q]
                alpha = np.vdot(apd, apd).real + np.vdot(apc, apc).real
                beta = np.vdot(aqd, aqd).real + np.vdot(aqc, aqc).real
                g1 = np.vdot(apd, aqd) + np.vdot(apc, aqc)
                g2 = apd @ aqc - apc @ aqd
                g = math.hypot(abs(g1), abs(g2))
                if g == 0.0 or g <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                s1, s2 = g1.conjugate() / g, -g2 / g
                aqd, aqc = _rmul(aqd, aqc, s1, s2)
                vqd, vqc = _rmul(VD[:, q], VC[:, q], s1, s2)
                zeta = (beta - alpha) / (2.0 * g)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                GD[:, p], GD[:, q] = c * apd - s * aqd, s * apd + c * aqd
                GC[:, p], GC[:, q] = c * apc - s * aqc, s * apc + c * aqc
                vpd, vpc = VD[:, p].copy(), VC[:, p].copy()
                VD[:, p], VD[:, q] = c * vpd - s * vqd, s * vpd + c * vqd
                VC[:, p], VC[:, q] = c * vpc - s * vqc, s * vpc + c * vqc
        if not rotated:
            return GD, GC, VD, VC
    raise NoConvergence(f"no convergence after {max_sweeps} sweeps")


def _complete(QD, QC, m):
    """Extend orthonormal quaternion columns to a full m x m unitary.

    Greedy: each new column is the basis vector with the largest residual
    after projecting out the current columns (lowest index on ties).
    """
    k = QD.shape[1]
    RD, RC = np.eye(m, dtype=complex), np.zeros((m, m), complex)
    if k:
        hd, hc = _ct(QD, QC)
        pd, pc = _mul(QD, QC, *_mul(hd, hc, RD, RC))
        RD, RC = RD - pd, RC - pc
    cols_d, cols_c = list(QD.T), list(QC.T)
    while len(cols_d) < m:
        j = int(np.argmax((np.abs(RD) ** 2 + np.abs(RC) ** 2).sum(axis=0)))
        xd, xc = RD[:, j].copy(), RC[:, j].copy()
        for _ in range(2):
            if not cols_d:
                break
            BD, BC = np.stack(cols_d, axis=1), np.stack(cols_c, axis=1)
            cd, cc = _mul(*_ct(BD, BC), xd[:, None], xc[:, None])
            pd, pc = _mul(BD, BC, cd, cc)
            xd, xc = xd - pd[:, 0], xc - pc[:, 0]
        nrm = math.sqrt(np.vdot(xd, xd).real + np.vdot(xc, xc).real)
        xd, xc = xd / nrm, xc / nrm
        cols_d.append(xd)
        cols_c.append(xc)
        # R <- R - x (x^H R)
        hd, hc = _ct(xd[:, None], xc[:, None])
        pd, pc = _mul(xd[:, None], xc[:, None], *_mul(hd, hc, RD, RC))
        RD, RC = RD - pd, RC - pc
    return np.stack(cols_d, axis=1), np.stack(cols_c, axis=1)


def _phase(d, c):
    """Unit quaternion (as a pair) making the first nonzero entry real positive."""
    mags = np.sqrt(np.abs(d) ** 2 + np.abs(c) ** 2)
    idx = np.flatnonzero(mags > _PHASE_TOL * max(mags.max(initial=0.0), 1e-300))
    if idx.size == 0:
        return 1.0 + 0j, 0j
    i = idx[0]
    return d[i].conjugate() / mags[i], -c[i] / mags[i]


def _svd_tall(D, C, tol, max_sweeps):
    m, n = D.shape
    GD, GC, VD, VC = _jacobi(D, C, tol, max_sweeps)
    sig = np.sqrt((np.abs(GD) ** 2 + np.abs(GC) ** 2).sum(axis=0))
    order = np.argsort(-sig, kind="stable")
    sig, GD, GC, VD, VC = sig[order], GD[:, order], GC[:, order], VD[:, order], VC[:, order]
    rank_tol = max(m, n) * _EPS * (sig[0] if n else 0.0)
    r = int(np.count_nonzero(sig > rank_tol)) if n else 0
    UD, UC = _complete(GD[:, :r] / sig[:r], GC[:, :r] / sig[:r], m)
    return UD, UC, sig, VD, VC, r


def msvd(A: QMatrix, tol: float | None = None, max_sweeps: int = MAX_SWEEPS) -> MSvd:
    """Full SVD ``A = U diag(S) V^H`` with S descending, length min(m, n).

    Column phases are fixed so the first nonzero entry of each left singular
    vector is real and positive (V's columns follow the paired U column).
    """
    m, n = A.shape
    wide = m < n
    D, C = _ct(A.D, A.C) if wide else (A.D, A.C)
    rows = D.shape[0]
    if tol is None:
        tol = rows * _EPS
    UD, UC, sig, VD, VC, r = _svd_tall(D, C, tol, max_sweeps)
    if wide:
        UD, UC, VD, VC = VD, VC, UD, UC
    for k in range(m):
        s1, s2 = _phase(UD[:, k], UC[:, k])
        UD[:, k], UC[:, k] = _rmul(UD[:, k], UC[:, k], s1, s2)
        if k < r:
            VD[:, k], VC[:, k] = _rmul(VD[:, k], VC[:, k], s1, s2)
    for k in range(r, n):
        s1, s2 = _phase(VD[:, k], VC[:, k])
        VD[:, k], VC[:, k] = _rmul(VD[:, k], VC[:, k], s1, s2)
    return MSvd(QMatrix(UD, UC), sig[: min(m, n)].copy(), QMatrix(VD, VC))


# -- polar --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MPolar:
    """Polar factors; ``side='right'`` means A = U H, ``'left'`` means A = H U."""

    U: QMatrix
    H: QMatrix
    side: str = "right"

    def reconstruct(self) -> QMatrix:
        return self.U @ self.H if self.side == "right" else self.H @ self.U


def _hermitian_part(X: QMatrix) -> QMatrix:
    Y = X.H
    return QMatrix((X.D + Y.D) / 2, (X.C + Y.C) / 2)


def _scaled_gram(W: QMatrix, S) -> QMatrix:
    return _hermitian_part(QMatrix(W.D * S, W.C * S) @ W.H)


def mpolar_right(A: QMatrix, **svd_kw) -> MPolar:
    if A.rows != A.cols:
        raise ShapeMismatch(f"polar decomposition needs a square matrix, got {A.shape}")
    sv = msvd(A, **svd_kw)
    return MPolar(sv.U @ sv.V.H, _scaled_gram(sv.V, sv.S), "right")


def mpolar_left(A: QMatrix, **svd_kw) -> MPolar:
    if A.rows != A.cols:
        raise ShapeMismatch(f"polar decomposition needs a square matrix, got {A.shape}")
    sv = msvd(A, **svd_kw)
    return MPolar(sv.U @ sv.V.H, _scaled_gram(sv.U, sv.S), "left")


# -- LU -----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MPlu:
    perm: np.ndarray  # row i of P A is row perm[i] of A
    L: QMatrix
    U: QMatrix

    @property
    def P(self) -> np.ndarray:
        n = len(self.perm)
        P = np.zeros((n, n))
        P[np.arange(n), self.perm] = 1.0
        return P


def _eliminate(A: QMatrix, pivoting: bool, tol_pivot: float, scale: float = 0.0):
    if A.rows != A.cols:
        raise ShapeMismatch(f"LU needs a square matrix, got {A.shape}")
    n = A.rows
    WD, WC = A.D.copy(), A.C.copy()
    LD, LC = np.eye(n, dtype=complex), np.zeros((n, n), complex)
    perm = np.arange(n)
    colscale = np.maximum(np.sqrt(np.abs(WD) ** 2 + np.abs(WC) ** 2).max(axis=0, initial=0.0), scale)
    for k in range(n):
        mags = np.sqrt(np.abs(WD[k:, k]) ** 2 + np.abs(WC[k:, k]) ** 2)
        i = k + int(np.argmax(mags)) if pivoting else k
        if mags[i - k] == 0.0 or mags[i - k] <= tol_pivot * colscale[k]:
            if pivoting:
                raise Singular("no usable pivot", step=k + 1)
            raise ZeroPivot(step=k + 1)
        if i != k:
            for X in (WD, WC):
                X[[k, i]] = X[[i, k]]
            for X in (LD, LC):
                X[[k, i], :k] = X[[i, k], :k]
            perm[[k, i]] = perm[[i, k]]
        pd, pc = WD[k, k], WC[k, k]
        n2 = abs(pd) ** 2 + abs(pc) ** 2
        ld, lc = _rmul(WD[k + 1:, k], WC[k + 1:, k], pd.conjugate() / n2, -pc / n2)
        LD[k + 1:, k], LC[k + 1:, k] = ld, lc
        ud, uc = _mul(ld[:, None], lc[:, None], WD[k:k + 1, k:], WC[k:k + 1, k:])
        WD[k + 1:, k:] -= ud
        WC[k + 1:, k:] -= uc
        WD[k + 1:, k] = 0.0
        WC[k + 1:, k] = 0.0
    return perm, QMatrix(LD, LC), QMatrix(np.triu(WD), np.triu(WC))


def mplu(A: QMatrix, tol_pivot: float = TOL_PIVOT, scale: float = 0.0) -> MPlu:
    """Partial pivoting on the largest quaternion modulus (lowest row on ties).

    Multipliers attach the pivot inverse on the right, ``l = a_ik a_kk^-1``,
    so that ``P A = L U``.
    """
    return MPlu(*_eliminate(A, True, tol_pivot, scale))


def mlu(A: QMatrix, tol_pivot: float = TOL_PIVOT, scale: float = 0.0):
    """Pivot-free ``A = L U``; raises ZeroPivot naming the failing step."""
    _, L, U = _eliminate(A, False, tol_pivot, scale)
    return L, U


# -- predicates ---------------------------------------------------------------

def is_hermitian(A: QMatrix, tol: float = 1e-10) -> bool:
    if A.rows != A.cols:
        return False
    return (A.H - A).norm() <= tol * A.norm()


def is_unitary(A: QMatrix, tol: float = 1e-10) -> bool:
    if A.rows != A.cols:
        return False
    eye = QMatrix.identity(A.rows)
    return (A.H @ A - eye).norm() <= tol and (A @ A.H - eye).norm() <= tol


def min_adjoint_eig(A: QMatrix) -> float:
    M = complex_adjoint(A)
    return float(np.linalg.eigvalsh((M + M.conj().T) / 2).min(initial=np.inf))


def is_psd(A: QMatrix, tol: float = 1e-10) -> bool:
    if not is_hermitian(A, tol):
        return False
    return min_adjoint_eig(A) >= -tol * A.norm()
