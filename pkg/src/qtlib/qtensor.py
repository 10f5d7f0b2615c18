"""Third-order quaternion tensors and their z-block circulant structure.

A tensor ``A = A_d + j A_c`` is stored as two complex arrays of shape
``(n1, n2, n3)``; frontal slice ``k`` is ``A[:, :, k]``.  The mode-3 transform
``fftq`` takes the unnormalized DFT of each d-fiber and the same DFT of each
c-fiber followed by the index reversal ``p -> -p mod n3``, which is what makes

    (F kron I) bcircz(A) (F* kron I) = blockdiag(fftq(A) slices)

hold exactly in quaternion arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ShapeMismatch, StructureViolation
from .qmat import TOL_STRUCT, QMatrix, _ct, _mul, is_psd, split_pair

__all__ = [
    "QTensor", "BCircZ", "perm_index", "perm_matrix", "dft_matrix", "dft_kron",
    "unfold", "fold", "bcirc", "bcircz", "ibcircz", "fftq", "ifftq", "diag_hat",
    "idiag", "qt_product", "tensor_ct", "identity_tensor", "is_unitary_t",
    "is_hermitian_t", "is_f_diagonal", "is_f_upper_triangular",
    "is_f_lower_triangular", "is_unit_f_lower_triangular", "is_f_permutation",
    "is_f_psd",
]


@dataclass(frozen=True, eq=False)
class QTensor:
    d: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.complex128)
        c = np.asarray(self.c, dtype=np.complex128)
        if d.ndim != 3 or d.shape != c.shape:
            raise ShapeMismatch(f"d {d.shape} and c {c.shape} must be equal 3-D shapes")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "c", c)

    @classmethod
    def from_components(cls, w, x, y, z) -> QTensor:
        return cls(*split_pair(w, x, y, z))

    @classmethod
    def from_slices(cls, slices) -> QTensor:
        slices = list(slices)
        return cls(np.stack([s.D for s in slices], axis=2), np.stack([s.C for s in slices], axis=2))

    @classmethod
    def _from_batched(cls, D, C) -> QTensor:
        """From arrays laid out (n3, n1, n2)."""
        return cls(np.moveaxis(D, 0, 2), np.moveaxis(C, 0, 2))

    @classmethod
    def zeros(cls, n1, n2, n3) -> QTensor:
        z = np.zeros((n1, n2, n3), complex)
        return cls(z, z.copy())

    @classmethod
    def random(cls, n1, n2, n3, rng=None) -> QTensor:
        """Uniform(0, 1) in all four quaternion components."""
        rng = np.random.default_rng(rng)
        return cls.from_components(*rng.random((4, n1, n2, n3)))

    @property
    def shape(self):
        return self.d.shape

    @property
    def n1(self):
        return self.d.shape[0]

    @property
    def n2(self):
        return self.d.shape[1]

    @property
    def n3(self):
        return self.d.shape[2]

    def components(self):
        return self.d.real.copy(), self.d.imag.copy(), self.c.real.copy(), -self.c.imag

    def slice(self, k: int) -> QMatrix:
        """Frontal slice ``k`` (0-based), copied to contiguous storage for BLAS."""
        return QMatrix(np.ascontiguousarray(self.d[:, :, k]), np.ascontiguousarray(self.c[:, :, k]))

    def slices(self):
        return [self.slice(k) for k in range(self.n3)]

    def _batched(self):
        return np.moveaxis(self.d, 2, 0), np.moveaxis(self.c, 2, 0)

    def norm(self) -> float:
        return math.sqrt(np.vdot(self.d, self.d).real + np.vdot(self.c, self.c).real)

    def __add__(self, other: QTensor) -> QTensor:
        _same_shape(self, other)
        return QTensor(self.d + other.d, self.c + other.c)

    def __sub__(self, other: QTensor) -> QTensor:
        _same_shape(self, other)
        return QTensor(self.d - other.d, self.c - other.c)

    def __neg__(self) -> QTensor:
        return QTensor(-self.d, -self.c)

    def __mul__(self, s: float) -> QTensor:
        if isinstance(s, complex) or np.iscomplexobj(s):
            raise TypeError("only real scalars commute with quaternion tensors")
        return QTensor(self.d * s, self.c * s)

    __rmul__ = __mul__

    def __matmul__(self, other: QTensor) -> QTensor:
        return qt_product(self, other)

    @property
    def H(self) -> QTensor:
        return tensor_ct(self)

    def __repr__(self):
        return "QTensor({}x{}x{})".format(*self.shape)


def _same_shape(a, b):
    if a.shape != b.shape:
        raise ShapeMismatch(f"shapes {a.shape} and {b.shape} differ")


# -- fixed matrices -----------------------------------------------------------

def perm_index(n3: int) -> np.ndarray:
    """Index map of the reversal permutation: 0 fixed, p -> n3 - p otherwise."""
    return (-np.arange(n3)) % n3


def perm_matrix(n3: int) -> np.ndarray:
    P = np.zeros((n3, n3))
    P[np.arange(n3), perm_index(n3)] = 1.0
    return P


def dft_matrix(n3: int) -> np.ndarray:
    """Normalized DFT matrix, ``F[i, j] = n3^-1/2 exp(-2 pi i ij / n3)``."""
    k = np.arange(n3)
    return np.exp(-2j * np.pi * np.outer(k, k) / n3) / math.sqrt(n3)


def dft_kron(n3: int, n: int, inverse: bool = False) -> QMatrix:
    """``F kron I_n`` (or ``F* kron I_n``) as a quaternion matrix."""
    F = dft_matrix(n3)
    return QMatrix.from_complex(np.kron(F.conj().T if inverse else F, np.eye(n)))


# -- unfold / fold ------------------------------------------------------------

def unfold(T: QTensor) -> QMatrix:
    n1, n2, n3 = T.shape
    D, C = T._batched()
    return QMatrix(D.reshape(n3 * n1, n2), C.reshape(n3 * n1, n2))


def fold(M: QMatrix, n3: int) -> QTensor:
    if n3 <= 0 or M.rows % n3:
        raise ShapeMismatch(f"{M.rows} rows cannot be folded into {n3} slices")
    n1 = M.rows // n3
    return QTensor._from_batched(M.D.reshape(n3, n1, M.cols), M.C.reshape(n3, n1, M.cols))


# -- block circulants ---------------------------------------------------------

def _block_index(n3: int, twisted: bool) -> np.ndarray:
    r = np.arange(n3)[:, None]
    c = np.arange(n3)[None, :]
    return (r + c) % n3 if twisted else (r - c) % n3


def _assemble(X: np.ndarray, idx: np.ndarray) -> np.ndarray:
    n1, n2, n3 = X.shape
    blocks = np.moveaxis(X, 2, 0)[idx]  # (n3, n3, n1, n2)
    return blocks.transpose(0, 2, 1, 3).reshape(n3 * n1, n3 * n2)


def bcirc(X) -> np.ndarray:
    """Block circulant of a complex tensor: block (r, c) is slice (r - c) mod n3."""
    X = np.asarray(X)
    return _assemble(X, _block_index(X.shape[2], False))


class BCircZ:
    """The z-block circulant matrix of a generating tensor.

    The ``(n1 n3) x (n2 n3)`` payload is built lazily; the d-part is
    ``bcirc(A_d)`` and the c-part has slice ``(r + c) mod n3`` in block (r, c),
    i.e. ``bcirc(A_c)`` with block columns permuted by the reversal.
    """

    def __init__(self, n1, n2, n3, generator: QTensor | None = None, payload: QMatrix | None = None):
        if generator is None and payload is None:
            raise ValueError("need a generator or a payload")
        self.n1, self.n2, self.n3 = n1, n2, n3
        self.generator = generator
        if payload is not None:
            if payload.shape != (n1 * n3, n2 * n3):
                raise ShapeMismatch(f"payload {payload.shape} does not match {n1}x{n2}x{n3}")
            self.__dict__["payload"] = payload

    @classmethod
    def from_payload(cls, M: QMatrix, n3: int) -> BCircZ:
        if n3 <= 0 or M.rows % n3 or M.cols % n3:
            raise ShapeMismatch(f"{M.shape} is not divisible into {n3} x {n3} blocks")
        return cls(M.rows // n3, M.cols // n3, n3, payload=M)

    @cached_property
    def payload(self) -> QMatrix:
        T = self.generator
        n3 = T.n3
        return QMatrix(_assemble(T.d, _block_index(n3, False)), _assemble(T.c, _block_index(n3, True)))

    @property
    def shape(self):
        return (self.n1 * self.n3, self.n2 * self.n3)

    def __repr__(self):
        return f"BCircZ({self.n1}x{self.n2}x{self.n3})"


def bcircz(T: QTensor) -> BCircZ:
    return BCircZ(*T.shape, generator=T)


def ibcircz(M, n3: int | None = None, validate: bool = True, tol: float = TOL_STRUCT) -> QTensor:
    """Fold the first block column; optionally check the full structure."""
    if isinstance(M, BCircZ):
        if M.generator is not None and "payload" not in M.__dict__:
            return M.generator
        n3, P = M.n3, M.payload
    else:
        if n3 is None:
            raise ValueError("n3 is required for a raw payload")
        P = M
    if n3 <= 0 or P.rows % n3 or P.cols % n3:
        raise ShapeMismatch(f"{P.shape} is not divisible into {n3} x {n3} blocks")
    n2 = P.cols // n3
    T = fold(P[:, :n2], n3)
    if validate:
        R = bcircz(T).payload
        resid = (R - P).norm()
        if resid > tol * P.norm():
            raise StructureViolation(f"not z-block circulant: residual {resid:.3e}")
    return T


# -- mode-3 transform ---------------------------------------------------------

def _dft3(X, inverse=False, method="fft"):
    n3 = X.shape[2]
    if method == "fft":
        return np.fft.ifft(X, axis=2) if inverse else np.fft.fft(X, axis=2)
    if method != "direct":
        raise ValueError(f"unknown transform method {method!r}")
    W = dft_matrix(n3) * math.sqrt(n3)
    if inverse:
        W = W.conj() / n3
    return np.einsum("kl,ijl->ijk", W, X)


def fftq(T: QTensor, method: str = "fft") -> QTensor:
    """Unnormalized mode-3 DFT; the c-part fibers are index-reversed after the DFT."""
    return QTensor(_dft3(T.d, False, method), _dft3(T.c, False, method)[:, :, perm_index(T.n3)])


def ifftq(T: QTensor, method: str = "fft") -> QTensor:
    return QTensor(_dft3(T.d, True, method), _dft3(T.c[:, :, perm_index(T.n3)], True, method))


def diag_hat(T: QTensor) -> QMatrix:
    """Place the frontal slices on the block diagonal."""
    n1, n2, n3 = T.shape
    D = np.zeros((n1 * n3, n2 * n3), complex)
    C = np.zeros_like(D)
    for k in range(n3):
        D[k * n1:(k + 1) * n1, k * n2:(k + 1) * n2] = T.d[:, :, k]
        C[k * n1:(k + 1) * n1, k * n2:(k + 1) * n2] = T.c[:, :, k]
    return QMatrix(D, C)


def idiag(M: QMatrix, n1: int, n2: int, n3: int, tol: float = TOL_STRUCT) -> QTensor:
    if M.shape != (n1 * n3, n2 * n3):
        raise ShapeMismatch(f"{M.shape} is not block diagonal of {n1}x{n2}x{n3}")
    D, C = M.D.copy(), M.C.copy()
    T = QTensor.zeros(n1, n2, n3)
    for k in range(n3):
        blk = np.s_[k * n1:(k + 1) * n1, k * n2:(k + 1) * n2]
        T.d[:, :, k] = D[blk]
        T.c[:, :, k] = C[blk]
        D[blk] = 0.0
        C[blk] = 0.0
    off = math.sqrt(np.vdot(D, D).real + np.vdot(C, C).real)
    if off > tol * M.norm():
        raise StructureViolation(f"off-block-diagonal mass {off:.3e}")
    return T


# -- products -----------------------------------------------------------------

def qt_product(A: QTensor, B: QTensor, path: str = "fourier") -> QTensor:
    """QT-product ``A *_Q B``."""
    if A.n2 != B.n1 or A.n3 != B.n3:
        raise ShapeMismatch(f"cannot multiply {A.shape} by {B.shape}")
    if path == "direct":
        return fold(bcircz(A).payload @ unfold(B), A.n3)
    if path != "fourier":
        raise ValueError(f"unknown path {path!r}")
    Ah, Bh = fftq(A), fftq(B)
    return ifftq(QTensor._from_batched(*_mul(*Ah._batched(), *Bh._batched())))


def _complex_ct(X: np.ndarray) -> np.ndarray:
    Y = np.swapaxes(X, 0, 1).conj()
    return Y[:, :, perm_index(X.shape[2])]


def tensor_ct(A: QTensor, path: str = "definition") -> QTensor:
    """Conjugate transpose ``A*``.

    The definition path evaluates ``unfold(A_d*) - (P kron I) unfold(A_c*) j``;
    moving the trailing ``j`` left conjugates the c-part.
    """
    if path == "definition":
        Pc = _complex_ct(A.c)[:, :, perm_index(A.n3)]
        return QTensor(_complex_ct(A.d), -Pc.conj())
    if path != "fourier":
        raise ValueError(f"unknown path {path!r}")
    return ifftq(QTensor._from_batched(*_ct(*fftq(A)._batched())))


def identity_tensor(n: int, n3: int) -> QTensor:
    T = QTensor.zeros(n, n, n3)
    T.d[:, :, 0] = np.eye(n)
    return T


# -- predicates ---------------------------------------------------------------

def is_unitary_t(A: QTensor, tol: float = 1e-10) -> bool:
    if A.n1 != A.n2:
        return False
    I = identity_tensor(A.n1, A.n3)
    Ah = tensor_ct(A)
    return (qt_product(Ah, A) - I).norm() <= tol and (qt_product(A, Ah) - I).norm() <= tol


def is_hermitian_t(A: QTensor, tol: float = 1e-10) -> bool:
    if A.n1 != A.n2:
        return False
    return (tensor_ct(A) - A).norm() <= tol * A.norm()


def _off_mass(T: QTensor, keep: np.ndarray) -> float:
    mask = ~keep[:, :, None]
    return math.sqrt((np.abs(T.d[mask.repeat(T.n3, 2)]) ** 2).sum()
                     + (np.abs(T.c[mask.repeat(T.n3, 2)]) ** 2).sum())


def _pattern_ok(T: QTensor, keep: np.ndarray, tol: float) -> bool:
    return _off_mass(T, keep) <= tol * max(T.norm(), np.finfo(float).tiny)


def is_f_diagonal(T: QTensor, tol: float = 1e-10) -> bool:
    return _pattern_ok(T, np.eye(T.n1, T.n2, dtype=bool), tol)


def is_f_upper_triangular(T: QTensor, tol: float = 1e-10) -> bool:
    return _pattern_ok(T, np.triu(np.ones((T.n1, T.n2), dtype=bool)), tol)


def is_f_lower_triangular(T: QTensor, tol: float = 1e-10) -> bool:
    return _pattern_ok(T, np.tril(np.ones((T.n1, T.n2), dtype=bool)), tol)


def is_unit_f_lower_triangular(T: QTensor, tol: float = 1e-10) -> bool:
    """First slice unit lower-triangular, the remaining slices lower-triangular."""
    if T.n1 != T.n2 or not is_f_lower_triangular(T, tol):
        return False
    dev = np.abs(np.diag(T.d[:, :, 0]) - 1.0) + np.abs(np.diag(T.c[:, :, 0]))
    return bool(np.all(dev <= tol))


def is_f_permutation(T: QTensor, tol: float = 1e-10) -> bool:
    if T.n1 != T.n2:
        return False
    if np.abs(T.c).max(initial=0.0) > tol or np.abs(T.d.imag).max(initial=0.0) > tol:
        return False
    R = T.d.real
    binary = np.minimum(np.abs(R), np.abs(R - 1.0))
    if binary.max(initial=0.0) > tol:
        return False
    return bool(np.all(np.abs(R.sum(axis=0) - 1) <= tol) and np.all(np.abs(R.sum(axis=1) - 1) <= tol))


def is_f_psd(T: QTensor, tol: float = 1e-10) -> bool:
    """Tensor-Hermitian with every frontal slice Hermitian positive semidefinite."""
    return is_hermitian_t(T, tol) and all(is_psd(S, tol) for S in T.slices())
