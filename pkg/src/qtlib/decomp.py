"""Tensor decompositions under the QT-product.

Every factorization here follows one template: transform with ``fftq``,
factor each frontal slice with the matching matrix routine from ``qmat``,
and transform the factors back with ``ifftq``.  The hat-domain slices are kept
on the result objects because several structural properties (PSD-ness of the
polar factor, the permutation pattern of PLU) only hold there.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmat
from .errors import NoConvergence, ShapeMismatch, Singular, ZeroPivot
from .qtensor import QTensor, fftq, ifftq, qt_product, tensor_ct

__all__ = ["QtPolar", "QtSvd", "QtPlu", "QtLu", "qt_polar", "qt_svd", "qt_plu", "qt_lu"]


def _hat_slices(A: QTensor):
    return fftq(A).slices()


def hat_scale(Ahat: QTensor) -> float:
    """Largest entry modulus over all hat slices; pivots are judged against it."""
    return float(np.sqrt(np.abs(Ahat.d) ** 2 + np.abs(Ahat.c) ** 2).max(initial=0.0))


def _back(slices) -> QTensor:
    return ifftq(QTensor.from_slices(slices))


def _require_square(A: QTensor, what: str):
    if A.n1 != A.n2:
        raise ShapeMismatch(f"{what} needs square frontal slices, got {A.shape}")


def _per_slice(fn, slices):
    out = []
    for k, S in enumerate(slices):
        try:
            out.append(fn(S))
        except ZeroPivot as e:
            raise ZeroPivot(slice=k + 1, step=e.step) from e
        except Singular as e:
            raise Singular("hat slice is singular", slice=k + 1, step=e.step) from e
        except NoConvergence as e:
            raise NoConvergence(slice=k + 1) from e
    return out


@dataclass(frozen=True, eq=False)
class QtPolar:
    U: QTensor
    H: QTensor
    Uhat: list
    Hhat: list
    side: str = "right"

    def reconstruct(self) -> QTensor:
        return qt_product(self.U, self.H) if self.side == "right" else qt_product(self.H, self.U)


@dataclass(frozen=True, eq=False)
class QtSvd:
    U: QTensor
    S: QTensor
    V: QTensor
    sigma: np.ndarray  # (n3, min(n1, n2)) hat-domain singular values
    Uhat: list
    Vhat: list

    def reconstruct(self) -> QTensor:
        return qt_product(qt_product(self.U, self.S), tensor_ct(self.V))

    def shat_blockdiag(self) -> np.ndarray:
        """Block-diagonal of the hat singular-value slices as a real matrix."""
        n1, n2, n3 = self.S.shape
        out = np.zeros((n1 * n3, n2 * n3))
        for k in range(n3):
            s = self.sigma[k]
            out[k * n1 + np.arange(len(s)), k * n2 + np.arange(len(s))] = s
        return out


@dataclass(frozen=True, eq=False)
class QtPlu:
    P: QTensor
    Phat: QTensor
    L: QTensor
    U: QTensor
    perms: np.ndarray  # (n3, n) row orders per hat slice

    def residual(self, A: QTensor) -> float:
        return (qt_product(self.P, A) - qt_product(self.L, self.U)).norm()


@dataclass(frozen=True, eq=False)
class QtLu:
    L: QTensor
    U: QTensor

    def reconstruct(self) -> QTensor:
        return qt_product(self.L, self.U)


def qt_polar(A: QTensor, side: str = "right", **svd_kw) -> QtPolar:
    """``A = U *_Q H`` (right) or ``A = H *_Q U`` (left) with U unitary, H Hermitian."""
    _require_square(A, "polar decomposition")
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left', not {side!r}")
    fn = qmat.mpolar_right if side == "right" else qmat.mpolar_left
    parts = _per_slice(lambda S: fn(S, **svd_kw), _hat_slices(A))
    Uhat = [p.U for p in parts]
    Hhat = [p.H for p in parts]
    return QtPolar(_back(Uhat), _back(Hhat), Uhat, Hhat, side)


def qt_svd(A: QTensor, **svd_kw) -> QtSvd:
    """``A = U *_Q S *_Q V*`` with S f-diagonal."""
    n1, n2, n3 = A.shape
    parts = _per_slice(lambda S: qmat.msvd(S, **svd_kw), _hat_slices(A))
    r = min(n1, n2)
    sigma = np.array([p.S for p in parts]).reshape(n3, r)
    Shat = np.zeros((n1, n2, n3), complex)
    Shat[np.arange(r), np.arange(r), :] = sigma.T
    S = ifftq(QTensor(Shat, np.zeros_like(Shat)))
    Uhat = [p.U for p in parts]
    Vhat = [p.V for p in parts]
    return QtSvd(_back(Uhat), S, _back(Vhat), sigma, Uhat, Vhat)


def qt_plu(A: QTensor, tol_pivot: float = qmat.TOL_PIVOT) -> QtPlu:
    """``P *_Q A = L *_Q U`` with P-hat an f-permutation tensor."""
    _require_square(A, "PLU")
    Ahat = fftq(A)
    scale = hat_scale(Ahat)
    parts = _per_slice(lambda S: qmat.mplu(S, tol_pivot, scale), Ahat.slices())
    Phat_d = np.stack([p.P.astype(complex) for p in parts], axis=2)
    Phat = QTensor(Phat_d, np.zeros_like(Phat_d))
    return QtPlu(ifftq(Phat), Phat, _back([p.L for p in parts]), _back([p.U for p in parts]),
                 np.array([p.perm for p in parts]))


def qt_lu(A: QTensor, tol_pivot: float = qmat.TOL_PIVOT) -> QtLu:
    """Pivot-free ``A = L *_Q U``; ZeroPivot carries the hat slice and step."""
    _require_square(A, "LU")
    Ahat = fftq(A)
    scale = hat_scale(Ahat)
    parts = _per_slice(lambda S: qmat.mlu(S, tol_pivot, scale), Ahat.slices())
    return QtLu(_back([L for L, _ in parts]), _back([U for _, U in parts]))

