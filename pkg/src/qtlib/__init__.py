"""Quaternion tensor algebra: z-block circulants, QT-product decompositions and solvers."""
from .errors import (
    NoConvergence, NotPureUnit, NumericalError, QtError, ShapeMismatch, Singular,
    StructureViolation, TooFewFrames, UnknownKind, ZeroPivot, ZeroQuaternion,
)
from .quat import Quaternion
from .qmat import QMatrix
from .qtensor import QTensor, bcircz, fftq, ifftq, qt_product, tensor_ct
from .decomp import qt_lu, qt_plu, qt_polar, qt_svd
from .solve import TikhonovProblem, bcircz_inv, inv_err, tikhonov_dense, tikhonov_structured

__version__ = "0.1.0"

__all__ = [
    "QtError", "NumericalError", "ShapeMismatch", "StructureViolation", "ZeroQuaternion", "Singular",
    "ZeroPivot", "NoConvergence", "NotPureUnit", "UnknownKind", "TooFewFrames",
    "Quaternion", "QMatrix", "QTensor", "bcircz", "fftq", "ifftq", "qt_product", "tensor_ct",
    "qt_polar", "qt_svd", "qt_plu", "qt_lu",
    "TikhonovProblem", "bcircz_inv", "inv_err", "tikhonov_structured", "tikhonov_dense",
]
