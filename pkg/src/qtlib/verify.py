"""Self-check suite behind ``qtlib verify``.

Each check returns ``(ok, detail)``; ``run_all`` evaluates them in order and
never raises, so a broken check shows up as a failed line.
"""
from __future__ import annotations

import math

import numpy as np

from . import media, qmat, qtensor as qt, tensorio
from .decomp import qt_lu, qt_plu, qt_polar, qt_svd
from .qmat import QMatrix
from .qtensor import QTensor, bcircz, fftq, qt_product, tensor_ct
from .solve import TikhonovProblem, bcircz_inv, dense_inv, inv_err, tikhonov_dense, tikhonov_structured

CHECKS = []


def check(fn):
    CHECKS.append(fn)
    return fn


def _rng(k=0):
    return np.random.default_rng(20240 + k)


@check
def block_diagonalization():
    worst = 0.0
    rng = _rng(1)
    for _ in range(20):
        n1, n2, n3 = rng.integers(1, 5), rng.integers(1, 4), rng.integers(1, 7)
        A = QTensor.random(n1, n2, n3, rng)
        M = qt.dft_kron(n3, n1) @ bcircz(A).payload @ qt.dft_kron(n3, n2, inverse=True)
        worst = max(worst, (M - qt.diag_hat(fftq(A))).norm() / A.norm())
    return worst <= 1e-12, f"max rel {worst:.2e}"


@check
def multiplicative_equivalence():
    worst = 0.0
    rng = _rng(2)
    for _ in range(20):
        n1, n2, n4, n3 = (int(v) for v in rng.integers(1, 5, 4))
        A, B = QTensor.random(n1, n2, n3, rng), QTensor.random(n2, n4, n3, rng)
        C = qt_product(A, B)
        scale = A.norm() * B.norm()
        worst = max(worst, (bcircz(C).payload - bcircz(A).payload @ bcircz(B).payload).norm() / scale,
                    (qt_product(A, B, "direct") - C).norm() / scale)
    return worst <= 1e-12, f"max rel {worst:.2e}"


@check
def conjugate_transpose_equivalence():
    worst = 0.0
    rng = _rng(3)
    for _ in range(20):
        A = QTensor.random(*(int(v) for v in rng.integers(1, 5, 3)), rng)
        worst = max(worst, (bcircz(tensor_ct(A)).payload - bcircz(A).payload.H).norm() / A.norm(),
                    (tensor_ct(A, "fourier") - tensor_ct(A)).norm() / A.norm())
    return worst <= 1e-13, f"max rel {worst:.2e}"


@check
def unitary_equivalence():
    rng = _rng(4)
    ok = True
    for n3 in (1, 2, 3, 5):
        U = qt_polar(QTensor.random(3, 3, n3, rng)).U
        X = QTensor.random(3, 3, n3, rng)
        for T, expect in ((U, True), (X, False), (U * 1.001, False)):
            a = qt.is_unitary_t(T, 1e-10)
            b = qmat.is_unitary(bcircz(T).payload, 1e-10 * math.sqrt(n3))
            ok &= a == b == expect
    return ok, "unitary and non-unitary cases classified"


@check
def hermitian_equivalence():
    rng = _rng(5)
    ok = True
    for n3 in (1, 2, 4):
        X = QTensor.random(3, 3, n3, rng)
        H = X + tensor_ct(X)
        for T, expect in ((H, True), (X, False)):
            ok &= qt.is_hermitian_t(T, 1e-10) == qmat.is_hermitian(bcircz(T).payload, 1e-10) == expect
    return ok, "hermitian and non-hermitian cases classified"


@check
def round_trips():
    A = QTensor.random(3, 2, 4, _rng(6))
    errs = [
        (qt.ifftq(fftq(A)) - A).norm(),
        (qt.fold(qt.unfold(A), 4) - A).norm(),
        (qt.ibcircz(bcircz(A).payload, 4) - A).norm(),
        (qt.idiag(qt.diag_hat(A), 3, 2, 4) - A).norm(),
    ]
    worst = max(errs) / A.norm()
    return worst <= 1e-13, f"max rel {worst:.2e}"


@check
def dft_identities():
    worst = 0.0
    for n in (1, 2, 3, 7, 16, 64):
        F, P = qt.dft_matrix(n), qt.perm_matrix(n)
        worst = max(worst, np.abs(F @ F - P).max(), np.abs(F @ P - F.conj().T).max())
    return worst <= 1e-14, f"max abs {worst:.2e}"


def _golden_max(computed: QTensor, printed: QTensor) -> float:
    return max(np.abs(computed.d - printed.d).max(), np.abs(computed.c - printed.c).max())


@check
def golden_polar():
    g = tensorio.load_golden("polar")
    A = g["input"]
    p = qt_polar(A)
    dev = max(_golden_max(p.U, g["U"]), _golden_max(p.H, g["H"]))
    res = (A - p.reconstruct()).norm() / A.norm()
    return dev <= 5e-4 and res <= 1e-11 and qt.is_unitary_t(p.U, 1e-11), f"printed dev {dev:.1e}, residual {res:.1e}"


@check
def golden_plu():
    g = tensorio.load_golden("plu")
    A = g["input"]
    f = qt_plu(A)
    exact = np.array_equal(f.Phat.d, g["Phat"].d) and not f.Phat.c.any()
    dev = max(_golden_max(f.L, g["L"]), _golden_max(f.U, g["U"]))
    res = f.residual(A) / A.norm()
    return exact and dev <= 5e-4 and res <= 1e-11, f"P-hat exact {exact}, printed dev {dev:.1e}, residual {res:.1e}"


@check
def golden_svd_counterexample():
    g = tensorio.load_golden("svd")
    A = g["input"]
    s = qt_svd(A)
    bd = s.shat_blockdiag()
    off = bd.copy()
    r = min(bd.shape)
    off[np.arange(r), np.arange(r)] = 0.0
    not_diag = bool(np.abs(off).max() > 0)
    slices_diag = qt.is_f_diagonal(s.S, 1e-12) and qt.is_f_diagonal(fftq(s.S), 1e-12)
    sv_dev = np.abs(s.sigma - g["hat_singular_values"]).max()
    return not_diag and slices_diag and sv_dev <= 5e-4, f"off-diagonal {not_diag}, sigma dev {sv_dev:.1e}"


@check
def decompositions():
    rng = _rng(7)
    worst = 0.0
    for _ in range(3):
        A = QTensor.random(4, 4, 3, rng)
        p, s, f, lu = qt_polar(A), qt_svd(A), qt_plu(A), qt_lu(A)
        res = max((A - p.reconstruct()).norm(), (A - s.reconstruct()).norm(),
                  f.residual(A), (A - lu.reconstruct()).norm())
        worst = max(worst, res / A.norm())
    return worst <= 1e-11, f"max rel residual {worst:.2e}"


@check
def structured_inverse():
    M = bcircz(QTensor.random(5, 5, 3, _rng(8)))
    B = bcircz_inv(M).payload
    err = inv_err(M.payload, B)
    agree = (B - dense_inv(M)).norm() / B.norm()
    return err <= 1e-12 and agree <= 1e-10, f"err {err:.1e}, dense agreement {agree:.1e}"


@check
def tikhonov():
    rng = _rng(9)
    M = bcircz(QTensor.random(4, 4, 3, rng))
    prob = TikhonovProblem(M, QMatrix.random(12, 1, rng), 0.5)
    xs, xd = tikhonov_structured(prob), tikhonov_dense(prob)
    rel = (xs - xd).norm() / xd.norm()
    r, s = prob.normal_residual(xs)
    return rel <= 1e-10 and r <= 1e-10 * s, f"paths {rel:.1e}, normal residual {r / s:.1e}"


@check
def rotation_angles():
    rng = _rng(10)
    a = rng.uniform(0.1, math.pi - 0.1, 4)
    b = rng.uniform(-3.0, 3.0, 4)
    g = rng.uniform(0.1, math.pi - 0.1, 4)
    U = media.synthesize_unitary(media.RotationParams(a, b, g))
    back = media.angles_from_unitary(U)
    dev = max(np.abs(back.alpha - a).max(), np.abs(back.beta - b).max(), np.abs(back.gamma - g).max())
    return dev <= 1e-10 and qt.is_unitary_t(U, 1e-11), f"max dev {dev:.1e}"


@check
def media_metrics():
    flat = np.full((4, 6, 6, 3), 77, np.uint8)
    r = media.consistency_metrics(flat)
    return r.tc_mean == 1.0 and r.tc_std == 0.0 and r.cc_mean == 1.0, "constant clip gives exact 1, 0, 1"


@check
def serialization():
    rng = _rng(11)
    ok = True
    for _ in range(20):
        T = QTensor.random(*(int(v) for v in rng.integers(1, 4, 3)), rng) * 1e3
        for enc, dec in ((tensorio.to_bytes, tensorio.from_bytes), (tensorio.to_json, tensorio.from_json)):
            U = dec(enc(T))
            ok &= np.array_equal(U.d, T.d) and np.array_equal(U.c, T.c)
    return ok, "binary and JSON round-trips bit-exact"


def run_all():
    results = []
    for fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as e:  # a crashing check is a failed check
            ok, detail = False, f"{type(e).__name__}: {e}"
        results.append((fn.__name__, bool(ok), detail))
    return results
