"""``qtlib`` command line.

Exit codes: 0 success, 1 usage/shape/format errors, 2 numerical failures
(singular slices, zero pivots, non-convergence), 3 file-system errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import traceback
from pathlib import Path

import numpy as np

from . import media, qtensor as qt, tensorio
from .decomp import qt_lu, qt_plu, qt_polar, qt_svd
from .errors import NumericalError, QtError
from .qmat import is_psd
from .qtensor import QTensor, bcircz, fftq, qt_product, tensor_ct
from .solve import TikhonovProblem, bench, bench_csv, bcircz_inv, inv_err, tikhonov_structured

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

EPILOG = """\
file formats:
  .qtns  binary: magic "QTNS1\\n", 2 pad bytes, n1 n2 n3 as uint64 LE,
         16 reserved bytes, then (w, x, y, z) float64 LE per entry in
         (slice, row, column) order; 48 + 32*n1*n2*n3 bytes.
  .json  {"dims": [n1, n2, n3], "slices": [[[[w, x, y, z], ...], ...], ...]}
  frames PPM (P6, maxval 255) files named frame_000001.ppm, ...
  CSV    bench: size,method,time_s,err   metrics: label,tc_mean,tc_std,cc_mean

exit codes:
  0 success, 1 usage or input error, 2 numerical failure (singular slice,
  no convergence, failed verify), 3 file system error
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- helpers ------------------------------------------------------------------

def _load(path, fmt=None) -> QTensor:
    return tensorio.load(path, None if fmt in (None, "auto") else fmt)


def _factor_path(prefix: str, name: str, fmt: str) -> Path:
    return Path(f"{prefix}.{name}.{'json' if fmt == 'json' else 'qtns'}")


def _save(T: QTensor, path, fmt):
    tensorio.save(T, path, "json" if fmt == "json" else "bin")


def _write_report(report: dict, path=None):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if path is not None:
        tensorio.atomic_write(path, text)
    sys.stdout.write(text)


def _rel(x: float, scale: float) -> float:
    return float(x / scale) if scale > 0 else float(x)


def _golden_factors(path) -> dict:
    """Printed factors when the input is one of the golden example files."""
    if not str(path).lower().endswith(".json"):
        return {}
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict) or "input" not in raw:
        return {}
    return {k: tensorio.from_json_obj(v) for k, v in raw.items()
            if k != "input" and isinstance(v, dict) and "dims" in v}


def _maxdev(a: QTensor, b: QTensor) -> float:
    if a.shape != b.shape:
        return float("inf")
    return float(max(np.abs(a.d - b.d).max(), np.abs(a.c - b.c).max()))


# -- subcommands --------------------------------------------------------------

def cmd_decompose(args) -> int:
    A = _load(args.inp, args.format)
    nA = A.norm()
    tol = args.tol
    rep = {"kind": args.kind, "dims": list(A.shape), "norm": nA}
    printed = _golden_factors(args.inp)
    if args.kind == "polar":
        r = qt_polar(A, args.side)
        factors = {"U": r.U, "H": r.H}
        rep["side"] = args.side
        rep["residual_rel"] = _rel((A - r.reconstruct()).norm(), nA)
        rep["U_unitary"] = qt.is_unitary_t(r.U, tol)
        rep["H_hermitian"] = qt.is_hermitian_t(r.H, tol)
        rep["H_hat_psd"] = all(is_psd(H, tol) for H in r.Hhat)
        rep["H_spatial_slices_psd"] = [bool(is_psd(S, tol)) for S in r.H.slices()]
        matrix = bcircz(r.U).payload @ bcircz(r.H).payload if args.side == "right" else \
            bcircz(r.H).payload @ bcircz(r.U).payload
        if "U" in printed and "H" in printed and args.side == "right":
            rep["printed_residual_rel"] = _rel((A - qt_product(printed["U"], printed["H"])).norm(), nA)
    elif args.kind == "svd":
        r = qt_svd(A)
        factors = {"U": r.U, "S": r.S, "V": r.V}
        rep["residual_rel"] = _rel((A - r.reconstruct()).norm(), nA)
        rep["U_unitary"] = qt.is_unitary_t(r.U, tol)
        rep["V_unitary"] = qt.is_unitary_t(r.V, tol)
        rep["S_f_diagonal"] = qt.is_f_diagonal(r.S, tol)
        rep["S_hat_f_diagonal"] = qt.is_f_diagonal(fftq(r.S), tol)
        rep["hat_singular_values"] = r.sigma.tolist()
        matrix = bcircz(r.U).payload @ bcircz(r.S).payload @ bcircz(r.V).payload.H
    elif args.kind == "plu":
        r = qt_plu(A)
        factors = {"P": r.P, "Phat": r.Phat, "L": r.L, "U": r.U}
        rep["residual_rel"] = _rel(r.residual(A), nA)
        rep["Phat_f_permutation"] = qt.is_f_permutation(r.Phat, tol)
        rep["L_hat_unit_lower"] = qt.is_unit_f_lower_triangular(fftq(r.L), tol)
        rep["U_hat_upper"] = qt.is_f_upper_triangular(fftq(r.U), tol)
        rep["L_unit_f_lower"] = qt.is_unit_f_lower_triangular(r.L, tol)
        rep["U_f_upper"] = qt.is_f_upper_triangular(r.U, tol)
        rep["hat_row_orders"] = (r.perms + 1).tolist()
        matrix = None
        lhs = bcircz(r.P).payload @ bcircz(A).payload
        rep["matrix_identity_rel"] = _rel((lhs - bcircz(r.L).payload @ bcircz(r.U).payload).norm(), nA)
    else:
        r = qt_lu(A)
        factors = {"L": r.L, "U": r.U}
        rep["residual_rel"] = _rel((A - r.reconstruct()).norm(), nA)
        rep["L_unit_f_lower"] = qt.is_unit_f_lower_triangular(r.L, tol)
        rep["U_f_upper"] = qt.is_f_upper_triangular(r.U, tol)
        matrix = bcircz(r.L).payload @ bcircz(r.U).payload
    if matrix is not None:
        rep["matrix_identity_rel"] = _rel((bcircz(A).payload - matrix).norm(), nA)
    if printed:
        rep["printed_max_abs_dev"] = {k: _maxdev(v, printed[k]) for k, v in factors.items() if k in printed}
    rep["files"] = {}
    for name, T in factors.items():
        path = _factor_path(args.out, name, args.format)
        _save(T, path, args.format)
        rep["files"][name] = str(path)
    _write_report(rep, f"{args.out}.report.json")
    return EXIT_OK


def cmd_mul(args) -> int:
    A, B = _load(args.inp, args.format), _load(args.in2, args.format)
    C = qt_product(A, B, args.path)
    other = qt_product(A, B, "direct" if args.path == "fourier" else "fourier")
    diff = _rel((C - other).norm(), A.norm() * B.norm())
    _save(C, args.out, tensorio.guess_format(args.out) if args.format == "auto" else args.format)
    _write_report({"dims": list(C.shape), "cross_path_agree": diff <= 1e-12, "cross_path_tol": 1e-12})
    return EXIT_OK


def cmd_ct(args) -> int:
    A = _load(args.inp, args.format)
    path = "definition" if args.path == "direct" else "fourier"
    _save(tensor_ct(A, path), args.out, tensorio.guess_format(args.out) if args.format == "auto" else args.format)
    return EXIT_OK


def cmd_inv(args) -> int:
    A = _load(args.inp, args.format)
    M = bcircz(A)
    Minv = bcircz_inv(M)
    _save(Minv.generator, args.out, tensorio.guess_format(args.out) if args.format == "auto" else args.format)
    _write_report({"dims": list(A.shape), "size": A.n1 * A.n3, "err": inv_err(M.payload, Minv.payload)})
    return EXIT_OK


def cmd_tikhonov(args) -> int:
    Bt, bt = _load(args.inp, args.format), _load(args.in2, args.format)
    m, q = Bt.n1, Bt.n3
    if bt.shape == (m, 1, q):
        b = qt.unfold(bt)
    elif bt.shape == (m * q, 1, 1):
        b = bt.slice(0)
    else:
        raise qt.ShapeMismatch(f"b must be {m}x1x{q} or {m * q}x1x1, got {bt.shape}")
    prob = TikhonovProblem(bcircz(Bt), b, args.lam)
    x = tikhonov_structured(prob)
    _save(qt.fold(x, q), args.out, tensorio.guess_format(args.out) if args.format == "auto" else args.format)
    r, s = prob.normal_residual(x)
    _write_report({"lambda": args.lam, "n": m * q, "normal_residual_rel": _rel(r, s)})
    return EXIT_OK


def _schedule_params(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            vals = [float(t) for t in v.split(",")]
        except ValueError:
            raise UsageError(f"--param {k}: not a number list: {v!r}") from None
        out[k] = vals[0] if len(vals) == 1 else tuple(vals)
    return out


def cmd_rotate(args) -> int:
    frames = media.read_frames(args.frames)
    try:
        angles = media.schedule(args.schedule, len(frames), **_schedule_params(args.param))
    except TypeError as e:
        raise UsageError(str(e)) from None
    out = media.rotate_frames(frames, angles)
    media.write_frames(args.out, out)
    if args.angles_csv:
        rows = "\n".join(f"{n + 1},{a[0]:.6f},{a[1]:.6f},{a[2]:.6f}" for n, a in enumerate(angles))
        tensorio.atomic_write(args.angles_csv, "frame,r_deg,g_deg,b_deg\n" + rows + "\n")
    return EXIT_OK


def cmd_metrics(args) -> int:
    rows = [(Path(d).name or str(d), media.consistency_metrics(media.read_frames(d))) for d in args.frames]
    if args.out:
        tensorio.atomic_write(args.out, media.metrics_csv(rows))
    sys.stdout.write(media.metrics_table(rows))
    sys.stdout.write(f"({rows[0][1].gray})\n")
    return EXIT_OK


def _parse_sizes(text: str):
    sizes = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        try:
            m, q = (int(v) for v in part.split(","))
        except ValueError:
            raise UsageError(f"--sizes expects 'm,q;m,q', got {text!r}") from None
        if m < 1 or q < 1:
            raise UsageError("--sizes entries must be positive")
        sizes.append((m, q))
    if not sizes:
        raise UsageError("--sizes is empty")
    return sizes


def cmd_bench(args) -> int:
    rows = bench(_parse_sizes(args.sizes), args.trials, args.seed, args.lam, not args.no_tikhonov)
    text = bench_csv(rows)
    if args.out:
        tensorio.atomic_write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_all

    results = run_all()
    width = max(len(n) for n, _, _ in results)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    failed = sum(not ok for _, ok, _ in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qtlib", description="Quaternion tensor algebra under the QT-product.",
                epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def tensor_io(sp, second=False, out=True):
        sp.add_argument("--in", dest="inp", required=True, help="input tensor (.qtns or .json)")
        if second:
            sp.add_argument("--in2", required=True, help="second input tensor")
        if out:
            sp.add_argument("--out", required=True, help="output path")
        sp.add_argument("--format", choices=("auto", "bin", "json"), default="auto",
                        help="tensor format (default: from the file extension)")

    sp = sub.add_parser("decompose", help="polar, SVD, PLU or LU of a tensor")
    sp.add_argument("kind", choices=("polar", "svd", "plu", "lu"))
    tensor_io(sp)
    sp.add_argument("--side", choices=("right", "left"), default="right", help="polar side")
    sp.add_argument("--tol", type=float, default=1e-10, help="predicate tolerance")
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("mul", help="QT-product of two tensors")
    tensor_io(sp, second=True)
    sp.add_argument("--path", choices=("direct", "fourier"), default="fourier")
    sp.set_defaults(func=cmd_mul)

    sp = sub.add_parser("ct", help="conjugate transpose of a tensor")
    tensor_io(sp)
    sp.add_argument("--path", choices=("direct", "fourier"), default="direct",
                    help="direct evaluates the definition; fourier goes through fftq")
    sp.set_defaults(func=cmd_ct)

    sp = sub.add_parser("inv", help="structured inverse of bcircz(A); writes the inverse generator")
    tensor_io(sp)
    sp.set_defaults(func=cmd_inv)

    sp = sub.add_parser("tikhonov", help="regularized solve with B = bcircz(--in), b = --in2")
    tensor_io(sp, second=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=0.5)
    sp.set_defaults(func=cmd_tikhonov)

    sp = sub.add_parser("rotate", help="rotate the channels of a PPM frame sequence")
    sp.add_argument("--frames", required=True, help="directory of frame_NNNNNN.ppm")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--schedule", choices=media.SCHEDULES, default="same_linear")
    sp.add_argument("--param", action="append", metavar="KEY=VALUE",
                    help="schedule parameter, e.g. rate=2 or offsets=0,25,50 (repeatable)")
    sp.add_argument("--angles-csv", help="also write the per-frame angles here")
    sp.set_defaults(func=cmd_rotate)

    sp = sub.add_parser("metrics", help="temporal and color consistency of frame sequences")
    sp.add_argument("--frames", required=True, nargs="+", help="one or more frame directories")
    sp.add_argument("--out", help="CSV output path")
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("bench", help="time structured vs dense inversion")
    sp.add_argument("--sizes", default="3,3;15,3;75,3", help="'m,q;m,q;...' (n = m*q)")
    sp.add_argument("--trials", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--lambda", dest="lam", type=float, default=0.5)
    sp.add_argument("--no-tikhonov", action="store_true")
    sp.add_argument("--out", help="CSV output path")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("verify", help="run the built-in invariant and example checks")
    sp.set_defaults(func=cmd_verify)
    return p


def _origin(exc: BaseException) -> str:
    """Innermost qtlib module in the traceback."""
    name = "cli"
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        mod = frame.f_globals.get("__name__", "")
        if mod.startswith("qtlib."):
            name = mod.split(".", 1)[1]
    return name


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as e:
        print(f"error [{_origin(e)}] {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (QtError, ValueError) as e:
        print(f"error [{_origin(e)}] {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error [{_origin(e)}] {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
