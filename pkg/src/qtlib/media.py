"""Per-channel frame rotation, rotation-parameter extraction and consistency metrics.

Frames are ``(H, W, 3)`` uint8 arrays; a clip is an ``(N, H, W, 3)`` array.
Angles for rotation schedules are in degrees, positive meaning
counter-clockwise as displayed, about the center ``((W-1)/2, (H-1)/2)``.
"""
from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import NotPureUnit, ShapeMismatch, TooFewFrames, UnknownKind
from .qtensor import QTensor, fftq, ifftq
from .tensorio import atomic_write

LUMA = (0.299, 0.587, 0.114)
TOL_PURE = 1e-8
_DEGENERATE = 1e-12


# -- rotation parameters ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RotationParams:
    """Per-slice angles in radians: alpha, gamma in [0, pi], beta in (-pi, pi]."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        a, b, g = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (self.alpha, self.beta, self.gamma))
        if not (a.shape == b.shape == g.shape) or a.ndim != 1:
            raise ShapeMismatch("alpha, beta, gamma must be 1-D of equal length")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "gamma", g)

    def __len__(self):
        return len(self.alpha)


def _pure_unit(D, C, tol):
    w, a, b, c = D.real, D.imag, C.real, -C.imag
    return abs(w) <= tol and abs(math.sqrt(w * w + a * a + b * b + c * c) - 1.0) <= tol, (a, b, c)


def angles_from_unitary(U: QTensor, tol: float = TOL_PURE) -> RotationParams:
    """Read (alpha, beta, gamma) from the diagonal of each transformed slice.

    Entry 1 is ``cos(a) i + sin(a) cos(b) j + sin(a) sin(b) k`` and entry 2 the
    same with gamma.  Beta comes from entry 1, from entry 2 when sin(alpha)
    vanishes, and is 0 when both sines vanish.
    """
    if U.shape[:2] != (2, 2):
        raise ShapeMismatch(f"expected a 2x2xp tensor, got {U.shape}")
    Uh = fftq(U)
    al, be, ga = [], [], []
    for n in range(U.n3):
        D, C = Uh.d[:, :, n], Uh.c[:, :, n]
        for i, j in ((0, 1), (1, 0)):
            if abs(D[i, j]) > tol or abs(C[i, j]) > tol:
                raise NotPureUnit("transformed slice is not diagonal", slice=n + 1, entry=(i + 1, j + 1))
        ok1, (a1, b1, c1) = _pure_unit(D[0, 0], C[0, 0], tol)
        if not ok1:
            raise NotPureUnit(slice=n + 1, entry=1)
        ok2, (a2, b2, c2) = _pure_unit(D[1, 1], C[1, 1], tol)
        if not ok2:
            raise NotPureUnit(slice=n + 1, entry=2)
        s1, s2 = math.hypot(b1, c1), math.hypot(b2, c2)
        al.append(math.atan2(s1, a1))
        ga.append(math.atan2(s2, a2))
        if s1 > _DEGENERATE:
            be.append(math.atan2(c1, b1))
        elif s2 > _DEGENERATE:
            be.append(math.atan2(c2, b2))
        else:
            be.append(0.0)
    be = np.array(be)
    be[be <= -math.pi] = math.pi  # keep beta in (-pi, pi]
    return RotationParams(al, be, ga)


def synthesize_unitary(params: RotationParams) -> QTensor:
    """Inverse of ``angles_from_unitary``: build the hat slices, then ``ifftq``."""
    a, b, g = params.alpha, params.beta, params.gamma
    p = len(a)
    d = np.zeros((2, 2, p), complex)
    c = np.zeros((2, 2, p), complex)
    for idx, ang in ((0, a), (1, g)):
        x = np.cos(ang)
        y = np.sin(ang) * np.cos(b)
        z = np.sin(ang) * np.sin(b)
        d[idx, idx] = 1j * x
        c[idx, idx] = y - 1j * z
    return ifftq(QTensor(d, c))


# -- schedules ----------------------------------------------------------------

SCHEDULES = ("same_linear", "diff_linear", "fixed_step", "sine_phase", "log_growth")

DEFAULTS = {
    "same_linear": {"rate": 1.0, "start": 0.0},
    "diff_linear": {"rate": 1.0, "offsets": (0.0, 25.0, 50.0)},
    "fixed_step": {"steps": (1.0, 1.2, 1.4), "start": 0.0},
    "sine_phase": {"amplitude": 180.0, "omega": 0.05, "phases": (0.0, 2 * math.pi / 3, 4 * math.pi / 3)},
    "log_growth": {"rates": (30.0, 40.0, 50.0)},
}


def _wrap(deg: np.ndarray) -> np.ndarray:
    out = np.mod(deg, 360.0)
    out[out >= 360.0] = 0.0
    return out


def schedule(kind: str, N: int, **params) -> np.ndarray:
    """Per-frame, per-channel angles in degrees, shape (N, 3), frames t = 1..N."""
    if kind not in DEFAULTS:
        raise UnknownKind(f"unknown schedule {kind!r}; choose from {', '.join(SCHEDULES)}")
    if N < 1:
        raise ValueError("N must be at least 1")
    unknown = set(params) - set(DEFAULTS[kind])
    if unknown:
        raise TypeError(f"{kind} does not take {sorted(unknown)}")
    p = {**DEFAULTS[kind], **params}
    t = np.arange(1, N + 1, dtype=float)[:, None]
    if kind == "same_linear":
        theta = p["start"] + p["rate"] * (t - 1) * np.ones(3)
    elif kind == "diff_linear":
        theta = np.asarray(p["offsets"], float) + p["rate"] * (t - 1)
    elif kind == "fixed_step":
        theta = p["start"] + np.asarray(p["steps"], float) * (t - 1)
    elif kind == "sine_phase":
        theta = p["amplitude"] * np.sin(p["omega"] * t + np.asarray(p["phases"], float))
    else:
        theta = np.asarray(p["rates"], float) * np.log1p(t)
    return _wrap(np.broadcast_to(theta, (N, 3)).astype(float))


# -- rotation -----------------------------------------------------------------

def _cos_sin(deg: float):
    deg = float(deg) % 360.0
    exact = {0.0: (1.0, 0.0), 90.0: (0.0, 1.0), 180.0: (-1.0, 0.0), 270.0: (0.0, -1.0)}
    if deg in exact:
        return exact[deg]
    r = math.radians(deg)
    return math.cos(r), math.sin(r)


def rotate_plane(plane: np.ndarray, deg: float) -> np.ndarray:
    """Bilinear rotation of one plane (float result, zero outside the source)."""
    H, W = plane.shape
    cs, sn = _cos_sin(deg)
    if cs == 1.0:
        return plane.astype(float)
    cy, cx = (H - 1) / 2, (W - 1) / 2
    rr, cc = np.mgrid[0:H, 0:W].astype(float)
    x, yu = cc - cx, cy - rr
    # sample the source at the output point rotated back by -deg
    src_c = cx + cs * x + sn * yu
    src_r = cy - (-sn * x + cs * yu)
    r0, c0 = np.floor(src_r).astype(int), np.floor(src_c).astype(int)
    fr, fc = src_r - r0, src_c - c0
    padded = np.zeros((H + 2, W + 2))
    padded[1:-1, 1:-1] = plane
    # neighbours outside the image read the zero border
    R0 = np.clip(r0 + 1, 0, H + 1)
    R1 = np.clip(r0 + 2, 0, H + 1)
    C0 = np.clip(c0 + 1, 0, W + 1)
    C1 = np.clip(c0 + 2, 0, W + 1)
    return ((1 - fr) * (1 - fc) * padded[R0, C0] + (1 - fr) * fc * padded[R0, C1]
            + fr * (1 - fc) * padded[R1, C0] + fr * fc * padded[R1, C1])


def _quantize(v: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(v), 0, 255).astype(np.uint8)


def rotate_frames(frames, angles) -> np.ndarray:
    """Rotate every channel plane of every frame by its own angle (degrees)."""
    frames = np.asarray(frames)
    angles = np.asarray(angles, dtype=float)
    if frames.ndim != 4 or frames.shape[-1] != 3:
        raise ShapeMismatch(f"frames must be (N, H, W, 3), got {frames.shape}")
    if angles.shape != (frames.shape[0], 3):
        raise ShapeMismatch(f"angles must be ({frames.shape[0]}, 3), got {angles.shape}")
    out = np.empty(frames.shape, np.uint8)
    for n in range(frames.shape[0]):
        for ch in range(3):
            if _cos_sin(angles[n, ch])[0] == 1.0:
                out[n, :, :, ch] = frames[n, :, :, ch]
            else:
                out[n, :, :, ch] = _quantize(rotate_plane(frames[n, :, :, ch].astype(float), angles[n, ch]))
    return out


# -- metrics ------------------------------------------------------------------

@dataclass(frozen=True)
class ConsistencyReport:
    tc_mean: float
    tc_std: float | None
    cc_mean: float
    tc: tuple
    cc: tuple
    gray: str = "luma 0.299 R + 0.587 G + 0.114 B; population std"


def grayscale(frames: np.ndarray) -> np.ndarray:
    f = np.asarray(frames, dtype=float)
    return f[..., 0] * LUMA[0] + f[..., 1] * LUMA[1] + f[..., 2] * LUMA[2]


def consistency_metrics(frames) -> ConsistencyReport:
    frames = np.asarray(frames)
    if frames.ndim != 4 or frames.shape[-1] != 3:
        raise ShapeMismatch(f"frames must be (N, H, W, 3), got {frames.shape}")
    N = frames.shape[0]
    if N < 2:
        raise TooFewFrames(f"temporal consistency needs at least 2 frames, got {N}")
    G = grayscale(frames)
    tc = 1.0 - np.abs(np.diff(G, axis=0)).mean(axis=(1, 2)) / 255.0
    tc_mean = float(tc.mean())
    tc_std = float(math.sqrt(((tc - tc_mean) ** 2).sum() / (N - 2))) if N >= 3 else None
    sig = frames.astype(float).std(axis=(1, 2)).mean(axis=1)
    cc = 1.0 / (1.0 + sig / 255.0)
    return ConsistencyReport(tc_mean, tc_std, float(cc.mean()), tuple(tc.tolist()), tuple(cc.tolist()))


def metrics_csv(rows) -> str:
    """rows: iterable of (label, ConsistencyReport)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("label", "tc_mean", "tc_std", "cc_mean"))
    for label, r in rows:
        w.writerow((label, f"{r.tc_mean:.6f}", "" if r.tc_std is None else f"{r.tc_std:.6f}", f"{r.cc_mean:.6f}"))
    return buf.getvalue()


def metrics_table(rows) -> str:
    head = ("", "temporal consistency mean", "temporal consistency std", "color consistency mean")
    body = [(label, f"{r.tc_mean:.4f}", "n/a" if r.tc_std is None else f"{r.tc_std:.4f}", f"{r.cc_mean:.4f}")
            for label, r in rows]
    widths = [max(len(row[i]) for row in [head, *body]) for i in range(4)]
    fmt = "  ".join(f"{{:<{w}}}" if i == 0 else f"{{:>{w}}}" for i, w in enumerate(widths))
    return "\n".join(fmt.format(*row) for row in [head, *body]) + "\n"


# -- PPM sequences ------------------------------------------------------------

FRAME_PATTERN = "frame_{:06d}.ppm"
_FRAME_RE = re.compile(r"^frame_(\d{6})\.ppm$")


def read_ppm(path) -> np.ndarray:
    with Image.open(path) as im:
        if im.format != "PPM" or im.mode != "RGB":
            raise ValueError(f"{path}: expected an RGB binary PPM, got {im.format} {im.mode}")
        return np.asarray(im, dtype=np.uint8).copy()


def write_ppm(path, frame: np.ndarray):
    frame = np.asarray(frame)
    if frame.dtype != np.uint8 or frame.ndim != 3 or frame.shape[2] != 3:
        raise ShapeMismatch(f"frame must be (H, W, 3) uint8, got {frame.shape} {frame.dtype}")
    buf = io.BytesIO()
    Image.fromarray(frame, "RGB").save(buf, format="PPM")
    atomic_write(path, buf.getvalue())


def frame_paths(directory) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"{d}: not a directory")
    return sorted(p for p in d.iterdir() if _FRAME_RE.match(p.name))


def read_frames(directory) -> np.ndarray:
    paths = frame_paths(directory)
    if not paths:
        raise FileNotFoundError(f"{directory}: no frame_NNNNNN.ppm files")
    frames = [read_ppm(p) for p in paths]
    if len({f.shape for f in frames}) != 1:
        raise ShapeMismatch(f"{directory}: frames differ in size")
    return np.stack(frames)


def write_frames(directory, frames):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for n, f in enumerate(frames, start=1):
        write_ppm(d / FRAME_PATTERN.format(n), f)


# -- shipped test clip --------------------------------------------------------

CLIP_FRAMES = 30
CLIP_SIZE = 32


def synthetic_clip(n_frames: int = CLIP_FRAMES, size: int = CLIP_SIZE) -> np.ndarray:
    """Smooth, slowly drifting color pattern; deterministic, no RNG."""
    y, x = np.mgrid[0:size, 0:size] / (size - 1)
    frames = []
    for t in range(n_frames):
        ph = 2 * math.pi * t / 120
        r = 128 + 90 * np.sin(2 * math.pi * x + ph)
        g = 128 + 90 * np.cos(2 * math.pi * y - ph)
        b = 128 + 90 * np.sin(2 * math.pi * (x + y) / 2 + 2 * ph)
        frames.append(np.stack([r, g, b], axis=-1))
    return _quantize(np.array(frames))


def shipped_clip_dir() -> Path:
    from importlib import resources

    return Path(str(resources.files("qtlib") / "data" / "clip"))
