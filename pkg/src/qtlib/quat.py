"""Quaternion scalars and their complex-pair view.

A quaternion ``q = w + x i + y j + z k`` splits uniquely as ``q = c1 + j c2``
with ``c1 = w + x i`` and ``c2 = y - z i``.  Every matrix and tensor in this
package is stored in that split form, so the pair conversion here is the one
place where the sign convention on ``c2`` lives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ZeroQuaternion

ZERO_TOL = 1e-300


class ComplexPair(NamedTuple):
    c1: complex
    c2: complex


@dataclass(frozen=True)
class Quaternion:
    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __iter__(self):
        return iter((self.w, self.x, self.y, self.z))

    def __add__(self, other):
        other = _coerce(other)
        return Quaternion(self.w + other.w, self.x + other.x, self.y + other.y, self.z + other.z)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return Quaternion(self.w - other.w, self.x - other.x, self.y - other.y, self.z - other.z)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        return qmul(self, _coerce(other))

    def __rmul__(self, other):
        return qmul(_coerce(other), self)

    def __truediv__(self, other):
        if isinstance(other, Quaternion):
            return qmul(self, qinv(other))
        return Quaternion(self.w / other, self.x / other, self.y / other, self.z / other)

    def __abs__(self):
        return qnorm(self)

    def conj(self) -> Quaternion:
        return qconj(self)

    def inv(self, tol: float = ZERO_TOL) -> Quaternion:
        return qinv(self, tol)

    def to_pair(self) -> ComplexPair:
        return to_pair(self)

    def isclose(self, other, atol: float = 1e-12) -> bool:
        other = _coerce(other)
        return all(abs(a - b) <= atol for a, b in zip(self, other))


I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)
ONE = Quaternion(1.0)


def _coerce(v) -> Quaternion:
    if isinstance(v, Quaternion):
        return v
    if isinstance(v, complex):
        return Quaternion(v.real, v.imag)
    return Quaternion(float(v))


def qmul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product ``a * b``."""
    return Quaternion(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )


def qconj(q: Quaternion) -> Quaternion:
    return Quaternion(q.w, -q.x, -q.y, -q.z)


def qnorm(q: Quaternion) -> float:
    return math.hypot(q.w, q.x, q.y, q.z)


def qinv(q: Quaternion, tol: float = ZERO_TOL) -> Quaternion:
    n2 = q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z
    if math.sqrt(n2) <= tol:
        raise ZeroQuaternion(f"cannot invert {q!r}")
    return Quaternion(q.w / n2, -q.x / n2, -q.y / n2, -q.z / n2)


def to_pair(q: Quaternion) -> ComplexPair:
    return ComplexPair(complex(q.w, q.x), complex(q.y, -q.z))


def from_pair(p) -> Quaternion:
    c1, c2 = complex(p[0]), complex(p[1])
    return Quaternion(c1.real, c1.imag, c2.real, -c2.imag)
