"""Second-order jets of holomorphic functions.

A :class:`Jet2` carries ``(value, first derivative, second derivative)`` of a
holomorphic function at a point.  Components are Python complex numbers or
complex numpy arrays of a common shape, so one evaluation can cover a whole
parameter grid.

Division by zero, log of zero and negative powers of zero raise
:class:`JetDomainError` unless the evaluation runs inside :func:`lenient`, in
which case the offending entries become non-finite and are left to the
caller's mask.
"""

from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass
from typing import Union

import numpy as np

ComplexLike = Union[complex, float, np.ndarray]

_LENIENT = contextvars.ContextVar("ssforge_jet_lenient", default=False)


class JetDomainError(ValueError):
    """Raised when a jet operation leaves the domain of holomorphy."""

    def __init__(self, message: str, point=None):
        if point is not None:
            message = f"{message} at z = {_fmt_complex(point)}"
        super().__init__(message)
        self.point = point


def _fmt_complex(w) -> str:
    w = complex(w)
    return f"{w.real:.6g}{w.imag:+.6g}i"


@contextlib.contextmanager
def lenient():
    """Let domain violations produce inf/nan instead of raising."""
    token = _LENIENT.set(True)
    try:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            yield
    finally:
        _LENIENT.reset(token)


def pair(a: ComplexLike, b: ComplexLike):
    """Euclidean pairing of complex numbers seen as plane vectors: Re(a * conj(b))."""
    return np.real(a * np.conj(b))


def _check_nonzero(w, what: str, at=None) -> None:
    if _LENIENT.get():
        return
    zero = np.asarray(w) == 0
    if zero.any():
        idx = np.flatnonzero(zero)[0]
        point = None if at is None else np.ravel(np.asarray(at))[idx] if np.ndim(at) else at
        raise JetDomainError(what, point)


@dataclass(frozen=True)
class Jet2:
    v: ComplexLike
    d1: ComplexLike
    d2: ComplexLike

    @classmethod
    def constant(cls, c: ComplexLike) -> "Jet2":
        c = _as_complex(c)
        zero = np.zeros_like(c) if isinstance(c, np.ndarray) else 0j
        return cls(c, zero, zero)

    @classmethod
    def variable(cls, z: ComplexLike) -> "Jet2":
        """Jet of the identity map at ``z``."""
        z = _as_complex(z)
        if isinstance(z, np.ndarray):
            return cls(z, np.ones_like(z), np.zeros_like(z))
        return cls(z, 1 + 0j, 0j)

    def __add__(self, other) -> "Jet2":
        return jet_add(self, _lift(other))

    __radd__ = __add__

    def __sub__(self, other) -> "Jet2":
        return jet_sub(self, _lift(other))

    def __rsub__(self, other) -> "Jet2":
        return jet_sub(_lift(other), self)

    def __mul__(self, other) -> "Jet2":
        return jet_mul(self, _lift(other))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet2":
        return jet_div(self, _lift(other))

    def __rtruediv__(self, other) -> "Jet2":
        return jet_div(_lift(other), self)

    def __neg__(self) -> "Jet2":
        return Jet2(-self.v, -self.d1, -self.d2)

    def __pow__(self, n: int) -> "Jet2":
        return jet_pow_int(self, n)

    def as_tuple(self) -> tuple:
        return (self.v, self.d1, self.d2)


def _as_complex(c):
    if isinstance(c, np.ndarray):
        return c.astype(complex)
    return complex(c)


def _lift(x) -> Jet2:
    return x if isinstance(x, Jet2) else Jet2.constant(x)


def jet_add(a: Jet2, b: Jet2) -> Jet2:
    return Jet2(a.v + b.v, a.d1 + b.d1, a.d2 + b.d2)


def jet_sub(a: Jet2, b: Jet2) -> Jet2:
    return Jet2(a.v - b.v, a.d1 - b.d1, a.d2 - b.d2)


def jet_mul(a: Jet2, b: Jet2) -> Jet2:
    return Jet2(
        a.v * b.v,
        a.d1 * b.v + a.v * b.d1,
        a.d2 * b.v + 2 * a.d1 * b.d1 + a.v * b.d2,
    )


def _compose(a: Jet2, f0, f1, f2) -> Jet2:
    # chain rule for F(a(z)) given F, F', F'' evaluated at a.v
    return Jet2(f0, f1 * a.d1, f2 * a.d1 * a.d1 + f1 * a.d2)


def _inv(w):
    # numpy division so that, under lenient(), zero gives inf/nan for scalars too
    if isinstance(w, np.ndarray):
        return 1 / w
    return complex(np.complex128(1) / np.complex128(w))


def jet_reciprocal(b: Jet2, at=None) -> Jet2:
    _check_nonzero(b.v, "division by a jet with zero value", at)
    r = _inv(b.v)
    return _compose(b, r, -r * r, 2 * r * r * r)


def jet_div(a: Jet2, b: Jet2, at=None) -> Jet2:
    return jet_mul(a, jet_reciprocal(b, at))


def jet_exp(a: Jet2) -> Jet2:
    e = np.exp(a.v)
    return _compose(a, e, e, e)


def jet_sin(a: Jet2) -> Jet2:
    s, c = np.sin(a.v), np.cos(a.v)
    return _compose(a, s, c, -s)


def jet_cos(a: Jet2) -> Jet2:
    s, c = np.sin(a.v), np.cos(a.v)
    return _compose(a, c, -s, -c)


def jet_log(a: Jet2, at=None) -> Jet2:
    """Principal-branch logarithm; the cut runs along the negative real axis."""
    _check_nonzero(a.v, "log of zero", at)
    r = _inv(a.v)
    return _compose(a, np.log(a.v), r, -r * r)


def jet_pow_int(a: Jet2, n: int, at=None) -> Jet2:
    """Integer power by repeated squaring; exact for polynomial inputs."""
    n = int(n)
    if n < 0:
        return jet_reciprocal(jet_pow_int(a, -n), at)
    result = Jet2.constant(np.ones_like(a.v) if isinstance(a.v, np.ndarray) else 1)
    base = a
    while n:
        if n & 1:
            result = jet_mul(result, base)
        n >>= 1
        if n:
            base = jet_mul(base, base)
    return result


def jet_pow(a: Jet2, b: Jet2, at=None) -> Jet2:
    """General power a**b = exp(b log a) on the principal branch."""
    return jet_exp(jet_mul(b, jet_log(a, at)))
