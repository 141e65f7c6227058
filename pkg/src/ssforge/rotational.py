"""Rotational SS-surfaces X_{a,b} and their link to the (f, g) representation.

The pair ``f(z) = a z + b``, ``g(z) = exp(z)`` with ``z = u1 + i u2`` gives a
surface of revolution about the third axis, ``u2`` being the rotation angle.
Working the general immersion out for this pair yields the profile

    M(u1)  = e^{a u1 + b} [ a (e^{-u1} - e^{u1}) / 2 + 2 e^{u1} / (1 + e^{2 u1}) ]
    Nz(u1) = e^{a u1 + b} [ (1 - e^{2 u1}) / (1 + e^{2 u1}) - a ]

:func:`profile_printed` keeps the commonly quoted variant without the
e^{-u1} weighting on the ``a`` terms.  It coincides with the profile above
only for a = 0 and is not an SS-surface otherwise; it exists for diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import core
from .expr import BinOp, Call, Const, Var
from .jet import Jet2


@dataclass(frozen=True)
class RotationalParams:
    a: float
    b: float

    def f_expr(self):
        return BinOp("+", BinOp("*", Const(complex(self.a)), Var()), Const(complex(self.b)))

    def g_expr(self):
        return Call("exp", Var())


def profile(p: RotationalParams, u1):
    """Radius M and axial height Nz of the meridian at ``u1``."""
    u1 = np.asarray(u1, dtype=float)
    w = np.exp(u1)
    s = np.exp(p.a * u1 + p.b)
    M = s * (p.a * (1 / w - w) / 2 + 2 * w / (1 + w * w))
    Nz = s * ((1 - w * w) / (1 + w * w) - p.a)
    return M, Nz


def profile_printed(p: RotationalParams, u1):
    u1 = np.asarray(u1, dtype=float)
    w = np.exp(u1)
    s = np.exp(p.a * u1 + p.b)
    M = s * (p.a * (1 - w * w) / 2 + 2 * w / (1 + w * w))
    Nz = s * ((1 - w * w) / (1 + w * w) - p.a * w)
    return M, Nz


def rotational_surface(p: RotationalParams, u1, u2, printed: bool = False) -> np.ndarray:
    M, Nz = (profile_printed if printed else profile)(p, u1)
    u2 = np.asarray(u2, dtype=float)
    M, Nz, u2 = np.broadcast_arrays(M, Nz, u2)
    return np.stack([M * np.cos(u2), M * np.sin(u2), Nz], axis=-1)


def point_jets(p: RotationalParams, u1, u2) -> core.PointJets:
    """Jets of f = a z + b and g = e^z, built directly (no parsing needed)."""
    z = np.asarray(u1, dtype=float) + 1j * np.asarray(u2, dtype=float)
    e = np.exp(z)
    a = np.full_like(z, p.a)
    fj = Jet2(p.a * z + p.b, a, np.zeros_like(z))
    return core.PointJets(z, fj, Jet2(e, e, e))


@dataclass(frozen=True)
class EquivalenceReport:
    a: float
    b: float
    max_deviation: float
    max_relative_deviation: float
    points: int


def equivalence_check(p: RotationalParams, u1, u2, printed: bool = False, prefactor_power: int = 2) -> EquivalenceReport:
    """Pointwise distance between the closed-form rotational chart and the general immersion."""
    u1, u2 = np.broadcast_arrays(np.asarray(u1, float), np.asarray(u2, float))
    closed = rotational_surface(p, u1, u2, printed=printed)
    general = core.immersion(point_jets(p, u1, u2), prefactor_power=prefactor_power)
    dev = np.linalg.norm(closed - general, axis=-1)
    rel = dev / np.maximum(1.0, np.linalg.norm(general, axis=-1))
    return EquivalenceReport(p.a, p.b, float(dev.max()), float(rel.max()), int(dev.size))
