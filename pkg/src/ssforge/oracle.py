"""Finite-difference differential geometry of a black-box parametrisation.

Nothing here knows how the surface was built: the only input is a callable
``surface(u1, u2) -> X`` returning points with a trailing axis of length 3.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

SurfaceMap = Callable[[np.ndarray, np.ndarray], np.ndarray]


class RegularityError(ValueError):
    pass


@dataclass(frozen=True)
class FDConfig:
    step: float = 1e-4
    richardson: bool = False

    def __post_init__(self):
        if not 0 < self.step <= 1e-2:
            raise ValueError(f"FD step must lie in (0, 1e-2], got {self.step}")


@dataclass(frozen=True)
class OracleEval:
    X: np.ndarray
    X1: np.ndarray
    X2: np.ndarray
    N: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    eII: np.ndarray
    fII: np.ndarray
    gII: np.ndarray
    H: np.ndarray
    K: np.ndarray
    psi: np.ndarray
    lam: np.ndarray


def _stencil(surface: SurfaceMap, u1, u2, d):
    X0 = surface(u1, u2)
    Xp1, Xm1 = surface(u1 + d, u2), surface(u1 - d, u2)
    Xp2, Xm2 = surface(u1, u2 + d), surface(u1, u2 - d)
    Xpp, Xpm = surface(u1 + d, u2 + d), surface(u1 + d, u2 - d)
    Xmp, Xmm = surface(u1 - d, u2 + d), surface(u1 - d, u2 - d)
    return (
        X0,
        (Xp1 - Xm1) / (2 * d),
        (Xp2 - Xm2) / (2 * d),
        (Xp1 - 2 * X0 + Xm1) / d**2,
        (Xpp - Xpm - Xmp + Xmm) / (4 * d * d),
        (Xp2 - 2 * X0 + Xm2) / d**2,
    )


def derivatives(surface: SurfaceMap, u1, u2, cfg: FDConfig = FDConfig()):
    """X and its partials (X1, X2, X11, X12, X22), optionally Richardson-extrapolated."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    coarse = _stencil(surface, u1, u2, cfg.step)
    if not cfg.richardson:
        return coarse
    fine = _stencil(surface, u1, u2, cfg.step / 2)
    return (coarse[0],) + tuple((4 * b - a) / 3 for a, b in zip(coarse[1:], fine[1:]))


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def oracle_eval(surface: SurfaceMap, u1, u2, cfg: FDConfig = FDConfig(), strict: bool = True) -> OracleEval:
    """Forms, normal and curvatures of ``surface`` at (u1, u2) from difference stencils.

    The normal is X_,1 x X_,2 normalised.  Degenerate first forms raise
    :class:`RegularityError` when ``strict``; otherwise they yield nan.
    """
    X, X1, X2, X11, X12, X22 = derivatives(surface, u1, u2, cfg)
    E, F, G = _dot(X1, X1), _dot(X1, X2), _dot(X2, X2)
    W = E * G - F * F
    degenerate = ~(W > 0)
    if strict and np.any(degenerate):
        raise RegularityError("degenerate first fundamental form (EG - F^2 <= 0)")
    with np.errstate(divide="ignore", invalid="ignore"):
        n = np.cross(X1, X2)
        N = n / np.linalg.norm(n, axis=-1, keepdims=True)
        e, f, g = _dot(X11, N), _dot(X12, N), _dot(X22, N)
        Wn = np.where(degenerate, np.nan, W)
        H = (e * G - 2 * f * F + g * E) / (2 * Wn)
        K = (e * g - f * f) / Wn
    return OracleEval(
        X=X, X1=X1, X2=X2, N=N, E=E, F=F, G=G, eII=e, fII=f, gII=g,
        H=H, K=K, psi=_dot(X, N), lam=_dot(X, X),
    )


@dataclass(frozen=True)
class WeingartenReport:
    max_residual: float
    mean_residual: float
    points: int
    threshold: float
    passed: bool
    degenerate_input: bool


def weingarten_fit(samples: OracleEval | Sequence[OracleEval], threshold: float = 1e-4) -> WeingartenReport:
    """Check 2 psi H + (Lambda + psi^2) K = 0 over oracle samples (normalised residual)."""
    if isinstance(samples, OracleEval):
        psi, lam, H, K = (np.ravel(getattr(samples, k)) for k in ("psi", "lam", "H", "K"))
        pts = np.reshape(samples.X, (-1, 3))
    else:
        psi, lam, H, K = (np.array([np.ravel(getattr(s, k)) for s in samples]).ravel()
                          for k in ("psi", "lam", "H", "K"))
        pts = np.concatenate([np.reshape(s.X, (-1, 3)) for s in samples])
    if psi.size < 3:
        raise ValueError("weingarten_fit needs at least 3 samples")
    degenerate = len(np.unique(np.round(pts, 12), axis=0)) < 3
    if degenerate:
        warnings.warn("weingarten_fit: fewer than 3 distinct sample points", RuntimeWarning, stacklevel=2)
    a = 2 * psi * H
    b = (lam + psi**2) * K
    r = np.abs(a + b) / (1 + np.abs(a) + np.abs(b))
    mx, mean = float(np.max(r)), float(np.mean(r))
    return WeingartenReport(mx, mean, int(r.size), threshold, bool(mx <= threshold), degenerate)
