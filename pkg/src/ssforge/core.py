"""Closed-form geometry of surfaces built from a holomorphic pair (f, g).

``g`` prescribes the Gauss map through inverse stereographic projection and
``h = exp(Re f)`` is the support function.  Everything here is vectorised:
``z`` and the jet components may be complex arrays of any shape, and 3-vectors
come back with a trailing axis of length 3.

Second fundamental form coefficients are named ``eII, fII, gII`` so they do
not collide with the functions f and g.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Callable, NamedTuple

import numpy as np

from .expr import Node, eval_jet
from .jet import Jet2, JetDomainError, pair


class SingularityError(JetDomainError):
    """g' vanishes or detV = 0: the representation is not regular there."""


def _re(w):
    return np.real(w)


def _im(w):
    return np.imag(w)


def _vec(x, y, z):
    return np.stack(np.broadcast_arrays(x, y, z), axis=-1)


@dataclass(frozen=True)
class PointJets:
    z: complex | np.ndarray
    fj: Jet2
    gj: Jet2

    @classmethod
    def from_exprs(cls, f: Node, g: Node, z) -> "PointJets":
        return cls(z, eval_jet(f, z), eval_jet(g, z))


def point_jets(f: Node, g: Node, z) -> PointJets:
    return PointJets.from_exprs(f, g, z)


def _require_regular(gj: Jet2, z=None, strict: bool = True) -> None:
    if not strict:
        return
    bad = np.asarray(np.abs(gj.d1) == 0)
    if bad.any():
        at = None
        if z is not None:
            at = np.ravel(np.asarray(z))[np.flatnonzero(bad)[0]]
        raise SingularityError("g' = 0", at)


class GeomScalars(NamedTuple):
    T: np.ndarray
    h: np.ndarray
    xi: np.ndarray
    L: np.ndarray


def geom_scalars(p: PointJets) -> GeomScalars:
    f, g = p.fj, p.gj
    T = 1 + np.abs(g.v) ** 2
    h = np.exp(_re(f.v))
    xi = f.d1 * (g.d2 / g.d1 - 2 * g.d1 * np.conj(g.v) / T) - f.d2
    L = 4 * np.abs(g.d1) ** 2 / T**2
    return GeomScalars(T, h, xi, L)


def gauss_map(gj: Jet2) -> np.ndarray:
    g = gj.v
    T = 1 + np.abs(g) ** 2
    return _vec(2 * _re(g) / T, 2 * _im(g) / T, (2 - T) / T)


def gauss_map_partials(gj: Jet2) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate partials N_,1 and N_,2 (g_,1 = g', g_,2 = i g')."""
    g, gp = gj.v, gj.d1
    T = 1 + np.abs(g) ** 2
    out = []
    for dg in (gp, 1j * gp):
        s = pair(g, dg)
        w = T * dg - 2 * g * s
        out.append(np.asarray(2 / T**2)[..., None] * _vec(_re(w), _im(w), -2 * s))
    return out[0], out[1]


@dataclass(frozen=True)
class Christoffel:
    """Symbols Gamma^k_ij of the conformal metric L = (4|g'|^2/T^2) Id."""

    c1_11: np.ndarray
    c2_11: np.ndarray
    c1_22: np.ndarray
    c2_22: np.ndarray
    c1_12: np.ndarray
    c2_12: np.ndarray

    def gamma(self, k: int, i: int, j: int):
        a, b = sorted((i, j))
        return getattr(self, f"c{k}_{a}{b}")


def christoffel(gj: Jet2, z=None, strict: bool = True) -> Christoffel:
    _require_regular(gj, z, strict)
    g, gp, gpp = gj.v, gj.d1, gj.d2
    T = 1 + np.abs(g) ** 2
    m = np.abs(gp) ** 2
    c111 = (T * pair(gp, gpp) - 2 * m * pair(g, gp)) / (T * m)
    c222 = (T * pair(gp, 1j * gpp) - 2 * m * pair(g, 1j * gp)) / (T * m)
    return Christoffel(
        c1_11=c111,
        c2_11=-c222,
        c1_22=-c111,
        c2_22=c222,
        c1_12=c222,
        c2_12=c111,
    )


@dataclass(frozen=True)
class VMatrix:
    v11: np.ndarray
    v12: np.ndarray
    v22: np.ndarray

    @property
    def trace(self):
        return self.v11 + self.v22

    @property
    def det(self):
        return self.v11 * self.v22 - self.v12**2

    def entry(self, i: int, j: int):
        if i == j:
            return self.v11 if i == 1 else self.v22
        return self.v12


def compute_V_closed(p: PointJets, strict: bool = True) -> VMatrix:
    _require_regular(p.gj, p.z, strict)
    T, h, xi, L = geom_scalars(p)
    fp = p.fj.d1
    c = h / L
    return VMatrix(
        v11=c * (_re(fp) ** 2 - _re(xi)) + h,
        v12=c * _im(xi - fp**2 / 2),
        v22=c * (_re(1j * fp) ** 2 + _re(xi)) + h,
    )


class HDerivs(NamedTuple):
    """Support function and its coordinate partials up to order two."""

    h: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    h11: np.ndarray
    h12: np.ndarray
    h22: np.ndarray


def support_derivs(fj: Jet2) -> HDerivs:
    """Partials of h = exp(Re f), using f_,1 = f' and f_,2 = i f'."""
    h = np.exp(_re(fj.v))
    a = _re(fj.d1)
    b = _re(1j * fj.d1)
    return HDerivs(
        h=h,
        h1=h * a,
        h2=h * b,
        h11=h * (a * a + _re(fj.d2)),
        h12=h * (a * b + _re(1j * fj.d2)),
        h22=h * (b * b - _re(fj.d2)),
    )


def compute_V_direct(p: PointJets, hd: HDerivs | None = None, strict: bool = True) -> VMatrix:
    """V_ij = (h_,ij - sum_k h_,k Gamma^k_ij + h L delta_ij) / L, from Christoffel symbols."""
    if hd is None:
        hd = support_derivs(p.fj)
    gam = christoffel(p.gj, p.z, strict)
    T = 1 + np.abs(p.gj.v) ** 2
    L = 4 * np.abs(p.gj.d1) ** 2 / T**2
    hk = {1: hd.h1, 2: hd.h2}
    hij = {(1, 1): hd.h11, (1, 2): hd.h12, (2, 2): hd.h22}
    entries = {}
    for i, j in hij:
        s = hij[i, j] - sum(hk[k] * gam.gamma(k, i, j) for k in (1, 2))
        if i == j:
            s = s + hd.h * L
        entries[i, j] = s / L
    return VMatrix(entries[1, 1], entries[1, 2], entries[2, 2])


def immersion(p: PointJets, prefactor_power: int = 2, strict: bool = True) -> np.ndarray:
    """Surface point X for the pair (f, g).

    ``prefactor_power`` selects 1/(2|g'|^p); 2 is the correct value and 1
    reproduces a known misprint (used only as a negative control).
    """
    _require_regular(p.gj, p.z, strict)
    g, gp = p.gj.v, p.gj.d1
    fp = p.fj.d1
    T = 1 + np.abs(g) ** 2
    h = np.exp(_re(p.fj.v))
    s = pair(gp, g * fp)
    w = T * gp * np.conj(fp) - 2 * g * s
    pre = h / (2 * np.abs(gp) ** prefactor_power)
    return np.asarray(pre)[..., None] * _vec(_re(w), _im(w), -2 * s) + np.asarray(h)[..., None] * gauss_map(p.gj)


def support_representation(hd: HDerivs | tuple, gj: Jet2, z=None, strict: bool = True) -> np.ndarray:
    """X = sum_j (h_,j / L_jj) N_,j + h N for an arbitrary support function h."""
    _require_regular(gj, z, strict)
    h, h1, h2 = np.asarray(hd[0]), np.asarray(hd[1]), np.asarray(hd[2])
    T = 1 + np.abs(gj.v) ** 2
    L = 4 * np.abs(gj.d1) ** 2 / T**2
    N1, N2 = gauss_map_partials(gj)
    N = gauss_map(gj)
    return (h1 / L)[..., None] * N1 + (h2 / L)[..., None] * N2 + h[..., None] * N


def curvatures(V: VMatrix) -> tuple[np.ndarray, np.ndarray]:
    """(H, K) from K = 1/detV and trV = -2H/K."""
    det = np.asarray(V.det)
    if np.any(det == 0):
        raise SingularityError("detV = 0 (regularity failure)")
    K = 1 / det
    H = -V.trace / (2 * det)
    return H, K


class FundamentalForms(NamedTuple):
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    eII: np.ndarray
    fII: np.ndarray
    gII: np.ndarray
    L: np.ndarray


def fundamental_forms(p: PointJets, strict: bool = True) -> FundamentalForms:
    """First and second forms from the explicit (f, g) expressions."""
    _require_regular(p.gj, p.z, strict)
    T, h, xi, L = geom_scalars(p)
    fp = p.fj.d1
    c = T**2 / (4 * np.abs(p.gj.d1) ** 2)
    a = _re(fp) ** 2 - _re(xi)
    b = _re(1j * fp) ** 2 + _re(xi)
    q = _im(xi - fp**2 / 2)
    h2 = h * h
    return FundamentalForms(
        E=c * h2 * (a * a + q * q) + 2 * h2 * a + h2 * L,
        F=(c * h2 * np.abs(fp) ** 2 + 2 * h2) * q,
        G=c * h2 * (b * b + q * q) + 2 * h2 * b + h2 * L,
        eII=h * a + h * L,
        fII=h * q,
        gII=h * b + h * L,
        L=L,
    )


def fundamental_forms_from_V(V: VMatrix, L) -> FundamentalForms:
    """I = sum_k V_ik V_jk L, II = V_ij L, for the conformal third form L Id."""
    return FundamentalForms(
        E=(V.v11**2 + V.v12**2) * L,
        F=(V.v11 + V.v22) * V.v12 * L,
        G=(V.v22**2 + V.v12**2) * L,
        eII=V.v11 * L,
        fII=V.v12 * L,
        gII=V.v22 * L,
        L=L,
    )


def _ss_parts(psi, lam, H, K):
    return 2 * psi * H, (lam + psi**2) * K


def ss_residual_raw(psi, lam, H, K):
    a, b = _ss_parts(psi, lam, H, K)
    return a + b


def normalized_ss_residual(psi, lam, H, K):
    """|2 psi H + (Lambda + psi^2) K| / (1 + |2 psi H| + |(Lambda + psi^2) K|)."""
    a, b = _ss_parts(psi, lam, H, K)
    return np.abs(a + b) / (1 + np.abs(a) + np.abs(b))


def normalized_midsphere_residual(X, N, psi, lam, H, K):
    r = H / K + psi / 2
    centre = X + np.asarray(r)[..., None] * N
    return np.abs(np.sum(centre**2, axis=-1) - r**2) / (1 + lam)


def radius_function(psi, lam):
    return -lam / (2 * psi)


@dataclass(frozen=True)
class SurfaceEval:
    X: np.ndarray
    N: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    eII: np.ndarray
    fII: np.ndarray
    gII: np.ndarray
    L: np.ndarray
    H: np.ndarray
    K: np.ndarray
    psi: np.ndarray
    lam: np.ndarray
    ss_residual: np.ndarray
    midsphere_residual: np.ndarray
    V: VMatrix
    h: np.ndarray

    def field_names(self):
        return [f.name for f in fields(self)]


def evaluate(p: PointJets, prefactor_power: int = 2, strict: bool = True) -> SurfaceEval:
    """All closed-form data at the points of ``p``.

    With ``strict=False`` singular points produce inf/nan instead of raising,
    for the caller to mask.
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        X = immersion(p, prefactor_power, strict)
        N = gauss_map(p.gj)
        V = compute_V_closed(p, strict)
        det = V.det
        if strict and np.any(det == 0):
            raise SingularityError("detV = 0 (regularity failure)")
        K = 1 / det
        H = -V.trace / (2 * det)
        forms = fundamental_forms(p, strict)
        psi = np.sum(X * N, axis=-1)
        lam = np.sum(X * X, axis=-1)
        return SurfaceEval(
            X=X,
            N=N,
            E=forms.E,
            F=forms.F,
            G=forms.G,
            eII=forms.eII,
            fII=forms.fII,
            gII=forms.gII,
            L=forms.L,
            H=H,
            K=K,
            psi=psi,
            lam=lam,
            ss_residual=normalized_ss_residual(psi, lam, H, K),
            midsphere_residual=normalized_midsphere_residual(X, N, psi, lam, H, K),
            V=V,
            h=np.exp(_re(p.fj.v)),
        )


def ss_residual(s: SurfaceEval):
    return normalized_ss_residual(s.psi, s.lam, s.H, s.K)


def midsphere_residual(s: SurfaceEval):
    return normalized_midsphere_residual(s.X, s.N, s.psi, s.lam, s.H, s.K)


def midsphere_ss_consistency(s: SurfaceEval):
    """Distance between the mid-sphere residual and the rescaled SS residual.

    Lambda + 2 r psi equals (2 psi H + (Lambda + psi^2) K) / K, so after undoing
    the two normalisations the residuals must coincide.
    """
    a, b = _ss_parts(s.psi, s.lam, s.H, s.K)
    scale = (1 + np.abs(a) + np.abs(b)) / (np.abs(s.K) * (1 + s.lam))
    return np.abs(midsphere_residual(s) - scale * ss_residual(s))


# -- determinant diagnostics ---------------------------------------------------

def detV_variants(p: PointJets) -> dict[str, np.ndarray]:
    """The printed closed form for detV and two repairs, next to V11 V22 - V12^2.

    ``printed``: leading factor T^4 h^2 / (4|g'|^2), last bracket term |f'|^2/T^2.
    ``corrected_factor``: leading factor T^4 h^2 / (16|g'|^4), bracket unchanged.
    ``corrected_full``: that factor with last bracket term 4|g'|^2 |f'|^2 / T^2.
    """
    T, h, xi, L = geom_scalars(p)
    fp = p.fj.d1
    m = np.abs(p.gj.d1) ** 2
    core = (
        _im(fp**2 / 2) ** 2
        - _im(xi - fp**2 / 2) ** 2
        + _re(xi) * _re(fp**2 - xi)
    )
    f2 = np.abs(fp) ** 2
    h2 = h * h
    V = compute_V_closed(p, strict=False)
    return {
        "entries": V.det,
        "printed": T**4 * h2 / (4 * m) * (core + f2 / T**2) + h2,
        "corrected_factor": T**4 * h2 / (16 * m * m) * (core + f2 / T**2) + h2,
        "corrected_full": T**4 * h2 / (16 * m * m) * (core + 4 * m * f2 / T**2) + h2,
    }


def trV_closed(p: PointJets):
    T, h, xi, L = geom_scalars(p)
    return h * np.abs(p.fj.d1) ** 2 / L + 2 * h


# -- harmonicity ---------------------------------------------------------------

def _grad_lap(hfunc: Callable, u1, u2, d: float):
    h0 = hfunc(u1, u2)
    hp1, hm1 = hfunc(u1 + d, u2), hfunc(u1 - d, u2)
    hp2, hm2 = hfunc(u1, u2 + d), hfunc(u1, u2 - d)
    return h0, (hp1 - hm1) / (2 * d), (hp2 - hm2) / (2 * d), (hp1 + hm1 + hp2 + hm2 - 4 * h0) / d**2


def harmonicity_residual_field(hfunc: Callable, u1, u2, step: float = 1e-3, richardson: bool = True):
    """h * Lap(h) - |grad h|^2 by central differences, for any real field h(u1, u2)."""
    h0, h1, h2, lap = _grad_lap(hfunc, u1, u2, step)
    if richardson:
        _, f1, f2, flap = _grad_lap(hfunc, u1, u2, step / 2)
        h1, h2, lap = ((4 * b - a) / 3 for a, b in ((h1, f1), (h2, f2), (lap, flap)))
    return h0 * lap - (h1 * h1 + h2 * h2)


def harmonicity_residual(f: Node, z, step: float = 1e-3, richardson: bool = True):
    """Normalised |h Lap h - |grad h|^2| for h = exp(Re f), by finite differences.

    Normalised by h^2 (1 + |grad log h|^2) so the value is scale-free.
    """
    def hfunc(a, b):
        return np.exp(_re(eval_jet(f, a + 1j * b).v))

    z = np.asarray(z, dtype=complex)
    u1, u2 = z.real, z.imag
    raw = harmonicity_residual_field(hfunc, u1, u2, step, richardson)
    fj = eval_jet(f, z)
    h = np.exp(_re(fj.v))
    return np.abs(raw) / (h * h * (1 + np.abs(fj.d1) ** 2))
