"""Parameter domains, evaluation targets, grid sampling and singularity masks."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import core, oracle
from . import rotational as rot
from .expr import Node, parse, to_source
from .jet import lenient

TWO_PI = 2 * math.pi


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class DomainSpec:
    """A rectangle in (u1, u2) or an annulus in z = u1 + i u2.

    ``bounds`` is (u1_min, u1_max, u2_min, u2_max) for a rectangle and
    (r_min, r_max, theta_min, theta_max) for an annulus.  An angular extent of
    a full turn is sampled half-open so that meshes close up without a seam.
    """

    kind: str
    bounds: tuple[float, float, float, float]
    nu: tuple[int, int] = (64, 64)
    mask_gprime: float = 1e-8
    mask_detv: float = 1e-10
    periodic: bool | None = None

    def __post_init__(self):
        if self.kind not in ("rectangle", "annulus"):
            raise DomainError(f"unknown domain kind {self.kind!r}")
        a, b, c, d = self.bounds
        if not (a < b and c < d):
            raise DomainError(f"empty domain bounds {self.bounds}")
        if self.kind == "annulus" and a <= 0:
            raise DomainError("annulus needs r_min > 0")
        if min(self.nu) < 2:
            raise DomainError("grid resolution must be at least 2 per axis")
        if self.mask_gprime <= 0 or self.mask_detv <= 0:
            raise DomainError("mask thresholds must be positive")

    @property
    def wraps(self) -> bool:
        """True when the second axis covers a full turn and is sampled half-open."""
        if self.periodic is not None:
            return self.periodic
        return math.isclose(self.bounds[3] - self.bounds[2], TWO_PI, rel_tol=1e-12)

    def describe(self) -> str:
        b = ",".join(_fmt(x) for x in self.bounds)
        return f"{self.kind}:{b}"

    def sample(self) -> "Grid":
        n1, n2 = self.nu
        a, b, c, d = self.bounds
        s1 = np.linspace(a, b, n1)
        s2 = np.linspace(c, d, n2, endpoint=not self.wraps)
        A, B = np.meshgrid(s1, s2, indexing="ij")
        if self.kind == "rectangle":
            z = A + 1j * B
        else:
            z = A * np.exp(1j * B)
        return Grid(z=z, wraps=self.wraps)


def _fmt(x: float) -> str:
    return repr(float(x)) if x != int(x) else str(int(x))


def parse_domain(text: str, nu=(64, 64), mask_gprime=1e-8, mask_detv=1e-10) -> DomainSpec:
    """``rect:u1min,u1max,u2min,u2max`` or ``annulus:rmin,rmax[,tmin,tmax]``.

    ``2pi`` and ``pi`` are accepted as numbers.
    """
    kind, _, rest = text.partition(":")
    kind = {"rect": "rectangle", "rectangle": "rectangle", "annulus": "annulus"}.get(kind.strip())
    if kind is None:
        raise DomainError(f"cannot parse domain {text!r}")
    try:
        vals = [_number(v) for v in rest.split(",")] if rest.strip() else []
    except ValueError as exc:
        raise DomainError(f"cannot parse domain {text!r}: {exc}") from None
    if kind == "annulus" and len(vals) == 2:
        vals += [0.0, TWO_PI]
    if len(vals) != 4:
        raise DomainError(f"domain {text!r} needs 4 numbers")
    if isinstance(nu, int):
        nu = (nu, nu)
    return DomainSpec(kind, tuple(vals), tuple(nu), mask_gprime, mask_detv)


def _number(s: str) -> float:
    s = s.strip().replace(" ", "")
    for name, val in (("2pi", TWO_PI), ("pi", math.pi)):
        if s.endswith(name):
            head = s[: -len(name)]
            mult = -1.0 if head == "-" else float(head) if head not in ("", "+") else 1.0
            return mult * val
    return float(s)


@dataclass(frozen=True)
class Grid:
    z: np.ndarray
    wraps: bool

    @property
    def u1(self):
        return self.z.real

    @property
    def u2(self):
        return self.z.imag

    @property
    def shape(self):
        return self.z.shape


# -- targets -------------------------------------------------------------------

@dataclass(frozen=True)
class HoloTarget:
    f_src: str
    g_src: str
    f: Node = field(repr=False, default=None)
    g: Node = field(repr=False, default=None)

    @classmethod
    def from_sources(cls, f_src: str, g_src: str) -> "HoloTarget":
        return cls(f_src, g_src, parse(f_src), parse(g_src))

    def jets(self, u1, u2) -> core.PointJets:
        z = np.asarray(u1, float) + 1j * np.asarray(u2, float)
        with lenient():
            return core.point_jets(self.f, self.g, z)

    def chart(self, u1, u2, prefactor_power: int = 2):
        return core.immersion(self.jets(u1, u2), prefactor_power, strict=False)

    @property
    def f_expr(self) -> Node:
        return self.f

    def provenance(self) -> dict:
        return {"f": self.f_src, "g": self.g_src}


@dataclass(frozen=True)
class RotationalTarget:
    params: rot.RotationalParams

    def jets(self, u1, u2) -> core.PointJets:
        return rot.point_jets(self.params, u1, u2)

    def chart(self, u1, u2, prefactor_power: int = 2):
        if prefactor_power != 2:
            return core.immersion(self.jets(u1, u2), prefactor_power, strict=False)
        return rot.rotational_surface(self.params, u1, u2)

    @property
    def f_expr(self) -> Node:
        return self.params.f_expr()

    def provenance(self) -> dict:
        return {"a": self.params.a, "b": self.params.b,
                "f": to_source(self.params.f_expr()), "g": to_source(self.params.g_expr())}


# -- grid evaluation -----------------------------------------------------------

def worker_count() -> int:
    cap = os.environ.get("SSFORGE_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = max(1, min(n, int(cap)))
        except ValueError:
            pass
    return n


def chunked_rows(func, n_rows: int, workers: int | None = None):
    """Apply ``func(row_slice)`` over row blocks in parallel; results in row order."""
    workers = workers or worker_count()
    blocks = max(1, min(workers, n_rows))
    edges = np.linspace(0, n_rows, blocks + 1).astype(int)
    slices = [slice(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    if len(slices) == 1:
        return [func(slices[0])]
    with ThreadPoolExecutor(max_workers=len(slices)) as pool:
        return list(pool.map(func, slices))


@dataclass
class SurfaceGrid:
    """Closed-form (and optionally oracle) data on a sampled grid, with a mask."""

    grid: Grid
    closed: core.SurfaceEval
    jets: core.PointJets
    mask: np.ndarray
    mask_reasons: dict
    fd: oracle.OracleEval | None = None

    @property
    def regular(self) -> np.ndarray:
        return ~self.mask

    @property
    def n_points(self) -> int:
        return int(self.mask.size)

    @property
    def n_masked(self) -> int:
        return int(self.mask.sum())


def _concat(parts, axis=0):
    first = parts[0]
    if isinstance(first, np.ndarray):
        return np.concatenate(parts, axis=axis)
    if isinstance(first, tuple) and hasattr(first, "_fields"):
        return type(first)(*[_concat([p[i] for p in parts]) for i in range(len(first))])
    cls = type(first)
    names = list(first.__dataclass_fields__)
    return cls(**{n: _concat([getattr(p, n) for p in parts]) for n in names})


def evaluate_grid(target, dom: DomainSpec, fd: oracle.FDConfig | None = None,
                  prefactor_power: int = 2) -> SurfaceGrid:
    grid = dom.sample()
    u1, u2 = grid.u1, grid.u2

    def chart(a, b):
        return target.chart(a, b, prefactor_power)

    def work(rows):
        a, b = u1[rows], u2[rows]
        with lenient():
            p = target.jets(a, b)
            closed = core.evaluate(p, prefactor_power, strict=False)
            if prefactor_power == 2 and isinstance(target, RotationalTarget):
                closed = _replace_X(closed, rot.rotational_surface(target.params, a, b))
            fdv = oracle.oracle_eval(chart, a, b, fd, strict=False) if fd is not None else None
        return p, closed, fdv

    parts = chunked_rows(work, grid.shape[0])
    jets = _concat_jets([p for p, _, _ in parts])
    closed = _concat([c for _, c, _ in parts])
    fdv = _concat([f for _, _, f in parts]) if fd is not None else None

    gprime = np.abs(jets.gj.d1)
    reasons = {
        "gprime": ~(gprime >= dom.mask_gprime),
        "detV": ~(np.abs(closed.V.det) >= dom.mask_detv),
        "nonfinite": ~np.isfinite(closed.X).all(axis=-1) | ~np.isfinite(closed.K) | ~np.isfinite(closed.H),
    }
    if fdv is not None:
        reasons["fd_curvature"] = ~np.isfinite(fdv.K) | ~np.isfinite(fdv.H)
    mask = np.zeros(grid.shape, bool)
    for m in reasons.values():
        mask |= m
    return SurfaceGrid(grid, closed, jets, mask, {k: int(v.sum()) for k, v in reasons.items()}, fdv)


def _replace_X(s: core.SurfaceEval, X) -> core.SurfaceEval:
    from dataclasses import replace

    psi = np.sum(X * s.N, axis=-1)
    lam = np.sum(X * X, axis=-1)
    return replace(
        s, X=X, psi=psi, lam=lam,
        ss_residual=core.normalized_ss_residual(psi, lam, s.H, s.K),
        midsphere_residual=core.normalized_midsphere_residual(X, s.N, psi, lam, s.H, s.K),
    )


def _concat_jets(parts):
    from .jet import Jet2

    def cj(js):
        return Jet2(*[np.concatenate([np.broadcast_to(j.as_tuple()[k], np.shape(j.v)) for j in js])
                      for k in range(3)])

    z = np.concatenate([p.z for p in parts])
    return core.PointJets(z, cj([p.fj for p in parts]), cj([p.gj for p in parts]))
