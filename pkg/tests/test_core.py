import numpy as np
import pytest

from ssforge import core, oracle
from ssforge.core import (
    SingularityError,
    VMatrix,
    christoffel,
    compute_V_closed,
    compute_V_direct,
    curvatures,
    evaluate,
    fundamental_forms,
    gauss_map,
    immersion,
    point_jets,
    support_derivs,
    support_representation,
)
from ssforge.expr import parse
from ssforge.jet import Jet2

from conftest import random_points

PRESET_PAIRS = [("z", "z"), ("z^2", "z"), ("z", "z^3"), ("z", "z^4")]


def annulus_points(rng, n, rmin=0.4, rmax=1.5):
    return rng.uniform(rmin, rmax, n) * np.exp(1j * rng.uniform(0, 2 * np.pi, n))


def pair_points(rng, f, g, n=1000):
    # g = z^k has g' = 0 at the origin, so sample those on an annulus
    return annulus_points(rng, n) if g != "z" else random_points(rng, n, -1, 1)


@pytest.mark.parametrize(
    "g, expected",
    [(0, (0, 0, 1)), (1, (1, 0, 0)), (1j, (0, 1, 0)), (1 + 1j, (2 / 3, 2 / 3, -1 / 3))],
)
def test_gauss_map_values(g, expected):
    assert gauss_map(Jet2(g, 1, 0)) == pytest.approx(np.array(expected), abs=1e-15)


def test_gauss_map_is_unit(rng):
    w = random_points(rng, 1000, -5, 5)
    N = gauss_map(Jet2(w, np.ones_like(w), np.zeros_like(w)))
    assert np.max(np.abs(np.linalg.norm(N, axis=-1) - 1)) <= 1e-14


def test_gauss_map_partials_match_differences(rng):
    g = parse("z^3 + z")
    z = random_points(rng, 200, -1, 1)
    N1, N2 = core.gauss_map_partials(point_jets("0", g, z).gj)
    d = 1e-6
    Ng = lambda w: gauss_map(point_jets("0", g, w).gj)
    assert np.max(np.abs(N1 - (Ng(z + d) - Ng(z - d)) / (2 * d))) <= 1e-7
    assert np.max(np.abs(N2 - (Ng(z + 1j * d) - Ng(z - 1j * d)) / (2 * d))) <= 1e-7


def test_christoffel_examples():
    c0 = christoffel(Jet2(0j, 1, 0))
    assert all(c0.gamma(k, i, j) == 0 for k in (1, 2) for i in (1, 2) for j in (1, 2))
    c1 = christoffel(Jet2(1 + 0j, 1, 0))
    assert c1.c1_11 == pytest.approx(-1)
    assert c1.c1_22 == pytest.approx(1)
    assert c1.c2_12 == pytest.approx(-1)
    assert c1.gamma(2, 2, 1) == c1.c2_12


def test_christoffel_from_conformal_factor(rng):
    # for a metric L (du1^2 + du2^2): Gamma^1_11 = d1 log L / 2, Gamma^2_11 = -d2 log L / 2, ...
    g = parse("z^2 + 2*z")
    z = annulus_points(rng, 200)
    c = christoffel(point_jets("0", g, z).gj)
    logL = lambda w: np.log(core.geom_scalars(point_jets("0", g, w)).L)
    d = 1e-6
    a1 = (logL(z + d) - logL(z - d)) / (4 * d)
    a2 = (logL(z + 1j * d) - logL(z - 1j * d)) / (4 * d)
    for got, want in [(c.c1_11, a1), (c.c2_11, -a2), (c.c1_22, -a1), (c.c2_22, a2), (c.c1_12, a2), (c.c2_12, a1)]:
        assert np.max(np.abs(got - want)) <= 1e-7


def test_V_example():
    V = compute_V_closed(point_jets("z", "z", 0))
    assert (V.v11, V.v12, V.v22) == pytest.approx((1.25, 0, 1))


def test_immersion_example():
    assert immersion(point_jets("z", "z", 0)) == pytest.approx(np.array([0.5, 0, 1]))


def test_forms_example():
    ff = fundamental_forms(point_jets("z", "z", 0))
    assert tuple(ff) == pytest.approx((6.25, 0, 4, 5, 0, 4, 4))


def test_curvatures_of_identity():
    assert curvatures(VMatrix(1.0, 0.0, 1.0)) == pytest.approx((-1, 1))


def test_strict_mode_rejects_branch_points():
    with pytest.raises(SingularityError):
        evaluate(point_jets("z", "z^2", 0))


@pytest.mark.parametrize("f, g", [("z^2", "z"), ("z", "z^3")])
def test_V_two_routes_agree(f, g, rng):
    z = pair_points(rng, f, g)
    p = point_jets(f, g, z)
    Va, Vb = compute_V_closed(p), compute_V_direct(p)
    scale = np.abs(Va.v11) + np.abs(Va.v12) + np.abs(Va.v22)
    for x, y in [(Va.v11, Vb.v11), (Va.v12, Vb.v12), (Va.v22, Vb.v22)]:
        assert np.max(np.abs(x - y) / scale) <= 1e-9


@pytest.mark.parametrize("f, g", PRESET_PAIRS)
def test_support_function_is_h(f, g, rng):
    s = evaluate(point_jets(f, g, pair_points(rng, f, g)))
    assert np.max(np.abs(s.psi - s.h) / s.h) <= 1e-10


@pytest.mark.parametrize("f, g", PRESET_PAIRS)
def test_support_representation_matches_immersion(f, g, rng):
    p = point_jets(f, g, pair_points(rng, f, g, 300))
    Xs = support_representation(support_derivs(p.fj), p.gj, p.z)
    X = immersion(p)
    assert np.max(np.linalg.norm(Xs - X, axis=-1) / np.maximum(1, np.linalg.norm(X, axis=-1))) <= 1e-10


@pytest.mark.parametrize("f, g", PRESET_PAIRS)
def test_closed_forms_are_ss(f, g, rng):
    s = evaluate(point_jets(f, g, pair_points(rng, f, g)), strict=False)
    ok = np.abs(s.V.det) > 1e-10
    assert np.max(s.ss_residual[ok]) <= 1e-8
    assert np.max(s.midsphere_residual[ok]) <= 1e-8
    assert np.max(core.midsphere_ss_consistency(s)[ok]) <= 1e-10


@pytest.mark.parametrize("f, g", PRESET_PAIRS)
def test_forms_two_routes_agree(f, g, rng):
    p = point_jets(f, g, pair_points(rng, f, g, 300))
    a = fundamental_forms(p)
    b = core.fundamental_forms_from_V(compute_V_closed(p), a.L)
    for x, y in zip(a, b):
        assert np.max(np.abs(x - y) / (1 + np.abs(x))) <= 1e-10


def test_forms_and_curvatures_against_oracle(rng):
    f, g = parse("z^2"), parse("z")
    z = random_points(rng, 50, -0.9, 0.9)
    p = point_jets(f, g, z)
    s = evaluate(p)
    chart = lambda a, b: immersion(point_jets(f, g, a + 1j * b))
    o = oracle.oracle_eval(chart, z.real, z.imag, oracle.FDConfig(1e-3, richardson=True))
    orient = np.sign(np.sum(o.N * s.N, axis=-1))
    for closed, fd in [(s.E, o.E), (s.F, o.F), (s.G, o.G),
                       (s.eII, -orient * o.eII), (s.fII, -orient * o.fII), (s.gII, -orient * o.gII)]:
        assert np.max(np.abs(closed - fd) / (1 + np.abs(closed))) <= 1e-6
    ok = np.abs(s.V.det) / s.h**2 > 1e-2  # keep away from the cuspidal set
    assert np.max(np.abs(s.K - o.K)[ok] / np.abs(s.K[ok])) <= 1e-5
    assert np.max(np.abs(s.H - orient * o.H)[ok] / np.abs(s.H[ok])) <= 1e-5


def test_third_form_is_L_times_identity(rng):
    g = parse("z^3")
    z = annulus_points(rng, 100)
    Nmap = lambda w: gauss_map(point_jets("0", g, w).gj)
    d = 1e-6
    N1 = (Nmap(z + d) - Nmap(z - d)) / (2 * d)
    N2 = (Nmap(z + 1j * d) - Nmap(z - 1j * d)) / (2 * d)
    L = core.geom_scalars(point_jets("0", g, z)).L
    assert np.max(np.abs(np.sum(N1 * N1, -1) - L) / L) <= 1e-7
    assert np.max(np.abs(np.sum(N2 * N2, -1) - L) / L) <= 1e-7
    assert np.max(np.abs(np.sum(N1 * N2, -1)) / L) <= 1e-7


@pytest.mark.parametrize("c", ["0", "0.5", "-1 + 2*i"])
def test_constant_f_gives_round_sphere(c, rng):
    s = evaluate(point_jets(c, "z", random_points(rng, 200)))
    h = s.h
    assert np.max(np.abs(np.linalg.norm(s.X, axis=-1) - h) / h) <= 1e-12
    assert np.max(np.abs(s.H * h + 1)) <= 1e-12
    assert np.max(np.abs(s.K * h**2 - 1)) <= 1e-12


def test_trace_closed_form(rng):
    p = point_jets("z^2", "z", random_points(rng, 200, -1, 1))
    V = compute_V_closed(p)
    assert np.max(np.abs(core.trV_closed(p) - V.trace) / np.abs(V.trace)) <= 1e-12


def test_det_closed_form_variants(rng):
    p = point_jets("z", "z^3", annulus_points(rng, 200))
    v = core.detV_variants(p)
    rel = lambda k: np.max(np.abs(v[k] - v["entries"]) / np.abs(v["entries"]))
    assert rel("corrected_full") <= 1e-9
    assert rel("printed") > 1e-3
    assert rel("corrected_factor") > 1e-3


@pytest.mark.parametrize("f", ["z", "z^2", "z^3", "exp(z)/4"])
def test_harmonicity_of_exp_re_f(f, rng):
    z = random_points(rng, 100, -1, 1)
    assert np.max(core.harmonicity_residual(parse(f), z)) <= 1e-6


def test_harmonicity_negative_control(rng):
    z = random_points(rng, 100, -1, 1)
    r = core.harmonicity_residual_field(lambda a, b: 1 + a * a, z.real, z.imag)
    # h Lap h - |grad h|^2 = 2 (1 + u1^2) - 4 u1^2 = 2 - 2 u1^2
    assert np.max(np.abs(r - (2 - 2 * z.real**2))) <= 1e-7
    assert np.max(r) >= 1


def test_off_center_sphere_is_not_ss():
    # unit sphere centred at (0, 0, 3); exact residual 9 + 6c + 9c^2 over 1 + |2 psi H| + |(Lambda + psi^2) K|
    def chart(u1, u2):
        return np.stack([np.sin(u1) * np.cos(u2), np.sin(u1) * np.sin(u2), 3 + np.cos(u1)], axis=-1)

    o = oracle.oracle_eval(chart, np.pi / 3, 0.4, oracle.FDConfig(1e-3, richardson=True))
    r = core.normalized_ss_residual(o.psi, o.lam, o.H, o.K)
    assert float(r) == pytest.approx(14.25 / 25.25, abs=1e-6)
    assert r >= 0.1
