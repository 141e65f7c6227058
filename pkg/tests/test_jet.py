import cmath

import numpy as np
import pytest

from ssforge.jet import (
    Jet2,
    JetDomainError,
    jet_add,
    jet_cos,
    jet_div,
    jet_exp,
    jet_log,
    jet_mul,
    jet_pow_int,
    jet_sin,
    lenient,
    pair,
)

from conftest import random_points


def test_product_of_identity_is_square():
    z = Jet2.variable(2)
    assert jet_mul(z, z).as_tuple() == (4, 4, 2)


def test_add_zero_jet():
    a = Jet2(1 + 2j, 3j, -1)
    assert jet_add(a, Jet2.constant(0)) == a


def test_div_square_by_identity():
    z0 = 1 + 1j
    z = Jet2.variable(z0)
    q = jet_div(jet_mul(z, z), z)
    assert q.v == pytest.approx(z0, abs=1e-15)
    assert q.d1 == pytest.approx(1, abs=1e-15)
    assert q.d2 == pytest.approx(0, abs=1e-15)
    # finite differences of z^2 / z
    d = 1e-5
    F = lambda w: w * w / w
    assert (F(z0 + d) - F(z0 - d)) / (2 * d) == pytest.approx(1, abs=1e-9)


def test_exp_at_zero_and_one():
    assert jet_exp(Jet2.variable(0)).as_tuple() == (1, 1, 1)
    e = jet_exp(Jet2.variable(1))
    for c in e.as_tuple():
        assert abs(c - cmath.exp(1)) <= 1e-14


def test_pow_one_is_identity():
    assert jet_pow_int(Jet2.variable(0.7), 1).as_tuple() == (0.7, 1, 0)


@pytest.mark.parametrize("n", [0, 2, 3, 5, -1, -3])
def test_pow_int_matches_closed_form(n):
    z0 = 0.8 - 0.3j
    j = jet_pow_int(Jet2.variable(z0), n)
    assert j.v == pytest.approx(z0**n, rel=1e-14)
    assert j.d1 == pytest.approx(n * z0 ** (n - 1) if n else 0, rel=1e-14, abs=1e-15)
    assert j.d2 == pytest.approx(n * (n - 1) * z0 ** (n - 2) if n not in (0, 1) else 0, rel=1e-13, abs=1e-15)


def test_leibniz_rule():
    a = Jet2(1 + 1j, 2 - 1j, 0.5j)
    b = Jet2(-0.3 + 2j, 1j, 4)
    p = jet_mul(a, b)
    assert p.d1 == a.d1 * b.v + a.v * b.d1
    assert p.d2 == a.d2 * b.v + 2 * a.d1 * b.d1 + a.v * b.d2


def test_domain_errors():
    with pytest.raises(JetDomainError, match="zero"):
        jet_div(Jet2.variable(1), Jet2.variable(0), at=0)
    with pytest.raises(JetDomainError):
        jet_log(Jet2.variable(0))
    with pytest.raises(JetDomainError):
        jet_pow_int(Jet2.variable(0), -2)


def test_domain_error_names_the_point():
    z = np.array([1.0, 0.0, 2.0], dtype=complex)
    with pytest.raises(JetDomainError) as info:
        jet_div(Jet2.constant(np.ones(3, complex)), Jet2.variable(z), at=z)
    assert info.value.point == 0


def test_lenient_gives_nonfinite():
    with lenient():
        q = jet_div(Jet2.variable(1.0), Jet2.variable(0.0))
    assert not np.isfinite(q.v)


def test_log_principal_branch():
    j = jet_log(Jet2.variable(-1 + 1e-300j))
    assert j.v.imag == pytest.approx(np.pi)
    j = jet_log(Jet2.variable(-1 - 1e-300j))
    assert j.v.imag == pytest.approx(-np.pi)


def test_pairing():
    w = 0.3 - 1.7j
    assert pair(1, w) == w.real
    assert pair(1j, w) == w.imag
    assert pair(w, w) == pytest.approx(abs(w) ** 2)


ELEMENTARY = {
    "exp": (jet_exp, np.exp),
    "sin": (jet_sin, np.sin),
    "cos": (jet_cos, np.cos),
    "log": (jet_log, np.log),
    "cube": (lambda a: jet_pow_int(a, 3), lambda w: w**3),
    "recip": (lambda a: jet_div(Jet2.constant(np.ones_like(a.v)), a), lambda w: 1 / w),
}


@pytest.mark.parametrize("name", sorted(ELEMENTARY))
def test_derivatives_match_central_differences(name, rng):
    F_jet, F = ELEMENTARY[name]
    z = random_points(rng, 1000)
    if name in ("log", "recip"):
        z = z[np.abs(z) > 0.2]
    if name == "log":
        z = z[~((z.real < 0) & (np.abs(z.imag) < 0.1))]  # keep stencils off the branch cut
    j = F_jet(Jet2.variable(z))
    d = 1e-5
    d1_fd = (F(z + d) - F(z - d)) / (2 * d)
    d2_fd = (F(z + d) - 2 * F(z) + F(z - d)) / d**2
    assert np.max(np.abs(j.d1 - d1_fd)) <= 1e-6
    # the second-order stencil loses ~eps/d^2 = 1e-6 relative to rounding
    assert np.max(np.abs(j.d2 - d2_fd) / np.maximum(1, np.abs(j.d2))) <= 1e-4


@pytest.mark.parametrize("name", sorted(ELEMENTARY))
def test_cauchy_riemann(name, rng):
    F_jet, F = ELEMENTARY[name]
    z = random_points(rng, 200)
    z = z[np.abs(z) > 0.2]
    j = F_jet(Jet2.variable(z))
    d_u1, d_u2 = j.d1, 1j * j.d1
    assert np.max(np.abs(d_u1.real - d_u2.imag)) <= 1e-12
    assert np.max(np.abs(d_u2.real + d_u1.imag)) <= 1e-12
