"""Integrability route for the small-target range q < p.

For a single-kernel weight the profile is a pure Gaussian bump per
coordinate, so the L^r integral has an elementary value that the tests
recompute from scratch:

    Integral C^r e^{-r t |z|^2 + r Re(z conj(w))} dA = C^r (pi/(r t)) e^{r|w|^2/(4t)}

with t = (1-a^2)/2 per coordinate.
"""
import math

import numpy as np
import pytest

from fockop.carleson import berezin_transform, carleson_integral, pullback_mass
from fockop.errors import DomainError
from fockop.funcspace import AffineMap, constant, kernel
from fockop.quad import QuadSpec
from fockop.wco import WcoProblem, ell_profile, normalize

FORCE_QUAD = QuadSpec(allow_closed_form=False)


def one_d(a, b=0.0, c=0.0, p=4.0, q=2.0):
    psi = kernel([c]) if c else constant(1)
    return WcoProblem(psi, AffineMap([[a]], [b]), p, q)


def expected_lr_1d(prob):
    """Recompute ||ell||_{L^r} from the displayed elementary integral."""
    r = prob.p * prob.q / (prob.p - prob.q)
    nz = normalize(prob)
    pf = ell_profile(nz, prob.q)
    (a,), (w,) = pf.a, pf.w
    t = (1.0 - a * a) / 2.0
    integral = pf.constant_factor**r * (math.pi / (r * t)) * math.exp(r * abs(w) ** 2 / (4.0 * t))
    return integral ** (1.0 / r)


@pytest.mark.parametrize("a,b,c", [(0.5, 0.0, 0.0), (0.7, 0.3, 0.0), (0.4, 0.2, 0.5), (0.9, 0.1, -0.3)])
def test_lr_norm_closed_form_against_elementary_integral(a, b, c):
    prob = one_d(a, b, c)
    rep = carleson_integral(normalize(prob), prob.p, prob.q)
    assert rep.member
    assert rep.lr_norm.mode == "closed_form"
    assert rep.lr_norm.value == pytest.approx(expected_lr_1d(prob), rel=1e-12)


def test_plain_no_drift_value():
    # psi = 1, b = 0: ||ell||_{L^r} = (2 pi / (r (1-a^2)))^{1/r}
    a, p, q = 0.6, 3.0, 1.5
    rep = carleson_integral(normalize(one_d(a, p=p, q=q)), p, q)
    r = p * q / (p - q)
    assert rep.r_exponent == pytest.approx(r)
    assert rep.lr_norm.value == pytest.approx((2.0 * math.pi / (r * (1 - a * a))) ** (1 / r), rel=1e-12)


@pytest.mark.parametrize("a", [0.3, 0.6, 0.9])
def test_quadrature_path_matches_closed_form(a):
    prob = one_d(a, b=0.25, c=0.2)
    nz = normalize(prob)
    exact = carleson_integral(nz, prob.p, prob.q)
    quad = carleson_integral(nz, prob.p, prob.q, FORCE_QUAD)
    assert quad.lr_norm.mode == "quadrature"
    assert quad.lr_norm.value == pytest.approx(exact.lr_norm.value, rel=1e-9)


def test_membership_dichotomy_at_unit_singular_value():
    assert carleson_integral(normalize(one_d(0.99)), 4.0, 2.0).member
    rep = carleson_integral(normalize(one_d(1.0)), 4.0, 2.0)
    assert not rep.member
    assert math.isinf(rep.lr_norm.value)


def test_lr_norm_grows_with_drift():
    values = [
        carleson_integral(normalize(one_d(0.5, b)), 4.0, 2.0).lr_norm.value
        for b in (0.0, 0.3, 0.6, 0.9)
    ]
    assert all(u < v for u, v in zip(values, values[1:]))


def test_rejects_wrong_exponent_order_and_rank_zero():
    with pytest.raises(DomainError):
        carleson_integral(normalize(one_d(0.5)), 2.0, 4.0)
    with pytest.raises(DomainError):
        carleson_integral(normalize(one_d(0.0)), 4.0, 2.0)


def test_two_dimensional_closed_form_vs_quadrature():
    A = np.diag([0.6, 0.3]).astype(complex)
    prob = WcoProblem(kernel([0.3, -0.2]), AffineMap(A, [0.2, 0.1]), 4.0, 2.0)
    nz = normalize(prob)
    exact = carleson_integral(nz, 4.0, 2.0)
    quad = carleson_integral(nz, 4.0, 2.0, FORCE_QUAD)
    assert quad.lr_norm.value == pytest.approx(exact.lr_norm.value, rel=1e-9)


# -- measure-side checks -------------------------------------------------------


def test_pullback_mass_monotone_in_radius():
    nz = normalize(one_d(0.5, 0.2, 0.1))
    masses = [pullback_mass(nz, 2.0, [0.0], r) for r in (0.5, 1.0, 2.0, 4.0)]
    assert all(m >= 0.0 for m in masses)
    assert all(u <= v + 1e-12 for u, v in zip(masses, masses[1:]))


def test_pullback_mass_concentrates_near_image_center():
    # the image of C under z -> a z + b is centered at b for the Gaussian bulk
    nz = normalize(one_d(0.4, 0.8))
    near = pullback_mass(nz, 2.0, [0.8], 1.0)
    far = pullback_mass(nz, 2.0, [-4.0], 1.0)
    assert near > 100.0 * far


def test_berezin_methods_agree():
    nz = normalize(one_d(0.5, 0.2, 0.3))
    for w in (0.0, 0.5, 1.0 + 0.5j):
        via_identity = berezin_transform(nz, 2.0, [w], method="identity")
        via_measure = berezin_transform(nz, 2.0, [w], method="direct")
        assert via_identity == pytest.approx(via_measure, rel=1e-6)


def test_berezin_decays_for_compact_symbol():
    nz = normalize(one_d(0.5))
    vals = [berezin_transform(nz, 2.0, [w]) for w in (0.0, 2.0, 4.0, 6.0)]
    assert vals[-1] < 1e-3 * vals[0]
