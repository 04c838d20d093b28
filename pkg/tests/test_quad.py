import math

import numpy as np
import pytest

from fockop.errors import DomainError
from fockop.funcspace import constant, kernel, monomial, normalized_kernel
from fockop.oracle import f2_norm
from fockop.quad import QuadSpec, fock_norm, fock_sup_norm, slice_norm, with_nodes
from fockop.verify import random_symbol

GH = QuadSpec(allow_closed_form=False)
MC = QuadSpec(method="monte_carlo", samples=60000, seed=17)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 4.0])
@pytest.mark.parametrize("w", [[0.0], [1.5], [0.7 - 1.1j], [0.4, -0.9j]])
def test_normalized_kernel_has_unit_norm(p, w):
    r = fock_norm(normalized_kernel(w), p)
    assert r.value == pytest.approx(1.0, abs=1e-9)
    # same thing through the generic quadrature path
    r_gh = fock_norm(normalized_kernel(w), p, GH)
    assert r_gh.value == pytest.approx(1.0, abs=1e-7)


@pytest.mark.parametrize("k", [0, 1, 2, 3, 5, 8])
def test_monomial_f2_norm_is_sqrt_factorial(k):
    f = monomial(1, (k,))
    assert f2_norm(f) == pytest.approx(math.sqrt(math.factorial(k)), rel=1e-12)
    assert fock_norm(f, 2.0).value == pytest.approx(math.sqrt(math.factorial(k)), rel=1e-8)


def test_f2_norm_pythagoras_multivariate():
    # orthogonal monomials: ||z1 + 2 z2^2||_2^2 = 1! + 4 * 2!
    f = monomial(2, (1, 0)) + monomial(2, (0, 2), coeff=2.0)
    assert f2_norm(f) == pytest.approx(math.sqrt(1.0 + 4.0 * 2.0), rel=1e-12)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.5])
def test_kernel_norm_closed_form(p, w=0.9 + 0.3j):
    # ||K_w||_p = e^{|w|^2/2}, independent of p
    r = fock_norm(kernel([w]), p)
    assert r.value == pytest.approx(math.exp(abs(w) ** 2 / 2.0), rel=1e-9)


def test_constant_norm_is_modulus():
    assert fock_norm(constant(2, 3.0 - 4.0j), 1.7).value == pytest.approx(5.0, rel=1e-10)


def test_quadrature_error_estimate_covers_node_doubling():
    rng = np.random.default_rng(4)
    for _ in range(8):
        f = random_symbol(rng, 1)
        base = fock_norm(f, 2.5, GH)
        fine = fock_norm(f, 2.5, with_nodes(GH, 80))
        assert abs(base.value - fine.value) <= base.err_estimate + 1e-12 * (1.0 + fine.value)


def test_monte_carlo_agrees_loosely_with_gauss_hermite():
    f = kernel([0.5]) + monomial(1, (2,), coeff=0.3)
    gh = fock_norm(f, 2.0, GH)
    mc = fock_norm(f, 2.0, MC)
    assert mc.mode == "monte_carlo"
    assert mc.value == pytest.approx(gh.value, rel=0.05)
    assert abs(mc.value - gh.value) <= 4.0 * max(mc.err_estimate, 1e-3)


def test_sup_norm_of_kernel():
    w = 1.1 - 0.4j
    r = fock_sup_norm(kernel([w]))
    assert r.value == pytest.approx(math.exp(abs(w) ** 2 / 2.0), rel=1e-6)


def test_sup_norm_of_monomial():
    # sup |z| e^{-|z|^2/2} = e^{-1/2} at |z| = 1
    r = fock_sup_norm(monomial(1, (1,)))
    assert r.value == pytest.approx(math.exp(-0.5), rel=1e-6)


def test_sup_norm_constant():
    assert fock_sup_norm(constant(2, 2.5)).value == pytest.approx(2.5, rel=1e-9)


def test_slice_norm_matches_slicing_then_norming():
    from fockop.funcspace import slice_head

    f = kernel([0.4, -0.3]) + monomial(2, (0, 1), coeff=0.5)
    head = [0.7 - 0.2j]
    fast = slice_norm(f, 2.0, head)
    slow = fock_norm(slice_head(f, head), 2.0)
    assert fast.value == pytest.approx(slow.value, rel=1e-9)


def test_slice_norm_at_fixed_head():
    # fixing the head turns the kernel into a scaled 1-d kernel
    f = kernel([0.4, -0.3])
    head = [1.0 + 0.5j]
    r = slice_norm(f, 2.0, head)
    scale = abs(np.exp(head[0] * np.conj(0.4)))
    assert r.value == pytest.approx(scale * math.exp(0.3**2 / 2.0), rel=1e-9)


def test_rejects_bad_exponent_and_method():
    with pytest.raises(DomainError):
        fock_norm(constant(1), 0.0)
    with pytest.raises(DomainError):
        fock_norm(constant(1), 2.0, QuadSpec(method="simpson"))


def test_norm_result_reports_method():
    closed = fock_norm(kernel([0.2]), 2.0)
    grid = fock_norm(kernel([0.2]) + constant(1), 2.7, GH)
    assert closed.mode == "closed_form"
    assert closed.err_estimate == 0.0
    assert grid.mode == "quadrature"
    assert grid.err_estimate > 0.0
