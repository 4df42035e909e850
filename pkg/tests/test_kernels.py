import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kdeforge import kernels
from kdeforge.kernels import KernelFamily, KernelSpec, UnsupportedDerivativeError

from conftest import fd_gradient, fd_jacobian

GAUSS1 = KernelSpec(KernelFamily.GAUSSIAN, 1)
GAUSS2 = KernelSpec(KernelFamily.GAUSSIAN, 2)
SPHERE1 = KernelSpec(KernelFamily.SPHERICAL, 1)


def test_gaussian_origin_d1():
    assert kernels.evaluate(GAUSS1, [0.0]) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert kernels.evaluate(GAUSS1, [0.0]) == pytest.approx(0.3989423, abs=1e-7)


def test_spherical_inside_d1():
    assert kernels.evaluate(SPHERE1, [0.5]) == pytest.approx(0.5)
    assert kernels.evaluate(SPHERE1, [1.0]) == pytest.approx(0.5)  # closed boundary
    assert kernels.evaluate(SPHERE1, [1.0001]) == 0.0


def test_gaussian_d2_closed_form():
    expected = math.exp(-0.5) / (2 * math.pi)
    assert kernels.evaluate(GAUSS2, [1.0, 0.0]) == pytest.approx(expected)
    assert expected == pytest.approx(0.0965324, abs=1e-7)


def test_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        kernels.evaluate(GAUSS2, [1.0])


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        kernels.evaluate(GAUSS1, [np.nan])


def test_gradient_hessian_at_origin():
    assert kernels.gradient(GAUSS1, [0.0]) == pytest.approx(0.0)
    hess = kernels.hessian(GAUSS1, [0.0])
    assert hess[0, 0] == pytest.approx(-1 / math.sqrt(2 * math.pi))


def test_derivatives_match_finite_differences_pinned_point():
    u = np.array([0.3, -0.2])
    f = lambda x: kernels.evaluate(GAUSS2, x)
    grad = kernels.gradient(GAUSS2, u)
    hess = kernels.hessian(GAUSS2, u)
    np.testing.assert_allclose(grad, fd_gradient(f, u), rtol=1e-8)
    np.testing.assert_allclose(hess, fd_jacobian(lambda x: kernels.gradient(GAUSS2, x), u),
                               rtol=1e-8)


def test_derivatives_match_finite_differences_random(rng):
    for _ in range(100):
        u = rng.uniform(-2, 2, size=2)
        f = lambda x: kernels.evaluate(GAUSS2, x)
        grad = kernels.gradient(GAUSS2, u)
        np.testing.assert_allclose(grad, fd_gradient(f, u), rtol=1e-6, atol=1e-12)
        hess = kernels.hessian(GAUSS2, u)
        fd_hess = fd_jacobian(lambda x: kernels.gradient(GAUSS2, x), u)
        np.testing.assert_allclose(hess, fd_hess, rtol=1e-6, atol=1e-12)


def test_spherical_derivatives_rejected():
    with pytest.raises(UnsupportedDerivativeError):
        kernels.gradient(SPHERE1, [0.3])
    with pytest.raises(UnsupportedDerivativeError):
        kernels.hessian(SPHERE1, [0.3])


def test_constants_closed_forms():
    c = kernels.constants(GAUSS1)
    assert c["sigma_k2"] == pytest.approx(1.0)
    assert c["mu_k"] == pytest.approx(1 / (2 * math.sqrt(math.pi)))
    assert c["mu_k"] == pytest.approx(0.2820948, abs=1e-7)

    c = kernels.constants(SPHERE1)
    assert c["sigma_k2"] == pytest.approx(1 / 3)
    assert c["mu_k"] == pytest.approx(0.5)

    assert kernels.constants(GAUSS2)["sigma_k2"] == pytest.approx(2.0)


@pytest.mark.parametrize("spec", [GAUSS1, SPHERE1, GAUSS2,
                                  KernelSpec(KernelFamily.SPHERICAL, 2)])
def test_constants_match_quadrature(spec):
    # independent quadrature oracle on a fine grid; the spherical kernel has a
    # jump at the unit sphere, so it gets a tighter domain and looser tolerance
    spherical = spec.family is KernelFamily.SPHERICAL
    lim = 2.0 if spherical else 8.0
    if spec.dim == 1:
        xs = np.linspace(-lim, lim, 80001)[:, None]
        weights = np.full(xs.shape[0], xs[1, 0] - xs[0, 0])
    else:
        ax = np.linspace(-lim, lim, 2401)
        xx, yy = np.meshgrid(ax, ax, indexing="ij")
        xs = np.stack([xx.ravel(), yy.ravel()], axis=-1)
        weights = np.full(xs.shape[0], (ax[1] - ax[0]) ** 2)
    k = kernels.evaluate_many(spec, xs)
    total = float(np.sum(k * weights))
    sigma = float(np.sum(np.sum(xs**2, axis=1) * k * weights))
    mu = float(np.sum(k**2 * weights))
    tol = 5e-3 if spherical else 1e-4
    assert total == pytest.approx(1.0, abs=tol)
    c = kernels.constants(spec)
    assert sigma == pytest.approx(c["sigma_k2"], abs=tol)
    assert mu == pytest.approx(c["mu_k"], abs=tol)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=2, max_size=2))
def test_symmetry_and_nonnegativity(point):
    for spec in (GAUSS2, KernelSpec(KernelFamily.SPHERICAL, 2)):
        v = kernels.evaluate(spec, point)
        assert v >= 0
        assert v == kernels.evaluate(spec, [-point[0], -point[1]])


def test_normalizers():
    assert GAUSS2.normalizer == pytest.approx(2 * math.pi)
    assert SPHERE1.normalizer == pytest.approx(2.0)
    assert KernelSpec(KernelFamily.SPHERICAL, 2).normalizer == pytest.approx(math.pi)
