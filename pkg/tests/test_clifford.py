"""Exact fiber algebra: gamma relations, quaternionic structure, frames.

Every assertion here is on integer-entried matrices, so comparisons are
exact (np.array_equal); float tolerances appear only where a random test
vector enters, and then at 1e-13, a few ulps of the O(1) arithmetic.
"""

import numpy as np
import pytest

from spindirac.clifford import (
    apply_j,
    clifford_mul,
    make_fiber,
    real_orthogonal_basis,
    volume_element,
)


@pytest.mark.parametrize("n", [2, 3])
def test_gamma_anticommutators_exact(n):
    fiber = make_fiber(n)
    eye = np.eye(fiber.N)
    zero = np.zeros((fiber.N, fiber.N))
    for i in range(n):
        for j in range(n):
            acc = fiber.gammas[i] @ fiber.gammas[j] + fiber.gammas[j] @ fiber.gammas[i]
            want = -2.0 * eye if i == j else zero
            assert np.array_equal(acc, want)


@pytest.mark.parametrize("n", [2, 3])
def test_gamma_skew_adjoint_exact(n):
    fiber = make_fiber(n)
    for g in fiber.gammas:
        assert np.array_equal(np.asarray(g).conj().T, -np.asarray(g))


@pytest.mark.parametrize("n", [2, 3])
def test_j_squares_to_minus_identity_exact(n):
    fiber = make_fiber(n)
    jm = np.asarray(fiber.j_matrix)
    # J sigma = Q conj(sigma), so J^2 = Q conj(Q).
    assert np.array_equal(jm @ jm.conj(), -np.eye(fiber.N))


@pytest.mark.parametrize("n", [2, 3])
def test_j_commutes_with_clifford_exact(n):
    fiber = make_fiber(n)
    jm = np.asarray(fiber.j_matrix)
    for g in fiber.gammas:
        # antilinear commutation: J(gamma sigma) = gamma (J sigma)
        assert np.array_equal(jm @ np.asarray(g).conj(), np.asarray(g) @ jm)


def test_volume_element_is_plus_identity_in_3d():
    fiber = make_fiber(3)
    assert np.array_equal(volume_element(fiber), np.eye(fiber.N))


@pytest.mark.parametrize("n", [2, 3])
def test_clifford_square_is_minus_norm_squared(n):
    rng = np.random.default_rng(11)
    fiber = make_fiber(n)
    for _ in range(20):
        x = rng.standard_normal(n)
        phi = rng.standard_normal(fiber.N) + 1j * rng.standard_normal(fiber.N)
        twice = clifford_mul(fiber, x, clifford_mul(fiber, x, phi))
        assert np.max(np.abs(twice + (x @ x) * phi)) < 1e-13


@pytest.mark.parametrize("n", [2, 3])
def test_clifford_mul_real_linear_in_vector(n):
    rng = np.random.default_rng(12)
    fiber = make_fiber(n)
    x, y = rng.standard_normal((2, n))
    phi = rng.standard_normal(fiber.N) + 1j * rng.standard_normal(fiber.N)
    lhs = clifford_mul(fiber, 2.0 * x - 3.0 * y, phi)
    rhs = 2.0 * clifford_mul(fiber, x, phi) - 3.0 * clifford_mul(fiber, y, phi)
    assert np.max(np.abs(lhs - rhs)) < 1e-13


@pytest.mark.parametrize("n", [2, 3])
def test_clifford_polarization_identity(n):
    # Re<X.phi, Y.phi> = <X, Y> |phi|^2 for real X, Y
    rng = np.random.default_rng(13)
    fiber = make_fiber(n)
    for _ in range(10):
        x, y = rng.standard_normal((2, n))
        phi = rng.standard_normal(fiber.N) + 1j * rng.standard_normal(fiber.N)
        lhs = np.vdot(clifford_mul(fiber, x, phi), clifford_mul(fiber, y, phi)).real
        rhs = (x @ y) * np.vdot(phi, phi).real
        assert abs(lhs - rhs) < 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_apply_j_antilinear(n):
    rng = np.random.default_rng(14)
    fiber = make_fiber(n)
    phi = rng.standard_normal(fiber.N) + 1j * rng.standard_normal(fiber.N)
    a = 0.3 - 1.7j
    assert np.max(np.abs(apply_j(fiber, a * phi) - np.conj(a) * apply_j(fiber, phi))) < 1e-13


@pytest.mark.parametrize("n", [2, 3])
def test_apply_j_isometry_and_symplectic_pairing(n):
    rng = np.random.default_rng(15)
    fiber = make_fiber(n)
    for _ in range(10):
        phi = rng.standard_normal(fiber.N) + 1j * rng.standard_normal(fiber.N)
        jphi = apply_j(fiber, phi)
        assert abs(np.vdot(jphi, jphi) - np.vdot(phi, phi)) < 1e-12
        # <v, Jv> = 0 pointwise is what forces even complex multiplicities
        assert abs(np.vdot(phi, jphi)) < 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_real_orthogonal_basis_frame(n):
    rng = np.random.default_rng(16)
    fiber = make_fiber(n)
    phi = rng.standard_normal(fiber.N) + 1j * rng.standard_normal(fiber.N)
    frame = real_orthogonal_basis(fiber, phi)
    assert frame.shape == (4, fiber.N)
    norm2 = np.vdot(phi, phi).real
    for a in range(4):
        for b in range(4):
            got = np.vdot(frame[a], frame[b]).real
            want = norm2 if a == b else 0.0
            assert abs(got - want) < 1e-12


def test_real_orthogonal_basis_rejects_zero():
    fiber = make_fiber(2)
    with pytest.raises(ValueError):
        real_orthogonal_basis(fiber, np.zeros(fiber.N, dtype=complex))


@pytest.mark.parametrize("n", [2, 3])
def test_fiber_dimensions(n):
    fiber = make_fiber(n)
    assert fiber.n == n
    assert fiber.N == 2
    assert len(fiber.gammas) == n


def test_make_fiber_rejects_other_dimensions():
    for n in (0, 1, 4):
        with pytest.raises(ValueError):
            make_fiber(n)
