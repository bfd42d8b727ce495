import numpy as np
import pytest
from hypothesis import given, strategies as st

from charfunc.errors import NotAContraction, NotUnitary
from charfunc.linalg import adjoint, is_unitary, opnorm, psd_sqrt
from charfunc.perturbation import (
    GammaForm,
    assemble_T,
    cnu_split,
    defect_operators,
    krylov_basis,
    reduce_to_gamma_form,
)
from charfunc.verify import matrix_case, random_contraction_pair, random_instance, random_unitary


def test_scalar_reduction_example():
    g = reduce_to_gamma_form(np.eye(1), np.array([[-0.5]]))
    assert g.k == 1
    assert np.allclose(g.Gamma, [[0.5]])
    assert np.allclose(g.B, [[1.0]])
    assert np.allclose(g.U1, [[1.0]])


def test_unitary_input_has_no_defect():
    U = random_unitary(np.random.default_rng(1), 4)
    g = reduce_to_gamma_form(U, np.zeros((4, 4)))
    assert g.k == 0
    assert np.allclose(g.U1, U)
    # another unitary as U + K is also defect-free
    W = random_unitary(np.random.default_rng(2), 4)
    g = reduce_to_gamma_form(U, W - U)
    assert g.k == 0 and np.allclose(assemble_T(g), W)


def test_rejects_bad_inputs():
    with pytest.raises(NotUnitary):
        reduce_to_gamma_form(2 * np.eye(2), np.zeros((2, 2)))
    with pytest.raises(NotAContraction):
        reduce_to_gamma_form(np.eye(2), 0.1 * np.eye(2))
    with pytest.raises(ValueError):
        reduce_to_gamma_form(np.eye(2), np.zeros((3, 3)))


@given(st.integers(0, 10_000), st.booleans())
def test_reconstruction_and_gamma_spectrum(seed, saturate):
    d, k = matrix_case(seed)
    U, K = random_contraction_pair(seed, d, k, saturate)
    g = reduce_to_gamma_form(U, K)
    assert opnorm(assemble_T(g) - (U + K)) <= 1e-10
    assert g.k <= k
    ev = g.gamma_eigenvalues()
    assert np.all(ev >= -1e-12) and np.all(ev < 1.0)
    assert opnorm(adjoint(g.B) @ g.B - np.eye(g.k)) <= 1e-12
    assert is_unitary(g.U1, 1e-12)


def test_saturated_direction_moves_to_unitary_part():
    # one singular value of the coupling equals 1, so k drops by one
    U, K = random_contraction_pair(5, 5, 3, saturate=True)
    assert reduce_to_gamma_form(U, K).k == 2


def test_gamma_form_validation():
    with pytest.raises(ValueError):
        GammaForm(np.eye(1), np.ones((1, 1)), np.array([[1.0]]))  # not strict
    with pytest.raises(ValueError):
        GammaForm(np.eye(2), np.ones((2, 1)), np.array([[0.5]]))  # B not isometric
    with pytest.raises(NotUnitary):
        GammaForm(2 * np.eye(1), np.ones((1, 1)), np.array([[0.5]]))
    g = GammaForm(np.eye(3), np.zeros((3, 0)), np.zeros((0, 0)))
    assert g.k == 0 and g.d == 3


@given(st.integers(0, 10_000))
def test_defect_operators_match_definition(seed):
    g = random_instance(seed, *matrix_case(seed))
    T = assemble_T(g)
    dt, dts = defect_operators(g)
    I = np.eye(g.d)
    assert np.allclose(dt, psd_sqrt(I - adjoint(T) @ T, clamp=1e-9), atol=1e-7)
    assert np.allclose(dts, psd_sqrt(I - T @ adjoint(T), clamp=1e-9), atol=1e-7)
    # exact relation between the two
    assert np.allclose(dt @ dt, I - adjoint(T) @ T, atol=1e-12)


def _block_model():
    # T acts as a rotation on e0 and as a c.n.u. contraction on span{e1, e2}
    W = random_unitary(np.random.default_rng(3), 2)
    U1 = np.zeros((3, 3), dtype=complex)
    U1[0, 0] = np.exp(0.7j)
    U1[1:, 1:] = W
    B = np.zeros((3, 1), dtype=complex)
    B[1, 0] = 1.0
    return GammaForm(U1, B, np.array([[0.4]]))


def test_cnu_split_finds_unitary_summand():
    g = _block_model()
    s = cnu_split(g)
    assert s.dim0 == 2 and s.dim1 == 1
    assert np.allclose(abs(np.vdot(s.basis1[:, 0], np.eye(3)[:, 0])), 1.0)
    assert is_unitary(s.V)
    assert s.spectral_radius < 1.0
    T = assemble_T(g)
    assert np.allclose(T @ s.P0, s.P0 @ T)  # H0 reduces T


@given(st.integers(0, 10_000))
def test_cnu_split_reduces_T(seed):
    g = random_instance(seed, *matrix_case(seed))
    s = cnu_split(g)
    T = assemble_T(g)
    assert s.dim0 + s.dim1 == g.d
    assert np.allclose(T @ s.P0, s.P0 @ T, atol=1e-10)
    assert is_unitary(s.V, 1e-10)
    # Ran B lies in H0
    assert opnorm(g.B - s.P0 @ g.B) <= 1e-10


def test_krylov_basis_is_invariant():
    g = random_instance(4, 6, 1)
    Q = krylov_basis(g.U1, g.B)
    P = Q @ adjoint(Q)
    assert np.allclose(P @ g.U1 @ Q, g.U1 @ Q)
    assert np.allclose(P @ adjoint(g.U1) @ Q, adjoint(g.U1) @ Q)
