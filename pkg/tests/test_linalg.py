import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from charfunc.errors import NotHermitian, NotPsd, SingularCore
from charfunc.linalg import (
    RankTolerance,
    adjoint,
    guarded_solve,
    is_contraction,
    is_unitary,
    numerical_rank,
    opnorm,
    psd_sqrt,
    spectral_radius,
    unitary_polar,
    woodbury_inverse,
)


def cgauss(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


seeds = st.integers(0, 2**31 - 1)
sizes = st.integers(1, 7)


def test_rank_tolerance_validation():
    assert RankTolerance().relative == 1e-8
    assert RankTolerance().absolute_floor == 1e-10
    with pytest.raises(ValueError):
        RankTolerance(relative=0.0)
    with pytest.raises(ValueError):
        RankTolerance(relative=1.5)
    with pytest.raises(ValueError):
        RankTolerance(absolute_floor=0.0)


@given(seeds, sizes)
def test_psd_sqrt_matches_scipy_sqrtm(seed, n):
    rng = np.random.default_rng(seed)
    X = cgauss(rng, (n, n))
    A = X @ adjoint(X)
    S = psd_sqrt(A)
    assert np.allclose(S, adjoint(S))
    assert opnorm(S @ S - A) <= 1e-10 * max(1.0, opnorm(A))
    assert np.allclose(S, sla.sqrtm(A), atol=1e-7)


def test_psd_sqrt_clamps_roundoff_and_rejects_negative():
    a = np.diag([1.0, -1e-13])
    assert np.allclose(psd_sqrt(a), np.diag([1.0, 0.0]))
    with pytest.raises(NotPsd):
        psd_sqrt(np.diag([1.0, -1e-3]))
    with pytest.raises(NotHermitian):
        psd_sqrt(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_psd_sqrt_empty():
    assert psd_sqrt(np.zeros((0, 0))).shape == (0, 0)


@given(seeds, sizes, st.integers(0, 7))
def test_unitary_polar_factorises(seed, n, drop):
    rng = np.random.default_rng(seed)
    W, s, Vh = np.linalg.svd(cgauss(rng, (n, n)))
    s[: min(drop, n)] = 0.0  # rank deficient cases included
    R = (W * s) @ Vh
    V, P = unitary_polar(R)
    assert is_unitary(V, 1e-12)
    assert np.allclose(P, adjoint(P))
    assert np.linalg.eigvalsh(P).min() >= -1e-12
    assert opnorm(V @ P - R) <= 1e-12 * max(1.0, opnorm(R))


def test_unitary_polar_of_zero_is_identity():
    V, P = unitary_polar(np.zeros((3, 3)))
    assert np.array_equal(V, np.eye(3))
    assert not P.any()


def test_unitary_polar_matches_scipy_on_invertible(rng):
    R = cgauss(rng, (5, 5))
    V, P = unitary_polar(R)
    Vs, Ps = sla.polar(R)
    assert np.allclose(V, Vs) and np.allclose(P, Ps)


@given(seeds, st.integers(1, 8), st.integers(1, 4))
def test_woodbury_matches_direct_inverse(seed, n, k):
    rng = np.random.default_rng(seed)
    P = 0.3 * cgauss(rng, (n, k))
    Q = 0.3 * cgauss(rng, (n, k))
    A = np.eye(n) - P @ adjoint(Q)
    if np.linalg.cond(A) > 1e8:
        return
    assert np.allclose(woodbury_inverse(P, Q), np.linalg.inv(A), atol=1e-9)


def test_woodbury_singular_core():
    p = np.array([[1.0], [0.0]])
    with pytest.raises(SingularCore):
        woodbury_inverse(p, p)  # I - p p* is singular


def test_guarded_solve_refuses_ill_conditioned():
    with pytest.raises(SingularCore):
        guarded_solve(np.diag([1.0, 1e-14]), np.ones(2))
    assert np.allclose(guarded_solve(np.diag([2.0, 4.0]), np.ones(2)), [0.5, 0.25])


def test_numerical_rank_uses_relative_and_floor():
    assert numerical_rank(np.diag([1.0, 1e-7, 1e-9])) == 2
    assert numerical_rank(np.diag([1e-11, 1e-12])) == 0  # below the absolute floor
    assert numerical_rank(np.diag([1.0, 1e-7]), RankTolerance(relative=1e-6)) == 1
    assert numerical_rank(np.zeros((0, 0))) == 0


def test_predicates():
    assert is_contraction(np.diag([1.0, 0.5]))
    assert not is_contraction(np.diag([1.0 + 1e-6, 0.5]))
    assert is_unitary(np.array([[0, 1j], [1, 0]]))
    assert not is_unitary(np.ones((2, 3)))
    assert spectral_radius(np.array([[0.5, 10.0], [0.0, 0.25]])) == pytest.approx(0.5)
    assert spectral_radius(np.zeros((0, 0))) == 0.0


def test_adjoint_on_stacks(rng):
    a = cgauss(rng, (4, 2, 3))
    assert adjoint(a).shape == (4, 3, 2)
    assert np.allclose(adjoint(a)[1], a[1].conj().T)
