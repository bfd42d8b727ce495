"""Dense complex linear-algebra primitives.

Every operator in the package is a dense ``complex128`` ndarray. The helpers
here are thin, tolerance-aware wrappers over :mod:`numpy.linalg` and
:mod:`scipy.linalg`; they never mutate their inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NotHermitian, NotPsd, SingularCore

__all__ = [
    "RankTolerance",
    "DEFAULT_RANK_TOL",
    "MAX_CONDITION",
    "as_matrix",
    "adjoint",
    "opnorm",
    "hermitian_part",
    "psd_sqrt",
    "unitary_polar",
    "woodbury_inverse",
    "numerical_rank",
    "is_contraction",
    "is_unitary",
    "spectral_radius",
    "guarded_solve",
]

#: Beyond this condition number double precision certifies no digits.
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class RankTolerance:
    """Singular-value cutoff used to turn a matrix into an integer rank.

    A singular value counts iff it exceeds
    ``max(relative * sigma_max, absolute_floor)``.
    """

    relative: float = 1e-8
    absolute_floor: float = 1e-10

    def __post_init__(self):
        if not 0.0 < self.relative < 1.0:
            raise ValueError(f"relative tolerance must lie in (0, 1), got {self.relative}")
        if not self.absolute_floor > 0.0:
            raise ValueError(f"absolute_floor must be positive, got {self.absolute_floor}")


DEFAULT_RANK_TOL = RankTolerance()


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a finite 2-D complex array (a copy is made only if needed)."""
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def opnorm(a: np.ndarray) -> float:
    """Spectral norm; 0 for empty matrices."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + adjoint(a))


def psd_sqrt(a, clamp: float = 1e-10, herm_tol: float = 1e-12) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Parameters
    ----------
    a : (n, n) array_like
        Hermitian psd matrix. Asymmetry above ``herm_tol * max(1, ||a||)``
        raises :class:`NotHermitian`.
    clamp : float
        Eigenvalues in ``[-clamp, 0)`` are treated as roundoff and set to 0;
        anything more negative raises :class:`NotPsd`.

    Returns
    -------
    s : (n, n) ndarray
        Hermitian psd with ``s @ s == a`` up to roundoff.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("psd_sqrt needs a square matrix")
    if a.size == 0:
        return a.copy()
    scale = max(1.0, opnorm(a))
    if opnorm(a - adjoint(a)) > herm_tol * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    evals, evecs = np.linalg.eigh(hermitian_part(a))
    if evals[0] < -clamp * scale:
        raise NotPsd(f"smallest eigenvalue {evals[0]:.3e} is below -{clamp:g}")
    root = np.sqrt(np.clip(evals, 0.0, None))
    s = (evecs * root) @ adjoint(evecs)
    return hermitian_part(s)


def unitary_polar(r) -> tuple[np.ndarray, np.ndarray]:
    """Polar decomposition ``r = v @ p`` with a *unitary* left factor.

    ``p = (r* r)^{1/2}`` is unique. When ``r`` is singular the unitary factor
    is not; we take ``v = W Vh`` from the SVD ``r = W diag(s) Vh``, which pairs
    the right and left singular vectors of the zero singular values in index
    order and therefore maps ``ker r`` onto ``ker r*``.
    """
    r = as_matrix(r)
    if r.shape[0] != r.shape[1]:
        raise ValueError("unitary_polar needs a square matrix")
    if r.size == 0:
        return r.copy(), r.copy()
    if not np.any(r):
        n = r.shape[0]
        return np.eye(n, dtype=complex), np.zeros((n, n), dtype=complex)
    w, s, vh = np.linalg.svd(r)
    v = w @ vh
    p = hermitian_part((adjoint(vh) * s) @ vh)
    return v, p


def guarded_solve(a: np.ndarray, b: np.ndarray, exc=SingularCore, what: str = "matrix") -> np.ndarray:
    """``a^{-1} b`` refusing systems with condition number above :data:`MAX_CONDITION`."""
    if a.size == 0:
        return np.zeros((0,) + b.shape[1:], dtype=complex)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise exc(f"{what} is numerically singular (condition number {cond:.3e})")
    return np.linalg.solve(a, b)


def woodbury_inverse(p, q) -> np.ndarray:
    """``(I_n - P Q*)^{-1}`` through the ``k x k`` core ``I_k - Q* P``.

    Uses ``(I - P Q*)^{-1} = I + P (I - Q* P)^{-1} Q*``; both inverses exist
    simultaneously, so a singular core means the big matrix is singular too.
    """
    p = as_matrix(p)
    q = as_matrix(q)
    if p.shape != q.shape:
        raise ValueError(f"P and Q must have equal shapes, got {p.shape} and {q.shape}")
    n, k = p.shape
    core = np.eye(k) - adjoint(q) @ p
    inner = guarded_solve(core, adjoint(q), SingularCore, "I - Q*P")
    return np.eye(n) + p @ inner


def numerical_rank(a, tol: RankTolerance = DEFAULT_RANK_TOL) -> int:
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    cutoff = max(tol.relative * s[0], tol.absolute_floor)
    return int(np.count_nonzero(s > cutoff))


def is_contraction(a, slack: float = 1e-10) -> bool:
    return opnorm(np.asarray(a, dtype=complex)) <= 1.0 + slack


def is_unitary(a, tol: float = 1e-10) -> bool:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return opnorm(adjoint(a) @ a - np.eye(a.shape[0])) <= tol


def spectral_radius(a) -> float:
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(sla.eigvals(a))))
