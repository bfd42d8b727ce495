"""Canonical form of a contraction that is a finite-rank perturbation of a unitary.

Any contraction ``T = U + K`` with ``U`` unitary can be rewritten as::

    T = U1 + B (Gamma - I) B* U1

with ``U1`` unitary, ``B`` an isometry from a ``k``-dimensional space and
``Gamma`` a Hermitian psd strict contraction. :func:`reduce_to_gamma_form`
computes the triple constructively; :func:`cnu_split` separates the unitary
part of ``T`` from its completely non-unitary part.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NotAContraction, NotUnitary
from .linalg import (
    DEFAULT_RANK_TOL,
    RankTolerance,
    adjoint,
    as_matrix,
    is_contraction,
    is_unitary,
    opnorm,
    psd_sqrt,
    spectral_radius,
    unitary_polar,
)

__all__ = [
    "EPS_STRICT",
    "KRYLOV_TOL",
    "GammaForm",
    "CnuSplit",
    "reduce_to_gamma_form",
    "assemble_T",
    "defect_operators",
    "cnu_split",
    "krylov_basis",
]

#: Eigenvalues of |R| within this distance of 1 belong to the unitary part.
EPS_STRICT = 1e-12
#: Relative pivot threshold for span saturation in Krylov accumulation.
KRYLOV_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GammaForm:
    """The triple ``(U1, B, Gamma)`` with ``T = U1 + B (Gamma - I) B* U1``.

    ``k = 0`` (``B`` of shape ``(d, 0)``) is legal and describes a unitary ``T``.
    """

    U1: np.ndarray
    B: np.ndarray
    Gamma: np.ndarray

    def __post_init__(self):
        U1 = as_matrix(self.U1)
        B = np.asarray(self.B, dtype=complex).reshape(U1.shape[0], -1)
        G = np.asarray(self.Gamma, dtype=complex).reshape(B.shape[1], B.shape[1])
        if not (np.all(np.isfinite(B)) and np.all(np.isfinite(G))):
            raise ValueError("GammaForm entries must be finite")
        object.__setattr__(self, "U1", U1)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "Gamma", G)
        if not is_unitary(U1, 1e-10):
            raise NotUnitary("U1 is not unitary within 1e-10")
        k = B.shape[1]
        if k:
            if opnorm(adjoint(B) @ B - np.eye(k)) > 1e-10:
                raise ValueError("B is not an isometry within 1e-10")
            if opnorm(G - adjoint(G)) > 1e-10:
                raise ValueError("Gamma is not Hermitian within 1e-10")
            ev = np.linalg.eigvalsh(0.5 * (G + adjoint(G)))
            if ev[0] < -1e-10 or ev[-1] > 1.0 - EPS_STRICT:
                raise ValueError(f"Gamma spectrum [{ev[0]:.3e}, {ev[-1]:.3e}] leaves [0, 1)")

    @property
    def d(self) -> int:
        return self.U1.shape[0]

    @property
    def k(self) -> int:
        return self.B.shape[1]

    def gamma_eigenvalues(self) -> np.ndarray:
        if self.k == 0:
            return np.zeros(0)
        return np.linalg.eigvalsh(self.Gamma)


@dataclass(frozen=True, eq=False)
class CnuSplit:
    """Decomposition ``H = H0 (+) H1`` reducing ``T``.

    ``T0`` is the completely non-unitary block on ``H0`` and ``V`` the unitary
    block on ``H1``, both written in the orthonormal frames ``basis0``,
    ``basis1``.
    """

    P0: np.ndarray
    T0: np.ndarray
    V: np.ndarray
    basis0: np.ndarray
    basis1: np.ndarray

    @property
    def dim0(self) -> int:
        return self.basis0.shape[1]

    @property
    def dim1(self) -> int:
        return self.basis1.shape[1]

    @property
    def spectral_radius(self) -> float:
        """Spectral radius of ``T0`` (0 when ``H0`` is trivial)."""
        return spectral_radius(self.T0)


def assemble_T(g: GammaForm) -> np.ndarray:
    k = g.k
    return g.U1 + g.B @ (g.Gamma - np.eye(k)) @ adjoint(g.B) @ g.U1


def _phase_fix_columns(b: np.ndarray) -> np.ndarray:
    # make the largest-modulus entry of each column real positive
    b = b.copy()
    for j in range(b.shape[1]):
        col = b[:, j]
        i = int(np.argmax(np.abs(col)))
        if abs(col[i]) > 0:
            b[:, j] = col * (abs(col[i]) / col[i])
    return b


def reduce_to_gamma_form(U, K, tol: RankTolerance = DEFAULT_RANK_TOL) -> GammaForm:
    """Rewrite the contraction ``U + K`` in canonical form.

    The construction works on the adjoint ``T* = U*(I + K')`` with
    ``K' = U K*``:

    1. ``D1 = (ker K')^perp`` from the SVD of ``K'``.
    2. ``R = (I + K')|_{D1}`` and its polar decomposition ``R = V |R|``.
    3. ``D2 = D1 minus ker(|R| - I)``; ``Gamma = |R|`` restricted to ``D2``.
    4. ``U1'' = V (+) I`` on ``D1 (+) D1^perp`` gives
       ``I + K' = U1'' + U1'' B (Gamma - I) B*``; taking adjoints back yields
       ``T = U1 + B (Gamma - I) B* U1`` with ``U1 = U1''* U``.

    Eigenvalues of ``|R|`` within :data:`EPS_STRICT` of 1 (or above it, from
    roundoff) are assigned to the unitary part.

    Raises
    ------
    NotUnitary
        ``U`` is not unitary within 1e-10.
    NotAContraction
        ``||U + K|| > 1 + 1e-10``.
    """
    U = as_matrix(U)
    K = as_matrix(K)
    if U.shape != K.shape or U.shape[0] != U.shape[1]:
        raise ValueError(f"U and K must be square of equal size, got {U.shape}, {K.shape}")
    if not is_unitary(U, 1e-10):
        raise NotUnitary("U is not unitary within 1e-10")
    if not is_contraction(U + K, 1e-10):
        raise NotAContraction(f"||U + K|| = {opnorm(U + K):.12g} exceeds 1")
    d = U.shape[0]
    Kp = U @ adjoint(K)

    _, s, vh = np.linalg.svd(Kp) if d else (None, np.zeros(0), np.zeros((0, 0)))
    if s.size and s[0] > 0:
        cutoff = max(tol.relative * s[0], tol.absolute_floor)
        m = int(np.count_nonzero(s > cutoff))
    else:
        m = 0
    E1 = adjoint(vh[:m])  # orthonormal frame of D1

    R = adjoint(E1) @ (E1 + Kp @ E1)
    V, absR = unitary_polar(R)
    if m:
        evals, evecs = np.linalg.eigh(absR)
    else:
        evals, evecs = np.zeros(0), np.zeros((0, 0), dtype=complex)
    keep = evals < 1.0 - EPS_STRICT
    gamma = np.clip(evals[keep], 0.0, None)
    B = _phase_fix_columns(E1 @ evecs[:, keep])

    U1pp = E1 @ V @ adjoint(E1) + (np.eye(d) - E1 @ adjoint(E1))
    U1 = adjoint(U1pp) @ U
    # re-orthonormalise away O(eps) drift so GammaForm validation is exact
    U1, _ = unitary_polar(U1)
    return GammaForm(U1=U1, B=B, Gamma=np.diag(gamma).astype(complex))


def defect_operators(g: GammaForm) -> tuple[np.ndarray, np.ndarray]:
    """``(D_T, D_{T*})`` from the block structure of ``T``.

    With ``D_Gamma = (I - Gamma^2)^{1/2}``::

        D_T  = U1* B D_Gamma B* U1
        D_T* = B D_Gamma B*
    """
    k = g.k
    dg = psd_sqrt(np.eye(k) - g.Gamma @ g.Gamma)
    dts = g.B @ dg @ adjoint(g.B)
    dt = adjoint(g.U1) @ dts @ g.U1
    return dt, dts


def _orth_pivoted(a: np.ndarray, rtol: float) -> np.ndarray:
    if a.shape[1] == 0:
        return a
    q, r, _ = sla.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0:
        return q[:, :0]
    rank = int(np.count_nonzero(diag > rtol * diag[0]))
    return q[:, :rank]


def krylov_basis(U1: np.ndarray, B: np.ndarray, rtol: float = KRYLOV_TOL) -> np.ndarray:
    """Orthonormal frame of the smallest ``U1``, ``U1*``-invariant subspace containing ``Ran B``."""
    q = _orth_pivoted(B, rtol)
    Ua = adjoint(U1)
    for _ in range(U1.shape[0]):
        nxt = _orth_pivoted(np.hstack([q, U1 @ q, Ua @ q]), rtol)
        if nxt.shape[1] == q.shape[1]:
            break
        q = nxt
    return q


def cnu_split(g: GammaForm) -> CnuSplit:
    """Split ``T`` along ``H0 = span{U1^n Ran B}`` and ``H1 = H0^perp``."""
    d = g.d
    T = assemble_T(g)
    if g.k == 0:
        b0 = np.zeros((d, 0), dtype=complex)
        b1 = np.eye(d, dtype=complex)
    else:
        b0 = krylov_basis(g.U1, g.B)
        r = b0.shape[1]
        if r == d:
            b1 = np.zeros((d, 0), dtype=complex)
        else:
            qfull, _ = sla.qr(b0, mode="full")
            b1 = qfull[:, r:]
    P0 = b0 @ adjoint(b0)
    T0 = adjoint(b0) @ T @ b0
    V = adjoint(b1) @ T @ b1
    return CnuSplit(P0=P0, T0=T0, V=V, basis0=b0, basis1=b1)
