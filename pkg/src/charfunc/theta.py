"""Characteristic function of ``T = U1 + B (Gamma - I) B* U1`` and its boundary data.

Four independent evaluators are provided, all in the coordinates
``V = B* U1`` (on ``D_T``) and ``V_* = B*`` (on ``D_T*``):

``defect``
    ``theta(z) = -Gamma + z B* D_T* (I - z T*)^{-1} D_T U1* B``
``f1_left`` / ``f1_right``
    ``theta(z) = -Gamma + D_Gamma F1 (I - (Gamma* - I) F1)^{-1} D_Gamma`` and the
    mirrored bracket, with ``F1 = C1 mu`` taken either from the resolvent
    ``z B* (I - z U1*)^{-1} U1* B`` or from a measure.
``herglotz``
    ``theta = (C2 mu~ - I)(C2 mu~ + I)^{-1}`` with ``mu~ = beta mu beta``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import PoleHit, SingularBracket, SingularResolvent
from .linalg import (
    DEFAULT_RANK_TOL,
    MAX_CONDITION,
    RankTolerance,
    adjoint,
    guarded_solve,
    psd_sqrt,
)
from .measure import (
    MeasureModel,
    OperatorMeasure,
    POLE_TOL,
    cauchy_transform,
    cauchy_transform_grid,
    grid_angles,
    pushforward_beta,
)
from .perturbation import CnuSplit, GammaForm, assemble_T, cnu_split, defect_operators

__all__ = [
    "METHODS",
    "ThetaEvaluator",
    "BoundaryProfile",
    "f1_resolvent",
    "theta_defect",
    "theta_f1",
    "theta_herglotz",
    "resolvent_expansion",
    "boundary_profile",
    "stack_ranks",
]

METHODS = ("defect", "f1_left", "f1_right", "herglotz")
BOUNDARY_CLAMP = 1e-9
STABLE_MARGIN = 1e-8
FALLBACK_RADIUS = 1.0 - 1e-6

F1Source = Union[GammaForm, MeasureModel, tuple]


def _hermitian_gamma(gamma) -> np.ndarray:
    g = np.asarray(gamma, dtype=complex)
    n = int(round(np.sqrt(g.size)))
    return g.reshape(n, n)


def _d_gamma(gamma: np.ndarray) -> np.ndarray:
    k = gamma.shape[0]
    return psd_sqrt(np.eye(k) - adjoint(gamma) @ gamma)


def _batched_solve(a: np.ndarray, b: np.ndarray, exc, what: str) -> np.ndarray:
    if a.shape[-1] == 0:
        return np.zeros(b.shape, dtype=complex)
    cond = np.linalg.cond(a)
    bad = ~np.isfinite(cond) | (cond > MAX_CONDITION)
    if np.any(bad):
        raise exc(f"{what} is numerically singular (condition {np.max(cond):.3e})")
    return np.linalg.solve(a, b)


# ---------------------------------------------------------------------------
# F1 providers
# ---------------------------------------------------------------------------

def f1_resolvent(g: GammaForm, z: complex) -> np.ndarray:
    """``F1(z) = z B* (I - z U1*)^{-1} U1* B``."""
    d = g.d
    Ua = adjoint(g.U1)
    x = guarded_solve(np.eye(d) - z * Ua, Ua @ g.B, SingularResolvent, "I - z U1*")
    return z * adjoint(g.B) @ x


def _f1_resolvent_many(g: GammaForm, zs: np.ndarray) -> np.ndarray:
    d = g.d
    Ua = adjoint(g.U1)
    A = np.eye(d)[None] - zs[:, None, None] * Ua[None]
    rhs = np.broadcast_to(Ua @ g.B, (zs.size, d, g.k))
    x = _batched_solve(A, rhs, SingularResolvent, "I - z U1*")
    return zs[:, None, None] * (adjoint(g.B)[None] @ x)


def _as_model(source) -> MeasureModel:
    if isinstance(source, MeasureModel):
        return source
    gamma, mu = source
    return MeasureModel(gamma=_hermitian_gamma(gamma), mu=mu)


# ---------------------------------------------------------------------------
# pointwise formulas
# ---------------------------------------------------------------------------

def theta_defect(g: GammaForm, z: complex, split: Optional[CnuSplit] = None) -> np.ndarray:
    """Characteristic function from the defect operators of ``T``.

    When ``split`` is given, the resolvent is taken on ``H0`` only; ``H0``
    reduces ``T`` and contains the ranges of both defect operators, so the
    value is unchanged but eigenvalues of the unitary part no longer make
    ``I - z T*`` singular on the circle.
    """
    k = g.k
    if k == 0:
        return np.zeros((0, 0), dtype=complex)
    T = assemble_T(g)
    dt, dts = defect_operators(g)
    left = adjoint(g.B) @ dts
    right = dt @ adjoint(g.U1) @ g.B
    if split is not None:
        b0 = split.basis0
        T = adjoint(b0) @ T @ b0
        left = left @ b0
        right = adjoint(b0) @ right
    n = T.shape[0]
    x = guarded_solve(np.eye(n) - z * adjoint(T), right, SingularResolvent, "I - z T*")
    return -g.Gamma + z * left @ x


def _f1_core(gamma: np.ndarray, dg: np.ndarray, F1: np.ndarray, side: str) -> np.ndarray:
    k = gamma.shape[-1]
    I = np.eye(k)
    gm = adjoint(gamma) - I
    if side == "left":
        bracket = I - gm @ F1
        # F1 @ inv(bracket) == solve(bracket^T, F1^T)^T
        mid = np.swapaxes(_batched_solve(np.swapaxes(bracket, -1, -2), np.swapaxes(F1, -1, -2),
                                         SingularBracket, "I - (Gamma* - I) F1"), -1, -2)
    elif side == "right":
        bracket = I - F1 @ gm
        mid = _batched_solve(bracket, F1, SingularBracket, "I - F1 (Gamma* - I)")
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return -gamma + dg @ mid @ dg


def theta_f1(source: F1Source, z: complex, side: str = "left") -> np.ndarray:
    """Characteristic function through ``F1 = C1 mu``.

    ``source`` is a :class:`GammaForm` (``F1`` from the resolvent of ``U1``) or
    a :class:`MeasureModel` / ``(Gamma, mu)`` pair (``F1`` from the measure).
    """
    if isinstance(source, GammaForm):
        gamma = source.Gamma
        F1 = f1_resolvent(source, z)
    else:
        model = _as_model(source)
        gamma = model.gamma
        F1 = cauchy_transform(model.mu, z, "C1")
    if gamma.shape[0] == 0:
        return np.zeros((0, 0), dtype=complex)
    return _f1_core(gamma, _d_gamma(gamma), F1[None], side)[0]


def _herglotz_from_c2(c2: np.ndarray) -> np.ndarray:
    k = c2.shape[-1]
    I = np.eye(k)
    # (C2 - I) and (C2 + I) commute
    return _batched_solve(c2 + I, c2 - I, SingularBracket, "C2 mu~ + I")


def _herglotz_pole_limit(mu_tilde: OperatorMeasure, z: complex) -> np.ndarray:
    """Boundary value of ``theta`` at an atom of ``mu~``.

    ``(C2 + I)^{-1}`` tends to ``N (N* (R + I) N)^{-1} N*`` where ``R`` is the
    transform without the hit atom and ``N`` spans the kernel of its weight.
    """
    k = mu_tilde.dim
    u = z * np.exp(-1j * mu_tilde.atom_angles)
    hit = np.abs(1.0 - u) < POLE_TOL
    rest = OperatorMeasure(mu_tilde.atom_angles[~hit], mu_tilde.atom_weights[~hit],
                           mu_tilde.ac_samples, dim=k)
    w = mu_tilde.atom_weights[hit].sum(axis=0)
    ev, vecs = np.linalg.eigh(w)
    N = vecs[:, ev <= 1e-12 * max(1.0, ev[-1])]
    R = cauchy_transform(rest, z, "C2")
    core = adjoint(N) @ (R + np.eye(k)) @ N
    inv = N @ guarded_solve(core, adjoint(N), SingularBracket, "boundary Schur complement")
    return np.eye(k) - 2.0 * inv


def theta_herglotz(gamma, mu_tilde: OperatorMeasure, z: complex) -> np.ndarray:
    """``theta = (C2 mu~ - I)(C2 mu~ + I)^{-1}``.

    ``gamma`` is carried only for shape bookkeeping; the formula depends on
    ``mu~`` alone. At an atom of ``mu~`` on the circle the boundary limit is
    returned.
    """
    if mu_tilde.dim == 0:
        return np.zeros((0, 0), dtype=complex)
    try:
        c2 = cauchy_transform(mu_tilde, z, "C2")
    except PoleHit:
        return _herglotz_pole_limit(mu_tilde, z)
    return _herglotz_from_c2(c2[None])[0]


def resolvent_expansion(g: GammaForm, z: complex) -> np.ndarray:
    """Right-hand side of the low-rank expansion of ``(I - z T*)^{-1}``::

        (I - zU*)^{-1}
          + z (I - zU*)^{-1} U* B [I - (Gamma* - I) F1(z)]^{-1} (Gamma* - I) B* (I - zU*)^{-1}
    """
    d, k = g.d, g.k
    Ua = adjoint(g.U1)
    Rz = guarded_solve(np.eye(d) - z * Ua, np.eye(d), SingularResolvent, "I - z U1*")
    F1 = z * adjoint(g.B) @ Rz @ Ua @ g.B
    gm = adjoint(g.Gamma) - np.eye(k)
    inner = guarded_solve(np.eye(k) - gm @ F1, gm @ adjoint(g.B) @ Rz, SingularBracket, "bracket")
    return Rz + z * Rz @ Ua @ g.B @ inner


# ---------------------------------------------------------------------------
# evaluator object
# ---------------------------------------------------------------------------

class ThetaEvaluator:
    """One fixed way of evaluating ``theta``; immutable once built.

    Use the constructors :meth:`defect`, :meth:`f1`, :meth:`herglotz` or
    :meth:`from_model` rather than ``__init__``.
    """

    def __init__(self, method: str, payload, k: int):
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}")
        self.method = method
        self.payload = payload
        self.k = k
        self._split: Optional[CnuSplit] = None
        self._dg = None
        if isinstance(payload, GammaForm):
            self._split = cnu_split(payload)
            self._gamma = payload.Gamma
        elif isinstance(payload, MeasureModel):
            self._gamma = payload.gamma
        else:
            self._gamma = payload[0]
        if method.startswith("f1") and k:
            self._dg = _d_gamma(self._gamma)

    # -- constructors -------------------------------------------------------
    @classmethod
    def defect(cls, g: GammaForm) -> "ThetaEvaluator":
        return cls("defect", g, g.k)

    @classmethod
    def f1(cls, source: F1Source, side: str = "left") -> "ThetaEvaluator":
        if side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        if not isinstance(source, GammaForm):
            source = _as_model(source)
        return cls("f1_" + side, source, source.k)

    @classmethod
    def herglotz(cls, gamma, mu_tilde: OperatorMeasure) -> "ThetaEvaluator":
        gamma = _hermitian_gamma(gamma)
        return cls("herglotz", (gamma, mu_tilde), mu_tilde.dim)

    @classmethod
    def from_model(cls, model: MeasureModel, method: str = "herglotz") -> "ThetaEvaluator":
        """Evaluator for a measure model; ``herglotz`` builds ``mu~`` itself."""
        if method == "herglotz":
            return cls.herglotz(model.gamma, pushforward_beta(model.mu, model.gamma))
        if method in ("f1_left", "f1_right"):
            return cls.f1(model, method[3:])
        raise ValueError(f"method {method!r} needs a GammaForm")

    @classmethod
    def all_for(cls, g: GammaForm) -> dict[str, "ThetaEvaluator"]:
        """The four evaluators of a matrix model, sharing one coordinate choice."""
        from .measure import measure_from_unitary

        mu = measure_from_unitary(g.U1, g.B)
        return {
            "defect": cls.defect(g),
            "f1_left": cls.f1(g, "left"),
            "f1_right": cls.f1(g, "right"),
            "herglotz": cls.herglotz(g.Gamma, pushforward_beta(mu, g.Gamma)),
        }

    # -- evaluation ----------------------------------------------------------
    @property
    def gamma(self) -> np.ndarray:
        return self._gamma

    @property
    def split(self) -> Optional[CnuSplit]:
        return self._split

    def __repr__(self):
        return f"ThetaEvaluator(method={self.method!r}, k={self.k})"

    def __call__(self, z: complex) -> np.ndarray:
        if self.k == 0:
            return np.zeros((0, 0), dtype=complex)
        if self.method == "defect":
            return theta_defect(self.payload, z, self._split)
        if self.method == "herglotz":
            return theta_herglotz(*self.payload, z)
        return theta_f1(self.payload, z, self.method[3:])

    def many(self, zs) -> np.ndarray:
        zs = np.asarray(zs, dtype=complex).reshape(-1)
        if self.k == 0:
            return np.zeros((zs.size, 0, 0), dtype=complex)
        if self.method == "defect":
            return self._defect_many(zs)
        return np.array([self(z) for z in zs])

    def on_grid(self, G: int, r: float) -> np.ndarray:
        """``theta(r xi_j)`` for ``xi_j = exp(2 pi i j / G)``; shape ``(G, k, k)``."""
        if self.k == 0:
            return np.zeros((G, 0, 0), dtype=complex)
        zs = r * np.exp(1j * grid_angles(G))
        if self.method == "defect":
            return self._defect_many(zs)
        if self.method == "herglotz":
            mu_t = self.payload[1]
            try:
                c2 = cauchy_transform_grid(mu_t, G, r, "C2")
            except PoleHit:
                return np.array([self(z) for z in zs])
            return _herglotz_from_c2(c2)
        side = self.method[3:]
        if isinstance(self.payload, GammaForm):
            F1 = _f1_resolvent_many(self.payload, zs)
        else:
            F1 = cauchy_transform_grid(self.payload.mu, G, r, "C1")
        return _f1_core(self._gamma, self._dg, F1, side)

    def _defect_many(self, zs: np.ndarray) -> np.ndarray:
        g = self.payload
        T = assemble_T(g)
        dt, dts = defect_operators(g)
        b0 = self._split.basis0
        T0 = adjoint(b0) @ T @ b0
        left = adjoint(g.B) @ dts @ b0
        right = adjoint(b0) @ dt @ adjoint(g.U1) @ g.B
        n = T0.shape[0]
        A = np.eye(n)[None] - zs[:, None, None] * adjoint(T0)[None]
        x = _batched_solve(A, np.broadcast_to(right, (zs.size, n, g.k)), SingularResolvent, "I - z T*")
        return -g.Gamma[None] + zs[:, None, None] * (left[None] @ x)

    def default_radius(self) -> float:
        """Radius for boundary sampling.

        Matrix models: 1 when the c.n.u. part has spectral radius below
        ``1 - 1e-8`` (theta is rational and analytic across the circle),
        otherwise ``1 - 1e-6``. Measure models: 1, since atoms have closed-form
        kernels and the sampled density a finite power series.
        """
        if self._split is not None:
            return 1.0 if self._split.spectral_radius < 1.0 - STABLE_MARGIN else FALLBACK_RADIUS
        return 1.0


# ---------------------------------------------------------------------------
# boundary profile
# ---------------------------------------------------------------------------

def stack_ranks(stack: np.ndarray, tol: RankTolerance = DEFAULT_RANK_TOL) -> np.ndarray:
    """Numerical rank of every matrix in a ``(n, k, k)`` stack."""
    if stack.shape[-1] == 0 or stack.shape[-2] == 0:
        return np.zeros(stack.shape[0], dtype=int)
    s = np.linalg.svd(stack, compute_uv=False)
    cutoff = np.maximum(tol.relative * s[:, :1], tol.absolute_floor)
    return np.count_nonzero(s > cutoff, axis=1)


def _defect_stack(sq: np.ndarray, clamp: float) -> tuple[np.ndarray, np.ndarray]:
    """Clamp a stack of Hermitian near-psd matrices and take square roots."""
    if sq.shape[-1] == 0:
        return sq.copy(), sq.copy()
    herm = 0.5 * (sq + adjoint(sq))
    ev, vec = np.linalg.eigh(herm)
    if np.any(ev < -clamp):
        j = int(np.argmin(ev[:, 0]))
        from .errors import NotPsd
        raise NotPsd(f"I - theta* theta has eigenvalue {ev[j, 0]:.3e} at sample {j}")
    ev = np.clip(ev, 0.0, None)
    vh = adjoint(vec)
    clamped = (vec * ev[:, None, :]) @ vh
    root = (vec * np.sqrt(ev)[:, None, :]) @ vh
    return clamped, root


@dataclass(frozen=True, eq=False)
class BoundaryProfile:
    """Boundary samples of ``theta`` and its defect functions.

    ``defect_sq``/``defect_star_sq`` hold the clamped ``I - theta* theta`` and
    ``I - theta theta*``; ranks are read off these squares, since taking the
    square root first would lift 1e-16 roundoff to 1e-8 singular values.
    """

    grid: int
    radius: float
    angles: np.ndarray
    theta: np.ndarray
    delta: np.ndarray
    delta_star: np.ndarray
    defect_sq: np.ndarray
    defect_star_sq: np.ndarray
    rank_delta: np.ndarray
    rank_delta_star: np.ndarray
    n_u: Optional[np.ndarray] = None

    @property
    def k(self) -> int:
        return self.theta.shape[-1]

    def theta_singular_values(self) -> np.ndarray:
        if self.k == 0:
            return np.zeros((self.grid, 0))
        return np.linalg.svd(self.theta, compute_uv=False)


def boundary_profile(evaluator: ThetaEvaluator, grid: int = 1024, radius: Optional[float] = None,
                     measure: Optional[OperatorMeasure] = None,
                     tol: RankTolerance = DEFAULT_RANK_TOL) -> BoundaryProfile:
    """Sample ``theta`` at ``radius * exp(2 pi i j / grid)`` and derive ``Delta``, ``Delta_*``.

    ``measure`` (the untransformed spectral measure ``mu``) fills ``n_u`` with
    the rank of its a.c. density at each angle.
    """
    r = evaluator.default_radius() if radius is None else float(radius)
    th = evaluator.on_grid(grid, r)
    k = evaluator.k
    I = np.eye(k)
    th_h = adjoint(th)
    dsq, delta = _defect_stack(I - th_h @ th, BOUNDARY_CLAMP)
    dssq, delta_s = _defect_stack(I - th @ th_h, BOUNDARY_CLAMP)
    n_u = None
    if measure is not None:
        n_u = stack_ranks(measure.density_on_grid(grid), tol)
    return BoundaryProfile(
        grid=grid,
        radius=r,
        angles=grid_angles(grid),
        theta=th,
        delta=delta,
        delta_star=delta_s,
        defect_sq=dsq,
        defect_star_sq=dssq,
        rank_delta=stack_ranks(dsq, tol),
        rank_delta_star=stack_ranks(dssq, tol),
        n_u=n_u,
    )
