"""Executable checks of the structural results, plus seeded random instances.

Every ``check_*`` function returns a :class:`VerificationReport`. A report
passes iff its ``worst_residual`` is at most its ``tolerance``; checks that
cannot be decided numerically are marked ``inconclusive`` and do not pass.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import BadShape, PoleHit
from .linalg import (
    DEFAULT_RANK_TOL,
    RankTolerance,
    adjoint,
    opnorm,
    spectral_radius,
    unitary_polar,
    woodbury_inverse,
)
from .measure import (
    MeasureModel,
    OperatorMeasure,
    beta_matrix,
    cauchy_transform,
    cauchy_transform_grid,
    cauchy_transform_many,
    grid_angles,
    measure_from_unitary,
    pushforward_beta,
)
from .perturbation import GammaForm, assemble_T, cnu_split, reduce_to_gamma_form
from .theta import (
    STABLE_MARGIN,
    ThetaEvaluator,
    boundary_profile,
    f1_resolvent,
    resolvent_expansion,
)

__all__ = [
    "VerificationReport",
    "random_unitary",
    "random_isometry",
    "random_instance",
    "random_contraction_pair",
    "matrix_case",
    "stable_ensemble",
    "interior_points",
    "canonical_model",
    "CANONICAL_MODELS",
    "smallest_decay_power",
    "check_theorem_main",
    "check_two_sided_inner",
    "check_asymptotic_stability",
    "check_stability_innerness",
    "check_delta_identities",
    "delta_identity_convergence",
    "check_inverse_identity",
    "check_f1_identity",
    "check_cross_formula",
    "check_scalar_closed_form",
    "check_woodbury",
    "check_polar",
    "check_reconstruction",
    "check_orthogonality_preservation",
    "check_resolvent_expansion",
]

Model = Union[GammaForm, MeasureModel]


@dataclass
class VerificationReport:
    check_name: str
    passed: bool
    worst_residual: float
    tolerance: float
    sample_count: int
    details: list = field(default_factory=list)
    status: str = ""
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.status:
            self.status = "pass" if self.passed else "fail"

    @classmethod
    def from_residuals(cls, name: str, locations, residuals, tolerance: float, **info):
        res = np.asarray(residuals, dtype=float).reshape(-1)
        worst = float(np.max(res)) if res.size else 0.0
        details = [(_loc(l), float(r)) for l, r in zip(locations, res)]
        return cls(name, bool(worst <= tolerance), worst, tolerance, int(res.size), details, info=info)

    @classmethod
    def inconclusive(cls, name: str, tolerance: float, reason: str, **info):
        info["reason"] = reason
        return cls(name, False, float("nan"), tolerance, 0, [], status="inconclusive", info=info)

    def line(self) -> str:
        out = (f"{self.check_name:<34s} n={self.sample_count:<6d} "
               f"worst={self.worst_residual:.3e} tol={self.tolerance:.1e} {self.status.upper()}")
        if self.info.get("inconclusive"):
            out += f" ({self.info['inconclusive']} inconclusive)"
        return out

    def to_dict(self) -> dict:
        return {
            "check_name": self.check_name,
            "passed": self.passed,
            "status": self.status,
            "worst_residual": _jsonable(self.worst_residual),
            "tolerance": self.tolerance,
            "sample_count": self.sample_count,
            "details": [[_jsonable(l), _jsonable(r)] for l, r in self.details],
            "info": {k: _jsonable(v) for k, v in self.info.items()},
        }


def _loc(l):
    if isinstance(l, (complex, np.complexfloating)):
        return complex(l)
    return float(l) if np.isscalar(l) else l


def _jsonable(v):
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (np.floating, float)):
        return None if not np.isfinite(v) else float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _merge(name: str, reports: Sequence[VerificationReport], **info) -> VerificationReport:
    """Combine per-instance reports into one; inconclusive members are skipped."""
    decided = [r for r in reports if r.status != "inconclusive"]
    worst = max((r.worst_residual for r in decided), default=0.0)
    tol = reports[0].tolerance if reports else 0.0
    passed = all(r.passed for r in decided)
    info.setdefault("instances", len(reports))
    info.setdefault("inconclusive", len(reports) - len(decided))
    return VerificationReport(name, passed, worst, tol, sum(r.sample_count for r in decided), [], info=info)


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------

def _complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_unitary(rng, n: int) -> np.ndarray:
    """Haar unitary: QR of a complex Gaussian with the phases of ``diag(R)`` removed."""
    q, r = np.linalg.qr(_complex_gaussian(rng, (n, n)))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_isometry(rng, n: int, k: int) -> np.ndarray:
    return random_unitary(rng, n)[:, :k]


def _random_gamma(rng, k: int, top: float = 0.95) -> np.ndarray:
    Q = random_unitary(rng, k)
    lam = rng.uniform(0.0, top, size=k)
    G = (Q * lam) @ adjoint(Q)
    return 0.5 * (G + adjoint(G))


def _random_measure_model(rng, n_atoms: int, k: int, M: int = 256, degree: int = 2) -> MeasureModel:
    A = _complex_gaussian(rng, (degree + 1, k, k))
    angles = rng.uniform(0.0, 2.0 * np.pi, size=n_atoms)
    vecs = _complex_gaussian(rng, (n_atoms, k, 1))
    masses = rng.uniform(0.1, 1.0, size=n_atoms)
    atoms = masses[:, None, None] * (vecs @ adjoint(vecs)) / np.sum(np.abs(vecs) ** 2, axis=(1, 2))[:, None, None]
    total = np.einsum("nij,nkj->ik", A, np.conj(A)) + atoms.sum(axis=0)
    ev, vec = np.linalg.eigh(0.5 * (total + adjoint(total)))
    S = (vec / np.sqrt(ev)) @ adjoint(vec)  # total^{-1/2}
    deg = np.arange(degree + 1)

    def density(theta):
        ph = np.exp(1j * np.outer(np.asarray(theta, dtype=float), deg))
        P = np.tensordot(ph, A, axes=(1, 0))
        D = P @ adjoint(P)
        return S @ D @ S

    mu = OperatorMeasure.from_density(density, M, angles, S @ atoms @ S)
    return MeasureModel(gamma=_random_gamma(rng, k), mu=mu, density=density, name="random")


def random_instance(seed: int, d: int, k: int, mode: str = "matrix"):
    """Deterministic random model.

    ``matrix`` mode returns a :class:`GammaForm` with Haar ``U1``, random
    isometry ``B`` and ``Gamma`` with eigenvalues uniform in ``[0, 0.95]``.
    ``measure`` mode returns a :class:`MeasureModel` with ``k x k`` weights,
    ``d`` random rank-one atoms and the density ``P P*`` of a random
    degree-2 matrix polynomial ``P``, congruence-normalised to total mass ``I``.
    """
    if not (1 <= k <= d <= 16):
        raise BadShape(f"need 1 <= k <= d <= 16, got d={d}, k={k}")
    rng = np.random.default_rng([seed, d, k])
    if mode == "matrix":
        return GammaForm(U1=random_unitary(rng, d), B=random_isometry(rng, d, k), Gamma=_random_gamma(rng, k))
    if mode == "measure":
        return _random_measure_model(rng, d, k)
    raise ValueError(f"mode must be 'matrix' or 'measure', got {mode!r}")


def random_contraction_pair(seed: int, d: int, k: int, saturate: bool = False):
    """``(U, K)`` with ``U`` Haar unitary, ``rank K <= k`` and ``||U + K|| <= 1``.

    ``U + K = (I - BB* + B C B*) U`` for a random non-Hermitian contraction
    ``C``; with ``saturate`` one singular value of ``C`` is exactly 1.
    """
    rng = np.random.default_rng([seed, d, k, 7])
    U = random_unitary(rng, d)
    B = random_isometry(rng, d, k)
    W, s, Vh = np.linalg.svd(_complex_gaussian(rng, (k, k)))
    s = rng.uniform(0.0, 1.0, size=k)
    if saturate:
        s[0] = 1.0
    C = (W * s) @ Vh
    T = (np.eye(d) - B @ adjoint(B) + B @ C @ adjoint(B)) @ U
    return U, T - U


def matrix_case(seed: int) -> tuple[int, int]:
    """Dimension and defect rank used for ensemble member ``seed`` (d <= 8)."""
    d = 1 + seed % 8
    k = 1 + (seed // 8) % d
    return d, k


def stable_ensemble(n: int, start: int = 0):
    """First ``n`` matrix instances whose c.n.u. part has ``rho < 1 - 1e-8``."""
    out = []
    seed = start
    while len(out) < n:
        d, k = matrix_case(seed)
        g = random_instance(seed, d, k, "matrix")
        if cnu_split(g).spectral_radius < 1.0 - STABLE_MARGIN:
            out.append((seed, g))
        seed += 1
    return out


def interior_points(seed: int, n: int = 25, rmax: float = 0.95) -> np.ndarray:
    rng = np.random.default_rng([seed, 404])
    r = rmax * np.sqrt(rng.uniform(0.0, 1.0, size=n))
    return r * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, size=n))


# ---------------------------------------------------------------------------
# canonical measure models
# ---------------------------------------------------------------------------

ATOM_TURN = 0.3


def _poisson_kernel(theta, a):
    return (1.0 - a * a) / np.abs(1.0 - a * np.exp(1j * np.asarray(theta, dtype=float))) ** 2


def canonical_model(name: str, M: int = 2 ** 16) -> MeasureModel:
    """Closed-form measure models.

    ``lebesgue``
        Scalar Lebesgue measure, ``gamma = 0.5``; ``theta == -0.5``.
    ``atom``
        Unit atom at angle 0, ``gamma = 0.5``; ``theta`` is the Blaschke factor
        ``(z - 0.5)/(1 - 0.5 z)``.
    ``rank_one_ac``
        ``2 x 2``: density ``diag(1, 0)`` plus an atom ``diag(0, 1)`` at 0.3
        turns; ``Gamma = diag(0.5, 0.3)``.
    ``mixed``
        ``2 x 2``: smooth density ``a P_{1/2} v1 v1* + b (1 + cos) v2 v2*``
        (``P_{1/2}`` a Poisson kernel) plus one rank-one atom at 0.3 turns,
        congruence-normalised to total mass ``I``.
    """
    atom_angle = 2.0 * np.pi * ATOM_TURN
    if name == "lebesgue":
        dens = lambda th: np.ones((np.size(th), 1, 1), dtype=complex)
        mu = OperatorMeasure.from_density(dens, M)
        return MeasureModel(np.array([[0.5]], dtype=complex), mu, dens, name)
    if name == "atom":
        mu = OperatorMeasure.from_atoms([0.0], [[[1.0]]])
        return MeasureModel(np.array([[0.5]], dtype=complex), mu, None, name)
    if name == "rank_one_ac":
        W = np.diag([1.0, 0.0]).astype(complex)
        dens = lambda th: np.broadcast_to(W, (np.size(th), 2, 2)).copy()
        mu = OperatorMeasure.from_density(dens, M, [atom_angle], [np.diag([0.0, 1.0])])
        return MeasureModel(np.diag([0.5, 0.3]).astype(complex), mu, dens, name)
    if name == "mixed":
        v1 = np.array([1.0, 0.0], dtype=complex)
        v2 = np.array([0.6, 0.8j], dtype=complex)
        v3 = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)
        P1, P2, P3 = (np.outer(v, np.conj(v)) for v in (v1, v2, v3))
        a, b, c = 0.5, 0.3, 0.4
        total = a * P1 + b * P2 + c * P3  # each density term integrates to its weight
        ev, vec = np.linalg.eigh(total)
        S = (vec / np.sqrt(ev)) @ adjoint(vec)

        def dens(th):
            th = np.asarray(th, dtype=float).reshape(-1)
            raw = (a * _poisson_kernel(th, 0.5)[:, None, None] * P1
                   + b * (1.0 + np.cos(th))[:, None, None] * P2)
            return S @ raw @ S

        mu = OperatorMeasure.from_density(dens, M, [atom_angle], [c * S @ P3 @ S])
        gamma = np.array([[0.4, 0.1], [0.1, 0.2]], dtype=complex)
        return MeasureModel(gamma, mu, dens, name)
    raise ValueError(f"unknown canonical model {name!r}")


CANONICAL_MODELS = ("lebesgue", "rank_one_ac", "mixed")


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------

def _evaluator(model: Model) -> ThetaEvaluator:
    if isinstance(model, GammaForm):
        return ThetaEvaluator.defect(model)
    return ThetaEvaluator.from_model(model)


def check_theorem_main(model: Model, grid: int = 1024, radius: Optional[float] = None,
                       tol: RankTolerance = DEFAULT_RANK_TOL, min_fraction: float = 0.99) -> VerificationReport:
    """``rank Delta = rank Delta_* = rank(W w)`` on the boundary grid.

    For a :class:`GammaForm` the spectral measure is atomic, so ``rank(W w)``
    is 0 everywhere. Passes when at least ``min_fraction`` of the points agree;
    ``worst_residual`` is the disagreeing fraction.
    """
    ev = _evaluator(model)
    measure = model.mu if isinstance(model, MeasureModel) else None
    prof = boundary_profile(ev, grid, radius, measure=measure, tol=tol)
    n_u = prof.n_u if prof.n_u is not None else np.zeros(grid, dtype=int)
    agree = (prof.rank_delta == prof.rank_delta_star) & (prof.rank_delta == n_u)
    frac_bad = 1.0 - float(np.mean(agree)) if grid else 0.0
    details = [(float(prof.angles[j]), float(max(abs(prof.rank_delta[j] - n_u[j]),
                                                  abs(prof.rank_delta_star[j] - n_u[j]))))
               for j in np.flatnonzero(~agree)]
    hist = {}
    for triple in zip(prof.rank_delta.tolist(), prof.rank_delta_star.tolist(), n_u.tolist()):
        key = "%d/%d/%d" % triple
        hist[key] = hist.get(key, 0) + 1
    return VerificationReport("theorem_rank_identity", frac_bad <= 1.0 - min_fraction, frac_bad,
                              1.0 - min_fraction, grid, details,
                              info={"radius": prof.radius, "agree_fraction": 1.0 - frac_bad,
                                    "rank_triples": hist})


def _unitarity_residuals(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = theta.shape[-1]
    if k == 0:
        z = np.zeros(theta.shape[0])
        return z, z
    I = np.eye(k)
    th_h = adjoint(theta)
    inner = np.linalg.norm(th_h @ theta - I, ord=2, axis=(1, 2))
    coinner = np.linalg.norm(theta @ th_h - I, ord=2, axis=(1, 2))
    return inner, coinner


def check_two_sided_inner(g: GammaForm, grid: int = 512, tol: float = 1e-8) -> VerificationReport:
    """Boundary values of ``theta`` are unitary (evaluated exactly at ``r = 1``)."""
    name = "two_sided_inner"
    if g.k == 0:
        return VerificationReport(name, True, 0.0, tol, 0, info={"vacuous": True})
    ev = ThetaEvaluator.defect(g)
    rho = ev.split.spectral_radius
    if rho >= 1.0 - STABLE_MARGIN:
        return VerificationReport.inconclusive(name, tol, "c.n.u. spectral radius too close to 1", rho=rho)
    th = ev.on_grid(grid, 1.0)
    inner, coinner = _unitarity_residuals(th)
    return VerificationReport.from_residuals(name, grid_angles(grid), np.maximum(inner, coinner), tol,
                                             rho=rho, inner=float(inner.max()), coinner=float(coinner.max()))


def smallest_decay_power(T: np.ndarray, threshold: float = 1e-8, n_max: int = 10_000) -> Optional[int]:
    """Smallest ``n`` with ``||T^n|| <= threshold`` (``None`` if above ``n_max``).

    Relies on ``||T^n||`` being non-increasing, true for contractions: square
    until the threshold is crossed, then rebuild the crossing point bit by bit.
    """
    T = np.asarray(T, dtype=complex)
    if opnorm(np.eye(T.shape[0])) <= threshold:
        return 0
    pows = [T]
    while opnorm(pows[-1]) > threshold:
        if 2 ** (len(pows) - 1) >= n_max:
            return None
        pows.append(pows[-1] @ pows[-1])
    m = len(pows) - 1
    cur = np.eye(T.shape[0], dtype=complex)
    n = 0
    for j in reversed(range(m)):
        cand = cur @ pows[j]
        if opnorm(cand) > threshold:
            cur = cand
            n += 2 ** j
    n += 1
    return n if n <= n_max else None


def check_asymptotic_stability(T0, threshold: float = 1e-8, n_max: int = 10_000) -> VerificationReport:
    """``||T0^n|| -> 0`` and ``||(T0*)^n|| -> 0`` detected within ``n_max`` steps.

    ``worst_residual`` is ``max(||T0^{n_max}||, ||(T0*)^{n_max}||)``, which is at
    most ``threshold`` exactly when both decay powers exist. A miss with
    spectral radius below 1 is reported ``inconclusive``: decay is certain but
    slower than the horizon.
    """
    T0 = np.asarray(T0, dtype=complex)
    n = smallest_decay_power(T0, threshold, n_max)
    n_star = smallest_decay_power(adjoint(T0), threshold, n_max)
    worst = 0.0 if T0.size == 0 else max(opnorm(np.linalg.matrix_power(T0, n_max)),
                                         opnorm(np.linalg.matrix_power(adjoint(T0), n_max)))
    info = {"n": n, "n_star": n_star, "rho": spectral_radius(T0)}
    if n is None or n_star is None:
        # a finite-dimensional contraction decays iff rho < 1; missing the horizon is undecided
        return VerificationReport("asymptotic_stability", False, worst, threshold, 2,
                                  status="inconclusive" if info["rho"] < 1.0 else "fail", info=info)
    return VerificationReport("asymptotic_stability", True, min(worst, threshold), threshold, 2, info=info)


def check_stability_innerness(g: GammaForm, grid: int = 512, inner_tol: float = 1e-8,
                              threshold: float = 1e-8, n_max: int = 10_000) -> VerificationReport:
    """Compare decay of ``T0``/``T0*`` with co-innerness/innerness of ``theta``.

    ``T0^n -> 0`` must coincide with ``theta`` co-inner and ``(T0*)^n -> 0`` with
    ``theta`` inner. ``worst_residual`` counts disagreements (tolerance 0).
    The finite-dimensional consistency ``stable => N_U == 0`` on the grid is
    recorded as well (``mu`` is atomic, so ``N_U`` vanishes). Disagreements
    caused only by decay slower than ``n_max`` steps (``rho(T0) < 1`` but no
    decay power found) set ``horizon_limited`` and make the report
    ``inconclusive``; ``worst_residual`` still counts them.
    """
    name = "stability_innerness"
    split = cnu_split(g)
    rho = split.spectral_radius
    if g.k and rho >= 1.0 - STABLE_MARGIN:
        return VerificationReport.inconclusive(name, 0.0, "c.n.u. spectral radius too close to 1", rho=rho)
    n = smallest_decay_power(split.T0, threshold, n_max)
    n_star = smallest_decay_power(adjoint(split.T0), threshold, n_max)
    th = ThetaEvaluator.defect(g).on_grid(grid, 1.0)
    inner_res, coinner_res = _unitarity_residuals(th)
    inner = bool(np.max(inner_res, initial=0.0) <= inner_tol)
    coinner = bool(np.max(coinner_res, initial=0.0) <= inner_tol)
    stable, stable_star = n is not None, n_star is not None
    disagreements = int(stable != coinner) + int(stable_star != inner)
    n_u_zero = True  # atomic spectral measure
    disagreements += int(stable and not n_u_zero)
    horizon_limited = disagreements > 0 and not (stable and stable_star) and rho < 1.0
    return VerificationReport(name, disagreements == 0, float(disagreements), 0.0, 1,
                              status="inconclusive" if horizon_limited else "",
                              info={"n": n, "n_star": n_star, "horizon_limited": horizon_limited, "inner": inner, "coinner": coinner,
                                    "rho": rho, "inner_residual": float(np.max(inner_res, initial=0.0)),
                                    "coinner_residual": float(np.max(coinner_res, initial=0.0))})


def _tilde_density(model: MeasureModel, G: int) -> np.ndarray:
    beta = beta_matrix(model.gamma)
    if model.density is not None:
        dens = np.asarray(model.density(grid_angles(G)), dtype=complex)
    else:
        dens = model.mu.density_on_grid(G)
    return beta @ dens @ beta


def check_delta_identities(model: MeasureModel, grid: int = 1024, radius: Optional[float] = None,
                           gate: float = 0.1, tol: float = 1e-6) -> VerificationReport:
    """Defect identities against the a.c. density ``W w`` of ``mu~``::

        Delta^2   = (I - theta*) W w (I - theta)
        Delta_*^2 = (I - theta) W w (I - theta*)

    ``W w`` is the model's exact density when available (otherwise its
    samples), conjugated by ``beta``; only angles with ``tr(W w) >= gate``
    are scored.
    """
    ev = ThetaEvaluator.from_model(model)
    r = ev.default_radius() if radius is None else radius
    th = ev.on_grid(grid, r)
    k = model.k
    I = np.eye(k)
    Ww = _tilde_density(model, grid)
    sel = np.real(np.trace(Ww, axis1=1, axis2=2)) >= gate
    th, Ww = th[sel], Ww[sel]
    th_h = adjoint(th)
    lhs1 = I - th_h @ th
    rhs1 = (I - th_h) @ Ww @ (I - th)
    lhs2 = I - th @ th_h
    rhs2 = (I - th) @ Ww @ (I - th_h)
    res = np.maximum(np.linalg.norm(lhs1 - rhs1, ord=2, axis=(1, 2)),
                     np.linalg.norm(lhs2 - rhs2, ord=2, axis=(1, 2))) if sel.any() else np.zeros(0)
    return VerificationReport.from_residuals("delta_identities", grid_angles(grid)[sel], res, tol,
                                             radius=r, scored_points=int(sel.sum()), M=model.mu.M)


def delta_identity_convergence(name: str, Ms: Sequence[int], grid: int = 1024) -> list[float]:
    """Worst defect-identity residual of a canonical model as the sample grid is refined."""
    return [check_delta_identities(canonical_model(name, M), grid).worst_residual for M in Ms]


def _theta_safe(ev: ThetaEvaluator, zs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    out = np.full((zs.size, ev.k, ev.k), np.nan, dtype=complex)
    ok = np.ones(zs.size, dtype=bool)
    for i, z in enumerate(zs):
        try:
            out[i] = ev(z)
        except PoleHit:
            ok[i] = False
    return out, ok


def _c2_safe(mu: OperatorMeasure, zs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    out = np.full((zs.size, mu.dim, mu.dim), np.nan, dtype=complex)
    ok = np.ones(zs.size, dtype=bool)
    for i, z in enumerate(zs):
        try:
            out[i] = cauchy_transform(mu, z, "C2")
        except PoleHit:
            ok[i] = False
    return out, ok


def check_inverse_identity(model: Model, points=None, grid: int = 1024, radius: Optional[float] = None,
                           interior_tol: float = 1e-8, boundary_tol: float = 1e-6) -> VerificationReport:
    """``(I - theta)^{-1} = (C2 mu~ + I) / 2`` inside the disc and on the boundary grid.

    ``theta`` comes from an independent route (the defect formula for matrix
    models, the ``F1`` formula for measure models) so the check is not a
    rearrangement of the Herglotz formula. Points on atoms are skipped.
    """
    if isinstance(model, GammaForm):
        ev = ThetaEvaluator.defect(model)
        mu = measure_from_unitary(model.U1, model.B)
        gamma = model.Gamma
    else:
        ev = ThetaEvaluator.f1(model, "left")
        mu, gamma = model.mu, model.gamma
    k = ev.k
    if k == 0:
        return VerificationReport("inverse_identity", True, 0.0, interior_tol, 0, info={"vacuous": True})
    mu_t = pushforward_beta(mu, gamma)
    I = np.eye(k)
    zs = interior_points(0) if points is None else np.asarray(points, dtype=complex).reshape(-1)
    r = (ThetaEvaluator.defect(model).default_radius() if isinstance(model, GammaForm) else 1.0) \
        if radius is None else radius
    zb = r * np.exp(1j * grid_angles(grid))

    def values(z, on_grid):
        try:
            if on_grid:
                th, c2 = ev.on_grid(grid, r), cauchy_transform_grid(mu_t, grid, r, "C2")
            else:
                th, c2 = ev.many(z), cauchy_transform_many(mu_t, z, "C2")
            return th, c2, np.ones(z.size, dtype=bool)
        except PoleHit:
            th, ok1 = _theta_safe(ev, z)
            c2, ok2 = _c2_safe(mu_t, z)
            return th, c2, ok1 & ok2

    def residuals(z, on_grid=False):
        th, c2, ok = values(z, on_grid)
        X = 0.5 * (c2[ok] + I)
        A = I - th[ok]
        res = np.maximum(np.linalg.norm(A @ X - I, ord=2, axis=(1, 2)),
                         np.linalg.norm(X @ A - I, ord=2, axis=(1, 2)))
        return z[ok], res, int((~ok).sum())

    zi, ri, _ = residuals(zs)
    zbb, rb, skipped = residuals(zb, on_grid=True)
    worst_i = float(ri.max(initial=0.0))
    worst_b = float(rb.max(initial=0.0))
    passed = worst_i <= interior_tol and worst_b <= boundary_tol
    # report the worst residual relative to its own tolerance, scaled to the interior one
    worst = max(worst_i, worst_b * interior_tol / boundary_tol)
    beta = beta_matrix(gamma)
    details = [(complex(z), float(v)) for z, v in zip(zi, ri)]
    return VerificationReport("inverse_identity", passed, worst, interior_tol, ri.size + rb.size, details,
                              info={"interior_worst": worst_i, "boundary_worst": worst_b,
                                    "boundary_radius": r, "boundary_skipped": skipped,
                                    "cauchy_offset": opnorm(0.5 * (I - beta @ beta))})


def check_f1_identity(g: GammaForm, points=None, tol: float = 1e-10) -> VerificationReport:
    """``z B* (I - z U1*)^{-1} U1* B`` against ``C1 mu(z)`` with ``mu`` the spectral measure."""
    zs = interior_points(1) if points is None else np.asarray(points, dtype=complex).reshape(-1)
    mu = measure_from_unitary(g.U1, g.B)
    res = [opnorm(f1_resolvent(g, z) - cauchy_transform(mu, z, "C1")) for z in zs]
    return VerificationReport.from_residuals("f1_identity", zs, res, tol)


def check_cross_formula(model: Model, points=None, tol: float = 1e-8) -> VerificationReport:
    """Maximum pairwise deviation among the available ``theta`` evaluators."""
    zs = interior_points(2) if points is None else np.asarray(points, dtype=complex).reshape(-1)
    if isinstance(model, GammaForm):
        evs = ThetaEvaluator.all_for(model)
    else:
        evs = {m: ThetaEvaluator.from_model(model, m) for m in ("f1_left", "f1_right", "herglotz")}
    vals = {m: e.many(zs) for m, e in evs.items()}
    names = list(vals)
    res = np.zeros(zs.size)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if vals[a].shape[-1]:
                res = np.maximum(res, np.linalg.norm(vals[a] - vals[b], ord=2, axis=(1, 2)))
    return VerificationReport.from_residuals("cross_formula", zs, res, tol, methods=names)


def check_scalar_closed_form(gammas=(0.1, 0.5, 0.9), n_points: int = 100, tol: float = 1e-12) -> VerificationReport:
    """All evaluators of ``U = [1]``, ``K = [gamma - 1]`` against ``(z - gamma)/(1 - gamma z)``."""
    zs = interior_points(3, n_points)
    res_all, locs = [], []
    for gam in gammas:
        g = reduce_to_gamma_form(np.eye(1), np.array([[gam - 1.0]]))
        exact = (zs - gam) / (1.0 - gam * zs)
        for ev in ThetaEvaluator.all_for(g).values():
            vals = ev.many(zs)[:, 0, 0]
            res_all.extend(np.abs(vals - exact))
            locs.extend(zs)
    return VerificationReport.from_residuals("scalar_closed_form", locs, res_all, tol)


def check_woodbury(seeds: Sequence[int], n: int = 6, k: int = 2, tol: float = 1e-10) -> VerificationReport:
    """``woodbury_inverse(P, Q) (I - P Q*) = I`` on random pairs with a well-conditioned core."""
    res = []
    for s in seeds:
        rng = np.random.default_rng([s, 31])
        P = _complex_gaussian(rng, (n, k)) * 0.4
        Q = _complex_gaussian(rng, (n, k)) * 0.4
        W = woodbury_inverse(P, Q)
        A = np.eye(n) - P @ adjoint(Q)
        res.append(max(opnorm(W @ A - np.eye(n)), opnorm(A @ W - np.eye(n))))
    return VerificationReport.from_residuals("woodbury", list(seeds), res, tol)


def check_polar(seeds: Sequence[int], n: int = 6, tol: float = 1e-10) -> VerificationReport:
    """Unitary polar factor of random (often rank-deficient) matrices."""
    res = []
    for s in seeds:
        rng = np.random.default_rng([s, 37])
        R = _complex_gaussian(rng, (n, n))
        W, sv, Vh = np.linalg.svd(R)
        sv[rng.uniform(size=n) < 0.3] = 0.0
        R = (W * sv) @ Vh
        V, P = unitary_polar(R)
        scale = max(1.0, opnorm(R))
        res.append(max(opnorm(adjoint(V) @ V - np.eye(n)), opnorm(R - V @ P) / scale))
    return VerificationReport.from_residuals("polar_decomposition", list(seeds), res, tol)


def check_reconstruction(seeds: Sequence[int], tol: float = 1e-10) -> VerificationReport:
    """``assemble_T(reduce_to_gamma_form(U, K)) == U + K`` on random contractions."""
    res = []
    for s in seeds:
        d, k = matrix_case(s)
        U, K = random_contraction_pair(s, d, k, saturate=(s % 3 == 0))
        g = reduce_to_gamma_form(U, K)
        res.append(opnorm(assemble_T(g) - (U + K)) / max(1.0, opnorm(K)))
    return VerificationReport.from_residuals("gamma_form_reconstruction", list(seeds), res, tol)


def check_orthogonality_preservation(seeds: Sequence[int], d: int = 6, tol: float = 1e-10) -> VerificationReport:
    """``||Tx|| = ||x||`` and ``y`` orthogonal to ``x`` imply ``Ty`` orthogonal to ``Tx``.

    ``T`` is a random contraction with a unit singular value; ``x`` is built
    in the corresponding right singular subspace.
    """
    res = []
    for s in seeds:
        rng = np.random.default_rng([s, 41])
        W = random_unitary(rng, d)
        V = random_unitary(rng, d)
        n_one = 1 + int(rng.integers(0, 2))
        sv = np.concatenate([np.ones(n_one), rng.uniform(0.0, 0.99, size=d - n_one)])
        T = (W * sv) @ adjoint(V)
        x = V[:, :n_one] @ _complex_gaussian(rng, n_one)
        y = _complex_gaussian(rng, d)
        y -= x * (np.vdot(x, y) / np.vdot(x, x))
        res.append(abs(np.vdot(T @ x, T @ y)) / (np.linalg.norm(x) * np.linalg.norm(y)))
    return VerificationReport.from_residuals("orthogonality_preservation", list(seeds), res, tol)


def check_resolvent_expansion(seeds: Sequence[int], tol: float = 1e-9) -> VerificationReport:
    """Low-rank expansion of ``(I - z T*)^{-1}`` against direct inversion."""
    res, locs = [], []
    for s in seeds:
        d, k = matrix_case(s)
        g = random_instance(s, d, k, "matrix")
        T = assemble_T(g)
        for z in interior_points(s, 5):
            direct = np.linalg.inv(np.eye(d) - z * adjoint(T))
            res.append(opnorm(direct - resolvent_expansion(g, z)) / max(1.0, opnorm(direct)))
            locs.append(z)
    return VerificationReport.from_residuals("resolvent_expansion", locs, res, tol)
