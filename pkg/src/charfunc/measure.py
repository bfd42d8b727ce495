"""Matrix-valued measures on the unit circle and their Cauchy transforms.

A :class:`OperatorMeasure` is a finite sum of atoms (angle, psd weight) plus an
absolutely continuous part given by psd samples of its density on the uniform
grid ``xi_j = exp(2 pi i j / M)`` (density with respect to normalised Lebesgue
measure). The a.c. part is interpreted as the band-limited trigonometric
interpolant of the samples, so its Fourier moments are the scaled DFT

    c_n = (1/M) sum_j S_j exp(-2 pi i n j / M),   0 <= n < M/2,

(the Nyquist moment is halved, higher moments vanish). Its Cauchy transforms
are therefore finite power series and are exact on the closed disc; at the
grid nodes their boundary Hermitian part reproduces the samples.

Kernels (``u = z conj(xi)``)::

    C  : 1 / (1 - u)
    C1 : u / (1 - u)
    C2 : (1 + u) / (1 - u)  =  C + C1
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import GammaNotStrict, NotUnitary, PoleHit, RadiusTooLarge
from .linalg import adjoint, as_matrix, is_unitary, psd_sqrt

__all__ = [
    "OperatorMeasure",
    "MeasureModel",
    "WeightField",
    "KINDS",
    "measure_from_unitary",
    "cauchy_transform",
    "cauchy_transform_many",
    "cauchy_transform_grid",
    "poisson_extension",
    "trace_normalize",
    "beta_matrix",
    "pushforward_beta",
    "grid_angles",
]

KINDS = ("C", "C1", "C2")
POLE_TOL = 1e-14
ATOM_MERGE_TOL = 1e-10
PSD_CLAMP = 1e-10
TRACE_ZERO = 1e-14
ATOM_DROP_TOL = 1e-14
TWO_PI = 2.0 * np.pi


def grid_angles(n: int) -> np.ndarray:
    """Angles ``2 pi j / n``, ``j = 0..n-1``."""
    return TWO_PI * np.arange(n) / n


def _clean_psd_stack(stack: np.ndarray, what: str) -> np.ndarray:
    """Symmetrise a stack of matrices and clamp roundoff-negative eigenvalues."""
    if stack.shape[0] == 0:
        return stack
    herm = 0.5 * (stack + adjoint(stack))
    scale = np.maximum(1.0, np.linalg.norm(stack, axis=(1, 2)))
    asym = np.linalg.norm(stack - adjoint(stack), axis=(1, 2))
    if np.any(asym > 1e-10 * scale):
        raise ValueError(f"{what} are not Hermitian within 1e-10")
    evals, evecs = np.linalg.eigh(herm)
    low = evals[:, 0]
    if np.any(low < -PSD_CLAMP * scale):
        j = int(np.argmin(low / scale))
        raise ValueError(f"{what} #{j} is not psd (eigenvalue {low[j]:.3e})")
    bad = low < 0
    if np.any(bad):
        ev = np.clip(evals[bad], 0.0, None)
        herm[bad] = np.einsum("nij,nj,nkj->nik", evecs[bad], ev, np.conj(evecs[bad]))
    return herm


@dataclass(frozen=True, eq=False)
class OperatorMeasure:
    """Atoms plus a sampled a.c. density, both ``k x k`` psd matrix valued.

    Parameters
    ----------
    atom_angles : (na,) array_like
        Atom locations in radians; reduced modulo ``2 pi``.
    atom_weights : (na, k, k) array_like
        Hermitian psd atom masses.
    ac_samples : (M, k, k) array_like, optional
        Density samples on the ``M``-point uniform grid; ``M`` must be a power
        of two (``M = 0`` means no a.c. part).
    dim : int, optional
        Needed only when there are neither atoms nor samples.
    """

    atom_angles: np.ndarray
    atom_weights: np.ndarray
    ac_samples: np.ndarray
    dim: int = -1

    def __post_init__(self):
        ang = np.mod(np.asarray(self.atom_angles, dtype=float).reshape(-1), TWO_PI)
        w = np.asarray(self.atom_weights, dtype=complex)
        s = np.asarray(self.ac_samples, dtype=complex)
        k = self.dim
        for arr in (w, s):
            if arr.size:
                k = arr.shape[-1]
        if k < 0:
            raise ValueError("cannot infer the matrix dimension of an empty measure")
        w = w.reshape(-1, k, k)
        s = s.reshape(-1, k, k)
        if w.shape[0] != ang.shape[0]:
            raise ValueError("atom_angles and atom_weights disagree in length")
        M = s.shape[0]
        if M and (M & (M - 1)):
            raise ValueError(f"a.c. grid size must be a power of two, got {M}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(s))):
            raise ValueError("measure has non-finite entries")
        w = _clean_psd_stack(w, "atom weights")
        s = _clean_psd_stack(s, "a.c. samples")
        for a in (ang, w, s):
            a.setflags(write=False)
        object.__setattr__(self, "atom_angles", ang)
        object.__setattr__(self, "atom_weights", w)
        object.__setattr__(self, "ac_samples", s)
        object.__setattr__(self, "dim", k)
        ac = _ac_moments(s)
        ac.setflags(write=False)
        object.__setattr__(self, "_ac_moments", ac)
        mom = _all_moments(ang, w, ac, k, M)
        mom.setflags(write=False)
        object.__setattr__(self, "moments", mom)

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_atoms(cls, angles, weights, dim: int = -1) -> "OperatorMeasure":
        k = dim if dim >= 0 else np.asarray(weights).shape[-1]
        return cls(angles, weights, np.zeros((0, k, k)), dim=k)

    @classmethod
    def from_density(cls, density: Callable[[np.ndarray], np.ndarray], M: int,
                     atom_angles=(), atom_weights=None) -> "OperatorMeasure":
        """Sample ``density(angles) -> (n, k, k)`` on the ``M``-point grid."""
        s = np.asarray(density(grid_angles(M)), dtype=complex)
        k = s.shape[-1]
        if atom_weights is None:
            atom_weights = np.zeros((0, k, k))
        return cls(atom_angles, atom_weights, s, dim=k)

    # -- derived quantities -------------------------------------------------
    @property
    def M(self) -> int:
        return self.ac_samples.shape[0]

    @property
    def n_atoms(self) -> int:
        return self.atom_angles.shape[0]

    @property
    def has_ac(self) -> bool:
        return self.M > 0

    @property
    def total_mass(self) -> np.ndarray:
        return self.moments[0]

    @property
    def r_max(self) -> float:
        """Interior radius ``1 - 64/M`` at which a sampled density's Cauchy
        transform is within ~1e-9 of that of any bounded-variation density
        with the same samples (1 when there is no a.c. part)."""
        if not self.has_ac:
            return 1.0
        return max(0.0, 1.0 - 64.0 / self.M)

    @property
    def ac_moments(self) -> np.ndarray:
        """Nonnegative-frequency moments ``c_0 .. c_{M/2}`` of the a.c. part."""
        return self._ac_moments

    def density_on_grid(self, G: int) -> np.ndarray:
        """A.c. density at ``exp(2 pi i j / G)``; exact samples when ``G | M``."""
        k, M = self.dim, self.M
        if M == 0:
            return np.zeros((G, k, k), dtype=complex)
        if M % G == 0:
            return np.array(self.ac_samples[:: M // G])
        series = _series_on_grid(self._ac_moments, G, 1.0)
        c0 = self._ac_moments[0]
        full = 2.0 * series - c0
        return 0.5 * (full + adjoint(full))

    def conjugate(self, A: np.ndarray) -> "OperatorMeasure":
        """The measure ``A mu A*`` (used with Hermitian ``A``)."""
        A = as_matrix(A)
        Ah = adjoint(A)
        w = A @ self.atom_weights @ Ah if self.n_atoms else np.zeros((0,) + A.shape, dtype=complex)
        s = A @ self.ac_samples @ Ah if self.M else np.zeros((0,) + A.shape, dtype=complex)
        return OperatorMeasure(self.atom_angles, w, s, dim=A.shape[0])


@dataclass(frozen=True)
class MeasureModel:
    """A measure-driven model: ``Gamma`` plus the spectral measure ``mu``.

    ``mu`` must have total mass ``I_k`` for the pair to describe a contraction.
    ``density`` optionally gives the exact a.c. density of ``mu`` as a callable
    ``angles -> (n, k, k)``; checks use it as the ground truth the samples
    approximate.
    """

    gamma: np.ndarray
    mu: OperatorMeasure
    density: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""

    @property
    def k(self) -> int:
        return self.mu.dim


@dataclass(frozen=True, eq=False)
class WeightField:
    """Trace-normalised weights ``W`` at every atom and every a.c. sample."""

    atoms: np.ndarray
    samples: np.ndarray


def _ac_moments(s: np.ndarray) -> np.ndarray:
    M = s.shape[0]
    k = s.shape[-1]
    if M == 0:
        return np.zeros((0, k, k), dtype=complex)
    spec = np.fft.fft(s, axis=0) / M
    half = M // 2
    mom = np.array(spec[: half + 1])
    if M >= 2:
        mom[half] *= 0.5
    return mom


def _all_moments(ang, w, ac, k, M) -> np.ndarray:
    n = np.arange(M + 1)
    mom = np.zeros((M + 1, k, k), dtype=complex)
    if ang.size:
        phases = np.exp(-1j * np.outer(n, ang))  # (M+1, na)
        mom += np.tensordot(phases, w, axes=(1, 0))
    if ac.shape[0]:
        mom[: ac.shape[0]] += ac
    return mom


def _series_on_grid(coeffs: np.ndarray, G: int, r: float) -> np.ndarray:
    """``sum_n coeffs[n] z_j^n`` at ``z_j = r exp(2 pi i j / G)`` by folding mod G."""
    N = coeffs.shape[0]
    k = coeffs.shape[-1]
    if N == 0:
        return np.zeros((G, k, k), dtype=complex)
    weighted = coeffs * (r ** np.arange(N))[:, None, None]
    L = -(-N // G)
    padded = np.zeros((L * G, k, k), dtype=complex)
    padded[:N] = weighted
    folded = padded.reshape(L, G, k, k).sum(axis=0)
    return np.fft.ifft(folded, axis=0) * G


def _check_kind(kind: str):
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def _combine(C: np.ndarray, c0: np.ndarray, kind: str) -> np.ndarray:
    if kind == "C":
        return C
    if kind == "C1":
        return C - c0
    return 2.0 * C - c0


def _atom_kernel(m: OperatorMeasure, z: np.ndarray, kind: str) -> np.ndarray:
    k = m.dim
    out = np.zeros(z.shape + (k, k), dtype=complex)
    if not m.n_atoms:
        return out
    u = z[:, None] * np.exp(-1j * m.atom_angles)[None, :]
    gap = np.abs(1.0 - u)
    if np.any(gap < POLE_TOL):
        i, a = np.unravel_index(int(np.argmin(gap)), gap.shape)
        raise PoleHit(f"z = {z[i]!r} hits the atom at angle {m.atom_angles[a]:.17g}")
    if kind == "C":
        ker = 1.0 / (1.0 - u)
    elif kind == "C1":
        ker = u / (1.0 - u)
    else:
        ker = (1.0 + u) / (1.0 - u)
    return np.tensordot(ker, m.atom_weights, axes=(1, 0))


def _check_radius(m: OperatorMeasure, z: np.ndarray):
    if m.has_ac and np.any(np.abs(z) > 1.0 + 1e-15):
        raise RadiusTooLarge("the a.c. power series is only valid on the closed unit disc")


def cauchy_transform_many(m: OperatorMeasure, zs, kind: str = "C") -> np.ndarray:
    """Cauchy transform at an array of points; returns shape ``(n, k, k)``."""
    _check_kind(kind)
    z = np.asarray(zs, dtype=complex).reshape(-1)
    _check_radius(m, z)
    out = _atom_kernel(m, z, kind)
    if m.has_ac:
        coeffs = m.ac_moments
        k = m.dim
        flat = coeffs.reshape(coeffs.shape[0], k * k)
        n = np.arange(coeffs.shape[0])
        for lo in range(0, z.size, 64):
            zz = z[lo: lo + 64]
            pw = np.power(zz[:, None], n[None, :])
            C = (pw @ flat).reshape(-1, k, k)
            out[lo: lo + 64] += _combine(C, coeffs[0], kind)
    return out


def cauchy_transform(m: OperatorMeasure, z: complex, kind: str = "C") -> np.ndarray:
    """``C mu(z)``, ``C1 mu(z)`` or ``C2 mu(z)`` as a ``k x k`` matrix.

    Atoms use the closed-form kernels; the a.c. part its finite moment series.

    Raises
    ------
    RadiusTooLarge
        ``|z| > 1`` while an a.c. part is present.
    PoleHit
        ``z conj(xi)`` equals 1 (within 1e-14) for some atom ``xi``.
    """
    return cauchy_transform_many(m, [z], kind)[0]


def cauchy_transform_grid(m: OperatorMeasure, G: int, r: float, kind: str = "C") -> np.ndarray:
    """Cauchy transform at ``z_j = r exp(2 pi i j / G)``, ``j = 0..G-1``."""
    _check_kind(kind)
    z = r * np.exp(1j * grid_angles(G))
    _check_radius(m, z)
    out = _atom_kernel(m, z, kind)
    if m.has_ac:
        C = _series_on_grid(m.ac_moments, G, r)
        out += _combine(C, m.ac_moments[0], kind)
    return out


def poisson_extension(m: OperatorMeasure, z: complex) -> np.ndarray:
    """Poisson integral of ``m`` at ``z``, i.e. the Hermitian part of ``C2 m(z)``."""
    c2 = cauchy_transform(m, z, "C2")
    return 0.5 * (c2 + adjoint(c2))


def trace_normalize(m: OperatorMeasure) -> tuple[OperatorMeasure, WeightField]:
    """Split ``m = W * (tr m)`` into the scalar measure ``tr m`` and the weights ``W``.

    ``W`` has unit trace wherever the trace exceeds 1e-14 and is set to zero
    elsewhere.
    """
    def split(stack):
        if stack.shape[0] == 0:
            return np.zeros((0, 1, 1), dtype=complex), stack.copy()
        tr = np.real(np.trace(stack, axis1=1, axis2=2))
        W = np.zeros_like(stack)
        nz = tr > TRACE_ZERO
        W[nz] = stack[nz] / tr[nz, None, None]
        scal = np.where(nz, tr, 0.0).astype(complex).reshape(-1, 1, 1)
        return scal, W

    sa, Wa = split(np.array(m.atom_weights))
    ss, Ws = split(np.array(m.ac_samples))
    scalar = OperatorMeasure(m.atom_angles, sa, ss, dim=1)
    return scalar, WeightField(atoms=Wa, samples=Ws)


def beta_matrix(Gamma) -> np.ndarray:
    """``beta = (I - Gamma)^{1/2} (I + Gamma)^{-1/2}`` for Hermitian ``0 <= Gamma < I``."""
    G = as_matrix(Gamma) if np.asarray(Gamma).size else np.zeros((0, 0), dtype=complex)
    k = G.shape[0]
    if k == 0:
        return G.copy()
    ev = np.linalg.eigvalsh(0.5 * (G + adjoint(G)))
    if ev[0] < -1e-10 or ev[-1] > 1.0 - 1e-12:
        raise GammaNotStrict(f"Gamma spectrum [{ev[0]:.3e}, {ev[-1]:.3e}] is not inside [0, 1)")
    I = np.eye(k)
    a = psd_sqrt(I - G)
    b = psd_sqrt(I + G)
    beta = np.linalg.solve(b.T, a.T).T  # a @ inv(b); a and b commute
    return 0.5 * (beta + adjoint(beta))


def pushforward_beta(m: OperatorMeasure, Gamma) -> OperatorMeasure:
    """The measure ``beta m beta`` (``mu-tilde`` in the Herglotz representation)."""
    return m.conjugate(beta_matrix(Gamma))


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    n = values.shape[0]
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) < tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: min(g))


def measure_from_unitary(U1, B) -> OperatorMeasure:
    """Atomic measure ``E -> B* E_U1(E) B`` of a unitary matrix.

    Eigenvalues closer than 1e-10 are merged into one spectral projection;
    clusters carrying no mass (weight norm below 1e-14) are dropped.
    """
    import scipy.linalg as sla

    U1 = as_matrix(U1)
    B = np.asarray(B, dtype=complex).reshape(U1.shape[0], -1)
    if not is_unitary(U1, 1e-10):
        raise NotUnitary("U1 is not unitary within 1e-10")
    k = B.shape[1]
    if U1.shape[0] == 0:
        return OperatorMeasure.from_atoms(np.zeros(0), np.zeros((0, k, k)), dim=k)
    tri, Z = sla.schur(U1, output="complex")
    lam = np.diag(tri)
    angles, weights = [], []
    for grp in _cluster(lam, ATOM_MERGE_TOL):
        Zg = Z[:, grp]
        proj = adjoint(Zg) @ B
        w = adjoint(proj) @ proj
        if np.linalg.norm(w) <= ATOM_DROP_TOL:
            continue  # eigenvector orthogonal to Ran B: no mass, and no spurious pole
        weights.append(w)
        angles.append(np.angle(np.mean(lam[grp])))
    order = np.argsort(np.mod(angles, TWO_PI), kind="stable")
    return OperatorMeasure.from_atoms(np.asarray(angles)[order],
                                      np.asarray(weights).reshape(-1, k, k)[order], dim=k)
