"""JSON model specifications and report serialisation.

Complex scalars are written as ``[re, im]`` pairs and matrices as row-major
nested lists. Angles in spec files are given in turns (fractions of a full
circle). A minimal matrix spec::

    {"matrix_input": {"U": [[1]], "K": [[-0.5]]}, "options": {"grid": 256}}

and a measure spec::

    {"measure_input": {"gamma": [[0.5]],
                       "atoms": [{"angle_turns": 0.0, "weight": [[1]]}]}}
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .errors import ModelSpecError
from .linalg import RankTolerance, adjoint
from .measure import MeasureModel, OperatorMeasure, beta_matrix
from .perturbation import reduce_to_gamma_form

__all__ = [
    "DEFAULT_OPTIONS",
    "ModelSpec",
    "parse_matrix",
    "matrix_to_json",
    "parse_spec",
    "load_spec",
    "spec_to_dict",
    "build_model",
]

DEFAULT_OPTIONS = {
    "grid": 1024,
    "radius": "auto",
    "rank_rel": 1e-8,
    "rank_floor": 1e-10,
    "seed": 0,
    "normalize_mass": False,
}
#: Sample count used for a constant a.c. density (exact for any grid).
CONSTANT_AC_GRID = 64
MASS_TOL = 1e-8


def _scalar(x, where: str) -> complex:
    if isinstance(x, bool):
        raise ModelSpecError(f"{where}: booleans are not numbers")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise ModelSpecError(f"{where}: expected a number or [re, im], got {x!r}")


def parse_matrix(obj, where: str = "matrix") -> np.ndarray:
    """Nested row lists (entries real or ``[re, im]``) to a complex array."""
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ModelSpecError(f"{where}: expected a non-empty list of rows")
    ncol = len(obj[0])
    if ncol == 0 or any(len(r) != ncol for r in obj):
        raise ModelSpecError(f"{where}: rows must be non-empty and of equal length")
    out = np.array([[_scalar(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)]
                    for i, row in enumerate(obj)], dtype=complex)
    if not np.all(np.isfinite(out)):
        raise ModelSpecError(f"{where}: non-finite entry")
    return out


def matrix_to_json(a) -> list:
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


def _matrix_ref(obj, base_dir: str, where: str) -> np.ndarray:
    if isinstance(obj, str):
        path = obj if os.path.isabs(obj) else os.path.join(base_dir, obj)
        try:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise ModelSpecError(f"{where}: cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ModelSpecError(f"{where}: {path} is not valid JSON: {exc}") from exc
        if isinstance(obj, dict) and "matrix" in obj:
            obj = obj["matrix"]
    return parse_matrix(obj, where)


@dataclass
class ModelSpec:
    """Validated model description; exactly one of the two inputs is set.

    ``measure_input`` holds ``gamma`` (k x k), ``atoms`` as a list of
    ``(turns, weight)`` and ``ac`` as ``None``, ``("constant", W)`` or
    ``("samples", stack)``.
    """

    matrix_input: Optional[dict] = None
    measure_input: Optional[dict] = None
    options: dict = field(default_factory=lambda: dict(DEFAULT_OPTIONS))

    @property
    def kind(self) -> str:
        return "matrix" if self.matrix_input is not None else "measure"

    @property
    def rank_tol(self) -> RankTolerance:
        return RankTolerance(self.options["rank_rel"], self.options["rank_floor"])

    @property
    def radius(self) -> Optional[float]:
        r = self.options["radius"]
        return None if r == "auto" else float(r)

    def equivalent(self, other: "ModelSpec", atol: float = 0.0) -> bool:
        if self.kind != other.kind or self.options != other.options:
            return False
        if self.kind == "matrix":
            return all(np.allclose(self.matrix_input[k], other.matrix_input[k], rtol=0, atol=atol)
                       for k in ("U", "K"))
        a, b = self.measure_input, other.measure_input
        if not np.allclose(a["gamma"], b["gamma"], rtol=0, atol=atol) or len(a["atoms"]) != len(b["atoms"]):
            return False
        for (t1, w1), (t2, w2) in zip(a["atoms"], b["atoms"]):
            if abs(t1 - t2) > atol or not np.allclose(w1, w2, rtol=0, atol=atol):
                return False
        if (a["ac"] is None) != (b["ac"] is None):
            return False
        if a["ac"] is not None:
            if a["ac"][0] != b["ac"][0] or np.shape(a["ac"][1]) != np.shape(b["ac"][1]):
                return False
            return bool(np.allclose(a["ac"][1], b["ac"][1], rtol=0, atol=atol))
        return True


def _parse_options(obj) -> dict:
    opts = dict(DEFAULT_OPTIONS)
    if obj is None:
        return opts
    if not isinstance(obj, dict):
        raise ModelSpecError("options must be an object")
    unknown = set(obj) - set(opts)
    if unknown:
        raise ModelSpecError(f"unknown options: {sorted(unknown)}")
    opts.update(obj)
    g = opts["grid"]
    if isinstance(g, bool) or not isinstance(g, int) or g < 1:
        raise ModelSpecError(f"options.grid must be a positive integer, got {g!r}")
    r = opts["radius"]
    if r != "auto" and (isinstance(r, bool) or not isinstance(r, (int, float)) or not 0.0 < r <= 1.0):
        raise ModelSpecError(f"options.radius must be 'auto' or in (0, 1], got {r!r}")
    if r != "auto":
        opts["radius"] = float(r)
    try:
        RankTolerance(float(opts["rank_rel"]), float(opts["rank_floor"]))
    except (TypeError, ValueError) as exc:
        raise ModelSpecError(f"bad rank tolerance: {exc}") from exc
    opts["rank_rel"] = float(opts["rank_rel"])
    opts["rank_floor"] = float(opts["rank_floor"])
    if isinstance(opts["seed"], bool) or not isinstance(opts["seed"], int):
        raise ModelSpecError("options.seed must be an integer")
    if not isinstance(opts["normalize_mass"], bool):
        raise ModelSpecError("options.normalize_mass must be true or false")
    return opts


def _parse_measure(obj, base_dir: str) -> dict:
    if not isinstance(obj, dict) or "gamma" not in obj:
        raise ModelSpecError("measure_input needs a 'gamma' matrix")
    unknown = set(obj) - {"gamma", "atoms", "ac"}
    if unknown:
        raise ModelSpecError(f"unknown measure_input keys: {sorted(unknown)}")
    gamma = _matrix_ref(obj["gamma"], base_dir, "measure_input.gamma")
    k = gamma.shape[0]
    if gamma.shape != (k, k):
        raise ModelSpecError("gamma must be square")
    atoms = []
    for i, a in enumerate(obj.get("atoms", []) or []):
        if not isinstance(a, dict) or set(a) != {"angle_turns", "weight"}:
            raise ModelSpecError(f"atoms[{i}] needs exactly 'angle_turns' and 'weight'")
        t = a["angle_turns"]
        if isinstance(t, bool) or not isinstance(t, (int, float)) or not 0.0 <= t < 1.0:
            raise ModelSpecError(f"atoms[{i}].angle_turns must lie in [0, 1), got {t!r}")
        w = _matrix_ref(a["weight"], base_dir, f"atoms[{i}].weight")
        if w.shape != (k, k):
            raise ModelSpecError(f"atoms[{i}].weight must be {k}x{k}")
        atoms.append((float(t), w))
    ac = obj.get("ac")
    if ac is not None:
        if not isinstance(ac, dict):
            raise ModelSpecError("ac must be an object")
        if set(ac) == {"constant"}:
            W = _matrix_ref(ac["constant"], base_dir, "ac.constant")
            if W.shape != (k, k):
                raise ModelSpecError(f"ac.constant must be {k}x{k}")
            ac = ("constant", W)
        elif set(ac) == {"grid", "samples"}:
            M = ac["grid"]
            if isinstance(M, bool) or not isinstance(M, int) or M < 2 or M & (M - 1):
                raise ModelSpecError(f"ac.grid must be a power of two >= 2, got {M!r}")
            if not isinstance(ac["samples"], list) or len(ac["samples"]) != M:
                raise ModelSpecError(f"ac.samples must list exactly {M} matrices")
            stack = np.stack([_matrix_ref(s, base_dir, f"ac.samples[{j}]") for j, s in enumerate(ac["samples"])])
            if stack.shape[1:] != (k, k):
                raise ModelSpecError(f"ac samples must be {k}x{k}")
            ac = ("samples", stack)
        else:
            raise ModelSpecError("ac must be {constant} or {grid, samples}")
    if not atoms and ac is None:
        raise ModelSpecError("measure has neither atoms nor an a.c. part")
    return {"gamma": gamma, "atoms": atoms, "ac": ac}


def parse_spec(obj: Any, base_dir: str = ".") -> ModelSpec:
    """Validate a decoded JSON document; matrix file refs resolve against ``base_dir``."""
    if not isinstance(obj, dict):
        raise ModelSpecError("spec must be a JSON object")
    unknown = set(obj) - {"matrix_input", "measure_input", "options"}
    if unknown:
        raise ModelSpecError(f"unknown top-level keys: {sorted(unknown)}")
    has_m, has_mu = "matrix_input" in obj, "measure_input" in obj
    if has_m == has_mu:
        raise ModelSpecError("exactly one of matrix_input / measure_input is required")
    options = _parse_options(obj.get("options"))
    if has_m:
        mi = obj["matrix_input"]
        if not isinstance(mi, dict) or set(mi) != {"U", "K"}:
            raise ModelSpecError("matrix_input needs exactly 'U' and 'K'")
        U = _matrix_ref(mi["U"], base_dir, "matrix_input.U")
        K = _matrix_ref(mi["K"], base_dir, "matrix_input.K")
        if U.shape != K.shape or U.shape[0] != U.shape[1]:
            raise ModelSpecError(f"U and K must be square of equal size, got {U.shape}, {K.shape}")
        return ModelSpec(matrix_input={"U": U, "K": K}, options=options)
    return ModelSpec(measure_input=_parse_measure(obj["measure_input"], base_dir), options=options)


def load_spec(path: str) -> ModelSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ModelSpecError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelSpecError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_spec(obj, os.path.dirname(os.path.abspath(path)))


def spec_to_dict(spec: ModelSpec) -> dict:
    """Self-contained JSON form (all matrices inlined)."""
    out: dict = {"options": dict(spec.options)}
    if spec.kind == "matrix":
        out["matrix_input"] = {k: matrix_to_json(spec.matrix_input[k]) for k in ("U", "K")}
        return out
    mi = spec.measure_input
    m: dict = {"gamma": matrix_to_json(mi["gamma"]),
               "atoms": [{"angle_turns": t, "weight": matrix_to_json(w)} for t, w in mi["atoms"]]}
    if mi["ac"] is not None:
        kind, val = mi["ac"]
        if kind == "constant":
            m["ac"] = {"constant": matrix_to_json(val)}
        else:
            m["ac"] = {"grid": int(val.shape[0]), "samples": [matrix_to_json(s) for s in val]}
    out["measure_input"] = m
    return out


def _inv_sqrt(a: np.ndarray) -> np.ndarray:
    ev, vec = np.linalg.eigh(0.5 * (a + adjoint(a)))
    if ev[0] <= 0:
        raise ModelSpecError("total mass is singular; cannot normalise")
    return (vec / np.sqrt(ev)) @ adjoint(vec)


def build_model(spec: ModelSpec):
    """:class:`GammaForm` for matrix specs, :class:`MeasureModel` for measure specs.

    Measure models must carry total mass ``I`` (within 1e-8); with the
    ``normalize_mass`` option the measure is instead congruence-normalised.
    """
    if spec.kind == "matrix":
        try:
            return reduce_to_gamma_form(spec.matrix_input["U"], spec.matrix_input["K"], spec.rank_tol)
        except ValueError as exc:
            raise ModelSpecError(str(exc)) from exc
    mi = spec.measure_input
    k = mi["gamma"].shape[0]
    angles = [2.0 * np.pi * t for t, _ in mi["atoms"]]
    weights = np.stack([w for _, w in mi["atoms"]]) if mi["atoms"] else np.zeros((0, k, k), dtype=complex)
    density = None
    samples = np.zeros((0, k, k), dtype=complex)
    if mi["ac"] is not None:
        kind, val = mi["ac"]
        if kind == "constant":
            W = val
            density = lambda th: np.broadcast_to(W, (np.size(th), k, k)).copy()
            samples = density(np.zeros(CONSTANT_AC_GRID))
        else:
            samples = val
    try:
        if np.linalg.norm(mi["gamma"] - adjoint(mi["gamma"]), 2) > 1e-10:
            raise ModelSpecError("gamma is not Hermitian")
        beta_matrix(mi["gamma"])
        mu = OperatorMeasure(np.asarray(angles, dtype=float), weights, samples, dim=k)
        total = mu.total_mass
        if np.linalg.norm(total - np.eye(k), 2) > MASS_TOL:
            if not spec.options["normalize_mass"]:
                raise ModelSpecError("measure total mass is not the identity "
                                     "(set options.normalize_mass to rescale it)")
            S = _inv_sqrt(total)
            mu = mu.conjugate(S)
            if density is not None:
                base = density
                density = lambda th: S @ base(th) @ S
        return MeasureModel(gamma=mi["gamma"], mu=mu, density=density, name="spec")
    except ModelSpecError:
        raise
    except ValueError as exc:
        raise ModelSpecError(str(exc)) from exc
