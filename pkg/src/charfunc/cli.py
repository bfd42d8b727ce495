"""Command-line front end: ``charfunc analyze | verify | sweep``.

Exit codes: 0 when every decided check passes, 1 when a check fails,
2 on input or usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

import numpy as np

from . import verify as V
from .errors import CharFuncError, ModelSpecError
from .io import build_model, load_spec, spec_to_dict
from .linalg import opnorm
from .perturbation import GammaForm, assemble_T, cnu_split
from .theta import ThetaEvaluator, boundary_profile

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
SUITES = ("all", "formulas", "theorem", "corollaries", "lemmas")


def _failed(reports) -> bool:
    return any(r.status == "fail" for r in reports)


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def analyze_model(spec, grid=None, radius=None) -> dict:
    """Run the full pipeline on a parsed spec and return the JSON report."""
    model = build_model(spec)
    grid = int(grid or spec.options["grid"])
    radius = radius if radius is not None else spec.radius
    tol = spec.rank_tol
    report: dict = {"model": spec_to_dict(spec), "kind": spec.kind}
    checks = []
    if isinstance(model, GammaForm):
        split = cnu_split(model)
        ev = ThetaEvaluator.defect(model)
        measure = None
        report["gamma_form"] = {"d": model.d, "k": model.k,
                                "gamma_eigenvalues": model.gamma_eigenvalues().tolist()}
        report["split"] = {"dim_cnu": split.dim0, "dim_unitary": split.dim1,
                           "spectral_radius": split.spectral_radius}
        U, K = spec.matrix_input["U"], spec.matrix_input["K"]
        rec = opnorm(assemble_T(model) - (U + K))
        checks.append(V.VerificationReport("gamma_form_reconstruction", rec <= 1e-10, rec, 1e-10, 1))
        if model.k:
            checks.append(V.check_cross_formula(model))
            checks.append(V.check_f1_identity(model))
            checks.append(V.check_inverse_identity(model, grid=grid, radius=radius))
        checks.append(V.check_theorem_main(model, grid, radius, tol))
        checks.append(V.check_two_sided_inner(model, grid))
        if model.k:
            checks.append(V.check_stability_innerness(model, grid))
    else:
        ev = ThetaEvaluator.from_model(model)
        measure = model.mu
        report["gamma_form"] = {"k": model.k,
                                "gamma_eigenvalues": np.linalg.eigvalsh(model.gamma).tolist()}
        checks.append(V.check_cross_formula(model))
        checks.append(V.check_inverse_identity(model, grid=grid, radius=radius))
        checks.append(V.check_theorem_main(model, grid, radius, tol))
        if model.mu.has_ac:
            d = V.check_delta_identities(model, grid, radius)
            if d.sample_count:
                checks.append(d)
    prof = boundary_profile(ev, grid, radius, measure=measure, tol=tol)
    report["profile"] = {
        "grid": prof.grid,
        "radius": prof.radius,
        "angles": prof.angles.tolist(),
        "theta_singular_values": prof.theta_singular_values().tolist(),
        "rank_delta": prof.rank_delta.tolist(),
        "rank_delta_star": prof.rank_delta_star.tolist(),
        "n_u": (prof.n_u if prof.n_u is not None else np.zeros(grid, dtype=int)).tolist(),
    }
    report["checks"] = [c.to_dict() for c in checks]
    report["passed"] = not _failed(checks)
    return report


def cmd_analyze(args) -> int:
    try:
        spec = load_spec(args.spec)
        report = analyze_model(spec, args.grid, args.radius)
    except (ModelSpecError, CharFuncError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1)
        fh.write("\n")
    for c in report["checks"]:
        print(f"{c['check_name']:<34s} worst={c['worst_residual']} {c['status'].upper()}")
    return EXIT_OK if report["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _suite_formulas(seeds: int):
    out = [V.check_scalar_closed_form()]
    if seeds:
        out.append(V._merge("cross_formula[matrix]",
                            [V.check_cross_formula(V.random_instance(s, *V.matrix_case(s))) for s in range(seeds)]))
        out.append(V._merge("cross_formula[measure]",
                            [V.check_cross_formula(V.random_instance(s, *_measure_case(s), "measure"))
                             for s in range(seeds)]))
        out.append(V._merge("f1_identity",
                            [V.check_f1_identity(V.random_instance(s, *V.matrix_case(s))) for s in range(seeds)]))
    return out


def _measure_case(seed: int):
    d = 1 + seed % 4
    return d, 1 + (seed // 4) % min(d, 3)


def _suite_theorem(seeds: int):
    out = []
    for name in V.CANONICAL_MODELS:
        m = V.canonical_model(name)
        out.append(_renamed(V.check_theorem_main(m), f"theorem[{name}]"))
        out.append(_renamed(V.check_delta_identities(m), f"delta_identities[{name}]"))
        out.append(_renamed(V.check_inverse_identity(m), f"inverse_identity[{name}]"))
    atom = V.canonical_model("atom")
    out.append(_renamed(V.check_theorem_main(atom), "theorem[atom]"))
    out.append(_renamed(V.check_inverse_identity(atom), "inverse_identity[atom]"))
    if seeds:
        out.append(V._merge("theorem[matrix]",
                            [V.check_theorem_main(V.random_instance(s, *V.matrix_case(s)))
                             for s in range(seeds)]))
    return out


def _suite_corollaries(seeds: int, table: bool = True):
    out = []
    if not seeds:
        return out
    ens = V.stable_ensemble(seeds)
    out.append(V._merge("two_sided_inner", [V.check_two_sided_inner(g) for _, g in ens]))
    reps = [(s, V.check_stability_innerness(g)) for s, g in ens]
    merged = V._merge("stability_innerness", [r for _, r in reps])
    merged.info["disagreeing_seeds"] = [s for s, r in reps if r.worst_residual > 0]
    out.append(merged)
    if table:
        counts: dict = {}
        for _, r in reps:
            key = (r.info.get("n") is not None, r.info.get("n_star") is not None,
                   r.info.get("coinner"), r.info.get("inner"))
            counts[key] = counts.get(key, 0) + 1
        print("stable  stable*  co-inner  inner  count")
        for key in sorted(counts, key=str):
            print("  ".join(f"{str(v):<6s}" for v in key) + f"  {counts[key]}")
        if merged.info["disagreeing_seeds"]:
            print("disagreeing seeds (decay slower than the step horizon):", merged.info["disagreeing_seeds"])
    return out


def _suite_lemmas(seeds: int):
    if not seeds:
        return []
    seq = range(seeds)
    return [V.check_woodbury(seq), V.check_polar(seq), V.check_reconstruction(seq),
            V.check_orthogonality_preservation(range(10 * seeds)), V.check_resolvent_expansion(seq)]


def _renamed(r, name):
    r.check_name = name
    return r


def run_suite(name: str, seeds: int):
    parts: dict[str, Callable] = {"formulas": _suite_formulas, "theorem": _suite_theorem,
                                  "corollaries": _suite_corollaries, "lemmas": _suite_lemmas}
    names = list(parts) if name == "all" else [name]
    out = []
    for n in names:
        out.extend(parts[n](seeds))
    return out


def cmd_verify(args) -> int:
    if args.seeds < 0:
        print("error: --seeds must be non-negative", file=sys.stderr)
        return EXIT_INPUT
    reports = run_suite(args.suite, args.seeds)
    for r in reports:
        print(r.line())
    return EXIT_FAIL if _failed(reports) else EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = ("dim", "rank", "seed", "rho", "cross_formula_residual", "unitarity_residual",
                 "stability_n", "stability_n_star", "cross_formula_pass", "unitarity_pass",
                 "equivalence_pass")


def sweep_row(job) -> list:
    d, k, seed = job
    g = V.random_instance(seed, d, k)
    cross = V.check_cross_formula(g)
    inner = V.check_two_sided_inner(g)
    eq = V.check_stability_innerness(g)
    rho = cnu_split(g).spectral_radius

    def fmt(x):
        return "nan" if x is None or not np.isfinite(x) else f"{x:.6e}"

    def flag(r):
        return r.status

    return [d, k, seed, f"{rho:.12f}", fmt(cross.worst_residual), fmt(inner.worst_residual),
            "" if eq.info.get("n") is None else eq.info["n"],
            "" if eq.info.get("n_star") is None else eq.info["n_star"],
            flag(cross), flag(inner), flag(eq)]


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def sweep_rows(dims: Sequence[int], ranks: Sequence[int], seeds: int, jobs: int = 1) -> list[list]:
    work = [(d, k, s) for d in dims for k in ranks if k <= d for s in range(seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(sweep_row, work))  # map keeps input order
    return [sweep_row(w) for w in work]


def cmd_sweep(args) -> int:
    if any(d < 1 or d > 16 for d in args.dims) or any(k < 1 for k in args.ranks) or args.seeds < 0:
        print("error: need 1 <= dims <= 16, ranks >= 1 and seeds >= 0", file=sys.stderr)
        return EXIT_INPUT
    rows = sweep_rows(args.dims, args.ranks, args.seeds, args.jobs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    w.writerows(rows)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    n_fail = sum(1 for r in rows if "fail" in r[-3:])
    n_inc = sum(1 for r in rows if "inconclusive" in r[-3:])
    print(f"{len(rows)} rows written to {args.out}; {n_fail} failed, {n_inc} inconclusive")
    return EXIT_FAIL if n_fail else EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="charfunc", description="Characteristic functions of "
                                "finite-rank perturbations of unitary matrices.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="analyse one model spec and write a JSON report")
    a.add_argument("--spec", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--grid", type=int, default=None)
    a.add_argument("--radius", type=float, default=None)
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="run a verification suite on seeded instances")
    v.add_argument("--suite", choices=SUITES, default="all")
    v.add_argument("--seeds", type=int, default=20)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="tabulate checks over random instances as CSV")
    s.add_argument("--dims", type=_int_list, required=True)
    s.add_argument("--ranks", type=_int_list, default=[1])
    s.add_argument("--seeds", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if getattr(args, "grid", None) is not None and args.grid < 1:
        print("error: --grid must be positive", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "radius", None) is not None and not 0.0 < args.radius <= 1.0:
        print("error: --radius must lie in (0, 1]", file=sys.stderr)
        return EXIT_INPUT
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
