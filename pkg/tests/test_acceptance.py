"""Acceptance suite: one test per numbered criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""
import time

import numpy as np
import pytest

from charfunc.cli import main
from charfunc.perturbation import cnu_split
from charfunc.verify import (
    CANONICAL_MODELS,
    canonical_model,
    check_cross_formula,
    check_delta_identities,
    check_f1_identity,
    check_inverse_identity,
    check_orthogonality_preservation,
    check_polar,
    check_reconstruction,
    check_scalar_closed_form,
    check_theorem_main,
    check_two_sided_inner,
    check_woodbury,
    delta_identity_convergence,
    matrix_case,
    random_instance,
    smallest_decay_power,
    stable_ensemble,
)
from charfunc.theta import ThetaEvaluator
from charfunc.linalg import adjoint

SEEDS = range(100)
RESIDUAL_FLOOR = 1e-12  # below this, quadrature error is swamped by roundoff


@pytest.fixture(scope="module")
def ensemble():
    return stable_ensemble(100)


def test_c01_cross_formula(acceptance):
    t0 = time.perf_counter()
    worst = 0.0
    for s in SEEDS:
        d, k = matrix_case(s)
        assert d <= 8 and 1 <= k <= d
        worst = max(worst, check_cross_formula(random_instance(s, d, k)).worst_residual)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and dt < 10.0
    acceptance("C1 cross-formula agreement", ok,
               f"100 instances x 25 points, worst {worst:.2e} (tol 1e-8), {dt:.1f}s (< 10s)")
    assert ok


def test_c02_scalar_closed_form(acceptance):
    r = check_scalar_closed_form((0.1, 0.5, 0.9), 100)
    acceptance("C2 scalar closed form", r.passed,
               f"3 gammas x 100 points x 4 evaluators, worst {r.worst_residual:.2e} (tol 1e-12)")
    assert r.passed


def test_c03_two_sided_inner(ensemble, acceptance):
    reports = [check_two_sided_inner(g, 512) for _, g in ensemble]
    worst = max(r.worst_residual for r in reports)
    ok = all(r.status == "pass" for r in reports) and worst <= 1e-8
    acceptance("C3 boundary values unitary", ok,
               f"{len(reports)} instances x 512 points, worst {worst:.2e} (tol 1e-8)")
    assert ok


def test_c04_stability_innerness(ensemble, acceptance):
    disagreements = []
    for s, g in ensemble:
        T0 = cnu_split(g).T0
        stable = smallest_decay_power(T0, 1e-8, 10_000) is not None
        stable_star = smallest_decay_power(adjoint(T0), 1e-8, 10_000) is not None
        th = ThetaEvaluator.defect(g).on_grid(512, 1.0)
        I = np.eye(g.k)
        inner = np.linalg.norm(adjoint(th) @ th - I, 2, axis=(1, 2)).max() <= 1e-8
        coinner = np.linalg.norm(th @ adjoint(th) - I, 2, axis=(1, 2)).max() <= 1e-8
        if stable_star != inner or stable != coinner:
            disagreements.append((s, cnu_split(g).spectral_radius))
    detail = f"{len(ensemble)} instances, {len(disagreements)} disagreements"
    if disagreements:
        detail += " (" + ", ".join(f"seed {s}: rho(T0)={rho:.6f}, decay needs more than 1e4 steps"
                                   for s, rho in disagreements) + ")"
    ok = not disagreements
    acceptance("C4 stability <=> innerness", ok, detail)
    assert ok, detail


def test_c05_theorem_rank_identity(acceptance):
    t0 = time.perf_counter()
    fractions = {}
    for name in CANONICAL_MODELS:
        r = check_theorem_main(canonical_model(name, 2 ** 16), 1024)
        fractions[name] = r.info["agree_fraction"]
    dt = time.perf_counter() - t0
    ok = all(f >= 0.99 for f in fractions.values()) and dt < 60.0
    acceptance("C5 rank identity on measure models", ok,
               ", ".join(f"{n} {100 * f:.1f}%" for n, f in fractions.items())
               + f" agree (>= 99%), {dt:.1f}s (< 60s)")
    assert ok


def _decreasing(res):
    return all(b < a or (a <= RESIDUAL_FLOOR and b <= RESIDUAL_FLOOR) for a, b in zip(res, res[1:]))


def test_c06_delta_identities(acceptance):
    parts, ok = [], True
    for name in CANONICAL_MODELS:
        r = check_delta_identities(canonical_model(name, 2 ** 16), 1024)
        conv = delta_identity_convergence(name, [2 ** j for j in range(4, 17)])
        good = r.passed and r.sample_count > 0 and _decreasing(conv)
        ok &= good
        parts.append(f"{name} worst {r.worst_residual:.1e} on {r.sample_count} pts, "
                     f"M=16..2^16: {conv[0]:.1e} -> {conv[-1]:.1e}")
    acceptance("C6 defect identities", ok, "; ".join(parts) + " (tol 1e-6, decreasing)")
    assert ok


def test_c07_inverse_identity(acceptance):
    parts, ok = [], True
    for name in CANONICAL_MODELS + ("atom",):
        r = check_inverse_identity(canonical_model(name, 2 ** 16), grid=1024)
        ok &= r.passed
        parts.append(f"{name} {r.info['interior_worst']:.1e}/{r.info['boundary_worst']:.1e}")
    acceptance("C7 inverse identity", ok,
               "interior/boundary worst: " + ", ".join(parts) + " (tol 1e-8/1e-6)")
    assert ok


def test_c08_formula_lemmas(acceptance):
    f1 = max(check_f1_identity(random_instance(s, *matrix_case(s))).worst_residual for s in SEEDS)
    reports = {"F1": f1,
               "Woodbury": check_woodbury(SEEDS).worst_residual,
               "polar": check_polar(SEEDS).worst_residual,
               "reconstruction": check_reconstruction(SEEDS).worst_residual}
    ok = all(v <= 1e-10 for v in reports.values())
    acceptance("C8 F1/Woodbury/polar/reconstruction", ok,
               ", ".join(f"{k} {v:.1e}" for k, v in reports.items()) + " (100 each, tol 1e-10)")
    assert ok


def test_c09_orthogonality_preservation(acceptance):
    r = check_orthogonality_preservation(range(1000))
    acceptance("C9 isometric vectors keep orthogonality", r.passed,
               f"{r.sample_count} triples, worst {r.worst_residual:.1e} (tol 1e-10)")
    assert r.passed


def test_c10_sweep_determinism(tmp_path, acceptance):
    outs = []
    for i, extra in enumerate(([], [], ["--jobs", "2"])):
        p = tmp_path / f"run{i}.csv"
        main(["sweep", "--dims", "2,4,8", "--ranks", "1,2", "--seeds", "10", "--out", str(p)] + extra)
        outs.append(p.read_bytes())
    ok = outs[0] == outs[1] == outs[2] and len(outs[0]) > 0
    rows = len(outs[0].splitlines()) - 1
    acceptance("C10 sweep determinism", ok,
               f"3 runs (one parallel), {rows} rows, byte-identical: {ok}")
    assert ok
