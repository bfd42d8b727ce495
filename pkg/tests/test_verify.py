import numpy as np
import pytest
from hypothesis import given, strategies as st

from charfunc.errors import BadShape
from charfunc.linalg import opnorm
from charfunc.perturbation import cnu_split
from charfunc.verify import (
    VerificationReport,
    canonical_model,
    check_asymptotic_stability,
    check_cross_formula,
    check_delta_identities,
    check_inverse_identity,
    check_stability_innerness,
    check_theorem_main,
    check_two_sided_inner,
    delta_identity_convergence,
    matrix_case,
    random_instance,
    smallest_decay_power,
    stable_ensemble,
)


def brute_force_power(T, threshold, n_max):
    P = np.eye(T.shape[0], dtype=complex)
    for n in range(1, n_max + 1):
        P = P @ T
        if opnorm(P) <= threshold:
            return n
    return None


def test_decay_power_scalar_half():
    # 0.5**27 = 7.45e-9 is the first power below 1e-8
    assert 0.5 ** 26 > 1e-8 >= 0.5 ** 27
    assert smallest_decay_power(np.array([[0.5]])) == 27
    assert brute_force_power(np.array([[0.5]]), 1e-8, 100) == 27


def test_decay_power_edge_cases():
    assert smallest_decay_power(np.zeros((2, 2))) == 1
    assert smallest_decay_power(np.zeros((0, 0))) == 0
    assert smallest_decay_power(np.eye(2)) is None
    assert smallest_decay_power(np.array([[0.999]]), n_max=100) is None


@given(st.floats(0.0, 0.97), st.integers(0, 1000))
def test_decay_power_matches_brute_force(a, seed):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    T = a * Q @ np.diag([1.0, 0.6, 0.2]) @ Q.T
    assert smallest_decay_power(T, 1e-8, 2000) == brute_force_power(T, 1e-8, 2000)


def test_asymptotic_stability_report():
    r = check_asymptotic_stability(np.array([[0.5]]))
    assert r.passed and r.info["n"] == 27 and r.info["n_star"] == 27
    r = check_asymptotic_stability(np.array([[0.9999]]))
    assert not r.passed and r.status == "inconclusive"
    r = check_asymptotic_stability(np.eye(1))
    assert r.status == "fail"


def test_seed_29_stability_matches_double_innerness():
    g = random_instance(29, *matrix_case(29))
    T0 = cnu_split(g).T0
    assert check_asymptotic_stability(T0).passed
    assert check_two_sided_inner(g).passed
    assert check_stability_innerness(g).passed


@given(st.integers(0, 300))
def test_report_invariant(seed):
    g = random_instance(seed, *matrix_case(seed))
    for r in (check_cross_formula(g), check_two_sided_inner(g, 64)):
        if r.status != "inconclusive":
            assert r.passed == (r.worst_residual <= r.tolerance)


def test_report_serialises():
    r = VerificationReport.from_residuals("x", [0.5 + 1j, 2.0], [1e-3, 2e-3], 1e-2, note="ok")
    d = r.to_dict()
    assert d["passed"] and d["details"][0][0] == [0.5, 1.0]
    assert d["worst_residual"] == 2e-3 and d["info"]["note"] == "ok"
    assert "PASS" in r.line()


def test_random_instance_contract():
    a = random_instance(3, 4, 2)
    b = random_instance(3, 4, 2)
    assert np.array_equal(a.U1, b.U1) and np.array_equal(a.Gamma, b.Gamma)
    assert np.linalg.eigvalsh(a.Gamma).max() <= 0.95
    with pytest.raises(BadShape):
        random_instance(0, 2, 3)
    with pytest.raises(BadShape):
        random_instance(0, 17, 1)
    with pytest.raises(ValueError):
        random_instance(0, 2, 1, "other")
    m = random_instance(1, 3, 2, "measure")
    assert np.allclose(m.mu.total_mass, np.eye(2))
    assert check_cross_formula(m).passed


def test_stable_ensemble_respects_margin():
    ens = stable_ensemble(10)
    assert len(ens) == 10
    assert all(cnu_split(g).spectral_radius < 1 - 1e-8 for _, g in ens)


def test_vacuous_two_sided_inner():
    from charfunc.perturbation import GammaForm
    g = GammaForm(np.eye(2), np.zeros((2, 0)), np.zeros((0, 0)))
    assert check_two_sided_inner(g).passed


def test_delta_identity_lebesgue_hand_value():
    # theta = -1/2 and W w of the transformed measure is 1/3: 1.5 * (1/3) * 1.5 = 0.75
    r = check_delta_identities(canonical_model("lebesgue", 64), grid=64)
    assert r.passed and r.sample_count == 64


def test_delta_identity_converges_with_samples():
    res = delta_identity_convergence("mixed", [16, 32, 64])
    assert res[0] > res[1] > res[2]


@pytest.mark.parametrize("name", ["lebesgue", "rank_one_ac", "mixed", "atom"])
def test_theorem_and_inverse_on_canonical(name):
    m = canonical_model(name, 4096)
    assert check_theorem_main(m, 256).passed
    assert check_inverse_identity(m, grid=256).passed


def test_theorem_expected_ranks():
    r = check_theorem_main(canonical_model("rank_one_ac", 4096), 256)
    assert r.info["rank_triples"] == {"1/1/1": 256}
    r = check_theorem_main(canonical_model("atom"), 256)
    assert r.info["rank_triples"] == {"0/0/0": 256}


def test_inverse_identity_records_cauchy_offset():
    # (I - theta)^{-1} differs from the plain Cauchy transform by (I - beta^2)/2
    r = check_inverse_identity(canonical_model("lebesgue", 64), grid=64)
    assert r.info["cauchy_offset"] == pytest.approx((1 - 1 / 3) / 2)
