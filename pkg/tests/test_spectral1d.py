"""Tests for the discrete eigensolvers and comparison checks.

Oracles:
* classical closed forms (pi^2 for the p = 2 segment, cos eigenfunction);
* the exact scale covariance of the radial problem, lam(R) =
  (p-1) (b1/R)^p, which makes the shooting backend self-checking;
* cross-backend agreement (variational vs shooting) on radial domains;
* closed-form bound values evaluated by hand at p = 2, d = pi.
"""

import numpy as np
import pytest
from dataclasses import replace

from pspectral import (
    INFINITY,
    DiscreteFunction,
    ModelProblem,
    PParams,
    SolverOptions,
    E_profile,
    bounds_table,
    build_domain,
    gradient_comparison_check,
    pi_p,
    rayleigh_quotient,
    sin_p,
    solve_eigen_shooting,
    solve_eigen_variational,
    solve_model,
)
from pspectral._util import spow


@pytest.fixture(scope="module")
def radial_pair():
    """Radial n=3, p=2 shooting result and the matched profile."""
    dom = build_domain("radial", 2000, R=1.0, n=3.0)
    res = solve_eigen_shooting(dom, 2.0)
    sol = solve_model(ModelProblem(PParams(2.0, 3.0, res.lam), 0.0))
    return res, sol


def test_build_domain_segment():
    dom = build_domain("segment", 17, x0=0.0, x1=1.0)
    assert dom.N == 17
    assert dom.spacing == pytest.approx(1.0 / 16.0, abs=0)
    np.testing.assert_allclose(dom.nodes, np.linspace(0, 1, 17))
    # endpoint-halved node weights sum to the length
    assert dom.weights.sum() == pytest.approx(1.0, rel=1e-14)
    assert dom.weights[0] == pytest.approx(dom.spacing / 2)
    assert dom.cell_weights.shape == (16,)
    assert not dom.periodic


def test_build_domain_circle():
    dom = build_domain("circle", 64, L=2 * np.pi)
    assert dom.periodic
    assert dom.spacing == pytest.approx(2 * np.pi / 64)
    assert dom.nodes[0] == 0.0
    # node N identifies with node 0: the forward difference wraps
    u = np.cos(dom.nodes)
    du = dom.diff(u)
    assert du.shape == (64,)
    assert du[-1] == pytest.approx((u[0] - u[-1]) / dom.spacing, abs=0)
    assert dom.weights.sum() == pytest.approx(2 * np.pi, rel=1e-14)


def test_build_domain_radial():
    dom = build_domain("radial", 33, R=1.0, n=3.0)
    # weights proportional to t^2 (trapezoid), zero at the center
    assert dom.weights[0] == 0.0
    inner = dom.weights[1:-1] / (dom.nodes[1:-1] ** 2 * dom.spacing)
    np.testing.assert_allclose(inner, 1.0, rtol=1e-14)
    assert dom.weights[-1] == pytest.approx(dom.spacing / 2, rel=1e-14)
    # n = 1 keeps positive center weight
    dom1 = build_domain("radial", 33, R=1.0, n=1.0)
    assert dom1.weights[0] > 0.0


def test_build_domain_validation():
    with pytest.raises(ValueError):
        build_domain("segment", 8, x0=0.0, x1=1.0)
    with pytest.raises(ValueError):
        build_domain("segment", 20, x0=1.0, x1=0.0)
    with pytest.raises(ValueError):
        build_domain("circle", 20)
    with pytest.raises(ValueError):
        build_domain("radial", 20, R=1.0, n=0.5)
    with pytest.raises(ValueError):
        build_domain("torus", 20, L=1.0)


def test_discrete_function_validation():
    dom = build_domain("segment", 16, x0=0.0, x1=1.0)
    with pytest.raises(ValueError):
        DiscreteFunction(dom, np.zeros(15))
    bad = np.zeros(16)
    bad[3] = np.nan
    with pytest.raises(ValueError):
        DiscreteFunction(dom, bad)


def test_rayleigh_classical_cos():
    dom = build_domain("segment", 4001, x0=0.0, x1=1.0)
    u = DiscreteFunction(dom, np.cos(np.pi * dom.nodes))
    assert rayleigh_quotient(u, 2.0) == pytest.approx(np.pi**2, rel=1e-6)


def test_rayleigh_sinp_equality_profile():
    # sin_p samples on (0, pi_p): quotient/(p-1) tends to 1 (unit rate)
    for p in (1.5, 2.0, 3.0):
        pp = pi_p(p)
        dom = build_domain("segment", 4001, x0=0.0, x1=pp)
        u = DiscreteFunction(dom, sin_p(dom.nodes - pp / 2.0, p))
        rq = rayleigh_quotient(u, p)
        assert rq / (p - 1.0) == pytest.approx(1.0, rel=1e-5)


def test_rayleigh_rejects_constant():
    dom = build_domain("circle", 64, L=2.0)
    u = DiscreteFunction(dom, np.ones(64))
    with pytest.raises(ValueError):
        rayleigh_quotient(u, 2.0)


def test_variational_segment_p2():
    dom = build_domain("segment", 2000, x0=0.0, x1=1.0)
    res = solve_eigen_variational(dom, 2.0)
    assert res.converged
    assert res.lam == pytest.approx(np.pi**2, rel=1e-3)
    # result invariants
    u = res.u.values
    assert u.min() == pytest.approx(-1.0, abs=1e-14)
    pnorm = float(np.dot(dom.weights, np.abs(u) ** 2))
    pmean = float(np.dot(dom.weights, u))
    assert abs(pmean) / pnorm < 1e-10
    assert rayleigh_quotient(res.u, 2.0) == pytest.approx(res.lam, rel=1e-12)
    assert res.residual < 1e-10
    # equality case is max/min symmetric up to discretization
    assert abs(u.max() - 1.0) <= 10.0 * dom.spacing
    assert set(res.normalization) == {"scale", "shift"}


def test_variational_segment_p3():
    dom = build_domain("segment", 2000, x0=0.0, x1=1.0)
    res = solve_eigen_variational(dom, 3.0)
    ref = 2.0 * pi_p(3.0) ** 3
    assert res.lam == pytest.approx(ref, rel=5e-3)
    assert abs(res.u.values.max() - 1.0) <= 10.0 * dom.spacing


def test_variational_circle():
    dom = build_domain("circle", 600, L=2.0)
    res = solve_eigen_variational(dom, 1.5)
    ref = 0.5 * pi_p(1.5) ** 1.5
    assert res.lam == pytest.approx(ref, rel=5e-3)
    assert abs(res.u.values.max() - 1.0) <= 10.0 * dom.spacing


def test_variational_seed_determinism():
    dom = build_domain("segment", 300, x0=0.0, x1=1.0)
    a = solve_eigen_variational(dom, 2.5, SolverOptions(seed=3))
    b = solve_eigen_variational(dom, 2.5, SolverOptions(seed=3))
    assert a.lam == b.lam
    np.testing.assert_array_equal(a.u.values, b.u.values)


def test_variational_convergence_order():
    # equality-case eigenvalue error must shrink at least linearly in h
    ref = np.pi**2
    errs = []
    for N in (100, 200, 400):
        dom = build_domain("segment", N, x0=0.0, x1=1.0)
        res = solve_eigen_variational(dom, 2.0)
        errs.append(abs(res.lam - ref))
    order1 = np.log2(errs[0] / errs[1])
    order2 = np.log2(errs[1] / errs[2])
    assert min(order1, order2) >= 1.0, errs


def test_shooting_fixed_point_and_covariance():
    # R = b1 makes lam = p-1 exactly; doubling R divides lam by 2^p
    p, n = 3.0, 2.0
    base = solve_model(ModelProblem(PParams(p, n, p - 1.0), 0.0))
    b1 = base.b
    assert b1 > pi_p(p)  # strictly wider window than the drift-free case
    dom_fix = build_domain("radial", 400, R=b1, n=n)
    res_fix = solve_eigen_shooting(dom_fix, p)
    assert res_fix.lam == pytest.approx(p - 1.0, rel=1e-9)
    dom1 = build_domain("radial", 400, R=1.0, n=n)
    dom2 = build_domain("radial", 400, R=2.0, n=n)
    lam1 = solve_eigen_shooting(dom1, p).lam
    lam2 = solve_eigen_shooting(dom2, p).lam
    assert lam2 == pytest.approx(lam1 / 2.0**p, rel=1e-12)


def test_shooting_result_invariants(radial_pair):
    res, _ = radial_pair
    assert res.method == "shooting"
    assert res.converged
    u = res.u.values
    dom = res.u.domain
    assert u.min() == pytest.approx(-1.0, abs=1e-14)
    pmean = abs(float(np.dot(dom.weights, spow(u, res.p - 1.0))))
    assert pmean < 1e-12
    # discrete Rayleigh quotient matches the continuum eigenvalue to
    # quadrature accuracy
    assert res.residual < 1e-5
    assert rayleigh_quotient(res.u, res.p) == pytest.approx(res.lam, rel=1e-5)


def test_shooting_vs_variational(radial_pair):
    res, _ = radial_pair
    dom = res.u.domain
    rv = solve_eigen_variational(dom, 2.0)
    assert rv.lam == pytest.approx(res.lam, rel=5e-3)


def test_shooting_requires_radial():
    dom = build_domain("segment", 100, x0=0.0, x1=1.0)
    with pytest.raises(ValueError):
        solve_eigen_shooting(dom, 2.0)


def test_gradient_comparison_radial(radial_pair):
    res, sol = radial_pair
    rep = gradient_comparison_check(res, sol)
    assert rep["passed"]
    # the sampled profile is the exact eigenfunction: no violation at all
    assert rep["max_violation"] <= 1e-5
    assert rep["n_cells"] == res.u.domain.N - 1
    assert rep["allowed_normalized"] == pytest.approx(
        5.0 * rep["h_normalized"]
    )


def test_gradient_comparison_segment_equality():
    dom = build_domain("segment", 2000, x0=0.0, x1=1.0)
    for p in (1.5, 3.0):
        res = solve_eigen_variational(dom, p)
        sol = solve_model(ModelProblem(PParams(p, 1.0, res.lam), INFINITY))
        rep = gradient_comparison_check(res, sol)
        assert rep["passed"], rep


def test_gradient_comparison_strict_slack(radial_pair):
    # shrinking the function leaves the profile bound untouched: the
    # comparison then holds with strict slack everywhere.
    res, sol = radial_pair
    half = replace(res, u=DiscreteFunction(res.u.domain, res.u.values * 0.5))
    rep = gradient_comparison_check(half, sol)
    assert rep["passed"]
    assert rep["max_violation"] < -0.1


def test_gradient_comparison_mismatch_rejected(radial_pair):
    res, sol = radial_pair
    wrong_p = replace(res, p=3.0)
    with pytest.raises(ValueError, match="exponent"):
        gradient_comparison_check(wrong_p, sol)
    wrong_lam = replace(res, lam=res.lam * 1.01)
    with pytest.raises(ValueError, match="eigenvalue"):
        gradient_comparison_check(wrong_lam, sol)
    big = replace(res, u=DiscreteFunction(res.u.domain, res.u.values * 3.0))
    with pytest.raises(ValueError, match="covered"):
        gradient_comparison_check(big, sol)


def test_E_profile_radial_constant(radial_pair):
    res, sol = radial_pair
    rep = E_profile(res, sol)
    assert rep["monotone_ok"]
    assert rep["spread"] <= 10.0 * rep["h_normalized"]
    assert rep["n_kept"] > 100
    # kept samples straddle the profile zero
    assert rep["s"][0] < rep["t0"] < rep["s"][-1]


def test_E_profile_negative_control(radial_pair):
    res, sol = radial_pair
    wpert = res.u.domain.weights.copy()
    wpert[res.u.values < -0.98] *= 30.0
    rep = E_profile(res, sol, node_weights=wpert)
    assert not rep["monotone_ok"]
    assert rep["spread"] > 0.05


def test_E_profile_segment_equality():
    dom = build_domain("segment", 2000, x0=0.0, x1=1.0)
    p = 2.0
    res = solve_eigen_variational(dom, p)
    sol = solve_model(ModelProblem(PParams(p, 1.0, res.lam), INFINITY))
    rep = E_profile(res, sol)
    assert rep["monotone_ok"]
    assert rep["spread"] <= 10.0 * rep["h_normalized"]


def test_bounds_table_values():
    rows = {r["name"]: r for r in bounds_table(2.0, np.pi)}
    assert set(rows) == {"sharp", "hui", "kn", "li_yau", "zhong_yang"}
    assert rows["sharp"]["value"] == pytest.approx(1.0, rel=1e-14)
    assert rows["zhong_yang"]["value"] == pytest.approx(1.0, rel=1e-14)
    assert rows["li_yau"]["value"] == pytest.approx(0.25, rel=1e-14)
    assert rows["hui"]["value"] == pytest.approx(0.25, rel=1e-14)
    assert rows["kn"]["value"] == pytest.approx(1.0 / 16.0, rel=1e-14)
    assert all(r["applicable"] for r in rows.values())


def test_bounds_table_ratios_and_flags():
    rows3 = {r["name"]: r for r in bounds_table(3.0, 1.0)}
    assert rows3["sharp"]["value"] == pytest.approx(2.0 * pi_p(3.0) ** 3,
                                                    rel=1e-14)
    assert rows3["sharp"]["value"] / rows3["hui"]["value"] == pytest.approx(
        8.0, rel=1e-12
    )
    assert not rows3["li_yau"]["applicable"]
    assert not rows3["zhong_yang"]["applicable"]
    assert rows3["kn"]["applicable"]
    rows15 = {r["name"]: r for r in bounds_table(1.5, 1.0)}
    assert not rows15["kn"]["applicable"]
    for p in (2.0, 3.0, 4.0):
        rows = {r["name"]: r for r in bounds_table(p, 1.0)}
        assert rows["sharp"]["value"] > rows["hui"]["value"] > rows["kn"]["value"]


def test_bounds_table_validation():
    with pytest.raises(ValueError):
        bounds_table(1.0, 1.0)
    with pytest.raises(ValueError):
        bounds_table(2.0, 0.0)
    with pytest.raises(ValueError):
        bounds_table(2.0, 1.0, n=0.5)
