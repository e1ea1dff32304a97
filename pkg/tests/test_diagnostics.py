import numpy as np
import pytest

from kinwb import (
    ExpPolyTerm,
    TangentRootWarning,
    ap_consistency,
    assemble_cell_matrix,
    exp_poly_roots,
    haar_det,
    kernel_range_check,
    orthogonality_check,
    run_verification,
    stochasticity_check,
    ts_smatrix,
    vfp_closure,
)


def test_stochasticity_examples(q4, spec4, closure4):
    S = ts_smatrix(1e-2, 0.1, 0.7)
    rep = stochasticity_check(S)
    assert rep.col_sum_deviation < 1e-14
    rep = stochasticity_check(np.eye(8), q4)
    assert rep.col_sum_deviation == 0.0
    assert rep.row_sum_deviation == 0.0
    from kinwb import rte_smatrix

    dec = rte_smatrix(1e-2, 1.0 / 32.0, q4, spec4, closure4)
    assert stochasticity_check(dec.S_full, q4).col_sum_deviation < 1e-10


def test_kernel_range_all_models(q4, closure4, qv3):
    dt, dx = 1e-3, 1.0 / 16.0
    R0 = np.array([[1.0, -1.0], [-1.0, 1.0]]) * dt / dx
    rep = kernel_range_check(R0, None, np.ones(2))
    assert rep.passed and rep.null_dim == 1
    S0 = np.eye(4) - closure4.zeta @ closure4.gamma
    rep = kernel_range_check(assemble_cell_matrix(0.0, dt, dx, q4, S0, S0), q4, np.ones(8))
    assert rep.passed
    clv = vfp_closure(qv3)
    S0v = np.eye(3) - clv.zeta @ clv.gamma
    mw = np.exp(-np.concatenate([qv3.nodes, qv3.nodes]) ** 2 / 2.0)
    rep = kernel_range_check(assemble_cell_matrix(0.0, dt, dx, qv3, S0v, S0v), qv3, mw)
    assert rep.passed
    # a full-rank matrix must fail
    rep = kernel_range_check(np.eye(8), q4, np.ones(8))
    assert not rep.passed and rep.null_dim == 0


def test_orthogonality_check_residuals(q4, spec4, qv3):
    assert np.max(orthogonality_check(q4, spec4)) < 1e-10
    from kinwb import vfp_modes

    table = vfp_modes(0.0, 1.0, 1.0, qv3)
    assert np.max(orthogonality_check(qv3, table)) < 1e-10


def test_haar_det_values():
    # n = 1: a single positive entry
    assert haar_det([2.0], [0.5], [1]) == pytest.approx(2.0 * np.exp(1.0), rel=1e-14)
    # duplicated abscissae: two equal rows
    assert abs(haar_det([1.0, 1.0, 2.0], [0.0, 1.0, 2.0], [0, 1, 2])) < 1e-12
    # n = 2 by hand: det [[1, 0], [e^2, 2 e^2... ]] for x=(1,2), y=(0,1), z=(0,1)
    val = haar_det([1.0, 2.0], [0.0, 1.0], [0, 1])
    assert val == pytest.approx(2.0 * np.exp(2.0) - np.exp(1.0), rel=1e-14)
    with pytest.raises(ValueError):
        haar_det([1.0], [0.0, 1.0], [0])


def test_haar_det_sign_constant_along_homotopy():
    rng = np.random.default_rng(3)
    for _ in range(10):
        n = int(rng.integers(2, 5))
        x = np.sort(rng.uniform(0.1, 3.0, n))
        y = np.sort(rng.uniform(0.0, 2.0, n))
        z = np.sort(rng.choice(np.arange(6), size=n, replace=False))
        s0 = np.sign(haar_det(x, y, z))
        assert s0 != 0.0
        for t in np.linspace(0.0, 1.0, 11):
            # strictly monotone perturbation that preserves the ordering
            xt = x * (1.0 + 0.4 * t) + 0.2 * t
            assert np.sign(haar_det(xt, y, z)) == s0


def test_exp_poly_reference_root_sets():
    terms = [ExpPolyTerm([1.5], 0.0), ExpPolyTerm(np.array([-2.0, 1.0]) / np.sqrt(2.0), 1.0)]
    roots, bound = exp_poly_roots(terms, (0.0, 3.0))
    assert bound == 2
    assert np.allclose(roots, [0.1216, 1.5495], atol=1e-3)
    terms = [
        ExpPolyTerm([-2.75], 0.0),
        ExpPolyTerm([-0.4, 0.2], 1.0),
        ExpPolyTerm([3.0, -2.0 * np.sqrt(2.0), 0.5], np.sqrt(2.0)),
    ]
    roots, bound = exp_poly_roots(terms, (0.0, 6.0))
    assert bound == 5
    assert np.allclose(roots, [0.132, 0.796, 4.192], atol=1e-3)


def test_exp_poly_trivial_and_bound():
    roots, bound = exp_poly_roots([ExpPolyTerm([3.0], 0.7)], (-1.0, 1.0))
    assert roots.size == 0 and bound == 0
    rng = np.random.default_rng(21)
    for _ in range(50):
        n = int(rng.integers(1, 4))
        rates = np.sort(rng.uniform(-2.0, 2.0, n))
        terms = [ExpPolyTerm(rng.standard_normal(int(rng.integers(1, 4))), r) for r in rates]
        roots, bound = exp_poly_roots(terms, (-3.0, 3.0), samples=20_000)
        assert len(roots) <= bound


def test_exp_poly_tangent_warning():
    # (x - 1)^2 touches zero without a sign change
    terms = [ExpPolyTerm([1.0, -2.0, 1.0], 0.0)]
    with pytest.warns(TangentRootWarning):
        roots, _ = exp_poly_roots(terms, (0.0, 2.0), samples=200_001)
    assert roots.size == 0


def test_ap_consistency_rte(q4):
    report = ap_consistency(
        "rte", q4, [1e-3, 3e-4, 1e-4, 3e-5],
        {"Nx": 64, "dx": 1.0 / 64.0, "dt": (1.0 / 64.0) ** 2},
    )
    assert 0.9 <= report.slope <= 1.1
    gaps = dict(report.rows)
    assert gaps[1e-3] < 1e-4
    # at eps = 1 no AP claim: the gap saturates at the one-step update size
    # (a sizeable fraction of it), far above the limit-regime errors
    big = ap_consistency(
        "rte", q4, [1.0], {"Nx": 64, "dx": 1.0 / 64.0, "dt": (1.0 / 64.0) ** 2}
    )
    assert big.slope is None
    assert big.rows[0][1] > 5.0 * gaps[1e-3]


def test_run_verification_all_green():
    results = run_verification("all")
    failed = [r.name for r in results if not r.passed]
    assert failed == []
    with pytest.raises(ValueError):
        run_verification("nonsense")


def test_checks_deterministic_and_idempotent(q4, closure4):
    S0 = np.eye(4) - closure4.zeta @ closure4.gamma
    R0 = assemble_cell_matrix(0.0, 1e-3, 1.0 / 16.0, q4, S0, S0)
    a = kernel_range_check(R0, q4, np.ones(8))
    b = kernel_range_check(R0, q4, np.ones(8))
    assert a.passed == b.passed
    assert a.range_test_residual == b.range_test_residual
    assert np.array_equal(a.null_vector, b.null_vector)
    terms = [ExpPolyTerm([1.5], 0.0), ExpPolyTerm(np.array([-2.0, 1.0]) / np.sqrt(2.0), 1.0)]
    r1, _ = exp_poly_roots(terms, (0.0, 3.0))
    r2, _ = exp_poly_roots(terms, (0.0, 3.0))
    assert np.array_equal(r1, r2)


def test_ap_consistency_vfp_uses_quadrature(qv3):
    report = ap_consistency(
        "vfp", qv3, [1e-4],
        {"Nx": 32, "dx": 1.0 / 32.0, "dt": (1.0 / 32.0) ** 2,
         "E_profile": {"kind": "sinusoidal", "amplitude": 0.5}},
    )
    assert report.rows[0][1] < 1e-2
