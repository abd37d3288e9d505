import math

import numpy as np
import pytest

from conftest import make_passive_data, make_quadrature_data, stable_reduction_cases
from qmor import analysis, cases, linalg, systems
from qmor.errors import StabilityError
from qmor.reduction import InterpolationData, reduce_passive, reduce_right
from qmor.selection import conjugate_pair_points


def _full_order_reduction(seed=5, stable=False):
    if stable:
        sys_q = systems.annihilation_to_quadrature(
            systems.random_realizable_annihilation(2, 2, 2, seed)
        )
    else:
        sys_q = systems.random_realizable_quadrature(2, 2, 2, seed)
    data = InterpolationData(
        side="right",
        points=conjugate_pair_points([1.0, 2.0]),
        directions=np.array([[1, 0, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 1, 0]]),
    )
    return sys_q, reduce_right(sys_q, data)


def test_error_exact_full_order_vanishes():
    sys_q, result = _full_order_reduction()
    ee = analysis.error_exact(sys_q, result, 0.3 + 1.1j)
    assert ee.direct <= 1e-9
    assert ee.via_q <= 1e-9
    assert ee.via_r <= 1e-9


def test_error_exact_tangential_component_only():
    # At an interpolation point the tangential error vanishes while the full
    # matrix error stays finite.
    sys_q = cases.optomechanical_system()
    data = cases.ex1_interpolation_data()
    result = reduce_right(sys_q, data)
    sigma = data.points[2]
    nu = data.directions[2]
    full_gap = analysis.error_exact(sys_q, result, sigma).direct
    tangential = np.linalg.norm(
        (systems.transfer(sys_q, sigma) - systems.transfer(result.reduced, sigma)) @ nu
    )
    reference = np.linalg.norm(systems.transfer(sys_q, sigma) @ nu)
    assert tangential <= 1e-8 * max(reference, 1e-6)
    assert full_gap > 0.1


def test_error_exact_triple_agreement():
    for seed in range(10):
        sys_q = systems.random_realizable_quadrature(3, 2, 1, seed)
        result = reduce_right(sys_q, make_quadrature_data(sys_q, "right", seed))
        eigs = np.concatenate(
            [np.linalg.eigvals(sys_q.A), np.linalg.eigvals(result.reduced.A)]
        )
        rng = np.random.default_rng(seed + 600)
        drawn = 0
        while drawn < 10:
            s = 3 * rng.standard_normal() + 3j * rng.standard_normal()
            if np.abs(eigs - s).min() < 0.3:
                continue
            drawn += 1
            ee = analysis.error_exact(sys_q, result, s)
            scale = max(ee.direct, 1e-12)
            assert abs(ee.direct - ee.via_q) <= 1e-8 * scale
            assert abs(ee.direct - ee.via_r) <= 1e-8 * scale
            assert ee.q_idempotency <= 1e-8
            assert ee.r_idempotency <= 1e-8


def test_hinf_error_full_order_zero():
    sys_q, result = _full_order_reduction(seed=8, stable=True)
    est = analysis.hinf_error(sys_q, result)
    assert est.value <= 1e-9


def test_hinf_error_optomech_value():
    sys_q = cases.optomechanical_system()
    result = reduce_right(sys_q, cases.ex1_interpolation_data())
    est = analysis.hinf_error(sys_q, result)
    assert est.value == pytest.approx(2.00, rel=0.02)


def test_hinf_error_cascade_value_and_ceiling():
    sys_a = cases.cascaded_cavity_system()
    result = reduce_passive(sys_a, cases.ex3_interpolation_data(), pr_tol=1e-8)
    est = analysis.hinf_error(sys_a, result)
    assert est.value == pytest.approx(2.00, rel=0.02)
    assert est.value <= 2.0 + 1e-6


def test_hinf_error_rejects_unstable():
    sys_q = systems.QuadratureSystem(
        A=np.diag([1.0, -1.0]), B=np.eye(2), C=np.eye(2), D=np.eye(2)
    )
    _, result = _full_order_reduction()
    with pytest.raises(StabilityError):
        analysis.hinf_error(sys_q, result)


def test_bounds_full_order_zero():
    sys_q, result = _full_order_reduction(seed=8, stable=True)
    grid = analysis.default_grid(sys_q.A, count=200)
    assert analysis.hinf_bound_left(sys_q, result, grid=grid) <= 1e-9
    assert analysis.hinf_bound_right(sys_q, result, grid=grid) <= 1e-9


def test_bounds_optomech_values():
    sys_q = cases.optomechanical_system()
    result = reduce_right(sys_q, cases.ex1_interpolation_data())
    assert analysis.hinf_bound_left(sys_q, result) == pytest.approx(2.45, rel=0.05)
    assert analysis.hinf_bound_right(sys_q, result) == pytest.approx(3.96e3, rel=0.10)


def test_bounds_passive_cascade_values():
    sys_a = cases.cascaded_cavity_system()
    result = reduce_passive(sys_a, cases.ex3_interpolation_data(), pr_tol=1e-8)
    left, right = analysis.hinf_bounds_passive(sys_a, result)
    assert left == pytest.approx(2.92, rel=0.05)
    assert right == pytest.approx(2.92, rel=0.05)


def test_bound_domination_sample():
    for quad, _, result in stable_reduction_cases(5):
        grid = analysis.default_grid(quad.A, result.reduced.A, count=400)
        est = analysis.hinf_error(quad, result, grid=grid)
        assert analysis.hinf_bound_left(quad, result, grid=grid) >= est.value - 1e-9
        assert analysis.hinf_bound_right(quad, result, grid=grid) >= est.value - 1e-9


def test_angle_identity_against_svd():
    rng = np.random.default_rng(23)
    for _ in range(10):
        x = linalg.orthonormal_range(
            rng.standard_normal((8, 3)) + 1j * rng.standard_normal((8, 3))
        )
        y = linalg.orthonormal_range(
            rng.standard_normal((8, 3)) + 1j * rng.standard_normal((8, 3))
        )
        gap = linalg.spectral_norm(x @ x.conj().T - y @ y.conj().T)
        secant = 1.0 / math.sqrt(1.0 - gap**2)
        independent = 1.0 / math.cos(linalg.largest_principal_angle(x, y))
        assert secant == pytest.approx(independent, rel=1e-8)


def test_h2_scalar_analytic_value():
    # Integral of |1/(i w + 1)|^2 over the real line is pi.
    full = (np.array([[-1.0]]), np.array([[1.0]]), np.array([[1.0]]), np.array([[0.0]]))
    zero = (np.array([[-1.0]]), np.array([[0.0]]), np.array([[0.0]]), np.array([[0.0]]))
    value = analysis.h2_error_quadrature(full, zero)
    assert value == pytest.approx(math.pi, rel=0.01)


def test_h2_full_order_zero():
    sys_q, result = _full_order_reduction(seed=8, stable=True)
    assert analysis.h2_error_quadrature(sys_q, result) <= 1e-9


def test_h2_dual_method_sample():
    for quad, _, result in stable_reduction_cases(3):
        by_quadrature = analysis.h2_error_quadrature(quad, result)
        by_gramian = analysis.h2_error_gramian(quad, result)
        assert by_quadrature == pytest.approx(by_gramian, rel=0.01)


def test_error_report_bounds_dominate_estimate():
    quad, _, result = stable_reduction_cases(1)[0]
    grid = analysis.default_grid(quad.A, result.reduced.A, count=400)
    report = analysis.error_report(quad, result, grid=grid)
    assert report.stable
    scale = max(report.hinf_error_estimate, 1.0)
    assert report.hinf_error_estimate <= min(
        report.hinf_bound_left, report.hinf_bound_right
    ) + 1e-9 * scale
    assert report.pointwise.shape[1] == 2


def test_error_report_unstable_notes():
    unstable = systems.QuadratureSystem(
        A=np.diag([0.5, -1.0]), B=np.eye(2), C=np.eye(2), D=np.eye(2)
    )
    from qmor.reduction import ReductionResult

    data = InterpolationData(
        side="right", points=[2.0, 3.0], directions=np.array([[1.0, 0], [0, 1.0]])
    )
    result = ReductionResult(
        w=np.eye(2), v=np.eye(2), reduced=unstable, data=data, diagnostics=None
    )
    report = analysis.error_report(unstable, result)
    assert not report.stable
    assert report.hinf_bound_left is None and report.hinf_bound_right is None
    assert report.notes


def test_frequency_response_feedthrough_only():
    sys_q = systems.QuadratureSystem(
        A=-np.eye(2), B=np.eye(2), C=np.zeros((2, 2)), D=np.diag([1.0, 2.0])
    )
    resp = analysis.frequency_response(sys_q, [0.1, 1.0, 10.0])
    for value in resp.values:
        assert np.allclose(value, np.diag([1.0, 2.0]))


def test_frequency_response_conjugate_symmetry():
    sys_q = systems.random_realizable_quadrature(2, 1, 1, 30)
    resp = analysis.frequency_response(sys_q, [-2.0, 2.0])
    assert np.allclose(resp.values[0], np.conj(resp.values[1]))


def test_frequency_response_skips_resonances():
    sys_q = systems.QuadratureSystem(
        A=systems.symplectic_form(1), B=np.eye(2), C=np.eye(2), D=np.eye(2)
    )
    resp = analysis.frequency_response(sys_q, [0.5, 1.0, 2.0])
    assert len(resp.skipped) == 1
    assert resp.skipped[0][0] == 1.0
    assert len(resp.omegas) == 2


def test_frequency_response_optomech_window():
    # Full and reduced magnitudes agree within 1 dB around the mechanical
    # resonance for the matched thermal-noise channels.
    sys_q = cases.optomechanical_system()
    result = reduce_right(sys_q, cases.ex1_interpolation_data())
    omegas = np.linspace(0.9e4, 1.1e4, 41)
    full = analysis.frequency_response(sys_q, omegas)
    red = analysis.frequency_response(result.reduced, omegas)
    for i, j in ((1, 2), (1, 5)):
        for vf, vr in zip(full.values, red.values):
            ratio_db = 20.0 * math.log10(abs(vf[i, j]) / abs(vr[i, j]))
            assert abs(ratio_db) <= 1.0


def test_h2_range_doubling_stability():
    quad, _, result = stable_reduction_cases(1)[0]
    eigs = np.concatenate(
        [np.linalg.eigvals(quad.A), np.linalg.eigvals(result.reduced.A)]
    )
    w_max = 1e2 * np.abs(eigs).max()
    base = analysis.h2_error_quadrature(quad, result, w_max=w_max)
    doubled = analysis.h2_error_quadrature(quad, result, w_max=2 * w_max)
    assert abs(doubled - base) <= 0.005 * base


def test_bounds_passive_full_order_zero():
    sys_a = systems.random_realizable_annihilation(3, 2, 2, 14)
    data = make_passive_data(sys_a, 14, r=3)
    result = reduce_passive(sys_a, data)
    grid = analysis.default_grid(sys_a.F, count=200)
    left, right = analysis.hinf_bounds_passive(sys_a, result, grid=grid)
    assert left <= 1e-9 and right <= 1e-9


def test_error_surface_full_order_vanishes():
    sys_q, result = _full_order_reduction(seed=8, stable=True)
    re_pts = np.array([0.5, 1.0])
    im_pts = np.array([-2.0, 0.0, 2.0])
    _, _, values = analysis.error_surface(sys_q, result, re_pts, im_pts)
    assert values.shape == (3, 2)
    assert values.max() <= 1e-9


def test_error_surface_marks_singular_points():
    # A rotation generator has poles exactly at +/- i, where the shifted
    # matrix is singular in exact float arithmetic.
    lossless = systems.QuadratureSystem(
        A=systems.symplectic_form(1), B=np.eye(2), C=np.eye(2), D=np.eye(2)
    )
    from qmor.reduction import ReductionResult

    data = InterpolationData(
        side="right", points=[2.0, 3.0], directions=np.array([[1.0, 0], [0, 1.0]])
    )
    self_result = ReductionResult(
        w=np.eye(2), v=np.eye(2), reduced=lossless, data=data, diagnostics=None
    )
    _, _, values = analysis.error_surface(
        lossless, self_result, np.array([0.0]), np.array([1.0, 0.5])
    )
    assert np.isnan(values[0, 0])
    assert values[1, 0] <= 1e-12


def test_error_surface_matches_direct_evaluation():
    sys_q = cases.optomechanical_system()
    result = reduce_right(sys_q, cases.ex1_interpolation_data())
    re_pts = np.array([-100.0, 0.0])
    im_pts = np.array([9.5e3])
    _, _, values = analysis.error_surface(sys_q, result, re_pts, im_pts)
    s = complex(-100.0, 9.5e3)
    direct = np.linalg.norm(
        systems.transfer(sys_q, s) - systems.transfer(result.reduced, s), 2
    )
    assert values[0, 0] == pytest.approx(direct, rel=1e-12)
