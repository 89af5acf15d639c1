import math

import numpy as np
import pytest

from sparsetrig import riesz
from sparsetrig.circle import CircleGrid


def test_schedule_example():
    sched = riesz.make_schedule(3, nu1=8, force_odd=False)
    assert sched.frequencies == (8, 64, 1024)
    assert sched.ratio_floor[1:] == (8.0, 16.0)


def test_schedule_default_odd_hadamard():
    sched = riesz.make_schedule(8)
    f = sched.frequencies
    assert all(x % 2 == 1 for x in f)
    for a, b in zip(f, f[1:]):
        assert b / a > 2.0  # Hadamard and far beyond


def test_schedule_length_one():
    sched = riesz.make_schedule(1, nu1=5)
    assert len(sched) == 1


def test_contracted_indices_exact():
    grid = CircleGrid(64)
    nu = 9
    idx = riesz.contracted_angle_indices(nu, grid)
    lhs = np.cos(grid.points[idx])
    rhs = np.cos(nu * grid.points)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_orbit_guard():
    grid = CircleGrid(64)
    with pytest.raises(riesz.OrbitError):
        riesz.contracted_angle_indices(32, grid)


def test_mean_log_converges():
    sched = riesz.make_schedule(20)
    errs = []
    for m in (2 ** 12, 2 ** 14):
        diag = riesz.cosine_product_bounds(sched, CircleGrid(m), 20, n_lo=5)
        errs.append(abs(diag.summary["mean_log_one_minus_cos"] - riesz.NEG_LOG_2))
    assert errs[1] < errs[0]
    assert errs[1] < 0.01


def test_degenerate_point_masked():
    sched = riesz.make_schedule(3)
    grid = CircleGrid(1024)
    diag = riesz.cosine_product_bounds(sched, grid, 3, n_lo=1)
    # t = 0 is a grid point and a zero of every factor
    assert diag.masked[512]


def test_cross_identity():
    sched = riesz.make_schedule(30)
    err = riesz.cross_identity_max_error(sched, CircleGrid(2 ** 13), 30)
    assert err < 1e-9


def test_almost_orthogonality_bound():
    # the 2^-(k+k') targets sit near the grid-quadrature noise floor; the
    # bound clears it from M = 2^20 upward
    sched = riesz.make_schedule(6)
    mat = riesz.almost_orthogonality(sched, CircleGrid(2 ** 20))
    for i in range(6):
        for j in range(6):
            if i != j:
                assert mat[i, j] < 2.0 ** -(i + 1 + j + 1), (i, j)
    # diagonal carries the full norm, not the off-diagonal bound
    assert mat[0, 0] > 0.5


def test_analytic_diag_fields():
    sched = riesz.make_schedule(40)
    diag = riesz.analytic_product_diagnostics(sched, CircleGrid(2 ** 13), 40)
    s = diag.summary
    assert 0.0 <= s["liminf_proxy_fraction"] <= 1.0
    assert 0.0 <= s["lower_bound_fraction"] <= 1.0
    assert diag.first_ok_index.shape == (2 ** 13,)


def test_qn_trivial_upper():
    # |1 - e^{i nu t}| <= 2 so log |q_n| <= n log 2
    sched = riesz.make_schedule(10)
    grid = CircleGrid(2 ** 12)
    diag = riesz.analytic_product_diagnostics(sched, grid, 10, n_lo=1)
    assert diag.min_trace[~diag.masked].max() <= 10 * math.log(2.0) + 1e-9


def test_clt_base_case_and_scaling():
    sched = riesz.make_schedule(60)
    grid = CircleGrid(2 ** 13)
    base = riesz.clt_check(sched, grid, 1)
    assert 0.0 < base["ks_distance"] <= 1.0  # reported, not gated
    d1 = riesz.clt_check(sched, grid, 60)["ks_distance"]
    d2 = riesz.clt_check(sched, CircleGrid(2 ** 14), 60)["ks_distance"]
    assert abs(d1 - d2) < 0.01


def test_export_csv(tmp_path):
    sched = riesz.make_schedule(5)
    diag = riesz.cosine_product_bounds(sched, CircleGrid(1024), 5, n_lo=1)
    riesz.export_diagnostics_csv(diag, tmp_path / "d.csv")
    text = (tmp_path / "d.csv").read_text().splitlines()
    assert text[0] == "t,first_ok_index,min_log_trace,masked"
    assert len(text) > 10
