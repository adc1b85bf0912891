import numpy as np
import pytest
from hypothesis import given, strategies as st

from ddest.frame import OtfsConfig
from ddest.kernel import kernel
from ddest.ssr import (
    Measurement1D,
    VirtualGrid,
    assemble_offgrid,
    build_grid,
    build_measurement,
    max_sparsity,
    steering,
)

CFG = OtfsConfig()


def test_grid_doppler_r08():
    g = build_grid(3, 4, 0.8, 0.8)
    assert g.N_nu == 8
    np.testing.assert_allclose(g.k_bar, [-3.0, -2.2, -1.4, -0.6, 0.2, 1.0, 1.8, 2.6], atol=1e-12)


def test_grid_delay_r08():
    g = build_grid(3, 4, 0.8, 0.8)
    assert g.M_tau == 5
    np.testing.assert_allclose(g.l_bar, [0, 0.8, 1.6, 2.4, 3.2], atol=1e-12)


def test_grid_r05():
    g = build_grid(3, 4, 0.5, 0.5)
    assert (g.N_nu, g.M_tau, g.size) == (12, 8, 96)


def test_grid_ceil_roundoff():
    assert build_grid(3, 4, 0.2, 0.2).M_tau == 20
    assert build_grid(3, 4, 0.2, 0.2).N_nu == 30
    assert build_grid(3, 4, 0.7, 0.9).N_nu == 9


def test_grid_covers_range_below_upper_end():
    for r in (0.2, 0.3, 0.5, 0.7, 0.8, 0.9):
        g = build_grid(3, 4, r, r)
        assert g.k_bar[0] == -3 and g.k_bar[-1] < 3
        assert g.l_bar[0] == 0 and g.l_bar[-1] < 4
        assert g.k_bar[-1] + r >= 3 - 1e-9 and g.l_bar[-1] + r >= 4 - 1e-9


def test_closed_grid_reaches_upper_end():
    g = build_grid(3, 4, 0.8, 0.8, closed=True)
    assert (g.N_nu, g.M_tau) == (9, 6)
    assert g.k_bar[-1] >= 3 and g.l_bar[-1] >= 4


@pytest.mark.parametrize("r", [0, -0.5, 1.5])
def test_bad_resolution(r):
    with pytest.raises(ValueError):
        build_grid(3, 4, r, 0.5)
    with pytest.raises(ValueError):
        build_grid(3, 4, 0.5, r)


def test_max_sparsity():
    assert max_sparsity(35, 40) == 9
    assert max_sparsity(35, 96) == 7
    assert max_sparsity(2, 1000) == 1
    assert max_sparsity(100, 3) == 3


@given(st.integers(0, 95))
def test_joint_index_roundtrip(g):
    grid = build_grid(3, 4, 0.5, 0.5)
    k2, l2 = grid.unravel(g)
    assert grid.index(k2, l2) == g
    assert grid.point(g) == (grid.k_bar[k2], grid.l_bar[l2])
    assert grid.nearest(*grid.point(g)) == g


def test_measurement_column_definition():
    grid = build_grid(3, 4, 0.5, 0.5)
    meas = build_measurement(grid, CFG, CFG.pilot_amp)
    assert meas.shape == (35, 96)
    g = grid.index(5, 3)
    kb, lb = grid.point(g)
    for k in range(CFG.N_T):
        for l in range(CFG.M_T):
            v = CFG.pilot_amp * kernel(k - 3 - kb, 32) * kernel(l - lb, 32)
            assert meas.phi[k * 5 + l, g] == pytest.approx(v, abs=1e-12)
    assert meas.n_sparse == 7


def test_single_column_grid_is_separable():
    grid = VirtualGrid(1.0, 1.0, np.array([0.0]), np.array([0.0]))
    meas = build_measurement(grid, CFG, 1.0)
    wv = kernel(np.arange(-3, 4), 32)
    wt = kernel(np.arange(5), 32)
    np.testing.assert_allclose(meas.phi[:, 0], np.outer(wv, wt).ravel(), atol=1e-14)


def test_integer_grid_columns_are_impulses():
    grid = build_grid(3, 4, 1.0, 1.0)
    meas = build_measurement(grid, CFG, CFG.pilot_amp)
    mags = np.abs(meas.phi) / CFG.pilot_amp
    assert np.all((mags < 1e-12) | (np.abs(mags - 1) < 1e-12))
    assert np.all(np.sum(mags > 0.5, axis=0) == 1)


def test_derivatives_match_finite_differences():
    grid = build_grid(3, 4, 0.5, 0.5)
    meas = build_measurement(grid, CFG, CFG.pilot_amp)
    h = 1e-6
    for g in (0, 17, 50, 95):
        k, l = grid.point(g)
        fd_k = (steering(k + h, l, CFG, CFG.pilot_amp) - steering(k - h, l, CFG, CFG.pilot_amp))[:, 0] / (2 * h)
        fd_l = (steering(k, l + h, CFG, CFG.pilot_amp) - steering(k, l - h, CFG, CFG.pilot_amp))[:, 0] / (2 * h)
        assert np.linalg.norm(fd_k - meas.phi_dnu[:, g]) / np.linalg.norm(meas.phi_dnu[:, g]) < 1e-6
        assert np.linalg.norm(fd_l - meas.phi_dtau[:, g]) / np.linalg.norm(meas.phi_dtau[:, g]) < 1e-6


def test_assemble_zero_offsets_is_phi():
    meas = build_measurement(build_grid(3, 4, 0.5, 0.5), CFG, CFG.pilot_amp)
    assert np.array_equal(assemble_offgrid(meas, np.zeros(96), np.zeros(96)), meas.phi)
    assert np.array_equal(assemble_offgrid(meas), meas.phi)


def test_assemble_single_offset():
    meas = build_measurement(build_grid(3, 4, 0.5, 0.5), CFG, CFG.pilot_amp)
    kappa = np.zeros(96)
    kappa[10] = 0.1
    out = assemble_offgrid(meas, kappa, None)
    diff = out - meas.phi
    np.testing.assert_allclose(diff[:, 10], 0.1 * meas.phi_dnu[:, 10], atol=1e-14)
    assert np.all(np.delete(diff, 10, axis=1) == 0)


def test_assemble_length_mismatch():
    meas = build_measurement(build_grid(3, 4, 0.5, 0.5), CFG, CFG.pilot_amp)
    with pytest.raises(ValueError):
        assemble_offgrid(meas, np.zeros(95), None)
    with pytest.raises(ValueError):
        assemble_offgrid(meas, None, np.zeros(97))


def test_taylor_error_is_second_order():
    grid = build_grid(3, 4, 0.5, 0.5)
    meas = build_measurement(grid, CFG, CFG.pilot_amp)
    g = grid.index(6, 2)
    k0, l0 = grid.point(g)
    errs = []
    for d in (0.2, 0.1, 0.05):
        kappa = np.zeros(96)
        iota = np.zeros(96)
        kappa[g], iota[g] = d, -d
        lin = assemble_offgrid(meas, kappa, iota)[:, g]
        exact = steering(k0 + d, l0 - d, CFG, CFG.pilot_amp)[:, 0]
        errs.append(np.linalg.norm(lin - exact))
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.15)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.1)


def _linear_error(meas, grid, g, dk, dl):
    k0, l0 = grid.point(g)
    kappa = np.zeros(grid.size)
    iota = np.zeros(grid.size)
    kappa[g], iota[g] = dk, dl
    lin = assemble_offgrid(meas, kappa, iota)[:, g]
    exact = steering(k0 + dk, l0 + dl, CFG, CFG.pilot_amp)[:, 0]
    return np.linalg.norm(lin - exact) / np.linalg.norm(exact)


def test_linearization_accuracy_quarter_bin_per_axis():
    grid = build_grid(3, 4, 0.5, 0.5)
    meas = build_measurement(grid, CFG, CFG.pilot_amp)
    for g in range(grid.size):
        for d in (-0.125, 0.125):
            assert _linear_error(meas, grid, g, d, 0.0) < 0.3
            assert _linear_error(meas, grid, g, 0.0, d) < 0.3


@pytest.mark.xfail(strict=True, reason="kernel phase ramp: per-axis error is about 0.49 at half a bin")
def test_linearization_accuracy_half_bin():
    grid = build_grid(3, 4, 0.5, 0.5)
    meas = build_measurement(grid, CFG, CFG.pilot_amp)
    worst = max(_linear_error(meas, grid, g, 0.25, 0.0) for g in range(grid.size))
    assert worst < 0.3


def test_measurement1d_shape_properties():
    m = Measurement1D(np.zeros((35, 40), complex), None, None, np.zeros(40), np.zeros(40), 0.8, 0.8)
    assert m.shape == (35, 40)
    assert m.n_sparse == 9
