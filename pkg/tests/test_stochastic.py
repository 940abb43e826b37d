import math

import numpy as np
import pytest

from parreg import coeffs, fields, solver, stochastic
from parreg.errors import BadPartition, Indefinite, NotSymmetric, ReversedInterval
from parreg.grids import Field, make_grid


def test_matrix_sqrt_identity():
    np.testing.assert_array_equal(stochastic.matrix_sqrt_psd(np.eye(3)), np.eye(3))


def test_matrix_sqrt_degenerate_diagonal():
    np.testing.assert_allclose(stochastic.matrix_sqrt_psd(np.diag([4.0, 0.0])),
                               np.diag([2.0, 0.0]), atol=1e-14)


def test_matrix_sqrt_squares_back():
    m = np.array([[2.0, 1.0], [1.0, 2.0]])
    s = stochastic.matrix_sqrt_psd(m)
    np.testing.assert_allclose(s @ s, m, rtol=1e-10)
    np.testing.assert_allclose(s, s.T, atol=1e-14)


def test_matrix_sqrt_rejects_bad_input():
    with pytest.raises(NotSymmetric):
        stochastic.matrix_sqrt_psd(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(Indefinite):
        stochastic.matrix_sqrt_psd(np.array([[1.0, 2.0], [2.0, 1.0]]))


def const_path_mat(m, a, b):
    m = np.asarray(m, dtype=float)
    return stochastic.MatrixPath(dim=m.shape[0], eval_fn=lambda t: m, a=a, b=b)


def test_integral_empty_interval():
    f = const_path_mat(np.eye(2), 0.0, 0.0)
    out = stochastic.stochastic_integral(f, [0.0], seed=1)
    np.testing.assert_array_equal(out, np.zeros(2))


def test_integral_zero_integrand():
    f = const_path_mat(np.zeros((2, 2)), 0.0, 1.0)
    out = stochastic.stochastic_integral(f, np.linspace(0.0, 1.0, 65), seed=9)
    np.testing.assert_array_equal(out, np.zeros(2))


def test_integral_deterministic():
    f = const_path_mat(np.eye(2), 0.0, 1.0)
    part = np.linspace(0.0, 1.0, 129)
    a = stochastic.stochastic_integral(f, part, seed=5)
    b = stochastic.stochastic_integral(f, part, seed=5)
    np.testing.assert_array_equal(a, b)
    c = stochastic.stochastic_integral(f, part, seed=6)
    assert np.any(a != c)


def test_integral_bad_partition():
    f = const_path_mat(np.eye(2), 0.0, 1.0)
    with pytest.raises(BadPartition):
        stochastic.stochastic_integral(f, [0.0, 0.5], seed=1)  # does not span
    with pytest.raises(BadPartition):
        stochastic.stochastic_integral(f, [0.0, 0.7, 0.5, 1.0], seed=1)


def test_additivity_with_shared_path():
    """Same Wiener path: integral over [a, b] = [0, b] minus [0, a].

    Verified exactly on dyadically quantized data (every partial sum is then
    an exact float), and to near machine precision on raw data.
    """
    d = 2
    part = np.linspace(0.0, 1.0, 257)
    k_split = 100
    f_full = stochastic.MatrixPath(dim=d, eval_fn=lambda t: np.diag([1.25, 0.5 + t]),
                                   a=0.0, b=1.0)
    inc = stochastic.wiener_increments(part, d, seed=42)
    j_0b = stochastic.stochastic_integral(f_full, part, 0, increments=inc)
    f_left = stochastic.MatrixPath(dim=d, eval_fn=f_full.eval_fn, a=0.0, b=part[k_split])
    j_0a = stochastic.stochastic_integral(f_left, part[: k_split + 1], 0,
                                          increments=inc[:k_split])
    f_right = stochastic.MatrixPath(dim=d, eval_fn=f_full.eval_fn, a=part[k_split], b=1.0)
    j_ab = stochastic.stochastic_integral(f_right, part[k_split:], 0,
                                          increments=inc[k_split:])
    np.testing.assert_allclose(j_0b - j_0a, j_ab, rtol=1e-13, atol=1e-15)

    # dyadic quantization: products and partial sums are exact floats
    q = 2.0 ** 20
    inc_q = np.round(inc * q) / q
    f_dyadic = stochastic.MatrixPath(dim=d, eval_fn=lambda t: np.diag([1.25, 0.75]),
                                     a=0.0, b=1.0)
    f_dl = stochastic.MatrixPath(dim=d, eval_fn=f_dyadic.eval_fn, a=0.0, b=part[k_split])
    f_dr = stochastic.MatrixPath(dim=d, eval_fn=f_dyadic.eval_fn, a=part[k_split], b=1.0)
    jb = stochastic.stochastic_integral(f_dyadic, part, 0, increments=inc_q)
    ja = stochastic.stochastic_integral(f_dl, part[: k_split + 1], 0,
                                        increments=inc_q[:k_split])
    jr = stochastic.stochastic_integral(f_dr, part[k_split:], 0,
                                        increments=inc_q[k_split:])
    np.testing.assert_array_equal(jb - ja, jr)


def test_gamma_constant_identity():
    f = const_path_mat(np.eye(2), 0.0, 1.0)
    np.testing.assert_allclose(stochastic.gamma_ab(f, 0.0, 1.0), np.eye(2), rtol=1e-13)


def test_gamma_linear_entry():
    f = stochastic.MatrixPath(dim=2, eval_fn=lambda t: np.diag([1.0, t]), a=0.0, b=1.0)
    np.testing.assert_allclose(stochastic.gamma_ab(f, 0.0, 1.0),
                               np.diag([1.0, 1.0 / 3.0]), atol=1e-12)


def test_gamma_rotation_is_isometry():
    def rot(t):
        c, s = math.cos(t), math.sin(t)
        return np.array([[c, -s], [s, c]])

    f = stochastic.MatrixPath(dim=2, eval_fn=rot, a=0.0, b=2.0)
    np.testing.assert_allclose(stochastic.gamma_ab(f, 0.0, 2.0), 2.0 * np.eye(2),
                               rtol=1e-13, atol=1e-14)


def test_gamma_reversed_interval():
    f = const_path_mat(np.eye(2), 0.0, 1.0)
    with pytest.raises(ReversedInterval):
        stochastic.gamma_ab(f, 1.0, 0.0)


def test_law_check_scalar_unit():
    f = const_path_mat(np.eye(1), 0.0, 1.0)
    rep = stochastic.mc_law_check(f, 0.0, 1.0, n=100_000, seed=2)
    np.testing.assert_array_equal(rep.target, [[2.0]])
    assert rep.passed and rep.max_z <= 3.0
    assert rep.char_fn_max_err <= rep.char_fn_tol


def test_law_check_degenerate_interval():
    f = const_path_mat(np.eye(2), 0.5, 0.5)
    rep = stochastic.mc_law_check(f, 0.5, 0.5, n=1000, seed=1)
    np.testing.assert_array_equal(rep.target, np.zeros((2, 2)))
    assert rep.passed and rep.max_z == 0.0


def test_law_check_linear_entry_target():
    f = stochastic.MatrixPath(dim=2, eval_fn=lambda t: np.diag([1.0, t]), a=0.0, b=1.0)
    rep = stochastic.mc_law_check(f, 0.0, 1.0, n=50_000, seed=3)
    np.testing.assert_allclose(rep.target, np.diag([2.0, 2.0 / 3.0]), atol=1e-12)
    assert rep.passed


def test_partition_refinement_keeps_law():
    f = stochastic.MatrixPath(dim=2, eval_fn=lambda t: np.diag([1.0, t]), a=0.0, b=1.0)
    target = 2.0 * stochastic.gamma_ab(f, 0.0, 1.0)
    n = 20_000
    for steps in (128, 256):
        part = np.linspace(0.0, 1.0, steps + 1)
        samples = math.sqrt(2.0) * stochastic._sample_integrals(f, part, n, seed=11)
        est = samples.T @ samples / n
        var = (np.outer(np.diag(target), np.diag(target)) + target ** 2) / n
        z = np.abs(est - target) / np.sqrt(np.where(var > 0, var, 1.0))
        assert float(z.max()) <= 3.0


def test_mc_solve_zero_source():
    grid = make_grid([16.0], [64], (-0.5, 1.0), 1.0 / 16.0)
    path = coeffs.constant_path(np.eye(1))
    from parreg.grids import zero_field
    est, err = stochastic.mc_solve(path, zero_field(grid), 0.0, [0.0], 2000, seed=1)
    assert est == 0.0 and err == 0.0


def test_mc_solve_after_support_is_zero():
    grid = make_grid([16.0], [64], (-0.5, 1.0), 1.0 / 16.0)
    ts = grid.times()
    tw = fields.bump((ts - 0.0) / 0.4)
    vals = tw[:, None] * np.exp(-grid.axis(0) ** 2)[None, :]
    f = Field(grid=grid, values=vals)
    path = coeffs.constant_path(np.eye(1))
    est, err = stochastic.mc_solve(path, f, 0.5, [0.0], 2000, seed=1)
    assert est == 0.0 and err == 0.0


def test_mc_solve_matches_spectral_heat():
    grid = make_grid([18.0], [256], (-0.5, 1.25), 1.0 / 32.0)
    ts = grid.times()
    tw = fields.bump((ts - 0.375) / 0.6)
    vals = tw[:, None] * np.exp(-grid.axis(0) ** 2)[None, :]
    f = Field(grid=grid, values=vals)
    path = coeffs.constant_path(np.eye(1))
    u = solver.solve_duhamel(path, f)
    xs = grid.axis(0)
    for s_idx, x_idx in [(0, 128), (8, 135)]:
        s = ts[s_idx]
        est, err = stochastic.mc_solve(path, f, s, [xs[x_idx]], 50_000, seed=7)
        ref = float(u.values[s_idx, x_idx])
        assert abs(est - ref) <= 3.0 * err + 1e-4


def test_mc_solve_degenerate_axis_stays_put():
    # diffusion only in the first coordinate: paths never move along the second
    path = coeffs.constant_path(np.diag([1.0, 0.0]))
    grid = make_grid([16.0, 16.0], [32, 16], (-0.5, 1.0), 1.0 / 8.0)
    ts = grid.times()
    tw = fields.bump((ts - 0.0) / 0.4)
    x2 = grid.axis(1)
    vals = tw[:, None, None] * np.exp(-grid.axis(0) ** 2)[None, :, None] \
        * np.exp(-x2 ** 2)[None, None, :]
    f = Field(grid=grid, values=vals)
    est, err = stochastic.mc_solve(path, f, float(ts[0]), [0.0, 0.0], 4000, seed=3)
    assert np.isfinite(est) and err > 0.0
