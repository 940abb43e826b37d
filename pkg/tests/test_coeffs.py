import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parreg import coeffs
from parreg.errors import NotPSD, ReversedInterval


def example_degenerate_path():
    """c(t) = [[1, t/2], [t/2, t^2]]: degenerate second block, block constant 3/4."""
    return coeffs.polynomial_path([
        np.array([[1.0, 0.0], [0.0, 0.0]]),
        np.array([[0.0, 0.5], [0.5, 0.0]]),
        np.array([[0.0, 0.0], [0.0, 1.0]]),
    ])


def test_constant_integrand():
    path = coeffs.constant_path(np.eye(2))
    np.testing.assert_allclose(coeffs.cov_accumulate(path, 0.0, 2.0), 2.0 * np.eye(2),
                               rtol=1e-14)


def test_quadratic_integrand_near_exact():
    path = coeffs.polynomial_path([np.diag([1.0, 0.0]), np.zeros((2, 2)),
                                   np.diag([0.0, 1.0])])
    got = coeffs.cov_accumulate(path, 0.0, 1.0)
    np.testing.assert_allclose(got, np.diag([1.0, 1.0 / 3.0]), atol=1e-10)


def test_reversed_interval():
    path = coeffs.constant_path(np.eye(2))
    with pytest.raises(ReversedInterval):
        coeffs.cov_accumulate(path, 1.0, 0.0)


def test_additivity_at_shared_nodes():
    path = example_degenerate_path()
    left = coeffs.cov_accumulate(path, 0.0, 1.0)
    right = coeffs.cov_accumulate(path, 1.0, 2.0)
    whole = coeffs.cov_accumulate(path, 0.0, 2.0)
    np.testing.assert_allclose(left + right, whole, rtol=1e-13, atol=1e-15)


def test_accumulation_monotone():
    path = example_degenerate_path()
    s = -1.0
    prev = coeffs.cov_accumulate(path, s, 0.5)
    for r in [1.0, 1.7, 2.4]:
        cur = coeffs.cov_accumulate(path, s, r)
        assert np.linalg.eigvalsh(cur - prev)[0] >= -1e-12
        prev = cur


def test_certify_example_block_constant():
    path = example_degenerate_path()
    cert = coeffs.certify_parabolicity(path, 1, np.linspace(-5.0, 5.0, 501))
    assert cert.passed
    np.testing.assert_allclose(cert.lam, 0.75, atol=1e-6)


def test_certify_identity_full_block():
    d = 3
    cert = coeffs.certify_parabolicity(coeffs.constant_path(np.eye(d)), d, [0.0, 1.0])
    assert cert.lam == 1.0 and cert.passed


def test_certify_degenerate_first_block_fails():
    path = coeffs.constant_path(np.diag([0.0, 1.0]))
    cert = coeffs.certify_parabolicity(path, 1, [0.0])
    assert cert.lam == 0.0
    assert not cert.passed


def test_certify_rejects_indefinite():
    path = coeffs.constant_path(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(NotPSD) as err:
        coeffs.certify_parabolicity(path, 1, [0.0, 0.5])
    assert err.value.t == 0.0


def test_certificate_scales_linearly():
    path = example_degenerate_path()
    grid = np.linspace(-3.0, 3.0, 301)
    base = coeffs.certify_parabolicity(path, 1, grid).lam
    scaled = coeffs.certify_parabolicity(coeffs.scale_path(path, 2.5), 1, grid).lam
    np.testing.assert_allclose(scaled, 2.5 * base, atol=5e-8)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1.5, 1.5), min_size=9, max_size=9))
def test_full_block_constant_equals_min_eigenvalue(entries):
    m = np.array(entries).reshape(3, 3)
    c = m @ m.T
    lam = coeffs.directional_lambda(c, 3)
    np.testing.assert_allclose(lam, max(0.0, np.linalg.eigvalsh(c)[0]), atol=1e-7)


def test_table_path_linear_interpolation():
    ts = [0.0, 1.0, 2.0]
    mats = [np.eye(2) * v for v in [1.0, 3.0, 5.0]]
    path = coeffs.table_path(ts, mats)
    np.testing.assert_allclose(path(0.5), 2.0 * np.eye(2))
    # clamped outside the table
    np.testing.assert_allclose(path(-4.0), np.eye(2))
    np.testing.assert_allclose(path(9.0), 5.0 * np.eye(2))


def test_table_path_from_csv():
    text = "t,c11,c12,c21,c22\n0,1,0,0,2\n1,3,0,0,4\n"
    path = coeffs.table_path_from_csv(text)
    np.testing.assert_allclose(path(0.5), np.diag([2.0, 3.0]))
