from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prsclt.errors import ValidationError
from prsclt.spectral import (
    CovarianceModel,
    CovSpec,
    build_covariance,
    mask_overlap,
    resolvent_diagonal,
    resolvent_summary,
    spectrum_summary,
)


def _ar1_2x2() -> CovarianceModel:
    return CovarianceModel.from_matrix(np.array([[1.0, 0.5], [0.5, 1.0]]), np.array([True, False]))


def test_identity_build():
    cov = build_covariance("identity", 4, m=2)
    np.testing.assert_array_equal(cov.matrix, np.eye(4))
    np.testing.assert_array_equal(cov.eigenvalues, np.ones(4))
    np.testing.assert_array_equal(cov.causal_mask, [True, True, False, False])
    assert cov.is_identity


def test_ar1_two_by_two_eigenvalues():
    cov = build_covariance("ar1", 2, m=1, rho=0.5)
    np.testing.assert_allclose(cov.eigenvalues, [1.5, 0.5], atol=1e-14)


def test_ar1_random_mask_is_positive_definite():
    cov = build_covariance("ar1", 100, m=10, rho=0.9, mask="random", mask_seed=7)
    assert cov.m == 10
    assert cov.eigenvalues[-1] > 0.0
    np.testing.assert_allclose(np.linalg.eigvalsh(cov.matrix)[::-1], cov.eigenvalues, atol=1e-10)


def test_block_ar1_is_block_diagonal():
    cov = build_covariance("block_ar1", 6, m=3, rho=0.5, block_size=3)
    assert cov.matrix[0, 3] == 0.0
    assert cov.matrix[0, 2] == pytest.approx(0.25)


def test_reconstruction_and_symmetric_sqrt():
    cov = build_covariance("ar1", 30, m=5, rho=0.7)
    u, s = cov.eigenvectors, cov.eigenvalues
    assert np.linalg.norm(u * s @ u.T - cov.matrix) / np.linalg.norm(cov.matrix) <= 1e-10
    np.testing.assert_allclose(cov.sqrt @ cov.sqrt, cov.matrix, atol=1e-12)
    np.testing.assert_allclose(cov.sqrt, cov.sqrt.T, atol=0)


def test_m_greater_than_p_rejected():
    with pytest.raises(ValueError):
        build_covariance("identity", 3, m=4)


def test_nonsymmetric_rejected_with_check_name():
    with pytest.raises(ValidationError, match="symmetr"):
        CovarianceModel.from_matrix(np.array([[1.0, 0.2], [0.0, 1.0]]), np.array([True, False]))


def test_indefinite_rejected_with_check_name():
    with pytest.raises(ValidationError, match="PSD|semidefinite|positive"):
        CovarianceModel.from_matrix(np.array([[1.0, 2.0], [2.0, 1.0]]), np.array([True, True]))


def test_from_file_round_trip(tmp_path):
    mat = np.array([[2.0, 0.3, 0.0], [0.3, 1.0, 0.1], [0.0, 0.1, 1.5]])
    path = tmp_path / "sigma.csv"
    np.savetxt(path, mat, delimiter=",")
    mask_path = tmp_path / "mask.txt"
    mask_path.write_text("0\n1\n1\n")
    cov = build_covariance("from_file", 3, path=path, mask="file", mask_path=mask_path)
    np.testing.assert_allclose(cov.matrix, mat)
    np.testing.assert_array_equal(cov.causal_mask, [False, True, True])


def test_from_file_nonsymmetric(tmp_path):
    path = tmp_path / "bad.csv"
    np.savetxt(path, np.array([[1.0, 0.5], [0.1, 1.0]]), delimiter=",")
    with pytest.raises(ValidationError):
        build_covariance("from_file", 2, m=1, path=path)


def test_covspec_round_trip():
    spec = CovSpec(kind="ar1", p=5, m=2, rho=0.3)
    assert CovSpec.from_dict(spec.to_dict()) == spec
    np.testing.assert_array_equal(spec.build().matrix, build_covariance("ar1", 5, m=2, rho=0.3).matrix)


def test_spectrum_summary_identity():
    s = spectrum_summary(build_covariance("identity", 10, m=4))
    np.testing.assert_allclose(s.omega, [1, 1, 1])
    np.testing.assert_allclose(s.gamma, [0.4, 0.4, 0.4])
    assert s.m_over_p == pytest.approx(0.4)


def test_spectrum_summary_diag():
    cov = CovarianceModel.from_matrix(np.diag([2.0, 1.0]), np.array([True, False]))
    s = spectrum_summary(cov)
    assert s.omega[0] == pytest.approx(1.5)
    assert s.omega[1] == pytest.approx(2.5)
    assert s.gamma[0] == pytest.approx(1.0)
    assert s.gamma[1] == pytest.approx(2.0)


def test_spectrum_summary_ar1_2x2():
    s = spectrum_summary(_ar1_2x2())
    assert s.omega[1] == pytest.approx(1.25)
    assert s.gamma[1] == pytest.approx(0.625)


@given(c=st.floats(0.1, 10.0), m=st.integers(0, 12))
@settings(max_examples=30, deadline=None)
def test_spectrum_scales_with_multiple_of_identity(c, m):
    mask = np.arange(12) < m
    s = spectrum_summary(CovarianceModel.from_matrix(c * np.eye(12), mask))
    np.testing.assert_allclose(s.omega, [c, c**2, c**3], rtol=1e-12)
    np.testing.assert_allclose(s.gamma, [m / 12 * c, m / 12 * c**2, m / 12 * c**3], rtol=1e-12, atol=1e-15)


def test_homogeneous_mask_ratio_large_p():
    cov = build_covariance("block_ar1", 2000, m=500, rho=0.6, block_size=20, mask="random", mask_seed=3)
    s = spectrum_summary(cov)
    for j in range(3):
        assert s.gamma[j] / s.omega[j] == pytest.approx(0.25, abs=0.05)


def test_resolvent_identity_values():
    cov = build_covariance("identity", 10, m=5)
    r = resolvent_summary(cov, 1.0, 1.0, 1.0, 1.0)
    assert r.pi == pytest.approx((0.5, 0.25))
    assert r.xi == pytest.approx((0.25, 0.125))
    assert r.rho[0] == pytest.approx(0.25)


def test_resolvent_empty_mask():
    cov = build_covariance("ar1", 8, m=0, rho=0.4)
    r = resolvent_summary(cov, 0.7, 0.5, 1.0, 1.0)
    assert r.xi == (0.0, 0.0)
    assert r.rho[0] == 0.0
    assert spectrum_summary(cov).gamma == (0.0, 0.0, 0.0)


def test_resolvent_ar1_full_mask():
    cov = CovarianceModel.from_matrix(np.array([[1.0, 0.5], [0.5, 1.0]]), np.array([True, True]))
    assert resolvent_summary(cov, 2.0, 1.0, 1.0, 1.0).pi[0] == pytest.approx(0.375)


def test_resolvent_nonpositive_rejected():
    with pytest.raises(ValueError):
        resolvent_summary(build_covariance("identity", 3, m=1), 0.0, 1.0, 1.0, 1.0)


def test_resolvent_matches_dense_inverse():
    cov = build_covariance("ar1", 60, m=20, rho=0.8, mask="random", mask_seed=1)
    mv = 0.37
    inv = np.linalg.inv(np.eye(60) + mv * cov.matrix)
    inv2 = inv @ inv
    r = resolvent_summary(cov, mv, 0.2, 0.5, 1.0)
    mask = cov.causal_mask
    assert r.pi[0] == pytest.approx(np.trace(inv) / 60, abs=1e-9)
    assert r.pi[1] == pytest.approx(np.trace(inv2) / 60, abs=1e-9)
    assert r.xi[0] == pytest.approx(np.sum(np.diag(inv)[mask]) / 60, abs=1e-9)
    assert r.xi[1] == pytest.approx(np.sum(np.diag(inv2)[mask]) / 60, abs=1e-9)
    np.testing.assert_allclose(resolvent_diagonal(cov, mv, 2), np.diag(inv2), atol=1e-9)
    assert r.pi[1] <= r.pi[0] and r.xi[1] <= r.xi[0] <= r.pi[0]


def test_mask_overlap_examples():
    np.testing.assert_allclose(mask_overlap(build_covariance("identity", 4, m=2)), [1, 1, 0, 0])
    np.testing.assert_allclose(mask_overlap(build_covariance("ar1", 9, m=9, rho=0.3)), np.ones(9), atol=1e-12)
    np.testing.assert_allclose(mask_overlap(_ar1_2x2()), [0.5, 0.5], atol=1e-12)


@given(rho=st.floats(-0.95, 0.95), m=st.integers(0, 25), seed=st.integers(0, 2**31))
@settings(max_examples=25, deadline=None)
def test_mask_overlap_sums_to_m(rho, m, seed):
    cov = build_covariance("ar1", 25, m=m, rho=rho, mask="random", mask_seed=seed)
    ov = mask_overlap(cov)
    assert abs(ov.sum() - m) <= 1e-10
    assert np.all((ov >= -1e-12) & (ov <= 1 + 1e-12))


def test_rho_matches_difference_form():
    cov = build_covariance("ar1", 50, m=20, rho=0.6, mask="random", mask_seed=9)
    mv = 0.8
    r = resolvent_summary(cov, mv, 0.5, 1.0, 1.0)
    s = spectrum_summary(cov)
    c = 20 / 50
    (pi1, pi2), (xi1, xi2) = r.pi, r.xi
    assert r.rho[0] == pytest.approx((mv * s.gamma[0] + xi1 - c) / mv**2, rel=1e-10)
    assert r.rho[1] == pytest.approx((1 - 2 * pi1 + pi2) / mv**2, rel=1e-10)
    assert r.rho[2] == pytest.approx((3 * xi1 - xi2 + mv * s.gamma[0] - 2 * c) / mv**3, rel=1e-9)


def test_rho_finite_for_tiny_stieltjes_value():
    cov = build_covariance("ar1", 40, m=10, rho=0.5)
    r = resolvent_summary(cov, 1e-9, 1e-18, 1.0, 1e9)
    s = spectrum_summary(cov)
    assert r.rho[0] == pytest.approx(s.gamma[1], rel=1e-6)
    assert r.rho[1] == pytest.approx(s.omega[1], rel=1e-6)
    assert r.rho[2] == pytest.approx(s.gamma[2], rel=1e-6)
