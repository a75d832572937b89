from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prsclt.errors import ConvergenceError
from prsclt.spectral import build_covariance
from prsclt.stieltjes import closed_form_identity, perturbation_factor, solve_fixed_point

LAMS = (0.01, 0.1, 1.0, 10.0, 100.0)
PHIS = (0.1, 0.5, 1.0, 2.0, 5.0)


def _spectra() -> dict[str, np.ndarray]:
    return {
        "identity": np.ones(200),
        "ar1_05": build_covariance("ar1", 200, m=0, rho=0.5).eigenvalues,
        "ar1_09": build_covariance("ar1", 200, m=0, rho=0.9).eigenvalues,
        "two_point": np.r_[np.full(100, 0.5), np.full(100, 3.0)],
    }


def _rhs(sig: np.ndarray, phi: float, lam: float, mv: float) -> float:
    return lam + phi * float(np.mean(sig / (1.0 + mv * sig)))


def test_no_sampling_limit():
    pt = solve_fixed_point(np.array([0.3, 2.0, 5.0]), 0.0, 2.0)
    assert pt.m_value == pytest.approx(0.5, abs=1e-14)
    assert pt.m_prime == pytest.approx(0.25, abs=1e-14)
    assert pt.tilting == pytest.approx(1.0, abs=1e-14)


def test_known_values():
    assert solve_fixed_point(np.ones(5), 1.0, 1.0).m_value == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-12)
    assert solve_fixed_point(np.ones(5), 0.5, 0.5).m_value == pytest.approx(math.sqrt(2), abs=1e-12)


def test_closed_form_examples():
    pt = closed_form_identity(1.0, 1.0)
    assert pt.m_value == pytest.approx(0.6180340, abs=1e-7)
    assert pt.tilting == pytest.approx(1 - 4 / (math.sqrt(5) + 3) ** 2, abs=1e-14)
    assert pt.tilting == pytest.approx(0.8541020, abs=1e-7)
    assert closed_form_identity(2.0, 1.0).m_value == pytest.approx(math.sqrt(2) - 1, abs=1e-14)
    for lam in (0.1, 3.0):
        z = closed_form_identity(0.0, lam)
        assert z.m_value == pytest.approx(1 / lam, rel=1e-14)
        assert z.tilting == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("name", ["identity", "ar1_05", "ar1_09", "two_point"])
def test_fixed_point_residual_grid(name):
    sig = _spectra()[name]
    for lam in LAMS:
        for phi in PHIS:
            pt = solve_fixed_point(sig, phi, lam)
            assert abs(1.0 / pt.m_value - _rhs(sig, phi, lam, pt.m_value)) <= 1e-12 * max(1.0, 1.0 / pt.m_value)
            assert pt.m_value > 0 and pt.m_prime > 0
            assert 0.0 < pt.tilting <= 1.0


@pytest.mark.parametrize("name", ["identity", "ar1_05", "ar1_09", "two_point"])
def test_tilting_monotone_in_lambda(name):
    sig = _spectra()[name]
    for phi in PHIS:
        r = [solve_fixed_point(sig, phi, lam).tilting for lam in LAMS]
        assert all(a <= b + 1e-15 for a, b in zip(r, r[1:]))


def test_tilting_tends_to_one():
    assert solve_fixed_point(np.ones(10), 1.0, 1e6).tilting > 1 - 1e-5


def test_finite_difference_derivative():
    for sig in _spectra().values():
        for lam in LAMS:
            for phi in PHIS:
                h = 1e-6 * lam
                up = solve_fixed_point(sig, phi, lam + h).m_value
                dn = solve_fixed_point(sig, phi, lam - h).m_value
                fd = -(up - dn) / (2 * h)
                assert solve_fixed_point(sig, phi, lam).m_prime == pytest.approx(fd, rel=1e-5)


def test_argument_errors():
    with pytest.raises(ValueError):
        solve_fixed_point(np.ones(3), 1.0, 0.0)
    with pytest.raises(ValueError):
        solve_fixed_point(np.array([1.0, -0.5]), 1.0, 1.0)
    with pytest.raises(ValueError):
        closed_form_identity(1.0, -1.0)


def test_convergence_error_carries_residual():
    with pytest.raises(ConvergenceError) as info:
        solve_fixed_point(np.ones(3), 5.0, 0.01, max_iter=1)
    assert info.value.iterations == 1
    assert info.value.residual > 0


@given(phi=st.floats(0.01, 20.0), lam=st.floats(1e-3, 1e3))
@settings(max_examples=60, deadline=None)
def test_solver_agrees_with_closed_form(phi, lam):
    a = solve_fixed_point(np.ones(4), phi, lam)
    b = closed_form_identity(phi, lam)
    assert abs(a.m_value - b.m_value) <= 1e-10 * max(1.0, b.m_value)
    assert abs(a.tilting - b.tilting) <= 1e-10


def test_perturbation_factor_examples():
    cov = build_covariance("identity", 10, m=5)
    pt = solve_fixed_point(cov.eigenvalues, 1.0, 1.0)
    # m' = 1 / (1/m^2 - 1/(1+m)^2) = 1/sqrt(5) at phi = lam = 1
    assert pt.m_prime == pytest.approx(1 / math.sqrt(5), abs=1e-12)
    assert perturbation_factor(cov, pt) == pytest.approx(0.5 * pt.m_prime / (1 + pt.m_value) ** 2, abs=1e-14)
    assert perturbation_factor(cov, pt) == pytest.approx(0.0854102, abs=1e-7)
    empty = build_covariance("ar1", 10, m=0, rho=0.5)
    assert perturbation_factor(empty, solve_fixed_point(empty.eigenvalues, 1.0, 1.0)) == 0.0


def test_perturbation_factor_direct_loop():
    cov = build_covariance("ar1", 40, m=12, rho=0.7, mask="random", mask_seed=5)
    pt = solve_fixed_point(cov.eigenvalues, 0.8, 0.5)
    u = cov.eigenvectors
    total = 0.0
    for i in range(40):
        s = cov.eigenvalues[i]
        overlap = sum(u[k, i] ** 2 for k in range(40) if cov.causal_mask[k])
        total += 0.8 * pt.m_prime * s**3 / (1 + s * pt.m_value) ** 2 * overlap
    assert perturbation_factor(cov, pt) == pytest.approx(total / 40, abs=1e-12)
