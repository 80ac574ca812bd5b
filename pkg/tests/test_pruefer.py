"""Log-derivative branches, the Robin constant, and the comparison envelopes."""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from gapmodel.errors import DomainError, HypothesisError
from gapmodel.model import ModelParams
from gapmodel.pruefer import (
    find_ck,
    lower_bound_functions,
    psi_left,
    psi_right,
    robin_boundary_report,
    robin_eigenfunction,
    supersolution,
    threshold_s,
    upper_bound_left,
    upper_bound_right,
)


def flat_ck(k, D):
    """Closed-form Robin constant for K = 0: nu tan(nu D/2) = k, c = nu^2 - pi^2/D^2."""
    nu = brentq(
        lambda v: v * math.tan(v * D / 2.0) - k,
        1e-12, math.pi / D * (1.0 - 1e-12), xtol=1e-15,
    )
    return nu**2 - math.pi**2 / D**2


class TestRobinConstant:
    @pytest.mark.parametrize("k,D", [(7.0, 1.7), (10.0, 1.0), (0.5, 2.4), (1000.0, 0.9)])
    def test_flat_closed_form(self, k, D):
        p = ModelParams(n=2, K=0.0, D=D)
        assert find_ck(k, p) == pytest.approx(flat_ck(k, D), rel=1e-10, abs=1e-11)

    def test_small_k_still_exists(self):
        # the constant exists for every positive k, down to tiny values
        p = ModelParams(n=3, K=3.0, D=1.5)
        c = find_ck(1e-3, p)
        assert -math.pi**2 / 1.5**2 < c < 0.0

    def test_monotone_in_k(self):
        p = ModelParams(n=2, K=0.5, D=1.0)
        cs_ = [find_ck(k, p) for k in (1.0, 10.0, 100.0, 1000.0)]
        assert cs_ == sorted(cs_)
        assert cs_[-1] < 0.0

    def test_rejects_nonpositive_k(self):
        with pytest.raises(DomainError):
            find_ck(0.0, ModelParams(n=2, K=0.0, D=1.0))
        with pytest.raises(DomainError):
            find_ck(-3.0, ModelParams(n=2, K=0.0, D=1.0))

    def test_frozen_value(self):
        p = ModelParams(n=2, K=0.5, D=1.0)
        assert find_ck(10.0, p) == pytest.approx(-2.8973622366079987, rel=1e-11)


class TestBranches:
    @pytest.mark.parametrize("n,K,k", [(2, 0.1, 10.0), (5, 1.0, 100.0)])
    def test_two_branches_agree_at_ck(self, n, K, k):
        p = ModelParams(n=n, K=K, D=1.0)
        ck = find_ck(k, p)
        left = psi_left(ck, p)
        right = psi_right(k, ck, p)
        zs = np.linspace(0.05 * p.half, 0.95 * p.half, 201)
        gap_ = np.max(np.abs(left.psi_at(zs) - right.psi_at(zs)))
        assert gap_ < 1e-7

    def test_boundary_values(self):
        p = ModelParams(n=2, K=0.5, D=1.0)
        ck = find_ck(10.0, p)
        left = psi_left(ck, p)
        assert abs(left.psi_at(0.0)) < 1e-12
        right = psi_right(10.0, ck, p)
        assert right.psi_at(p.half) == pytest.approx(-10.0, abs=1e-9)

    def test_equation_residual(self):
        p = ModelParams(n=5, K=1.0, D=1.0)
        ck = find_ck(10.0, p)
        assert psi_left(ck, p).residual_max() < 1e-8
        assert psi_right(10.0, ck, p).residual_max() < 1e-8

    def test_evaluation_outside_interval(self):
        p = ModelParams(n=2, K=0.0, D=1.0)
        left = psi_left(find_ck(10.0, p), p)
        with pytest.raises(DomainError):
            left.psi_at(0.7)


class TestRobinEigenfunction:
    def test_boundary_report(self):
        for n, K in ((2, 0.1), (5, 1.0)):
            rep = robin_boundary_report(100.0, (n, K, 1.0))
            assert rep["phi_right_defect"] < 1e-12
            assert rep["dphi_right_defect"] < 1e-8
            assert rep["dphi_left_defect"] < 1e-8
            assert rep["positive"]

    def test_normalization(self):
        gf = robin_eigenfunction(10.0, (2, 0.5, 1.0))
        assert gf.values[-1] == pytest.approx(0.1, rel=1e-12)
        assert np.all(gf.values > 0)


class TestSupersolution:
    def test_zero_shift_is_the_log_derivative(self):
        p = ModelParams(n=2, K=0.5, D=1.0)
        ck = find_ck(10.0, p)
        sup0 = supersolution(10.0, 0.0, p, ck=ck)
        left = psi_left(ck, p)
        inner = (sup0.z > 0.01) & (sup0.z < 0.49)
        assert np.max(np.abs(sup0.values[inner] - left.psi_at(sup0.z[inner]))) < 1e-8

    def test_monotone_in_shift(self):
        p = ModelParams(n=2, K=0.5, D=1.0)
        ck = find_ck(10.0, p)
        lo = supersolution(10.0, 8.0, p, ck=ck)
        hi = supersolution(10.0, 10.0, p, ck=ck)
        assert np.min(hi.values - lo.values) >= 0.0

    def test_negative_shift_rejected(self):
        with pytest.raises(DomainError):
            supersolution(10.0, -1.0, (2, 0.5, 1.0))

    def test_custom_grid(self):
        p = ModelParams(n=2, K=0.5, D=1.0)
        z = np.array([0.0, 0.1, 0.3, 0.5])
        gf = supersolution(10.0, 8.0, p, z=z)
        assert gf.z.shape == (4,)
        with pytest.raises(DomainError):
            supersolution(10.0, 8.0, p, z=np.array([0.0, 0.6]))


class TestEnvelopes:
    def test_threshold_value(self):
        p = ModelParams(n=2, K=0.5, D=1.0)
        thr = threshold_s(10.0, p)
        assert thr == pytest.approx(6.9722421644813597, rel=1e-10)
        ck = find_ck(10.0, p)
        assert thr == pytest.approx(ck + math.pi**2, rel=1e-12)

    def test_left_envelope_dominates(self):
        p = ModelParams(n=2, K=0.5, D=1.0)
        c = find_ck(10.0, p) - 8.0
        lam, bound = upper_bound_left(c, p)
        branch = psi_left(c, p)
        zs = np.linspace(0.0, p.half, 301)
        assert np.all(branch.psi_at(zs) <= bound(zs) + 1e-9)

    def test_right_envelope_dominates(self):
        p = ModelParams(n=2, K=0.5, D=1.0)
        k = 10.0
        c = find_ck(k, p) + 8.0
        lam, bound, z_from = upper_bound_right(k, c, p)
        branch = psi_right(k, c, p, allow_partial=True)
        lo = max(z_from + 0.02, branch.interval[0] + 0.01)
        zs = np.linspace(lo, p.half, 301)
        assert np.all(branch.psi_at(zs) <= bound(zs) + 1e-8)

    def test_floors_below_shifted_branches(self):
        p = ModelParams(n=2, K=0.5, D=1.0)
        k, s = 10.0, 8.0
        ck = find_ck(k, p)
        fl = lower_bound_functions(k, s, p, ck=ck)
        assert fl["threshold"] < s
        left = psi_left(ck - s, p)
        zs = np.linspace(0.0, 0.2 * p.half, 101)
        assert np.all(left.psi_at(zs) >= fl["left_floor"](zs) - 1e-9)
        right = psi_right(k, ck + s, p, allow_partial=True)
        lo = max(fl["right_valid_from"] + 0.02, right.interval[0] + 0.01)
        zs = np.linspace(lo, p.half, 101)
        assert np.all(right.psi_at(zs) >= fl["right_floor"](zs) - 1e-8)

    def test_below_threshold_rejected(self):
        p = ModelParams(n=2, K=0.5, D=1.0)
        with pytest.raises(HypothesisError):
            lower_bound_functions(10.0, 1.0, p)

    def test_negative_curvature_rejected(self):
        p = ModelParams(n=2, K=-0.5, D=1.0)
        with pytest.raises(HypothesisError):
            upper_bound_left(-3.0, p)
