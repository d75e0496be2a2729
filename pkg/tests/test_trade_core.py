"""Core matrix, admissibility, growth rate, and structural-check tests."""

from __future__ import annotations

import math

import numpy as np
import pytest

import oracles
from conftest import EXAMPLE_PROBS, EXAMPLE_RETURNS, interior_points
from drawdown_risk import (
    AdmissibleSet,
    DomainError,
    Membership,
    PortionVector,
    TradeMatrix,
    ValidationError,
    check_no_risk_free,
    expected_log_z,
    gamma_mean,
    hpr,
    membership,
)
from drawdown_risk.trade_core import matrix_rank


class TestTradeMatrixValidation:
    def test_accepts_reference_game(self, example_matrix):
        assert example_matrix.n_periods == 4
        assert example_matrix.n_systems == 2
        assert example_matrix.probs.sum() == pytest.approx(1.0, abs=1e-15)

    def test_uniform_default_probs(self):
        m = TradeMatrix([[1.0], [-0.5]])
        assert np.allclose(m.probs, [0.5, 0.5])

    def test_rejects_bad_prob_sum(self):
        with pytest.raises(ValidationError):
            TradeMatrix([[1.0], [-0.5]], [0.6, 0.6])

    def test_rejects_nonpositive_probs(self):
        with pytest.raises(ValidationError):
            TradeMatrix([[1.0], [-0.5]], [1.0, 0.0])

    def test_rejects_nonfinite_returns(self):
        with pytest.raises(ValidationError):
            TradeMatrix([[np.nan], [1.0]])

    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            TradeMatrix(np.zeros((0, 2)))

    def test_returns_are_read_only(self, example_matrix):
        with pytest.raises(ValueError):
            example_matrix.returns[0, 0] = 7.0


class TestHpr:
    def test_zero_portions(self, example_matrix):
        for i in range(1, 5):
            assert hpr(example_matrix, [0.0, 0.0], i) == 1.0

    def test_row_four(self, example_matrix):
        assert hpr(example_matrix, [0.1, 0.1], 4) == pytest.approx(0.75, abs=1e-15)

    def test_row_one(self, example_matrix):
        assert hpr(example_matrix, [0.1, 0.1], 1) == pytest.approx(1.2, abs=1e-15)

    def test_index_out_of_range(self, example_matrix):
        with pytest.raises(IndexError):
            hpr(example_matrix, [0.1, 0.1], 0)
        with pytest.raises(IndexError):
            hpr(example_matrix, [0.1, 0.1], 5)


class TestMembership:
    def test_origin_interior(self, example_matrix):
        assert membership(example_matrix, [0.0, 0.0]) is Membership.INTERIOR

    def test_interior_point(self, example_matrix):
        assert membership(example_matrix, [0.2, 0.2]) is Membership.INTERIOR

    def test_outside_point(self, example_matrix):
        assert membership(example_matrix, [2.0, 1.0]) is Membership.OUTSIDE

    def test_boundary_point(self, example_matrix):
        # third row has 1 + <t, (0, 0.5)> = 0 exactly
        assert membership(example_matrix, [0.0, 0.5]) is Membership.BOUNDARY

    def test_classification_matches_direct_reevaluation(self, example_matrix):
        rng = np.random.default_rng(7)
        region = AdmissibleSet(example_matrix)
        for _ in range(10_000):
            phi = rng.uniform(-1.5, 1.5, size=2)
            worst = min(oracles.hprs(EXAMPLE_RETURNS, phi))
            got = region.classify(phi)
            if worst > 1e-12:
                assert got is Membership.INTERIOR
            elif worst >= -1e-12:
                assert got is Membership.BOUNDARY
            else:
                assert got is Membership.OUTSIDE

    def test_compactness_every_ray_exits(self, example_matrix):
        # bisection on the membership classification, no closed-form radius
        region = AdmissibleSet(example_matrix)
        rng = np.random.default_rng(11)
        for _ in range(64):
            theta = rng.standard_normal(2)
            theta /= np.linalg.norm(theta)
            s = 1.0
            while region.contains(s * theta) and s < 1e6:
                s *= 2.0
            assert not region.contains(s * theta)


class TestPortionVector:
    def test_radial_decomposition(self):
        pv = PortionVector(np.array([0.3, -0.4]))
        assert pv.norm == pytest.approx(0.5)
        assert np.allclose(pv.norm * pv.direction, [0.3, -0.4])
        assert np.linalg.norm(pv.direction) == pytest.approx(1.0, abs=1e-15)

    def test_zero_vector_has_no_direction(self):
        with pytest.raises(DomainError):
            PortionVector(np.zeros(2)).direction


class TestNoRiskFree:
    def test_reference_game_passes_with_known_certificate(self, example_matrix):
        res = check_no_risk_free(example_matrix)
        assert res.satisfied and bool(res)
        assert res.rank == 2
        # minimal-sum certificate is unique here
        assert np.allclose(res.certificate, [1.0, 3.0, 1.0, 1.0], atol=1e-7)
        assert np.max(np.abs(example_matrix.returns.T @ res.certificate)) <= 1e-9
        assert res.certificate.min() >= 1.0 - 1e-9

    def test_always_gaining_column_fails(self):
        res = check_no_risk_free(TradeMatrix([[1.0], [2.0]]))
        assert not res.satisfied
        assert np.allclose(res.direction, [1.0])
        assert np.all(TradeMatrix([[1.0], [2.0]]).returns @ res.direction >= -1e-12)

    def test_rank_deficient_fails(self):
        res = check_no_risk_free(TradeMatrix([[1.0, 0.0], [-1.0, 0.0]]))
        assert not res.satisfied
        assert res.rank == 1
        assert abs(np.linalg.norm(res.direction) - 1.0) <= 1e-12

    def test_certificate_validity_on_random_games(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            n, m = rng.integers(2, 7), rng.integers(1, 4)
            t = rng.uniform(-1.0, 1.0, size=(n, m))
            mat = TradeMatrix(t)
            res = check_no_risk_free(mat)
            if res.satisfied:
                assert np.max(np.abs(t.T @ res.certificate)) <= 1e-9
                assert res.certificate.min() >= 1.0 - 1e-9
            else:
                assert abs(np.linalg.norm(res.direction) - 1.0) <= 1e-9
                assert np.all(t @ res.direction >= -1e-12)


class TestGammaAndExpectedLogZ:
    def test_gamma_at_zero_is_exactly_one(self, example_matrix):
        assert gamma_mean(example_matrix, [0.0, 0.0]) == 1.0

    def test_gamma_value(self, example_matrix):
        # frozen from the independent product oracle
        expected = math.exp(oracles.log_gamma(EXAMPLE_RETURNS, EXAMPLE_PROBS, (0.1, 0.1)))
        assert expected == pytest.approx(1.0382499671070395, abs=1e-15)
        assert gamma_mean(example_matrix, [0.1, 0.1]) == pytest.approx(expected, rel=1e-14)

    def test_gamma_requires_interior(self, example_matrix):
        with pytest.raises(DomainError):
            gamma_mean(example_matrix, [0.0, 0.5])

    def test_log_gamma_midpoint_concavity(self, example_matrix):
        pts = interior_points(example_matrix, seed=5, count=40)
        for pa, pb in zip(pts[::2], pts[1::2]):
            mid = 0.5 * (pa + pb)
            lhs = math.log(gamma_mean(example_matrix, mid))
            rhs = 0.5 * (
                math.log(gamma_mean(example_matrix, pa))
                + math.log(gamma_mean(example_matrix, pb))
            )
            assert lhs >= rhs - 1e-10

    def test_expected_log_z_zero_portions(self, example_matrix):
        assert expected_log_z(example_matrix, [0.0, 0.0], 7) == 0.0

    def test_expected_log_z_matches_path_enumeration(self, example_matrix):
        got = expected_log_z(example_matrix, [0.1, 0.1], 5)
        brute = oracles.expectation(
            EXAMPLE_RETURNS, EXAMPLE_PROBS, (0.1, 0.1), 5, oracles.log_twr
        )
        assert brute == pytest.approx(0.18768285923784517, abs=1e-14)
        assert got == pytest.approx(brute, rel=1e-10)

    def test_k_one_equals_log_gamma(self, example_matrix):
        got = expected_log_z(example_matrix, [0.1, 0.1], 1)
        assert got == pytest.approx(
            oracles.log_gamma(EXAMPLE_RETURNS, EXAMPLE_PROBS, (0.1, 0.1)), rel=1e-12
        )


def test_matrix_rank_thresholding():
    assert matrix_rank(np.eye(3)) == 3
    assert matrix_rank([[1.0, 1.0], [1.0, 1.0]]) == 1
    assert matrix_rank(np.zeros((2, 2))) == 0
