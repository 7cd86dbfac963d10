import numpy as np
import pytest

from drafttube.decision import DecisionError, DecisionMatrix, TopsisResult, topsis


def matrix(values, weights=None, benefit=None):
    values = np.asarray(values, dtype=float)
    m = values.shape[1]
    if weights is None:
        weights = np.full(m, 1.0 / m)
    if benefit is None:
        benefit = np.array([True] * m)
    return DecisionMatrix(values, np.asarray(weights), np.asarray(benefit))


class TestValidation:
    def test_rejects_empty(self):
        with pytest.raises(DecisionError):
            matrix(np.empty((0, 2)))

    def test_rejects_bad_weights(self):
        with pytest.raises(DecisionError):
            matrix([[1.0, 2.0]], weights=[0.9, 0.9])
        with pytest.raises(DecisionError):
            matrix([[1.0, 2.0]], weights=[-0.5, 1.5])

    def test_rejects_mismatched_directions(self):
        with pytest.raises(DecisionError):
            DecisionMatrix(np.ones((2, 2)), np.array([0.5, 0.5]),
                           np.array([True]))

    def test_rejects_zero_norm_column(self):
        with pytest.raises(DecisionError):
            topsis(matrix([[0.0, 1.0], [0.0, 2.0]]))


class TestTopsis:
    def test_dominant_alternative_wins(self):
        # Alternative 0 is best on the benefit and the cost criterion.
        values = [[10.0, 1.0], [5.0, 4.0], [2.0, 9.0]]
        result = topsis(matrix(values, benefit=[True, False]))
        assert result.best == 0
        assert result.ranking.tolist() == [0, 1, 2]
        assert result.closeness[0] == pytest.approx(1.0)
        assert result.closeness[2] == pytest.approx(0.0)

    def test_closeness_in_unit_interval(self):
        rng = np.random.Generator(np.random.PCG64(0))
        values = rng.uniform(1.0, 10.0, size=(30, 3))
        result = topsis(matrix(values, benefit=[True, False, True]))
        assert np.all(result.closeness >= 0.0)
        assert np.all(result.closeness <= 1.0)

    def test_ranking_sorted_by_closeness(self):
        rng = np.random.Generator(np.random.PCG64(1))
        values = rng.uniform(1.0, 10.0, size=(20, 2))
        result = topsis(matrix(values, benefit=[True, False]))
        ranked = result.closeness[result.ranking]
        assert np.all(np.diff(ranked) <= 0.0)

    def test_ties_broken_by_lower_index(self):
        values = [[2.0, 2.0], [1.0, 1.0], [2.0, 2.0], [1.0, 1.0]]
        result = topsis(matrix(values))
        assert result.ranking.tolist() == [0, 2, 1, 3]

    def test_single_alternative_has_unit_closeness(self):
        result = topsis(matrix([[3.0, 4.0]]))
        assert result.best == 0
        assert result.closeness[0] == pytest.approx(1.0)

    def test_weights_steer_the_choice(self):
        values = [[10.0, 9.0], [1.0, 1.0]]  # alt 0 high benefit, high cost
        benefit = [True, False]
        favor_benefit = topsis(matrix(values, weights=[0.95, 0.05],
                                      benefit=benefit))
        favor_cost = topsis(matrix(values, weights=[0.05, 0.95],
                                   benefit=benefit))
        assert favor_benefit.best == 0
        assert favor_cost.best == 1

    def test_scale_invariance_of_ranking(self):
        rng = np.random.Generator(np.random.PCG64(2))
        values = rng.uniform(1.0, 5.0, size=(15, 2))
        benefit = [True, False]
        base = topsis(matrix(values, benefit=benefit))
        scaled = topsis(matrix(values * np.array([100.0, 0.01]),
                               benefit=benefit))
        np.testing.assert_array_equal(base.ranking, scaled.ranking)

    def test_result_best_property(self):
        result = TopsisResult(np.array([0.2, 0.9]), np.array([1, 0]))
        assert result.best == 1
