import numpy as np
import pytest

from drafttube.evaluator import (
    EvaluationError,
    FlowProbe,
    OracleConstants,
    design_features,
    drag_coefficient,
    gci,
    ingest_csv,
    pressure_recovery,
    synthetic_cfd,
    write_dataset_csv,
)
from drafttube.geometry import DesignVector, load_reference, scenario_bounds, synthesize


class TestProbeCoefficients:
    def test_pressure_recovery_hand_value(self):
        probe = FlowProbe(p_s1=100.0, p_s2=700.0, p_t1=1500.0, p_t2=1200.0,
                          rho=1000.0, u=2.0)
        # dynamic pressure = 0.5 * 1000 * 4 = 2000 Pa
        assert pressure_recovery(probe) == pytest.approx(600.0 / 2000.0)
        assert drag_coefficient(probe) == pytest.approx(300.0 / 2000.0)

    def test_negative_drag_warns(self):
        probe = FlowProbe(p_s1=0.0, p_s2=0.0, p_t1=100.0, p_t2=200.0,
                          rho=1.0, u=1.0)
        with pytest.warns(UserWarning):
            assert drag_coefficient(probe) < 0

    def test_rejects_nonpositive_density_and_velocity(self):
        with pytest.raises(EvaluationError):
            FlowProbe(0, 0, 0, 0, rho=-1.0, u=1.0)
        with pytest.raises(EvaluationError):
            FlowProbe(0, 0, 0, 0, rho=1.0, u=0.0)


@pytest.fixture(scope="module")
def reference_design():
    lb, ub = scenario_bounds("II.a")
    return synthesize(load_reference(), DesignVector(np.zeros(18), lb, ub))


class TestSyntheticOracle:
    def test_reference_calibration(self, reference_design):
        obj = synthetic_cfd(reference_design)
        assert obj.cp == pytest.approx(0.819, abs=1e-9)
        assert obj.cd == pytest.approx(0.131, abs=1e-9)

    def test_deterministic(self, reference_design):
        a = synthetic_cfd(reference_design)
        b = synthetic_cfd(reference_design)
        assert (a.cp, a.cd) == (b.cp, b.cd)

    def test_feature_keys(self, reference_design):
        feats = design_features(reference_design)
        assert set(feats) >= {"A_in", "A_out", "length", "mean_slope",
                              "curvature", "D_h"}
        assert all(v > 0 for v in feats.values())

    def test_constants_are_loaded_from_data(self):
        c = OracleConstants.load()
        assert c.diffusion_gain > 0 and c.friction_coefficient > 0
        assert c.slope_weight > 0 and c.curvature_weight > 0

    def test_random_designs_stay_plausible(self):
        rng = np.random.Generator(np.random.PCG64(0))
        lb, ub = scenario_bounds("II.a")
        ref = load_reference()
        for _ in range(20):
            x = rng.uniform(lb, ub)
            obj = synthetic_cfd(synthesize(ref, DesignVector(x, lb, ub)))
            assert 0.0 < obj.cp < 1.0
            assert obj.cd > 0.0


class TestResultFileIO:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.Generator(np.random.PCG64(2))
        X = rng.uniform(-0.25, 0.25, size=(25, 14))
        Y = rng.uniform(0.1, 0.9, size=(25, 2))
        path = tmp_path / "dataset.csv"
        write_dataset_csv(path, X, Y, "lineage")
        X2, Y2 = ingest_csv(path)
        np.testing.assert_array_equal(X, X2)
        np.testing.assert_array_equal(Y, Y2)

    def test_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,x2,cp,cd\n0,0,1,1\n")
        with pytest.raises(EvaluationError):
            ingest_csv(path)

    def test_rejects_wrong_column_count_with_line_number(self, tmp_path):
        header = ",".join(f"x{j}" for j in range(1, 15)) + ",cp,cd\n"
        path = tmp_path / "short.csv"
        path.write_text(header + ",".join(["0.0"] * 16) + "\n0.0,0.0\n")
        with pytest.raises(EvaluationError, match=":3:"):
            ingest_csv(path)

    def test_rejects_non_finite_values(self, tmp_path):
        header = ",".join(f"x{j}" for j in range(1, 15)) + ",cp,cd\n"
        path = tmp_path / "nan.csv"
        path.write_text(header + ",".join(["0.0"] * 15) + ",nan\n")
        with pytest.raises(EvaluationError, match="non-finite"):
            ingest_csv(path)

    def test_rejects_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("# only a comment\n")
        with pytest.raises(EvaluationError):
            ingest_csv(path)


class TestGridConvergenceIndex:
    def test_decreasing_trend_reference_row(self):
        rep = gci(1.575, 0.563, 1.5)
        assert rep.p_gci == pytest.approx(2.553, rel=0.01)
        assert rep.gci_cm == pytest.approx(1.084, rel=0.01)
        assert rep.gci_mf == pytest.approx(0.387, rel=0.01)
        assert rep.asymptotic_ratio == pytest.approx(0.994, rel=0.01)

    def test_increasing_trend_reference_row(self):
        rep = gci(10.055, 4.252, 1.5, trend="increasing")
        assert rep.p_gci == pytest.approx(2.015, rel=0.01)
        assert rep.gci_cm == pytest.approx(9.944, rel=0.01)
        assert rep.gci_mf == pytest.approx(4.206, rel=0.01)
        assert rep.asymptotic_ratio == pytest.approx(1.044, rel=0.01)

    def test_shared_normalization_recovers_exact_order(self):
        # eps_cm = r^p * eps_mf makes the plain formula exact.
        for p_true in (1.0, 2.0, 3.0):
            rep = gci(1.5 ** p_true * 0.4, 0.4, 1.5, trend="shared")
            assert rep.p_gci == pytest.approx(p_true, abs=1e-12)

    def test_second_order_asymptotic_ratio_is_unity(self):
        rep = gci(0.9, 0.9 / 1.5 ** 2, 1.5, trend="shared")
        assert rep.asymptotic_ratio == pytest.approx(1.0, abs=1e-12)

    def test_report_rows_are_complete(self):
        rep = gci(1.575, 0.563, 1.5)
        names = [n for n, _ in rep.as_rows()]
        assert names == ["eps_cm_pct", "eps_mf_pct", "r", "F_s", "p",
                         "GCI_cm_pct", "GCI_mf_pct", "asymptotic_ratio"]

    def test_input_validation(self):
        with pytest.raises(EvaluationError):
            gci(-1.0, 0.5, 1.5)
        with pytest.raises(EvaluationError):
            gci(1.0, 0.5, 1.0)
        with pytest.raises(EvaluationError):
            gci(1.0, 0.5, 1.5, F_s=0.5)
        with pytest.raises(EvaluationError):
            gci(1.0, 0.5, 1.5, trend="sideways")
        with pytest.raises(EvaluationError):
            gci(0.5, 1.0, 1.5)  # diverging study
