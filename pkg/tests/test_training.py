import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncrelay.training import build_training, measured_rho


class TestBuildTraining:
    @given(st.integers(min_value=3, max_value=32),
           st.floats(min_value=0.0, max_value=0.999),
           st.floats(min_value=0.1, max_value=100.0),
           st.floats(min_value=0.1, max_value=100.0))
    @settings(max_examples=60, deadline=None)
    def test_powers_and_correlation_exact(self, L, rho, Q1, Q2):
        ts = build_training(L, rho, Q1, Q2, 5.0)
        npt.assert_allclose(np.vdot(ts.t1, ts.t1).real, Q1, rtol=1e-12)
        npt.assert_allclose(np.vdot(ts.t2, ts.t2).real, Q2, rtol=1e-12)
        npt.assert_allclose(np.vdot(ts.tr, ts.tr).real, 5.0, rtol=1e-12)
        npt.assert_allclose(measured_rho(ts), rho, atol=1e-12)

    @given(st.integers(min_value=3, max_value=32),
           st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=30, deadline=None)
    def test_relay_pilot_orthogonal(self, L, rho):
        ts = build_training(L, rho, 8.0, 8.0, 8.0)
        npt.assert_allclose(np.vdot(ts.t1, ts.tr), 0.0, atol=1e-12)
        npt.assert_allclose(np.vdot(ts.t2, ts.tr), 0.0, atol=1e-12)

    def test_complex_rho(self):
        rho = 0.3 * np.exp(1j * 0.7)
        ts = build_training(8, rho, 8.0, 8.0, 8.0)
        npt.assert_allclose(measured_rho(ts), rho, atol=1e-12)

    def test_fully_correlated(self):
        ts = build_training(8, 1.0, 8.0, 2.0, 8.0)
        npt.assert_allclose(measured_rho(ts), 1.0, atol=1e-12)
        npt.assert_allclose(ts.t2, 0.5 * ts.t1, atol=1e-12)

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            build_training(2, 0.0, 8.0, 8.0, 8.0)
        with pytest.raises(ValueError):
            build_training(8, 1.5, 8.0, 8.0, 8.0)
        with pytest.raises(ValueError):
            build_training(8, 0.0, 0.0, 8.0, 8.0)
