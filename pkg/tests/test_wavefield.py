import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gratinguq import (
    ConfigError,
    PlaneWave,
    WoodAnomalyError,
    green_quasiperiodic,
    incident_field,
    make_modes,
    make_plane_wave,
)

TWO_PI = 2 * np.pi


class TestPlaneWave:
    def test_alpha_beta_normal_incidence(self):
        pw = PlaneWave(2.0, 0.0)
        assert pw.alpha == 0.0
        assert pw.beta == pytest.approx(2.0)

    def test_alpha_beta_oblique(self):
        pw = PlaneWave(3.0, np.pi / 6)
        assert pw.alpha == pytest.approx(1.5)
        assert pw.beta == pytest.approx(3 * np.sqrt(3) / 2)

    def test_grazing_rejected(self):
        with pytest.raises(ConfigError):
            PlaneWave(1.0, np.pi / 2)
        with pytest.raises(ConfigError):
            PlaneWave(1.0, -np.pi / 2)

    def test_nonpositive_kappa_rejected(self):
        with pytest.raises(ConfigError):
            PlaneWave(0.0, 0.1)
        with pytest.raises(ConfigError):
            PlaneWave(-1.0, 0.1)

    def test_make_plane_wave(self):
        pw = make_plane_wave(2.5, -np.pi / 8)
        assert pw.kappa == 2.5
        assert pw.theta == -np.pi / 8


class TestIncidentField:
    def test_value_at_origin(self):
        pw = PlaneWave(1.0, np.pi / 4)
        assert incident_field(pw, 0.0, 0.0) == pytest.approx(1.0 + 0.0j)

    def test_helmholtz_residual(self):
        # five-point FD Laplacian + kappa^2 u should vanish
        pw = PlaneWave(2.0, np.pi / 8)
        h = 1e-4
        x0, y0 = 0.7, 1.3
        u = incident_field
        lap = (
            u(pw, x0 + h, y0)
            + u(pw, x0 - h, y0)
            + u(pw, x0, y0 + h)
            + u(pw, x0, y0 - h)
            - 4 * u(pw, x0, y0)
        ) / h**2
        assert abs(lap + pw.kappa**2 * u(pw, x0, y0)) < 1e-5

    def test_downward_propagation(self):
        # incident wave travels toward the surface: amplitude phase e^{-i beta y}
        pw = PlaneWave(1.0, 0.0)
        assert incident_field(pw, 0.0, np.pi / 2) == pytest.approx(-1j, abs=1e-12)


class TestModes:
    def test_alpha_ladder(self):
        pw = PlaneWave(2.0, np.pi / 8)
        modes = make_modes(pw, TWO_PI, 3)
        n = np.arange(-3, 4)
        assert np.allclose(modes.alpha_n, pw.alpha + n)
        assert list(modes.n_indices) == list(n)

    def test_beta_branch_propagating(self):
        pw = PlaneWave(2.0, 0.0)
        modes = make_modes(pw, TWO_PI, 1)
        # n=0: beta = kappa; n=+-1: beta = sqrt(4-1)
        assert modes.beta_n[1] == pytest.approx(2.0)
        assert modes.beta_n[0] == pytest.approx(np.sqrt(3))
        assert np.all(modes.beta_n.imag == 0)

    def test_beta_branch_evanescent(self):
        pw = PlaneWave(1.0, np.pi / 8)
        modes = make_modes(pw, TWO_PI, 2)
        b2 = modes.beta_n[modes.n_indices == 2][0]
        assert b2.real == 0.0
        assert b2.imag == pytest.approx(np.sqrt((pw.alpha + 2) ** 2 - 1))

    def test_dispersion_identity(self):
        pw = PlaneWave(3.3, np.pi / 12)
        modes = make_modes(pw, TWO_PI, 10)
        assert np.allclose(modes.alpha_n**2 + modes.beta_n**2, pw.kappa**2)

    def test_propagating_mask(self):
        pw = PlaneWave(2.5, 0.0)
        modes = make_modes(pw, TWO_PI, 5)
        assert list(modes.n_indices[modes.propagating]) == [-2, -1, 0, 1, 2]

    def test_wood_anomaly_detected(self):
        # kappa=1, theta=0: |alpha_{+-1}| = 1 = kappa exactly
        with pytest.raises(WoodAnomalyError) as exc:
            make_modes(PlaneWave(1.0, 0.0), TWO_PI, 2)
        assert set(exc.value.indices) == {-1, 1}

    def test_wood_anomaly_near_miss(self):
        with pytest.raises(WoodAnomalyError):
            make_modes(PlaneWave(1.0 + 5e-4, 0.0), TWO_PI, 2, wood_eps=1e-3)
        # wider margin: fine once eps is tightened
        make_modes(PlaneWave(1.0 + 5e-4, 0.0), TWO_PI, 2, wood_eps=1e-5)

    def test_anomaly_free_reference_angles(self):
        for kappa in range(1, 7):
            for theta in (-np.pi / 4, -np.pi / 8, np.pi / 12, np.pi / 8, np.pi / 4):
                make_modes(PlaneWave(float(kappa), theta), TWO_PI, 30)


class TestGreenFunction:
    @staticmethod
    def _green(pw, order, x, y, s, t):
        modes = make_modes(pw, TWO_PI, order)
        return green_quasiperiodic(modes, x, y, s, t)

    def test_quasi_periodicity(self):
        pw = PlaneWave(2.3, np.pi / 8)
        g0 = self._green(pw, 40, 1.0, 2.0, 0.4, 1.0)
        g1 = self._green(pw, 40, 1.0 + TWO_PI, 2.0, 0.4, 1.0)
        assert g1 == pytest.approx(g0 * np.exp(1j * pw.alpha * TWO_PI), rel=1e-10)

    def test_symmetry_in_height(self):
        # depends on source/target heights only through |y - t|
        pw = PlaneWave(2.3, np.pi / 8)
        g_up = self._green(pw, 40, 1.0, 2.5, 0.4, 1.0)
        g_dn = self._green(pw, 40, 1.0, 1.0, 0.4, 2.5)
        assert g_up == pytest.approx(g_dn, rel=1e-12)

    def test_helmholtz_residual_off_source(self):
        pw = PlaneWave(2.0, np.pi / 12)
        h = 1e-3
        x0, y0, s, t = 2.0, 3.0, 0.5, 0.8

        def g(x, y):
            return self._green(pw, 60, x, y, s, t)

        lap = (
            g(x0 + h, y0) + g(x0 - h, y0) + g(x0, y0 + h) + g(x0, y0 - h) - 4 * g(x0, y0)
        ) / h**2
        assert abs(lap + pw.kappa**2 * g(x0, y0)) < 1e-3 * abs(g(x0, y0)) + 1e-6

    def test_truncation_convergence(self):
        pw = PlaneWave(2.0, np.pi / 8)
        ref = self._green(pw, 80, 1.0, 2.0, 0.3, 1.2)
        approx = self._green(pw, 40, 1.0, 2.0, 0.3, 1.2)
        assert abs(approx - ref) < 1e-10 * abs(ref)

    def test_small_gap_rejected(self):
        pw = PlaneWave(2.0, np.pi / 8)
        modes = make_modes(pw, TWO_PI, 10)
        with pytest.raises(ConfigError):
            green_quasiperiodic(modes, 1.0, 1.0, 0.5, 1.05, g_min=0.1)


@settings(max_examples=60, deadline=None)
@given(
    kappa=st.floats(0.3, 8.0),
    theta=st.floats(-1.2, 1.2),
    order=st.integers(1, 25),
)
def test_beta_branch_property(kappa, theta, order):
    try:
        modes = make_modes(PlaneWave(kappa, theta), TWO_PI, order)
    except WoodAnomalyError:
        return
    assert np.all(modes.beta_n.real >= 0)
    assert np.all(modes.beta_n.imag >= 0)
    # each mode is either purely propagating or purely decaying
    assert np.all((modes.beta_n.real == 0) | (modes.beta_n.imag == 0))
    assert np.allclose(modes.alpha_n**2 + modes.beta_n**2, kappa**2, rtol=1e-9)
