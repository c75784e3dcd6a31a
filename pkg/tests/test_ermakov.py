import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ermakov_lab import (
    ClassicalState,
    DriveSpec,
    ErmakovState,
    OmegaSpec,
    PhysParams,
    alpha_from_delta,
    classical_rhs,
    conserving_drive,
    delta_from_alpha,
    els_invariant,
    els_invariant_rate,
    integrate,
    lewis_invariant,
    measurement_rhs,
)
from ermakov_lab.errors import (
    ConfigurationError,
    DomainError,
    InvalidStateError,
    TrajectoryAborted,
)

finite = st.floats(min_value=-10, max_value=10, allow_nan=False)
positive = st.floats(min_value=1e-3, max_value=10, allow_nan=False)


class TestClassicalRhs:
    def test_unit_stationary(self):
        s = ClassicalState(0, q=1, qdot=0, alpha=1, alphadot=0)
        assert classical_rhs(s, OmegaSpec.constant(1)) == (-1.0, 0.0)

    def test_free_amplitude(self):
        s = ClassicalState(0, q=0, qdot=1, alpha=2, alphadot=0)
        qdd, add = classical_rhs(s, OmegaSpec.constant(0))
        assert qdd == 0.0
        assert add == pytest.approx(0.125)

    def test_modulated_at_zero(self):
        s = ClassicalState(0, q=1, qdot=0, alpha=1, alphadot=0)
        w = OmegaSpec.sinusoidal(1.0, 0.1, 1.0)
        qdd, add = classical_rhs(s, w)
        assert (qdd, add) == (pytest.approx(-1.0), pytest.approx(0.0))

    def test_nonfinite_rejected(self):
        s = ClassicalState(0, q=math.nan, qdot=0, alpha=1, alphadot=0)
        with pytest.raises(InvalidStateError):
            classical_rhs(s, OmegaSpec.constant(1))


class TestLewisInvariant:
    def test_direct_values(self):
        assert lewis_invariant(1, 0, 1, 0) == pytest.approx(0.5)
        assert lewis_invariant(0, 2, 1, 0) == pytest.approx(2.0)

    def test_alpha_domain(self):
        with pytest.raises(DomainError):
            lewis_invariant(1, 0, 0, 0)

    def test_constant_along_closed_form(self):
        # omega = 1: q = cos t, alpha = 1 solve both equations; I = 0.5
        for t in np.linspace(0, 10, 37):
            assert lewis_invariant(math.cos(t), -math.sin(t), 1.0, 0.0) == \
                pytest.approx(0.5, abs=1e-14)


class TestMeasurementRhs:
    def test_classical_limit(self):
        p = PhysParams(tau=math.inf, lam=0.0, omega=1.0)
        s = ErmakovState(0, alpha=1, alphadot=0, xbar=0.3, xbardot=0)
        add, xdd = measurement_rhs(s, p, DriveSpec.zero())
        assert add == pytest.approx(0.0)
        assert xdd == pytest.approx(-0.3)

    def test_damped_width(self):
        p = PhysParams(tau=1.0, omega=1.0)
        s = ErmakovState(0, alpha=1, alphadot=0, xbar=0, xbardot=0)
        add, _ = measurement_rhs(s, p, DriveSpec.zero())
        assert add == pytest.approx(-0.25)

    def test_driven_centroid(self):
        p = PhysParams(tau=math.inf, m=1.0, lam=1.0, omega=1.0)
        s = ErmakovState(0, alpha=1, alphadot=0, xbar=1, xbardot=0)
        _, xdd = measurement_rhs(s, p, DriveSpec.constant(2.0))
        assert xdd == pytest.approx(-3.0)

    @given(alpha=positive, alphadot=finite, xbar=finite, xbardot=finite)
    @settings(max_examples=50, deadline=None)
    def test_limit_matches_classical_everywhere(self, alpha, alphadot, xbar, xbardot):
        # 1/tau = 0, lambda = 0 reduces exactly to the classical pair
        p = PhysParams(tau=math.inf, lam=0.0, omega=1.3)
        s = ErmakovState(0.7, alpha, alphadot, xbar, xbardot)
        add, xdd = measurement_rhs(s, p, DriveSpec.zero())
        c = ClassicalState(0.7, xbar, xbardot, alpha, alphadot)
        qdd, add_c = classical_rhs(c, OmegaSpec.constant(1.3))
        assert add == add_c
        assert xdd == qdd


class TestElsInvariant:
    def test_direct_values(self):
        assert els_invariant(ErmakovState(0, 1, 0, 1, 0)) == pytest.approx(0.5)
        assert els_invariant(ErmakovState(0, 2, 0, 0, 0)) == 0.0
        assert els_invariant(ErmakovState(0, 1, 1, 2, 3)) == pytest.approx(2.5)

    @given(alpha=positive, alphadot=finite, xbar=finite, xbardot=finite)
    @settings(max_examples=100, deadline=None)
    def test_nonnegative(self, alpha, alphadot, xbar, xbardot):
        assert els_invariant(ErmakovState(0, alpha, alphadot, xbar, xbardot)) >= 0.0


class TestInvariantRate:
    def test_direct_value(self):
        p = PhysParams(tau=1.0, lam=1.0, m=1.0)
        s = ErmakovState(0, alpha=1, alphadot=0, xbar=1, xbardot=1)
        rate = els_invariant_rate(s, p, DriveSpec.constant(1.0))
        assert rate == pytest.approx(-0.75)

    def test_zero_without_measurement_or_drive(self):
        p = PhysParams(tau=math.inf, lam=0.0)
        s = ErmakovState(0, alpha=1.7, alphadot=0.4, xbar=-2, xbardot=1.1)
        assert els_invariant_rate(s, p, DriveSpec.zero()) == 0.0

    @given(alpha=positive, alphadot=finite, xbar=finite, xbardot=finite)
    @settings(max_examples=50, deadline=None)
    def test_conserving_drive_zeroes_rate(self, alpha, alphadot, xbar, xbardot):
        p = PhysParams(tau=2.0, lam=0.8)
        s = ErmakovState(0, alpha, alphadot, xbar, xbardot)
        rate = els_invariant_rate(s, p, DriveSpec.conserving())
        assert rate == pytest.approx(0.0, abs=1e-12)

    def test_regular_at_xbar_zero(self):
        p = PhysParams(tau=1.0, lam=1.0)
        s = ErmakovState(0, alpha=1, alphadot=0.5, xbar=0.0, xbardot=1.0)
        assert math.isfinite(els_invariant_rate(s, p, DriveSpec.constant(1.0)))

    def test_matches_finite_difference_along_trajectory(self):
        p = PhysParams(tau=2.0, lam=1.0)
        init = ErmakovState(0, 1, 0, 1, 0)
        traj = integrate("measurement", init, p,
                         drive=DriveSpec.sinusoid(1.0, 0.7), t_end=5.0, dt=1e-3)
        fd = np.gradient(traj.invariant, traj.t)[1:-1]
        scale = np.max(np.abs(traj.dIdt_analytic))
        assert np.max(np.abs(fd - traj.dIdt_analytic[1:-1])) / scale < 1e-4


class TestConservingDrive:
    def test_proportional_to_xbar(self):
        p = PhysParams(tau=1.0, lam=2.0)
        assert conserving_drive(ErmakovState(0, 1, 1, 0, 0.3), p) == 0.0

    def test_direct_value(self):
        p = PhysParams(tau=1.0, lam=2.0, m=1.0)
        x = conserving_drive(ErmakovState(0, alpha=1, alphadot=1, xbar=3, xbardot=0), p)
        assert x == pytest.approx(1.875)

    def test_requires_coupling(self):
        with pytest.raises(ConfigurationError):
            conserving_drive(ErmakovState(0, 1, 0, 1, 0), PhysParams(tau=1.0, lam=0.0))


class TestWidthMap:
    def test_direct_values(self):
        p = PhysParams(tau=1.0)
        assert delta_from_alpha(1.0, p) == pytest.approx(2 ** -0.5)
        assert delta_from_alpha(1.0, PhysParams(tau=1.0, hbar=2.0)) == pytest.approx(1.0)

    @given(alpha=positive)
    @settings(max_examples=50, deadline=None)
    def test_roundtrip(self, alpha):
        p = PhysParams(tau=1.0, m=1.3, hbar=0.7)
        assert alpha_from_delta(delta_from_alpha(alpha, p), p) == \
            pytest.approx(alpha, abs=1e-14)

    def test_domain(self):
        with pytest.raises(DomainError):
            delta_from_alpha(-1.0, PhysParams(tau=1.0))
        with pytest.raises(DomainError):
            alpha_from_delta(0.0, PhysParams(tau=1.0))


class TestIntegrate:
    def test_classical_closed_form(self):
        # omega = 1 from (1, 0, 1, 0): q = cos t, alpha = 1, I = 0.5
        p = PhysParams(tau=math.inf)
        traj = integrate("classical", ClassicalState(0, 1, 0, 1, 0), p,
                         omega_spec=OmegaSpec.constant(1.0), t_end=50, dt=1e-3)
        assert np.max(np.abs(traj.invariant - 0.5)) < 5e-7
        assert np.max(np.abs(traj.x - np.cos(traj.t))) < 1e-9

    def test_modulated_invariant_drift(self):
        p = PhysParams(tau=math.inf)
        w = OmegaSpec.sinusoidal(1.0, 0.1, 1.0)
        traj = integrate("classical", ClassicalState(0, 1, 0, 1, 0), p,
                         omega_spec=w, t_end=50, dt=1e-3)
        inv = traj.invariant
        assert (inv.max() - inv.min()) / inv[0] < 1e-6

    def test_conserving_drive_keeps_invariant(self):
        p = PhysParams(tau=2.0, lam=1.0)
        traj = integrate("measurement", ErmakovState(0, 1, 0, 1, 0), p,
                         drive=DriveSpec.conserving(), t_end=20, dt=1e-3)
        inv = traj.invariant
        assert (inv.max() - inv.min()) / inv[0] < 1e-6

    def test_rk4_order(self):
        # step halving shrinks successive endpoint differences ~16x
        p = PhysParams(tau=0.5, lam=1.0, omega=3.0)
        init = ErmakovState(0, 1, 0, 1, 0)

        def endpoint(dt):
            tr = integrate("measurement", init, p,
                           drive=DriveSpec.sinusoid(1.0, 0.7), t_end=20, dt=dt)
            return np.array([tr.alpha[-1], tr.alphadot[-1], tr.x[-1], tr.xdot[-1]])

        d1 = np.linalg.norm(endpoint(1e-3) - endpoint(5e-4))
        d2 = np.linalg.norm(endpoint(5e-4) - endpoint(2.5e-4))
        assert 12 < d1 / d2 < 20

    def test_records_are_uniform_and_monotone(self):
        p = PhysParams(tau=2.0)
        traj = integrate("measurement", ErmakovState(0, 1, 0, 1, 0), p,
                         drive=DriveSpec.zero(), t_end=1.0, dt=1e-3, stride=10)
        dts = np.diff(traj.t)
        assert np.all(dts > 0)
        assert np.allclose(dts, dts[0])

    def test_width_collapse_aborts_with_partial(self):
        p = PhysParams(tau=2.0)
        init = ErmakovState(0, alpha=2e-8, alphadot=-1.0, xbar=0, xbardot=0)
        with pytest.raises(TrajectoryAborted) as exc:
            integrate("measurement", init, p, drive=DriveSpec.zero(),
                      t_end=1.0, dt=1e-3)
        partial = exc.value.partial
        assert partial is not None and len(partial) >= 1
        assert partial.alpha[0] == pytest.approx(2e-8)

    def test_deterministic(self):
        p = PhysParams(tau=2.0, lam=1.0)
        args = dict(drive=DriveSpec.sinusoid(1.0, 0.7), t_end=2.0, dt=1e-3)
        t1 = integrate("measurement", ErmakovState(0, 1, 0, 1, 0), p, **args)
        t2 = integrate("measurement", ErmakovState(0, 1, 0, 1, 0), p, **args)
        assert np.array_equal(t1.invariant, t2.invariant)

    def test_rejects_bad_numerics(self):
        p = PhysParams(tau=2.0)
        init = ErmakovState(0, 1, 0, 1, 0)
        with pytest.raises(ConfigurationError):
            integrate("measurement", init, p, drive=DriveSpec.zero(),
                      t_end=1.0, dt=-1e-3)
        with pytest.raises(ConfigurationError):
            integrate("measurement", init, p, drive=DriveSpec.zero(),
                      t_end=-1.0, dt=1e-3)
