"""Projected splitting integrator: conservation, reversibility, orbit distance."""

import math

import numpy as np
import pytest

from snoidal.evolution import (
    BlowUpError,
    FieldState,
    SplitStepper,
    conserved,
    orbit_distance,
    perturbation_mode,
    perturbation_random,
    run_experiment,
    step,
    ynorm_sq,
)
from snoidal.evolution import _h1_semi_sq
from snoidal.waves import GridField, profile_eval, sample_wave, solve_modulus

L, C = math.pi, 0.95
N = 128


@pytest.fixture(scope="module")
def wave():
    return solve_modulus(L, C)


@pytest.fixture(scope="module")
def wave_state(wave):
    h, h1, _ = sample_wave(wave, N)
    return FieldState(h, GridField(L, wave.c * h1.values), 0.0)


def translate_state(wave, n, shift):
    xs = np.arange(n) * (wave.L / n)
    h = np.array([profile_eval(wave, x - shift)[0] for x in xs])
    h1 = np.array([profile_eval(wave, x - shift)[1] for x in xs])
    return FieldState(GridField(wave.L, h), GridField(wave.L, wave.c * h1), 0.0)


class TestStep:
    def test_zero_state_is_fixed_point(self):
        z = GridField(L, np.zeros(N))
        out = step(FieldState(z, z, 0.0), 1e-3)
        assert np.all(out.phi.values == 0.0)
        assert np.all(out.phidot.values == 0.0)

    def test_one_step_tracks_exact_translate(self, wave, wave_state):
        # the pair (h, c h') rides the orbit h(x + c t); one step stays
        # within O(dt^3) of the exact translate
        errs = []
        for dt in (2e-3, 1e-3):
            out = step(wave_state, dt)
            ref = translate_state(wave, N, -wave.c * dt)
            errs.append(max(
                np.max(np.abs(out.phi.values - ref.phi.values)),
                np.max(np.abs(out.phidot.values - ref.phidot.values)),
            ))
        assert errs[0] <= 1e-8
        assert 6.0 <= errs[0] / errs[1] <= 10.0  # halving dt cuts the error ~8x

    def test_means_preserved_over_many_steps(self, wave, wave_state):
        stepper = SplitStepper(L, N, 1e-3)
        ph = np.fft.rfft(wave_state.phi.values)
        pt = np.fft.rfft(wave_state.phidot.values)
        ph, pt = stepper.advance(ph, pt, 10_000, 0.0)
        phi = np.fft.irfft(ph, N)
        phidot = np.fft.irfft(pt, N)
        assert abs(np.mean(phi)) <= 1e-12
        assert abs(np.mean(phidot)) <= 1e-12

    def test_reversible(self, wave_state):
        fwd = SplitStepper(L, N, 1e-3)
        bwd = SplitStepper(L, N, -1e-3)
        st = wave_state
        for _ in range(500):
            st = fwd.step_state(st)
        for _ in range(500):
            st = bwd.step_state(st)
        assert np.max(np.abs(st.phi.values - wave_state.phi.values)) <= 1e-9
        assert np.max(np.abs(st.phidot.values - wave_state.phidot.values)) <= 1e-9

    def test_second_order_global_error(self, wave_state):
        def final(dt):
            stepper = SplitStepper(L, N, dt)
            ph = np.fft.rfft(wave_state.phi.values)
            pt = np.fft.rfft(wave_state.phidot.values)
            ph, pt = stepper.advance(ph, pt, int(round(1.0 / dt)), 0.0)
            return np.fft.irfft(ph, N)

        ref = final(1e-3 / 16)
        errs = [np.max(np.abs(final(dt) - ref)) for dt in (4e-3, 2e-3, 1e-3)]
        orders = [math.log(a / b) / math.log(2.0) for a, b in zip(errs, errs[1:])]
        assert all(1.9 <= o <= 2.1 for o in orders)

    def test_blowup_detection(self, wave, wave_state):
        big = FieldState(
            GridField(L, 50.0 * wave_state.phi.values),
            GridField(L, np.zeros(N)), 0.0,
        )
        ceiling = 10.0 * float(np.max(np.abs(wave_state.phi.values)))
        with pytest.raises(BlowUpError) as info:
            st = big
            for _ in range(10):
                st = step(st, 1e-3, ceiling=ceiling)
        assert info.value.time >= 0.0

    def test_bad_dt_rejected(self):
        with pytest.raises(ValueError):
            SplitStepper(L, N, 0.0)
        with pytest.raises(ValueError):
            SplitStepper(2.0 * math.pi + 0.1, N, 1e-3)


class TestConserved:
    def test_zero_state(self):
        z = GridField(L, np.zeros(N))
        q = conserved(FieldState(z, z, 0.0))
        assert q.E == 0.0 and q.F == 0.0

    def test_wave_momentum_sign_and_value(self, wave, wave_state):
        q = conserved(wave_state)
        _, h1, _ = sample_wave(wave, N)
        expected_f = wave.c * (L / N) * float(np.sum(h1.values**2))
        assert q.F > 0.0
        assert abs(q.F - expected_f) <= 1e-10 * abs(expected_f)

    def test_energy_matches_direct_quadrature(self, wave_state):
        q = conserved(wave_state)
        phi, pt = wave_state.phi, wave_state.phidot
        direct = 0.5 * (L / N) * float(np.sum(
            phi.derivative().values ** 2 + pt.values**2
            - phi.values**2 + 0.5 * phi.values**4
        ))
        assert abs(q.E - direct) <= 1e-9 * max(1.0, abs(direct))

    def test_short_horizon_drift(self, wave, wave_state):
        trace = run_experiment(wave, None, 0.0, 5.0, 1e-3, 100, N=N)
        e = trace.column("E")
        f = trace.column("F")
        assert np.max(np.abs(e - e[0])) / abs(e[0]) <= 1e-8
        assert np.max(np.abs(f - f[0])) / abs(f[0]) <= 1e-8


class TestOrbitDistance:
    def test_zero_on_the_orbit(self, wave, wave_state):
        assert orbit_distance(wave_state, wave) <= 1e-10

    @pytest.mark.parametrize("shift", [0.3721, 1.911, -0.77])
    def test_translation_invariance(self, wave, shift):
        st = translate_state(wave, N, shift)
        assert orbit_distance(st, wave) <= 1e-8

    def test_small_bump_bounds(self, wave, wave_state):
        eps = 1e-3
        p, q = perturbation_random(L, N, seed=4)
        st = FieldState(
            GridField(L, wave_state.phi.values + eps * p.values),
            GridField(L, wave_state.phidot.values + eps * q.values), 0.0,
        )
        d = orbit_distance(st, wave)
        assert 0.0 < d <= 2.0 * eps * math.sqrt(ynorm_sq(p, q))

    def test_period_mismatch_rejected(self, wave):
        other = GridField(1.0, np.zeros(N))
        with pytest.raises(ValueError):
            orbit_distance(FieldState(other, other, 0.0), wave)


class TestPerturbations:
    def test_random_unit_norm_zero_mean(self):
        p, q = perturbation_random(L, N, seed=9)
        assert abs(math.sqrt(ynorm_sq(p, q)) - 1.0) <= 1e-12
        assert abs(p.mean()) <= 1e-14
        assert abs(q.mean()) <= 1e-14

    def test_random_reproducible(self):
        a = perturbation_random(L, N, seed=123)
        b = perturbation_random(L, N, seed=123)
        assert np.array_equal(a[0].values, b[0].values)
        assert np.array_equal(a[1].values, b[1].values)
        c = perturbation_random(L, N, seed=124)
        assert not np.array_equal(a[0].values, c[0].values)

    def test_mode_perturbation(self):
        p, q = perturbation_mode(L, N, mode=3)
        assert abs(math.sqrt(ynorm_sq(p, q)) - 1.0) <= 1e-12
        assert abs(p.mean()) <= 1e-14
        with pytest.raises(ValueError):
            perturbation_mode(L, N, mode=0)


class TestRunExperiment:
    def test_trace_shape_and_monotone_time(self, wave):
        trace = run_experiment(wave, None, 0.0, 0.5, 1e-3, 50, N=N)
        assert trace.samples.shape == (11, 6)
        assert np.all(np.diff(trace.column("t")) > 0.0)

    def test_means_stay_zero(self, wave):
        p, q = perturbation_random(L, N, seed=1)
        trace = run_experiment(wave, (p, q), 1e-3, 2.0, 1e-3, 100, N=N)
        assert np.max(np.abs(trace.column("mean_phi"))) <= 1e-10
        assert np.max(np.abs(trace.column("mean_phidot"))) <= 1e-10

    def test_pure_wave_rides_the_orbit(self, wave):
        trace = run_experiment(wave, None, 0.0, 5.0, 1e-3, 250, N=N)
        assert np.max(trace.column("orbit_distance")) <= 1e-6

    def test_poincare_wirtinger_and_apriori_bound(self, wave):
        p, q = perturbation_random(L, N, seed=5)
        h, h1, _ = sample_wave(wave, N)
        phi = h.values + 1e-3 * p.values
        pdot = wave.c * h1.values + 1e-3 * q.values
        st = FieldState(GridField(L, phi), GridField(L, pdot), 0.0)
        e0 = conserved(st).E
        stepper = SplitStepper(L, N, 1e-3)
        for i in range(1000):
            st = stepper.step_state(st)
            if i % 100 == 0:
                v = st.phi.values
                l2 = L / N * float(np.sum(v * v))
                h1s = _h1_semi_sq(v, L)
                assert l2 <= (L / (2.0 * math.pi)) ** 2 * h1s + 1e-15
                kin = h1s + L / N * float(np.sum(st.phidot.values ** 2))
                assert kin <= 2.0 * e0 + L / 2.0

    def test_blowup_propagates(self, wave):
        with pytest.raises(BlowUpError):
            run_experiment(wave, None, 0.0, 1.0, 1e-3, 10, N=N, ceiling_factor=0.5)

    def test_unprojected_mean_contrast_demo(self, wave):
        # contrast mode, demonstrative only: without projection a
        # mean-carrying perturbation keeps an O(eps) wandering mean, while
        # the projected flow pins both means at roundoff
        eps = 1e-6
        ones = GridField(L, np.ones(N))
        zero = GridField(L, np.zeros(N))
        trace = run_experiment(wave, (ones, zero), eps, 4.0, 1e-3, 500,
                               N=N, projected=False)
        means = trace.column("mean_phi")
        assert np.max(np.abs(means - means[0])) > 0.3 * eps
        pinned = run_experiment(wave, (ones, zero), eps, 4.0, 1e-3, 500,
                                N=N, projected=True)
        # row 0 records the raw mean-carrying data; projection acts from step 1
        assert np.max(np.abs(pinned.column("mean_phi")[1:])) <= 1e-10

    def test_input_validation(self, wave):
        with pytest.raises(ValueError):
            run_experiment(wave, None, -1.0, 1.0, 1e-3, 10, N=N)
        with pytest.raises(ValueError):
            run_experiment(wave, None, 0.0, 1.0, -1e-3, 10, N=N)
        p, q = perturbation_random(L, 64, seed=0)
        with pytest.raises(ValueError):
            run_experiment(wave, (p, q), 1e-3, 1.0, 1e-3, 10, N=N)


class TestStateInvariants:
    def test_mismatched_grids_rejected(self):
        with pytest.raises(ValueError):
            FieldState(GridField(L, np.zeros(64)), GridField(L, np.zeros(32)), 0.0)
        with pytest.raises(ValueError):
            FieldState(GridField(1.0, np.zeros(64)), GridField(2.0, np.zeros(64)), 0.0)

    def test_trace_requires_increasing_time(self):
        from snoidal.evolution import EvolutionTrace

        rows = np.zeros((3, 6))
        rows[:, 0] = [0.0, 1.0, 1.0]
        with pytest.raises(ValueError):
            EvolutionTrace(rows)
