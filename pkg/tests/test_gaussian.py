"""Diagonalization, initial states, exact propagation and its invariants."""

import math

import numpy as np
import pytest
from conftest import (
    random_model_params,
    random_physical_covariance,
    rk4_propagator,
    symplectic_spectrum_oracle,
)

import chainbath as cb
from chainbath.errors import NumericalError, ValidationError
from chainbath.gaussian import thermal_coth, thermal_mode_variances


def single_oscillator(mass=1.0, omega=1.0, label=("system", 1)):
    return cb.QuadraticModel(
        np.array([mass]), np.array([[mass * omega**2]]), (label,), coupled=False
    )


class TestDiagonalize:
    def test_single_oscillator(self):
        modes = cb.diagonalize(single_oscillator(mass=0.7, omega=1.3))
        assert modes.frequencies == pytest.approx([1.3], rel=1e-14)
        assert abs(modes.modes[0, 0]) == pytest.approx(1.0, rel=1e-14)

    def test_two_coupled_masses(self):
        m, kappa, omega_b = 0.8, 0.6, 1.1
        K = np.array(
            [[m * omega_b**2 + kappa, -kappa], [-kappa, m * omega_b**2 + kappa]]
        )
        model = cb.QuadraticModel(
            np.array([m, m]), K, (("chain", 1), ("chain", 2)), coupled=False
        )
        modes = cb.diagonalize(model)
        expected = sorted([omega_b, math.sqrt(omega_b**2 + 2 * kappa / m)])
        assert modes.frequencies == pytest.approx(expected, rel=1e-12)

    def test_bare_chain_band_edge(self):
        p = cb.ModelParams(N=50)
        modes = cb.diagonalize(cb.build_bath(p))
        omega_cut = cb.derived_quantities(p).omega_cut
        assert modes.frequencies[-1] <= omega_cut * (1.0 + 1e-6)
        assert modes.frequencies[0] > 0

    def test_reconstruction(self):
        p = cb.ModelParams(N=40)
        model = cb.build_coupled(p)
        modes = cb.diagonalize(model)
        kmw = model.mass_weighted_stiffness()
        rebuilt = (modes.modes * modes.frequencies**2) @ modes.modes.T
        assert np.max(np.abs(kmw - rebuilt)) <= 1e-9 * np.max(np.abs(kmw))
        gram = modes.modes.T @ modes.modes
        assert np.max(np.abs(gram - np.eye(model.n_coordinates))) < 1e-10

    def test_rejects_non_positive_definite(self):
        model = cb.QuadraticModel(
            np.array([1.0, 1.0]),
            np.array([[1.0, 2.0], [2.0, 1.0]]),
            (("chain", 1), ("chain", 2)),
            coupled=False,
        )
        with pytest.raises(NumericalError):
            cb.diagonalize(model)


class TestInitialCovariance:
    def test_unsqueezed_system_block_is_half_identity(self):
        p = cb.ModelParams(N=5)
        model = cb.build_coupled(p, coupled=False)
        V = cb.initial_covariance(
            model, cb.InitialStateSpec(r=0.0, T=0.0), cb.diagonalize(cb.build_bath(p))
        )
        n = model.n_coordinates
        for i in (0, 1):
            assert V.data[i, i] == pytest.approx(0.5, abs=1e-15)
            assert V.data[n + i, n + i] == pytest.approx(0.5, abs=1e-15)
            assert V.data[i, n + i] == 0.0

    def test_thermal_mode_variances(self):
        # ground state width 1/(2 omega), high-temperature limit ~ T
        q0, p0 = thermal_mode_variances(np.array([1.7]), 0.0)
        assert q0[0] == pytest.approx(1.0 / (2 * 1.7), rel=1e-14)
        assert p0[0] == pytest.approx(1.7 / 2, rel=1e-14)
        q1, _ = thermal_mode_variances(np.array([1.0]), 10.0)
        assert q1[0] == pytest.approx(0.5 / math.tanh(0.05), rel=1e-12)
        assert q1[0] == pytest.approx(10.0083, abs=2e-4)

    def test_coth_limits(self):
        assert thermal_coth(np.array([2.0]), 0.0)[0] == 1.0
        # no overflow for large omega/(2T)
        assert thermal_coth(np.array([4000.0]), 0.5)[0] == 1.0

    def test_chain_block_is_thermal_state_of_bath(self):
        p = cb.ModelParams(N=6)
        bath = cb.build_bath(p)
        bm = cb.diagonalize(bath)
        model = cb.build_coupled(p, coupled=False)
        T = 0.7
        V = cb.initial_covariance(model, cb.InitialStateSpec(r=0.0, T=T), bm)
        # rotate chain position block back to normal modes: must be diagonal
        n = model.n_coordinates
        rows = np.asarray(model.chain_indices())
        vq = V.data[np.ix_(rows, rows)]
        wq_expected, _ = thermal_mode_variances(bm.frequencies, T)
        back = bm.modes.T @ vq @ bm.modes
        assert np.max(np.abs(back - np.diag(wq_expected))) < 1e-12

    def test_rejects_negative_temperature(self):
        with pytest.raises(ValidationError):
            cb.InitialStateSpec(r=0.0, T=-0.1)


class TestPropagate:
    def test_identity_at_t0(self, rng):
        p = random_model_params(rng)
        modes = cb.diagonalize(cb.build_coupled(p))
        n = modes.n_coordinates
        V0 = cb.CovarianceMatrix(
            random_physical_covariance(rng, n), modes.labels
        )
        assert np.array_equal(cb.propagate(modes, V0, 0.0).data, V0.data)

    def test_quarter_period_swaps_squeezed_quadratures(self):
        modes = cb.diagonalize(single_oscillator())
        r = 0.8
        V0 = cb.CovarianceMatrix(
            np.diag([0.5 * math.exp(-2 * r), 0.5 * math.exp(2 * r)]), modes.labels
        )
        V = cb.propagate(modes, V0, math.pi / 2.0)
        assert V.data[0, 0] == pytest.approx(0.5 * math.exp(2 * r), rel=1e-12)
        assert V.data[1, 1] == pytest.approx(0.5 * math.exp(-2 * r), rel=1e-12)
        assert V.data[0, 1] == pytest.approx(0.0, abs=1e-12)

    def test_matches_ode_oracle_at_t5(self):
        p = cb.ModelParams(N=50)
        coupled = cb.build_coupled(p)
        modes = cb.diagonalize(coupled)
        V0 = cb.initial_covariance(
            cb.build_coupled(p, coupled=False),
            cb.InitialStateSpec(r=0.3, T=0.5),
            cb.diagonalize(cb.build_bath(p)),
        )
        S = rk4_propagator(coupled.mass_weighted_stiffness(), 5.0, 1000)[5.0]
        V_ode = S @ V0.data @ S.T
        V_exact = cb.propagate(modes, V0, 5.0).data
        assert np.max(np.abs(V_ode - V_exact)) <= 1e-7

    def test_symplectic_form_preservation(self, rng):
        for _ in range(5):
            p = random_model_params(rng)
            modes = cb.diagonalize(cb.build_coupled(p))
            n = modes.n_coordinates
            omega = cb.symplectic_form(n)
            t = float(rng.uniform(0.0, 40.0))
            S = cb.propagator(modes, t)
            assert np.max(np.abs(S @ omega @ S.T - omega)) < 1e-9

    def test_composition(self, rng):
        p = random_model_params(rng)
        modes = cb.diagonalize(cb.build_coupled(p))
        n = modes.n_coordinates
        V0 = cb.CovarianceMatrix(random_physical_covariance(rng, n), modes.labels)
        t1, t2 = 3.7, 11.2
        direct = cb.propagate(modes, V0, t1 + t2)
        stepped = cb.propagate(modes, cb.propagate(modes, V0, t1), t2)
        assert np.max(np.abs(direct.data - stepped.data)) < 1e-9

    def test_purity_conserved_at_zero_temperature(self, rng):
        p = random_model_params(rng)
        coupled = cb.build_coupled(p)
        modes = cb.diagonalize(coupled)
        V0 = cb.initial_covariance(
            cb.build_coupled(p, coupled=False),
            cb.InitialStateSpec(r=0.6, T=0.0),
            cb.diagonalize(cb.build_bath(p)),
        )
        for t in (0.0, 2.5, 17.0):
            V = cb.propagate(modes, V0, t)
            sign, logdet = np.linalg.slogdet(2.0 * V.data)
            assert sign > 0
            assert abs(logdet) < 1e-8

    def test_heisenberg_bound_along_evolution(self, rng):
        p = random_model_params(rng)
        coupled = cb.build_coupled(p)
        modes = cb.diagonalize(coupled)
        n = coupled.n_coordinates
        V0 = cb.initial_covariance(
            cb.build_coupled(p, coupled=False),
            cb.InitialStateSpec(r=0.4, T=0.3),
            cb.diagonalize(cb.build_bath(p)),
        )
        omega = cb.symplectic_form(n)
        for t in (1.3, 9.0):
            V = cb.propagate(modes, V0, t)
            nus = symplectic_spectrum_oracle(V.data, omega)
            assert np.min(nus) >= 0.5 - 1e-9

    def test_rejects_negative_time(self, fig2_params):
        modes = cb.diagonalize(cb.build_coupled(fig2_params))
        n = modes.n_coordinates
        V0 = cb.CovarianceMatrix(0.5 * np.eye(2 * n), modes.labels)
        with pytest.raises(ValidationError):
            cb.propagate(modes, V0, -1.0)


class TestReducedPropagatorRows:
    def setup_case(self, rng, n_half=30):
        p = cb.ModelParams(N=n_half)
        coupled = cb.build_coupled(p)
        modes = cb.diagonalize(coupled)
        V0 = cb.initial_covariance(
            cb.build_coupled(p, coupled=False),
            cb.InitialStateSpec(r=0.5, T=0.4),
            cb.diagonalize(cb.build_bath(p)),
        )
        return modes, V0

    def test_matches_full_propagation(self, rng):
        modes, V0 = self.setup_case(rng)
        for t in (0.7, 3.1, 19.4):
            rows = cb.reduced_propagator_rows(modes, t)
            fast = rows @ V0.data @ rows.T
            full = cb.reduced_system_covariance(cb.propagate(modes, V0, t)).data
            assert np.max(np.abs(fast - full)) <= 1e-10

    def test_identity_rows_at_t0(self, rng):
        modes, _ = self.setup_case(rng)
        rows = cb.reduced_propagator_rows(modes, 0.0)
        n = modes.n_coordinates
        expected = np.zeros((4, 2 * n))
        expected[0, 0] = expected[2, 1] = 1.0
        expected[1, n] = expected[3, n + 1] = 1.0
        assert np.max(np.abs(rows - expected)) < 1e-12

    def test_linearity(self, rng):
        modes, V0 = self.setup_case(rng)
        rows = cb.reduced_propagator_rows(modes, 2.2)
        a = 1.7
        assert np.allclose(
            rows @ (a * V0.data) @ rows.T, a * (rows @ V0.data @ rows.T), rtol=1e-13
        )

    def test_rejects_single_oscillator_models(self):
        p = cb.ModelParams(N=4, attachment=cb.SingleEdge())
        modes = cb.diagonalize(cb.build_coupled(p))
        with pytest.raises(ValidationError):
            cb.reduced_propagator_rows(modes, 1.0)


class TestReducedSystemCovariance:
    def test_block_extraction_and_order(self):
        p = cb.ModelParams(N=3)
        model = cb.build_coupled(p, coupled=False)
        n = model.n_coordinates
        data = np.zeros((2 * n, 2 * n))
        # distinct markers: positions block, momentum block, cross
        data[0, 0], data[1, 1] = 1.0, 2.0
        data[n, n], data[n + 1, n + 1] = 3.0, 4.0
        data[0, n] = data[n, 0] = 0.25
        V = cb.CovarianceMatrix(data, model.labels)
        tm = cb.reduced_system_covariance(V)
        expected = np.zeros((4, 4))
        expected[0, 0], expected[1, 1] = 1.0, 3.0
        expected[2, 2], expected[3, 3] = 2.0, 4.0
        expected[0, 1] = expected[1, 0] = 0.25
        assert np.array_equal(tm.data, expected)

    def test_symmetry_and_physicality_preserved(self, rng):
        from conftest import interleaved_symplectic_form

        p = cb.ModelParams(N=4)
        labels = cb.build_coupled(p).labels
        n = len(labels)
        omega4 = interleaved_symplectic_form()
        for _ in range(10):
            V = cb.CovarianceMatrix(random_physical_covariance(rng, n), labels)
            tm = cb.reduced_system_covariance(V)
            assert np.max(np.abs(tm.data - tm.data.T)) < 1e-12
            nus = symplectic_spectrum_oracle(tm.data, omega4)
            assert np.min(nus) >= 0.5 - 1e-9

    def test_rejects_single_oscillator(self):
        p = cb.ModelParams(N=3, attachment=cb.SingleEdge())
        model = cb.build_coupled(p)
        V = cb.CovarianceMatrix(0.5 * np.eye(2 * model.n_coordinates), model.labels)
        with pytest.raises(ValidationError):
            cb.reduced_system_covariance(V)


class TestMeanEnergy:
    def test_ground_state(self):
        model = single_oscillator()
        V = cb.CovarianceMatrix(0.5 * np.eye(2), model.labels)
        assert cb.mean_energy(model, V) == pytest.approx(0.5, rel=1e-14)

    def test_squeezed_state(self):
        model = single_oscillator()
        r = 0.9
        V = cb.CovarianceMatrix(
            np.diag([0.5 * math.exp(-2 * r), 0.5 * math.exp(2 * r)]), model.labels
        )
        assert cb.mean_energy(model, V) == pytest.approx(0.5 * math.cosh(2 * r), rel=1e-13)

    def test_conserved_along_propagation(self):
        p = cb.ModelParams(N=50)
        coupled = cb.build_coupled(p)
        modes = cb.diagonalize(coupled)
        V0 = cb.initial_covariance(
            cb.build_coupled(p, coupled=False),
            cb.InitialStateSpec(r=0.5, T=0.8),
            cb.diagonalize(cb.build_bath(p)),
        )
        e0 = cb.mean_energy(coupled, V0)
        t_rev = cb.derived_quantities(p).t_rev
        for frac in (0.1, 0.5, 1.0):
            V = cb.propagate(modes, V0, frac * t_rev)
            assert abs(cb.mean_energy(coupled, V) - e0) <= 1e-9 * abs(e0)

    def test_dimension_mismatch(self):
        model = single_oscillator()
        other = cb.CovarianceMatrix(0.5 * np.eye(4), (("system", 1), ("system", 2)))
        with pytest.raises(ValidationError):
            cb.mean_energy(model, other)


class TestCollectiveCoordinates:
    def test_edge_pair_relative_motion_is_free(self):
        """EdgePair: the relative coordinate evolves as a free squeezed state."""
        p = cb.ModelParams(N=30)
        der = cb.derived_quantities(p)
        coupled = cb.build_coupled(p)
        modes = cb.diagonalize(coupled)
        r = 0.4
        V0 = cb.initial_covariance(
            cb.build_coupled(p, coupled=False),
            cb.InitialStateSpec(r=r, T=0.6),
            cb.diagonalize(cb.build_bath(p)),
        )
        og = der.Omega_gamma
        x0, p0 = 0.5 * math.exp(-2 * r), 0.5 * math.exp(2 * r)
        rot = np.array(
            [[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, -1, 0], [0, 1, 0, -1]]
        ) / math.sqrt(2.0)
        for t in (0.9, 7.3, 24.0):
            V = cb.reduced_system_covariance(cb.propagate(modes, V0, t)).data
            vpm = rot @ V @ rot.T
            c, s = math.cos(og * t), math.sin(og * t)
            assert vpm[2, 2] == pytest.approx(c * c * x0 + (s / og) ** 2 * p0, abs=1e-8)
            assert vpm[3, 3] == pytest.approx((og * s) ** 2 * x0 + c * c * p0, abs=1e-8)
            assert vpm[2, 3] == pytest.approx(c * s * (p0 / og - og * x0), abs=1e-8)
            # COM-relative correlations vanish identically
            assert abs(vpm[0, 2]) < 1e-12
            assert abs(vpm[1, 3]) < 1e-12

    def test_symmetric_pair_splits_into_branches(self):
        """Full dynamics equals the direct sum of the +/- branch dynamics."""
        p = cb.ModelParams(N=20, epsilon=-0.0858, attachment=cb.SymmetricPair(s=4))
        full_c = cb.build_coupled(p)
        full_u = cb.build_coupled(p, coupled=False)
        bm = cb.diagonalize(cb.build_bath(p))
        V0 = cb.initial_covariance(full_u, cb.InitialStateSpec(r=0.7, T=0.4), bm)
        modes = cb.diagonalize(full_c)
        split = cb.pm_transform(full_c)
        n = full_c.n_coordinates
        half = split.plus.n_coordinates
        rr = np.zeros((2 * n, 2 * n))
        rr[:n, :n] = split.transform
        rr[n:, n:] = split.transform
        v0_pm = rr @ V0.data @ rr.T

        def embed(i0):
            idx = list(range(i0, i0 + half)) + list(range(n + i0, n + i0 + half))
            return np.ix_(idx, idx)

        vp0 = cb.CovarianceMatrix(v0_pm[embed(0)], split.plus.labels)
        vm0 = cb.CovarianceMatrix(v0_pm[embed(half)], split.minus.labels)
        mp, mm = cb.diagonalize(split.plus), cb.diagonalize(split.minus)
        for t in (2.1, 13.0):
            v_pm = np.zeros((2 * n, 2 * n))
            v_pm[embed(0)] = cb.propagate(mp, vp0, t).data
            v_pm[embed(half)] = cb.propagate(mm, vm0, t).data
            back = rr.T @ v_pm @ rr
            full = cb.propagate(modes, V0, t).data
            assert np.max(np.abs(back - full)) < 1e-9
