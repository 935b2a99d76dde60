import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from nmcollide import (
    BathSpec,
    CollisionConfig,
    ConfigurationError,
    DensityOperator,
    apply_channel,
    compose,
    partial_swap_channel,
    partial_trace,
    run_discrete,
    run_discrete_thermal,
    sa_collision,
    tensor,
    thermal_weights,
    trace_distance,
)
from nmcollide.collisions import purified_pair_ket
from nmcollide.continuum import build_thermal_kernel_map

PROBE = DensityOperator(np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]]))


def pure_cfg(h, t_c, p_s, n_steps):
    return CollisionConfig(
        system_dim=2, ancilla_dim=2, hamiltonian=h, t_c=t_c, p_s=p_s,
        n_steps=n_steps, bath=BathSpec(kind="pure_ground"),
    )


class TestPartialSwap:
    def test_zero_probability_is_identity(self):
        ch = partial_swap_channel(2, 0.0)
        rho = tensor(DensityOperator.basis(2, 0), DensityOperator.basis(2, 1))
        assert trace_distance(apply_channel(ch, rho), rho) < 1e-14

    def test_unit_probability_swaps(self):
        ch = partial_swap_channel(2, 1.0)
        rho = tensor(DensityOperator.basis(2, 0), DensityOperator.basis(2, 1))
        out = apply_channel(ch, rho)
        expect = tensor(DensityOperator.basis(2, 1), DensityOperator.basis(2, 0))
        assert trace_distance(out, expect) < 1e-14

    def test_half_probability_mixes(self):
        ch = partial_swap_channel(2, 0.5)
        rho = tensor(DensityOperator.basis(2, 0), DensityOperator.basis(2, 1))
        out = apply_channel(ch, rho)
        expect = 0.5 * rho.data + 0.5 * tensor(
            DensityOperator.basis(2, 1), DensityOperator.basis(2, 0)
        ).data
        assert np.max(np.abs(out.data - expect)) < 1e-14

    def test_probability_out_of_range(self):
        with pytest.raises(ConfigurationError):
            partial_swap_channel(2, 1.2)

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_always_trace_preserving(self, p):
        assert partial_swap_channel(3, p).trace_defect() < 1e-14


class TestSaCollision:
    def test_zero_time_is_identity(self, jc_h):
        joint = tensor(PROBE, DensityOperator.basis(2, 0))
        out = sa_collision(joint, jc_h, 0.0)
        assert trace_distance(out, joint) < 1e-14

    @pytest.mark.parametrize("theta", [0.2, 0.9, np.pi / 2, 2.4])
    def test_single_rabi_oscillation(self, jc_h, theta):
        joint = tensor(DensityOperator.basis(2, 1), DensityOperator.basis(2, 0))
        out = sa_collision(joint, jc_h, theta)
        system = partial_trace(out, [2, 2], {0})
        assert abs(system.data[1, 1].real - np.cos(theta) ** 2) < 1e-12

    def test_ground_state_is_stationary(self, jc_h):
        joint = tensor(DensityOperator.basis(2, 0), DensityOperator.basis(2, 0))
        out = sa_collision(joint, jc_h, 1.3)
        assert trace_distance(out, joint) < 1e-14


class TestRunDiscrete:
    def test_memoryless_populations_compose(self, jc_h):
        # with no AA collisions every step applies the same damping channel
        cfg = pure_cfg(jc_h, t_c=0.3, p_s=0.0, n_steps=10)
        traj = run_discrete(cfg, DensityOperator.basis(2, 1))
        expect = np.cos(0.3) ** (2 * np.arange(11))
        assert np.max(np.abs(traj.populations(1) - expect)) < 1e-12

    def test_memoryless_equals_composed_channel(self, jc_h):
        from nmcollide.continuum import build_kernel_map

        cfg = pure_cfg(jc_h, t_c=0.4, p_s=0.0, n_steps=5)
        traj = run_discrete(cfg, PROBE)
        step_channel = build_kernel_map(jc_h).channel(0.4)
        composed = step_channel
        for _ in range(4):
            composed = compose(step_channel, composed)
        assert trace_distance(apply_channel(composed, PROBE), traj.states[-1]) < 1e-12

    @pytest.mark.parametrize("p_s", [0.0, 0.5, 1.0])
    def test_single_step_is_one_collision(self, jc_h, p_s):
        cfg = pure_cfg(jc_h, t_c=0.7, p_s=p_s, n_steps=1)
        traj = run_discrete(cfg, PROBE)
        joint = tensor(PROBE, DensityOperator.basis(2, 0))
        expect = partial_trace(sa_collision(joint, jc_h, 0.7), [2, 2], {0})
        assert trace_distance(traj.states[1], expect) < 1e-14

    def test_perfect_swap_is_stroboscopic_kernel(self, jc_h):
        # p_s = 1 hands each fresh ancilla the full state of its predecessor,
        # so rho_n equals the single-ancilla coherent evolution at t = n t_c
        cfg = pure_cfg(jc_h, t_c=0.05, p_s=1.0, n_steps=60)
        traj = run_discrete(cfg, DensityOperator.basis(2, 1))
        taus = np.array(traj.times)
        assert np.max(np.abs(traj.populations(1) - np.cos(taus) ** 2)) < 1e-12

    def test_times_are_exact_multiples(self, jc_h):
        cfg = pure_cfg(jc_h, t_c=0.1, p_s=0.3, n_steps=7)
        traj = run_discrete(cfg, PROBE)
        assert traj.times == tuple(n * 0.1 for n in range(8))

    def test_all_states_valid(self, jc_h):
        cfg = pure_cfg(jc_h, t_c=0.35, p_s=0.6, n_steps=25)
        traj = run_discrete(cfg, PROBE)
        for state in traj.states:
            assert abs(np.trace(state.data) - 1.0) < 1e-12
            assert np.linalg.eigvalsh(state.data)[0] >= -1e-10

    def test_rejects_thermal_bath(self, jc_h):
        cfg = CollisionConfig(
            system_dim=2, ancilla_dim=2, hamiltonian=jc_h, t_c=0.1, p_s=0.5,
            n_steps=2, bath=BathSpec(kind="thermal", weights=(1.0, 0.0)),
        )
        with pytest.raises(ConfigurationError):
            run_discrete(cfg, PROBE)

    def test_rejects_bad_initial_dimension(self, jc_h):
        cfg = pure_cfg(jc_h, t_c=0.1, p_s=0.5, n_steps=2)
        with pytest.raises(ConfigurationError):
            run_discrete(cfg, DensityOperator.maximally_mixed(3))


class TestConfigValidation:
    def test_swap_probability_range(self, jc_h):
        with pytest.raises(ConfigurationError):
            pure_cfg(jc_h, t_c=0.1, p_s=-0.1, n_steps=1)

    def test_step_count(self, jc_h):
        with pytest.raises(ConfigurationError):
            pure_cfg(jc_h, t_c=0.1, p_s=0.5, n_steps=0)

    def test_hamiltonian_dimension(self, jc_h):
        with pytest.raises(ConfigurationError):
            CollisionConfig(
                system_dim=2, ancilla_dim=3, hamiltonian=jc_h, t_c=0.1, p_s=0.5,
                n_steps=1, bath=BathSpec(kind="pure_ground"),
            )

    def test_bath_spec_validation(self):
        with pytest.raises(ConfigurationError):
            BathSpec(kind="thermal")
        with pytest.raises(ConfigurationError):
            BathSpec(kind="pure_ground", weights=(1.0,))
        with pytest.raises(ConfigurationError):
            BathSpec(kind="squeezed")
        with pytest.raises(ConfigurationError):
            BathSpec(kind="thermal", weights=(0.7, 0.7))


class TestThermal:
    def test_weights_normalize(self):
        w = thermal_weights([0.0, 1.0], 1.0)
        assert abs(w.sum() - 1.0) < 1e-15
        assert abs(w[1] / w[0] - np.exp(-1.0)) < 1e-12

    def test_infinite_beta_weights_stable(self):
        w = thermal_weights([0.0, 1.0], 1e6)
        assert np.allclose(w, [1.0, 0.0])

    def test_purified_pair_marginal(self):
        w = np.array([0.7, 0.3])
        psi = purified_pair_ket(w)
        pair = DensityOperator.from_ket(psi)
        marginal = partial_trace(pair, [2, 2], {0})
        assert np.max(np.abs(marginal.data - np.diag(w))) < 1e-12

    def test_zero_temperature_weights_match_pure(self, jc_h):
        bath = BathSpec(kind="thermal", weights=(1.0, 0.0))
        cfg_t = CollisionConfig(2, 2, jc_h, t_c=0.3, p_s=0.4, n_steps=12, bath=bath)
        cfg_p = pure_cfg(jc_h, t_c=0.3, p_s=0.4, n_steps=12)
        a = run_discrete_thermal(cfg_t, PROBE)
        b = run_discrete(cfg_p, PROBE)
        assert max(trace_distance(x, y) for x, y in zip(a.states, b.states)) < 1e-12

    def test_infinite_temperature_fresh_marginal(self):
        bath = BathSpec(kind="thermal", energies=(0.0, 1.0), inverse_temperature=0.0)
        assert np.allclose(bath.weight_vector(2), [0.5, 0.5])

    def test_relaxation_to_single_collision_fixed_point(self, jc_h):
        # memoryless thermal collisions drive the system to the fixed point of
        # one collision map, found independently by iterating to convergence
        bath = BathSpec(kind="thermal", energies=(0.0, 1.0), inverse_temperature=1.0)
        cfg = CollisionConfig(2, 2, jc_h, t_c=0.5, p_s=0.0, n_steps=120, bath=bath)
        traj = run_discrete_thermal(cfg, DensityOperator.basis(2, 1))
        kernel = build_thermal_kernel_map(jc_h, energies=(0.0, 1.0), inverse_temperature=1.0)
        ch = kernel.channel(0.5)
        fixed = DensityOperator.basis(2, 1)
        for _ in range(500):
            fixed = apply_channel(ch, fixed)
        target = fixed.data[1, 1].real
        assert target > 0.05  # relaxes to the thermal value, not to zero
        assert abs(traj.populations(1)[-1] - target) < 1e-9

    def test_perfect_swap_tracks_thermal_kernel(self, jc_h):
        # pair swaps hand each fresh pair the full predecessor state including
        # system correlations, so at p_s = 1 the trajectory equals the thermal
        # kernel channel at stroboscopic times; this pins down the whole-pair
        # swap convention against the continuum construction
        bath = BathSpec(kind="thermal", energies=(0.0, 1.0), inverse_temperature=0.9)
        kernel = build_thermal_kernel_map(jc_h, energies=(0.0, 1.0), inverse_temperature=0.9)
        cfg = CollisionConfig(2, 2, jc_h, t_c=0.05, p_s=1.0, n_steps=80, bath=bath)
        traj = run_discrete_thermal(cfg, PROBE)
        worst = max(
            trace_distance(state, apply_channel(kernel.channel(t), PROBE))
            for state, t in zip(traj.states, traj.times)
        )
        assert worst < 1e-12

    def test_rejects_pure_bath(self, jc_h):
        cfg = pure_cfg(jc_h, t_c=0.1, p_s=0.5, n_steps=2)
        with pytest.raises(ConfigurationError):
            run_discrete_thermal(cfg, PROBE)
