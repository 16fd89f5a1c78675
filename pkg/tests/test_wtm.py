import numpy as np
import pytest
from numpy.testing import assert_allclose

from pdalloc.wtm import (
    DecisionVariables,
    ProductArchitecture,
    RoundBounds,
    build_wtm,
    completion_rate,
    performance,
    propagate,
    total_remaining,
)


def two_module_pair(gamma=0.05, phi=0.5, T=2, symmetric=True):
    edges = [(0, 1), (1, 0)] if symmetric else [(0, 1)]
    arch = ProductArchitecture.uniform(2, edges, phi_init=phi, gamma_init=gamma)
    dv = DecisionVariables(
        phi=np.full((2, T), phi), gamma=np.full((len(edges), T), gamma)
    )
    return arch, dv


class TestArchitectureValidation:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError, match="self-loop"):
            ProductArchitecture.uniform(2, [(0, 0)])

    def test_rejects_duplicate_edge(self):
        with pytest.raises(ValueError, match="duplicate"):
            ProductArchitecture.uniform(2, [(0, 1), (0, 1)])

    def test_rejects_nonpositive_params(self):
        with pytest.raises(ValueError):
            ProductArchitecture(
                n=1, edges=(), phi_init=np.array([0.0]), gamma_init=np.zeros(0)
            )

    def test_rejects_phi_above_one(self):
        with pytest.raises(ValueError):
            ProductArchitecture(
                n=1, edges=(), phi_init=np.array([1.5]), gamma_init=np.zeros(0)
            )

    def test_immutability(self):
        arch = ProductArchitecture.uniform(2, [(0, 1)])
        with pytest.raises(ValueError):
            arch.phi_init[0] = 0.9


class TestBuildWtm:
    def test_literal_product_off_diagonal(self):
        # one directed rule at 0.05 for two rounds: entry is the running product
        arch, dv = two_module_pair(symmetric=False)
        A2 = build_wtm(arch, dv, 2, mode="literal")
        assert_allclose(A2, [[0.5, 0.0025], [0.0, 0.5]])

    def test_single_module(self):
        arch = ProductArchitecture.uniform(1, [])
        dv = DecisionVariables(phi=np.array([[0.5]]), gamma=np.zeros((0, 1)))
        assert_allclose(build_wtm(arch, dv, 1), [[0.5]])

    def test_round_one_is_empty_product(self):
        arch, dv = two_module_pair()
        A1 = build_wtm(arch, dv, 1, mode="literal")
        assert A1[0, 1] == 0.05
        assert A1[1, 0] == 0.05

    def test_round_index_out_of_range(self):
        arch, dv = two_module_pair()
        with pytest.raises(ValueError, match="round index"):
            build_wtm(arch, dv, 3)
        with pytest.raises(ValueError, match="round index"):
            build_wtm(arch, dv, 0)

    def test_modes_agree_at_round_one(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            arch = ProductArchitecture.uniform(
                3,
                [(0, 1), (1, 2), (2, 0)],
                phi_init=rng.uniform(0.2, 1.0),
                gamma_init=rng.uniform(0.01, 0.3),
            )
            dv = DecisionVariables(
                phi=rng.uniform(0.05, 0.2, (3, 2)), gamma=rng.uniform(0.005, 0.01, (3, 2))
            )
            assert_allclose(
                build_wtm(arch, dv, 1, "literal"), build_wtm(arch, dv, 1, "ratio")
            )

    def test_uninvested_mode_divergence_after_round_one(self):
        # gamma pinned at its initial value: literal decays geometrically,
        # ratio holds the initial strength; they coincide only at k = 1
        arch, dv = two_module_pair(gamma=0.05, T=3)
        for k in (1, 2, 3):
            lit = build_wtm(arch, dv, k, "literal")
            rat = build_wtm(arch, dv, k, "ratio")
            assert_allclose(lit[0, 1], 0.05**k)
            assert_allclose(rat[0, 1], 0.05)
        assert_allclose(
            build_wtm(arch, dv, 1, "literal"), build_wtm(arch, dv, 1, "ratio")
        )

    def test_ratio_mode_keeps_uninvested_strength(self):
        arch, dv = two_module_pair(gamma=0.05, T=3)
        A3 = build_wtm(arch, dv, 3, mode="ratio")
        assert_allclose(A3[0, 1], 0.05)
        assert_allclose(build_wtm(arch, dv, 3, mode="literal")[0, 1], 0.05**3)


class TestPropagate:
    def test_single_module_one_round(self):
        arch = ProductArchitecture.uniform(1, [])
        dv = DecisionVariables(phi=np.array([[0.5]]), gamma=np.zeros((0, 1)))
        traj = propagate(arch, dv, np.array([1.0]))
        assert_allclose(traj.P[1], [0.5])

    def test_decoupled_geometric_decay(self):
        arch = ProductArchitecture.uniform(2, [])
        dv = DecisionVariables(phi=np.full((2, 2), 0.5), gamma=np.zeros((0, 2)))
        traj = propagate(arch, dv, np.ones(2))
        assert_allclose(traj.P[2], [0.25, 0.25])

    def test_symmetric_pair_hand_values(self):
        arch, dv = two_module_pair()
        traj = propagate(arch, dv, np.ones(2), mode="literal")
        assert_allclose(traj.P[1], [0.55, 0.55])
        assert_allclose(traj.P[2], [0.276375, 0.276375])

    def test_rejects_nonpositive_start(self):
        arch, dv = two_module_pair()
        with pytest.raises(ValueError):
            propagate(arch, dv, np.array([1.0, 0.0]))

    def test_rejects_dimension_mismatch(self):
        arch, dv = two_module_pair()
        with pytest.raises(ValueError):
            propagate(arch, dv, np.ones(3))

    def test_monotone_dominance(self):
        # raising any phi or gamma entry never lowers any remaining-work value
        rng = np.random.default_rng(11)
        for _ in range(40):
            n = int(rng.integers(2, 5))
            all_pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
            k = int(rng.integers(1, len(all_pairs) + 1))
            idx = rng.choice(len(all_pairs), size=k, replace=False)
            edges = [all_pairs[i] for i in idx]
            arch = ProductArchitecture.uniform(n, edges)
            T = int(rng.integers(1, 4))
            phi = rng.uniform(0.1, 0.5, (n, T))
            gamma = rng.uniform(0.01, 0.05, (len(edges), T))
            p0 = rng.uniform(0.5, 2.0, n)
            base = propagate(arch, DecisionVariables(phi=phi, gamma=gamma), p0)
            phi_up = phi.copy()
            i, t = int(rng.integers(n)), int(rng.integers(T))
            phi_up[i, t] *= 1.3
            up = propagate(arch, DecisionVariables(phi=phi_up, gamma=gamma), p0)
            assert np.all(up.P >= base.P - 1e-15)
            gamma_up = gamma.copy()
            e, t = int(rng.integers(len(edges))), int(rng.integers(T))
            gamma_up[e, t] *= 1.3
            up = propagate(arch, DecisionVariables(phi=phi, gamma=gamma_up), p0)
            assert np.all(up.P >= base.P - 1e-15)


class TestAggregates:
    def test_total_remaining(self):
        arch = ProductArchitecture.uniform(2, [])
        dv = DecisionVariables(phi=np.full((2, 2), 0.5), gamma=np.zeros((0, 2)))
        traj = propagate(arch, dv, np.ones(2))
        assert total_remaining(traj, 2) == 0.5
        assert total_remaining(traj, 0) == 2.0

    def test_total_remaining_start_of_large_instance(self):
        arch = ProductArchitecture.uniform(50, [])
        dv = DecisionVariables(phi=np.full((50, 1), 0.5), gamma=np.zeros((0, 1)))
        traj = propagate(arch, dv, np.ones(50))
        assert total_remaining(traj, 0) == 50.0

    def test_performance_undefined_at_zero(self):
        from pdalloc.wtm import WorkTrajectory

        traj = WorkTrajectory(P=np.array([[1.0], [0.0]]))
        assert total_remaining(traj, 1) == 0.0
        with pytest.raises(ValueError, match="undefined"):
            performance(traj, 1)

    def test_performance_is_reciprocal(self):
        arch = ProductArchitecture.uniform(2, [])
        dv = DecisionVariables(phi=np.full((2, 2), 0.5), gamma=np.zeros((0, 2)))
        traj = propagate(arch, dv, np.ones(2))
        assert performance(traj, 2) == 2.0

    def test_completion_rate_hand_values(self):
        from pdalloc.wtm import WorkTrajectory

        traj = WorkTrajectory(P=np.array([[1.0], [0.75]]))
        assert completion_rate(traj, 0) == 0.25
        traj = WorkTrajectory(P=np.array([[1.0], [1.0]]))
        assert completion_rate(traj, 0) == 0.0

    def test_completion_rate_geometric(self):
        from pdalloc.wtm import WorkTrajectory

        traj = WorkTrajectory(P=np.array([[1.0], [0.5], [0.25]]))
        assert completion_rate(traj, 0) == 0.5
        assert completion_rate(traj, 1) == 0.5

    def test_completion_rate_zero_denominator(self):
        from pdalloc.wtm import WorkTrajectory

        traj = WorkTrajectory(P=np.array([[0.0], [0.0]]))
        with pytest.raises(ValueError):
            completion_rate(traj, 0)


class TestRoundBounds:
    def test_from_epsilon(self):
        arch = ProductArchitecture.uniform(2, [(0, 1)], phi_init=0.5, gamma_init=0.05)
        b = RoundBounds.from_epsilon(arch, 5, 0.1)
        assert b.T == 5
        assert_allclose(b.phi_lo, 0.05)
        assert_allclose(b.phi_hi, 0.5)
        assert_allclose(b.gamma_lo, 0.005)
        assert_allclose(b.gamma_hi, 0.05)

    def test_rejects_bad_interval(self):
        with pytest.raises(ValueError):
            RoundBounds(
                phi_lo=np.full((1, 1), 0.5),
                phi_hi=np.full((1, 1), 0.1),
                gamma_lo=np.zeros((0, 1)),
                gamma_hi=np.zeros((0, 1)),
                T=1,
            )

    def test_within(self):
        arch = ProductArchitecture.uniform(2, [(0, 1)])
        b = RoundBounds.from_epsilon(arch, 2, 0.1)
        dv = DecisionVariables.at_initial(arch, 2)
        assert dv.within(b)
        dv_bad = DecisionVariables(phi=np.full((2, 2), 0.9), gamma=np.full((1, 2), 0.05))
        assert not dv_bad.within(b)
