# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

import numpy as np
import pytest

from utils_spde.common.exceptions import BlowUpDetected, InvalidArgument
from utils_spde.solver.paths import (
    prepare_setup,
    resolve_dt,
    simulate_path,
    simulate_paths,
    step_schedule,
)
from utils_spde.solver.specs import (
    FieldState,
    InitialCondition,
    InitialKind,
    SigmaKind,
    SigmaSpec,
    parse_initial_condition,
    parse_sigma,
)
from utils_spde.solver.stepping import deterministic_drift, dt_max, em_step


def test_parse_sigma():
    assert parse_sigma("linear").kind == SigmaKind.LINEAR
    assert parse_sigma("additive")(np.array([3.0, -2.0])).tolist() == [1.0, 1.0]
    pinched = parse_sigma("pinched:0.5,2")
    assert (pinched.l, pinched.L) == (0.5, 2.0)
    assert pinched.spec == "pinched:0.5,2.0"
    for spec in ["quadratic", "pinched:2", "pinched:2,1"]:
        with pytest.raises(InvalidArgument):
            parse_sigma(spec)


def test_pinched_sigma_bounds():
    sigma = SigmaSpec(SigmaKind.PINCHED, 0.5, 2.0)
    u = np.linspace(-10, 10, 201)
    assert np.all(np.abs(sigma(u)) >= 0.5 * np.abs(u) - 1e-12)
    assert np.all(np.abs(sigma(u)) <= 2.0 * np.abs(u) + 1e-12)
    assert sigma.lipschitz == 2.0


def test_parse_initial_condition(grid64, exact_basis):
    assert parse_initial_condition("constant:2").values(grid64).tolist() == [2.0] * 64
    phi1 = parse_initial_condition("phi1:0.5")
    np.testing.assert_array_equal(phi1.values(grid64, exact_basis), 0.5 * exact_basis.phi[0])
    bump = parse_initial_condition("bump:0.25,3")
    values = bump.values(grid64)
    assert values.max() == 3.0
    assert values[0] < 3.0
    assert bump.spec == "bump:0.25,3.0"
    for spec in ["sine", "bump:0.25", "constant:1,2", "constant:-1", "bump:1.5,1"]:
        with pytest.raises(InvalidArgument):
            parse_initial_condition(spec)
    with pytest.raises(InvalidArgument):
        InitialCondition(InitialKind.FIRST_EIGENFUNCTION).values(grid64)


def test_positivity_on_d_eps(grid64, exact_basis):
    assert InitialCondition(InitialKind.FIRST_EIGENFUNCTION).satisfies_positivity(
        grid64, 0.25, exact_basis
    )
    assert InitialCondition(InitialKind.BUMP, 1.0, 0.5).satisfies_positivity(grid64, 0.25)
    assert not InitialCondition(InitialKind.CONSTANT, 0.0).satisfies_positivity(grid64, 0.25)


def test_field_state_time():
    with pytest.raises(InvalidArgument):
        FieldState(-1.0, np.zeros(4))


def test_dt_max(white_cov):
    assert dt_max(1.0, SigmaSpec(), white_cov) == pytest.approx(1.0 / (4.0 * 32.0))
    assert dt_max(0.0, SigmaSpec(), white_cov) == np.inf
    assert resolve_dt(1.0, 1.0, SigmaSpec(), white_cov) == pytest.approx(1.0 / 128.0)
    assert resolve_dt(1e-3, 1.0, SigmaSpec(), white_cov) == 1e-3


def test_deterministic_drift_first_mode(exact_basis, grid64):
    state = FieldState(0.0, np.array(exact_basis.phi[0]))
    moved = deterministic_drift(exact_basis, state, 0.1)
    np.testing.assert_allclose(
        moved.values, np.exp(-exact_basis.mu[0] * 0.1) * exact_basis.phi[0], rtol=1e-10
    )
    assert moved.t == pytest.approx(0.1)
    frozen = deterministic_drift(exact_basis, state, 0.1, with_drift=False)
    np.testing.assert_allclose(frozen.values, exact_basis.phi[0], atol=1e-12)
    with pytest.raises(InvalidArgument):
        deterministic_drift(exact_basis, state, 0.0)


def test_em_step(exact_basis, white_cov):
    rng = np.random.default_rng(1)
    state = FieldState(0.0, np.array(exact_basis.phi[0]))
    without_noise = em_step(exact_basis, white_cov, SigmaSpec(), 0.0, state, 0.01, rng)
    expected = deterministic_drift(exact_basis, state, 0.01)
    np.testing.assert_array_equal(without_noise.values, expected.values)
    noisy = em_step(exact_basis, white_cov, SigmaSpec(), 1.0, state, 0.001, rng)
    assert np.all(np.isfinite(noisy.values))
    with pytest.raises(InvalidArgument):
        em_step(exact_basis, white_cov, SigmaSpec(), 1.0, state, 0.1, rng)
    with pytest.raises(InvalidArgument):
        em_step(exact_basis, white_cov, SigmaSpec(), -1.0, state, 0.001, rng)
    broken = FieldState(0.0, np.full(64, np.inf), path_id=5)
    with pytest.raises(BlowUpDetected) as e:
        em_step(exact_basis, white_cov, SigmaSpec(), 0.0, broken, 0.001, rng)
    assert e.value.path_ids == [5]


def test_step_schedule():
    steps, snapshot_after = step_schedule([0.0, 0.05, 0.1], 0.02)
    assert snapshot_after == [0, 3, 6]
    assert np.cumsum(steps)[2] == pytest.approx(0.05)
    assert steps.sum() == pytest.approx(0.1)
    assert np.all(steps <= 0.02)
    with pytest.raises(InvalidArgument):
        step_schedule([0.1, 0.05], 0.02)


def test_prepare_setup(tiny_config):
    setup = prepare_setup(tiny_config)
    assert setup.grid.n_cells == 32
    assert setup.basis.n_modes == 16
    assert setup.u0.tolist() == [1.0] * 32


def test_simulate_shapes(tiny_config):
    bundle = simulate_paths(tiny_config)
    assert bundle.values.shape == (200, 2, 32)
    assert not bundle.blown_up.any()
    assert bundle.lam == 1.0
    assert bundle.dt == tiny_config.dt


def test_simulate_independent_of_batching(tiny_config):
    reference = simulate_paths(tiny_config, path_ids=range(40))
    rebatched = simulate_paths(tiny_config.with_overrides(batch_size=7), path_ids=range(40))
    np.testing.assert_allclose(rebatched.values, reference.values, rtol=1e-12, atol=1e-14)
    single = simulate_paths(tiny_config, path_ids=[17])
    np.testing.assert_allclose(single.values[0], reference.values[17], rtol=1e-12, atol=1e-14)


def test_simulate_independent_of_workers(tiny_config):
    config = tiny_config.with_overrides(batch_size=10)
    reference = simulate_paths(config, path_ids=range(40))
    pooled = simulate_paths(config.with_overrides(num_workers=2), path_ids=range(40))
    np.testing.assert_allclose(pooled.values, reference.values, rtol=1e-12, atol=1e-14)


def test_simulate_seed_changes_paths(tiny_config):
    first = simulate_paths(tiny_config, path_ids=range(4))
    second = simulate_paths(tiny_config.with_overrides(seed=1), path_ids=range(4))
    assert not np.allclose(first.values, second.values)


def test_zero_noise_is_semigroup(tiny_config):
    config = tiny_config.with_overrides(u0="phi1", lambdas=(0.0,), n_paths=3)
    bundle = simulate_paths(config)
    basis = prepare_setup(config).basis
    for i, t in enumerate(config.times):
        np.testing.assert_allclose(
            bundle.values[:, i, :],
            np.tile(np.exp(-basis.mu[0] * t) * basis.phi[0], (3, 1)),
            rtol=1e-10,
            atol=1e-12,
        )


def test_mean_follows_semigroup(tiny_config):
    config = tiny_config.with_overrides(n_paths=400)
    noisy = simulate_paths(config)
    deterministic = simulate_paths(config.with_overrides(lambdas=(0.0,)), path_ids=[0])
    k = 15
    samples = noisy.values[:, -1, k]
    stderr = samples.std(ddof=1) / np.sqrt(samples.size)
    assert abs(samples.mean() - deterministic.values[0, -1, k]) <= 4 * stderr


def test_simulate_path(tiny_config):
    states = simulate_path(tiny_config, 3)
    assert [s.t for s in states] == list(tiny_config.times)
    assert all(s.path_id == 3 for s in states)
    bundle = simulate_paths(tiny_config, path_ids=[3])
    np.testing.assert_array_equal(states[-1].values, bundle.values[0, -1])


class _FailingPool:
    exited = False

    def __init__(self, processes):
        self.processes = processes

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        _FailingPool.exited = True
        return False

    def map(self, func, iterable):
        raise RuntimeError("worker failed")


def test_simulate_pool_released_on_worker_error(tiny_config, monkeypatch):
    monkeypatch.setattr("utils_spde.solver.paths.Pool", _FailingPool)
    config = tiny_config.with_overrides(batch_size=10, num_workers=2)
    with pytest.raises(RuntimeError):
        simulate_paths(config, path_ids=range(40))
    assert _FailingPool.exited
