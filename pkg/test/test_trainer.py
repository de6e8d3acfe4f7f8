# *******************************************************************************
# Copyright (c) 2026 Contributors to the asbs project
#
# See the NOTICE file(s) distributed with this work for additional
# information regarding copyright ownership.
#
# This program and the accompanying materials are made available under the
# terms of the Apache License Version 2.0 which is available at
# https://www.apache.org/licenses/LICENSE-2.0
#
# SPDX-License-Identifier: Apache-2.0
# *******************************************************************************
from unittest import mock

import numpy as np
import pytest

from conftest import load_resource_config

from asbs.core.baseproc import vp_coeffs
from asbs.core.diffnet import forward, loss_and_grad
from asbs.core.errors import EmptyReference, NonFinite, UnsupportedBase
from asbs.train import (
    CorrectorSource,
    am_epoch,
    cm_epoch,
    init_sampler,
    initial_state,
    run_as_baseline,
    run_asbs,
    run_memoryless_demo,
    sample,
    warm_start,
)
from asbs.train import trainer
from asbs.train.trainer import adjoint_targets, am_regression_batch


def _dirac_config(**sections):
    return load_resource_config("tiny_mw_config.json", prior={"kind": "dirac"}, **sections)


def _memoryless_config():
    return load_resource_config(
        "tiny_mw_config.json", mode="memoryless", schedule={"kind": "vp"}, prior={"kind": "gaussian"}
    )


def test_control_drift_is_sigma_times_network(tiny_config, rng) -> None:
    state = init_sampler(tiny_config, rng)
    x = rng.standard_normal((6, 2))
    v = forward(state.control.spec, state.control, 0.4, x)
    np.testing.assert_allclose(state.control_drift(0.4, x), 0.5 * v)


def test_am_epoch_fills_buffer(tiny_config, rng) -> None:
    state = init_sampler(tiny_config, rng)
    train = tiny_config.train
    for epoch in range(1, 6):
        state = am_epoch(state, tiny_config, rng)
        assert len(state.adjoint_buffer) == min(train.buffer_capacity, epoch * train.resample)
    assert state.am_epochs == 5
    assert state.control_steps == 5 * train.grad_steps
    assert [record.kind for record in state.losses] == ["am"] * 5
    assert all(np.isfinite(record.loss) for record in state.losses)


def test_am_loss_is_inverse_variance_weighted_control_regression(rng) -> None:
    """Regressing v onto -a equals regressing u = sigma_t v onto -sigma_t a with weight 1/sigma_t^2."""
    cfg = load_resource_config("tiny_mw_config.json", schedule={"kind": "geometric", "beta_min": 0.01, "beta_max": 1.0})
    state = init_sampler(cfg, rng)
    x0, x1, a = rng.standard_normal((3, 64, 2))
    batch = am_regression_batch(state, x0, x1, a, rng)
    assert batch.weight is None
    np.testing.assert_array_equal(batch.target, -a)

    loss, _ = loss_and_grad(state.control.spec, state.control, batch)
    sigma = np.asarray(state.process.sigma(batch.t))[:, None]
    u = sigma * forward(state.control.spec, state.control, batch.t, batch.x)
    weighted = np.mean(np.sum((u + sigma * a) ** 2, axis=-1) / sigma[:, 0] ** 2)
    assert weighted == pytest.approx(loss, rel=1e-12)


def test_first_adjoint_targets_are_energy_gradients(tiny_config, rng) -> None:
    state = init_sampler(tiny_config, rng)
    corrector_before = state.corrector.values.copy()
    state = am_epoch(state, tiny_config, rng)
    contents = state.adjoint_buffer.contents()
    np.testing.assert_allclose(contents.target, state.energy.grad(contents.x1), rtol=1e-12)
    np.testing.assert_array_equal(state.corrector.values, corrector_before)


def test_stored_targets_do_not_follow_parameter_updates(tiny_config, rng) -> None:
    state = am_epoch(init_sampler(tiny_config, rng), tiny_config, rng)
    targets = state.adjoint_buffer.contents().target.copy()
    state = cm_epoch(state, tiny_config, rng)
    np.testing.assert_array_equal(state.adjoint_buffer.contents().target, targets)


def test_adjoint_targets_are_clipped(rng) -> None:
    cfg = load_resource_config("tiny_mw_config.json", train={"alpha_max": 1.0})
    state = init_sampler(cfg, rng)
    targets = adjoint_targets(state, 3.0 * rng.standard_normal((20, 2)))
    assert np.all(np.linalg.norm(targets, axis=1) <= 1.0 + 1e-12)


def test_cm_epoch_trains_only_the_corrector(tiny_config, rng) -> None:
    state = am_epoch(init_sampler(tiny_config, rng), tiny_config, rng)
    control_before = state.control.values.copy()
    state = cm_epoch(state, tiny_config, rng)
    np.testing.assert_array_equal(state.control.values, control_before)
    assert state.cm_epochs == 1
    assert state.corrector_steps == tiny_config.train.grad_steps
    assert len(state.corrector_buffer) == tiny_config.train.resample
    assert np.any(state.corrector_value(rng.standard_normal((4, 2))) != 0.0)


def test_failed_epoch_leaves_state_untouched(tiny_config, rng) -> None:
    state = am_epoch(init_sampler(tiny_config, rng), tiny_config, rng)
    control_before = state.control.values.copy()
    real = trainer.loss_and_grad
    calls = []

    def diverging(spec, params, batch):
        calls.append(1)
        loss, grad = real(spec, params, batch)
        return (np.nan if len(calls) == 3 else loss), grad

    with mock.patch("asbs.train.trainer.loss_and_grad", diverging):
        with pytest.raises(NonFinite):
            am_epoch(state, tiny_config, rng)

    assert len(state.adjoint_buffer) == tiny_config.train.resample
    assert state.am_epochs == 1
    assert state.control_steps == tiny_config.train.grad_steps
    np.testing.assert_array_equal(state.control.values, control_before)


def test_divergence_aborts_without_retries(tiny_config, rng) -> None:
    with mock.patch("asbs.train.trainer.simulate", side_effect=NonFinite("state blew up")):
        with pytest.raises(NonFinite):
            run_asbs(tiny_config, rng)


def test_divergence_is_retried(rng) -> None:
    cfg = load_resource_config("tiny_mw_config.json", train={"max_retries": 1})
    real = trainer.am_epoch
    calls = []

    def flaky(state, cfg, rng):
        calls.append(1)
        if len(calls) == 1:
            raise NonFinite("state blew up")
        return real(state, cfg, rng)

    with mock.patch.object(trainer, "am_epoch", flaky):
        state = run_asbs(cfg, rng)
    assert len(calls) == cfg.train.am_epochs + 1
    assert state.am_epochs == cfg.train.am_epochs


def test_stage_bookkeeping(rng) -> None:
    cfg = load_resource_config("tiny_mw_config.json", train={"stages": 2})
    seen = []
    state = run_asbs(cfg, rng, on_stage=lambda s: seen.append((s.stage, s.am_epochs, s.cm_epochs)))
    train = cfg.train
    assert seen == [(1, train.am_epochs, train.cm_epochs), (2, 2 * train.am_epochs, 2 * train.cm_epochs)]
    assert state.control_steps == 2 * train.am_epochs * train.grad_steps
    assert state.corrector_steps == 2 * train.cm_epochs * train.grad_steps


def test_zero_stages_returns_initial_state() -> None:
    cfg = load_resource_config("tiny_mw_config.json", train={"stages": 0})
    state = run_asbs(cfg, np.random.default_rng(1))
    fresh = init_sampler(cfg, np.random.default_rng(1))
    np.testing.assert_array_equal(state.control.values, fresh.control.values)
    assert state.stage == 0
    assert state.losses == []


def test_training_is_deterministic(tiny_config) -> None:
    first = run_asbs(tiny_config, np.random.default_rng(11))
    second = run_asbs(tiny_config, np.random.default_rng(11))
    assert first.control.values.tobytes() == second.control.values.tobytes()
    assert first.corrector.values.tobytes() == second.corrector.values.tobytes()
    assert first.losses == second.losses


def test_dirac_prior_with_analytic_corrector_matches_as_baseline() -> None:
    cfg = _dirac_config(train={"am_epochs": 1})
    as_cfg = _dirac_config(mode="as", train={"am_epochs": 1})

    baseline = run_as_baseline(as_cfg, np.random.default_rng(3))

    rng = np.random.default_rng(3)
    state = init_sampler(cfg, rng, corrector_source=CorrectorSource.ANALYTIC)
    state = am_epoch(state, cfg, rng)

    assert state.control.values.tobytes() == baseline.control.values.tobytes()
    assert baseline.cm_epochs == 0


def test_as_adjoint_uses_base_terminal_score(rng) -> None:
    cfg = _dirac_config(mode="as")
    state = initial_state(cfg, rng)
    x1 = rng.standard_normal((8, 2))
    np.testing.assert_allclose(adjoint_targets(state, x1), state.energy.grad(x1) - x1 / 0.25, rtol=1e-12)


def test_baseline_runners_check_their_base(tiny_config, rng) -> None:
    with pytest.raises(UnsupportedBase):
        run_as_baseline(tiny_config, rng)
    with pytest.raises(UnsupportedBase):
        run_memoryless_demo(tiny_config, rng)


def test_memoryless_regression_targets_are_scaled(rng) -> None:
    cfg = _memoryless_config()
    state = initial_state(cfg, rng)
    x0, x1 = rng.standard_normal((50, 2)), rng.standard_normal((50, 2))
    batch = am_regression_batch(state, x0, x1, np.ones((50, 2)), rng)
    kappa_t, _ = vp_coeffs(state.process, batch.t)
    np.testing.assert_allclose(batch.target[:, 0], -kappa_t)

    with pytest.raises(UnsupportedBase):
        cm_epoch(init_sampler(cfg, rng), cfg, rng)

    trained = run_memoryless_demo(cfg, rng)
    assert trained.am_epochs == cfg.train.am_epochs
    assert all(np.isfinite(r.loss) for r in trained.losses)


def test_zero_control_initialization_starts_from_analytic_corrector(rng) -> None:
    cfg = load_resource_config("tiny_mw_config.json", train={"init": "zero_control"})
    state = initial_state(cfg, rng)
    assert state.corrector_source is CorrectorSource.ANALYTIC
    np.testing.assert_array_equal(state.control_drift(0.3, rng.standard_normal((5, 2))), 0.0)

    after_am = am_epoch(state, cfg, rng)
    contents = after_am.adjoint_buffer.contents()
    expected = after_am.energy.grad(contents.x1) - contents.x1 / (1.0 + 0.25)
    np.testing.assert_allclose(contents.target, expected, rtol=1e-10, atol=1e-12)

    trained = run_asbs(cfg, rng)
    assert trained.corrector_source is CorrectorSource.NETWORK


def test_warm_start(rng) -> None:
    cfg = load_resource_config("tiny_mw_config.json", warm_start={"steps": 4, "batch_size": 16})
    state = init_sampler(cfg, rng)
    reference = np.array([[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0]])

    warmed = warm_start(state, reference, cfg, rng)
    assert warmed.control_steps == state.control_steps + 4
    assert warmed.losses[-1].kind == "warm_start"
    assert np.all(np.isfinite(warmed.control.values))
    assert not np.array_equal(warmed.control.values, state.control.values)

    with pytest.raises(EmptyReference):
        warm_start(state, np.zeros((0, 2)), cfg, rng)
    with pytest.raises(ValueError):
        warm_start(state, np.zeros((2, 3)), cfg, rng)


def test_warm_start_needs_brownian_base(rng) -> None:
    cfg = _memoryless_config()
    with pytest.raises(UnsupportedBase):
        warm_start(initial_state(cfg, rng), np.ones((1, 2)), cfg, rng)


def test_sample_count(tiny_config, rng) -> None:
    state = init_sampler(tiny_config, rng)
    assert sample(state, 0, rng).shape == (0, 2)
    assert sample(state, 33, rng).shape == (33, 2)


def test_untrained_zero_control_samples_base_marginal(rng) -> None:
    cfg = _dirac_config(train={"init": "zero_control"})
    state = init_sampler(cfg, rng)
    count = 20_000
    samples = sample(state, count, rng)
    var = 0.25
    assert np.all(np.abs(samples.mean(axis=0)) < 4 * np.sqrt(var / count))
    assert np.all(np.abs(samples.var(axis=0) - var) < 4 * var * np.sqrt(2 / count))


def test_particle_system_stays_on_zcom_subspace(rng) -> None:
    cfg = load_resource_config("tiny_dw4_config.json")
    state = run_asbs(cfg, rng)
    samples = sample(state, 20, rng)
    np.testing.assert_allclose(samples.reshape(20, 4, 2).sum(axis=1), 0.0, atol=1e-9)
    contents = state.adjoint_buffer.contents()
    np.testing.assert_allclose(contents.target.reshape(-1, 4, 2).sum(axis=1), 0.0, atol=1e-9)


@pytest.mark.slow
def test_corrector_matching_recovers_base_score() -> None:
    cfg = _dirac_config(
        train={
            "init": "zero_control",
            "resample": 2000,
            "grad_steps": 200,
            "batch_size": 256,
            "buffer_capacity": 10_000,
            "hidden_dim": 32,
            "t_embed_dim": 16,
        }
    )
    rng = np.random.default_rng(0)
    state = init_sampler(cfg, rng)
    for _ in range(30):
        state = cm_epoch(state, cfg, rng)
    x = 0.5 * rng.standard_normal((4000, 2))
    rmse = np.sqrt(np.mean(np.sum((state.corrector_value(x) + x / 0.25) ** 2, axis=1)))
    assert rmse < 0.1
