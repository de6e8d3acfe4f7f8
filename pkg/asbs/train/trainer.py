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
"""Alternating adjoint-matching / corrector-matching training.

Each stage runs ``am_epochs`` adjoint-matching epochs, which regress the
control onto ``-sigma_t (grad E + h)(X_1)`` along base-process bridges, and then
``cm_epochs`` corrector-matching epochs, which regress ``h`` onto the base
score ``grad_{x1} log p_base(X_1 | X_0)`` over model-generated endpoint pairs.
Epochs operate on a copy of the state, so a failing epoch leaves the caller's
state as it was at the start of the epoch.
"""

import logging

from typing import Callable

import numpy as np

from asbs.core.baseproc import (
    DiracPrior,
    GaussianPrior,
    base_score,
    bridge_sample,
    simulate,
    vp_coeffs,
)
from asbs.core.diffnet import Batch, adam_step, loss_and_grad
from asbs.core.energy import EnergyModel, clip_grad
from asbs.core.errors import EmptyReference, NonFinite, UnsupportedBase
from asbs.core.utils import padder
from asbs.train.config import RunConfig
from asbs.train.sampler import CorrectorSource, TrainedSampler, init_sampler


logger = logging.getLogger(__name__)

StageCallback = Callable[[TrainedSampler], None]


def _check_loss(loss: float, what: str, step: int) -> None:
    if not np.isfinite(loss):
        raise NonFinite(f"{what} loss is not finite at gradient step {step}")


def adjoint_targets(state: TrainedSampler, x1: np.ndarray) -> np.ndarray:
    """Stop-gradient adjoint ``a = clip(grad E(X_1)) + h(X_1)``."""
    grad_e = clip_grad(state.energy.grad(x1), state.config.train.clip_rule)
    return grad_e + state.corrector_value(x1)


def am_regression_batch(state: TrainedSampler, x0, x1, a, rng: np.random.Generator) -> Batch:
    """Bridge points and regression targets for ``v_theta``: ``|v + a|^2``, or ``|v + kappa_t a|^2`` under VP."""
    t = rng.uniform(0.0, 1.0, size=x0.shape[0])
    xt = bridge_sample(state.process, x0, x1, t, rng)
    target = -a
    if state.process.is_vp:
        kappa_t, _ = vp_coeffs(state.process, t)
        target = target * kappa_t[:, None]
    return Batch(t, xt, target)


def am_epoch(state: TrainedSampler, cfg: RunConfig, rng: np.random.Generator) -> TrainedSampler:
    """One adjoint-matching epoch on a copy of ``state``; the corrector is frozen."""
    train = cfg.train
    new = state.clone()
    sim = simulate(new.process, new.control_drift, cfg.sde, rng, train.resample)
    new.adjoint_buffer.push(sim.x0, sim.x1, adjoint_targets(new, sim.x1))

    losses = []
    params, adam = new.control, new.control_adam
    for step in range(train.grad_steps):
        x0, x1, a = new.adjoint_buffer.sample(rng, train.batch_size)
        batch = am_regression_batch(new, x0, x1, a, rng)
        loss, grad = loss_and_grad(params.spec, params, batch)
        _check_loss(loss, "Adjoint matching", new.control_steps + step)
        params, adam = adam_step(adam, params, grad)
        losses.append(loss)

    new.control, new.control_adam = params, adam
    new.control_steps += train.grad_steps
    new.am_epochs += 1
    new.record("am", new.am_epochs, float(np.mean(losses)))
    logger.debug(f"AM epoch {new.am_epochs}: loss {np.mean(losses):.6g}, buffer {len(new.adjoint_buffer)}")
    return new


def cm_epoch(state: TrainedSampler, cfg: RunConfig, rng: np.random.Generator) -> TrainedSampler:
    """One corrector-matching epoch on a copy of ``state``; the control is frozen."""
    if state.process.is_vp:
        raise UnsupportedBase("Corrector matching is only defined for the zero-drift base")
    if state.corrector is None:
        raise UnsupportedBase("This sampler has no corrector network to train")
    train = cfg.train
    new = state.clone()
    sim = simulate(new.process, new.control_drift, cfg.sde, rng, train.resample)
    new.corrector_buffer.push(sim.x0, sim.x1)

    losses = []
    params, adam = new.corrector, new.corrector_adam
    ones = np.ones(train.batch_size)
    for step in range(train.grad_steps):
        x0, x1, _ = new.corrector_buffer.sample(rng, train.batch_size)
        batch = Batch(ones, x1, base_score(new.process, x0, x1))
        loss, grad = loss_and_grad(params.spec, params, batch)
        _check_loss(loss, "Corrector matching", new.corrector_steps + step)
        params, adam = adam_step(adam, params, grad)
        losses.append(loss)

    new.corrector, new.corrector_adam = params, adam
    new.corrector_steps += train.grad_steps
    new.cm_epochs += 1
    new.record("cm", new.cm_epochs, float(np.mean(losses)))
    logger.debug(f"CM epoch {new.cm_epochs}: loss {np.mean(losses):.6g}, buffer {len(new.corrector_buffer)}")
    return new


def _with_retries(epoch_fn, state, cfg, rng):
    retries = cfg.train.max_retries
    for attempt in range(retries + 1):
        try:
            return epoch_fn(state, cfg, rng)
        except NonFinite as exc:
            if attempt == retries:
                logger.error(f"Aborting at stage {state.stage + 1}: {exc}")
                raise
            logger.warning(f"Rolled back epoch after divergence ({exc}); retry {attempt + 1}/{retries}")
    raise AssertionError("unreachable")


def train_stages(
    state: TrainedSampler,
    cfg: RunConfig,
    rng: np.random.Generator,
    with_corrector_matching: bool,
    on_stage: StageCallback | None = None,
) -> TrainedSampler:
    """Run ``cfg.train.stages`` stages starting from ``state``."""
    train = cfg.train
    for _ in range(train.stages):
        logger.info(padder(f"Stage {state.stage + 1}/{train.stages}"))
        for _ in range(train.am_epochs):
            state = _with_retries(am_epoch, state, cfg, rng)
        if with_corrector_matching:
            if state.corrector_source is CorrectorSource.ANALYTIC:
                # the analytic corrector only seeds the first stage of the zero-control initialization
                state.corrector_source = CorrectorSource.NETWORK
            for _ in range(train.cm_epochs):
                state = _with_retries(cm_epoch, state, cfg, rng)
        state.stage += 1
        last = state.losses[-1].loss if state.losses else float("nan")
        logger.info(f"Stage {state.stage} done: {state.control_steps} control steps, last loss {last:.6g}")
        if on_stage is not None:
            on_stage(state)
    return state


def _init_asbs(cfg: RunConfig, rng: np.random.Generator, energy=None) -> TrainedSampler:
    state = init_sampler(cfg, rng, energy)
    if cfg.train.init == "zero_control":
        state.corrector_source = CorrectorSource.ANALYTIC
    return state


def run_asbs(
    cfg: RunConfig,
    rng: np.random.Generator,
    on_stage: StageCallback | None = None,
    state: TrainedSampler | None = None,
) -> TrainedSampler:
    """Alternating AM/CM training starting from a zero corrector (or a zero control)."""
    if state is None:
        state = _init_asbs(cfg, rng)
    return train_stages(state, cfg, rng, with_corrector_matching=True, on_stage=on_stage)


def run_fixed_corrector(
    cfg: RunConfig,
    rng: np.random.Generator,
    on_stage: StageCallback | None = None,
    state: TrainedSampler | None = None,
) -> TrainedSampler:
    """AM epochs only, with ``h = grad log p_base_1`` in closed form."""
    if state is None:
        state = init_sampler(cfg, rng, corrector_source=CorrectorSource.ANALYTIC)
    return train_stages(state, cfg, rng, with_corrector_matching=False, on_stage=on_stage)


def run_as_baseline(
    cfg: RunConfig,
    rng: np.random.Generator,
    on_stage: StageCallback | None = None,
    state: TrainedSampler | None = None,
) -> TrainedSampler:
    """The memoryless special case: Dirac prior, Brownian base, analytic corrector."""
    if not isinstance(cfg.prior, DiracPrior):
        raise UnsupportedBase(f"The AS baseline needs a dirac prior, got '{cfg.prior.kind}'")
    if cfg.schedule.kind == "vp":
        raise UnsupportedBase("The AS baseline needs a zero-drift base")
    return run_fixed_corrector(cfg, rng, on_stage, state)


def run_memoryless_demo(
    cfg: RunConfig,
    rng: np.random.Generator,
    on_stage: StageCallback | None = None,
    state: TrainedSampler | None = None,
) -> TrainedSampler:
    """AM under the variance-preserving base with a standard Gaussian prior."""
    if cfg.schedule.kind != "vp" or not isinstance(cfg.prior, GaussianPrior):
        raise UnsupportedBase("The memoryless demo needs the 'vp' schedule and a gaussian prior")
    return run_fixed_corrector(cfg, rng, on_stage, state)


RUNNERS = {
    "asbs": run_asbs,
    "as": run_as_baseline,
    "naive": run_fixed_corrector,
    "memoryless": run_memoryless_demo,
}


def initial_state(cfg: RunConfig, rng: np.random.Generator, energy: EnergyModel | None = None) -> TrainedSampler:
    """The state a runner for ``cfg.mode`` starts from."""
    if cfg.mode == "asbs":
        return _init_asbs(cfg, rng, energy)
    return init_sampler(cfg, rng, energy, corrector_source=CorrectorSource.ANALYTIC)


def warm_start(
    state: TrainedSampler, reference_samples: np.ndarray, cfg: RunConfig, rng: np.random.Generator
) -> TrainedSampler:
    """Pre-train the control on bridges between the prior and reference samples.

    The control ``u = sigma_t v`` is regressed onto ``(sigma_t / kappa_{1|t}) (X_1 - X_t)``
    with weight ``sqrt(sigma_t / kappa_{1|t})``; ``t`` is capped at ``warm_start.t_max``.
    """
    if state.process.is_vp:
        raise UnsupportedBase("Warm start needs the zero-drift base")
    reference = np.atleast_2d(np.asarray(reference_samples, dtype=np.float64))
    if reference.shape[0] == 0 or reference.size == 0:
        raise EmptyReference("Warm start needs at least one reference sample")
    if reference.shape[1] != state.energy.dim:
        raise ValueError(f"Reference samples have dimension {reference.shape[1]}, expected {state.energy.dim}")
    reference = state.process.project(reference)
    ws = cfg.warm_start
    proc = state.process

    new = state.clone()
    params, adam = new.control, new.control_adam
    losses = []
    for step in range(ws.steps):
        x0 = proc.sample_prior(rng, ws.batch_size)
        x1 = reference[rng.integers(0, reference.shape[0], size=ws.batch_size)]
        t = rng.uniform(0.0, ws.t_max, size=ws.batch_size)
        xt = bridge_sample(proc, x0, x1, t, rng)
        sigma_t = np.broadcast_to(np.asarray(proc.sigma(t), dtype=np.float64), t.shape)
        k1t = proc.kappa(t, 1.0)
        weight = np.sqrt(sigma_t / k1t) * sigma_t**2
        batch = Batch(t, xt, (x1 - xt) / k1t[:, None], weight)
        loss, grad = loss_and_grad(params.spec, params, batch)
        _check_loss(loss, "Warm-start", step)
        params, adam = adam_step(adam, params, grad)
        losses.append(loss)

    new.control, new.control_adam = params, adam
    new.control_steps += ws.steps
    if losses:
        new.record("warm_start", 0, float(np.mean(losses)))
        logger.info(f"Warm start: {ws.steps} steps, mean loss {np.mean(losses):.6g}")
    return new


def sample(state: TrainedSampler, count: int, rng: np.random.Generator) -> np.ndarray:
    """Terminal states ``X_1`` of ``count`` controlled paths."""
    return simulate(state.process, state.control_drift, state.config.sde, rng, count).x1
