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
import itertools

import numpy as np
import pytest

from asbs.core.energy import (
    DoubleWell4,
    EnergyFamily,
    GaussianMixture40,
    GradClipRule,
    LennardJones,
    ManyWell,
    Quadratic,
    clip_grad,
    energy_eval,
    energy_grad,
    gmm40_sample_truth,
    make_energy,
    zcom_project,
)
from asbs.core.errors import NonFinite


def _lattice(n, k, rng, spacing=1.3, jitter=0.05):
    points = np.array(list(itertools.product(range(3), repeat=k)), dtype=float)[:n] * spacing
    return (points + jitter * rng.standard_normal(points.shape)).ravel()


def _fd_grad(model, x, h=1e-5):
    grad = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (model.energy(x + e) - model.energy(x - e)) / (2 * h)
    return grad


def test_many_well_examples() -> None:
    model = ManyWell(dim=5, delta=4.0)
    assert energy_eval(model, np.full(5, 2.0)) == 0.0
    assert energy_eval(model, np.zeros(5)) == 80.0
    np.testing.assert_array_equal(energy_grad(model, np.full(5, 2.0)), np.zeros(5))


def test_double_well_matches_pairwise_loop(rng) -> None:
    model = DoubleWell4()
    x = rng.standard_normal(8) * 2
    particles = x.reshape(4, 2)
    expected = 0.0
    for i, j in itertools.combinations(range(4), 2):
        r = np.linalg.norm(particles[i] - particles[j]) - model.d0
        expected += model.a * r + model.b * r**2 + model.c * r**4
    expected /= 2 * model.tau
    assert energy_eval(model, x) == pytest.approx(expected, rel=1e-10)


def test_lennard_jones_matches_pairwise_loop(rng) -> None:
    model = LennardJones(n_particles=5, space_dim=3, flip_sign=True)
    x = _lattice(5, 3, rng)
    particles = x.reshape(5, 3)
    expected = 0.0
    for i, j in itertools.combinations(range(5), 2):
        d = np.linalg.norm(particles[i] - particles[j])
        expected += (model.r_m / d) ** 12 - (model.r_m / d) ** 6
    expected *= model.eps / (2 * model.tau)
    expected += 0.5 * model.c_osc * np.sum((particles - particles.mean(axis=0)) ** 2)
    assert energy_eval(model, x) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize(
    "model",
    [
        ManyWell(),
        DoubleWell4(),
        LennardJones(n_particles=13, space_dim=3),
        LennardJones(n_particles=13, space_dim=3, flip_sign=True),
        GaussianMixture40(),
        Quadratic(dim=3, mean=1.0, std=0.5),
    ],
    ids=lambda m: f"{m.name}-{m.params.get('flip_sign', '')}",
)
def test_gradient_matches_finite_differences(model, rng) -> None:
    if model.n_particles:
        x = _lattice(model.n_particles, model.space_dim, rng)
    elif isinstance(model, GaussianMixture40):
        x = model.centers[3] + 0.7 * rng.standard_normal(2)
    else:
        x = rng.standard_normal(model.dim)
    analytic = energy_grad(model, x)
    numeric = _fd_grad(model, x)
    assert np.linalg.norm(analytic - numeric) <= 1e-5 * max(1.0, np.linalg.norm(numeric))


def test_zcom_gradient_has_zero_center_of_mass(rng) -> None:
    model = DoubleWell4()
    g = energy_grad(model, rng.standard_normal((6, 8)))
    np.testing.assert_allclose(g.reshape(6, 4, 2).sum(axis=1), 0.0, atol=1e-12)


def test_lennard_jones_pair_at_r_m(rng) -> None:
    model = LennardJones(n_particles=2, space_dim=3, c_osc=0.0, flip_sign=True)
    x = np.array([0.0, 0.0, 0.0, 1.0, 0.0, 0.0])
    # dE/dd at d = r_m is -6 eps / (2 tau r_m)
    np.testing.assert_allclose(energy_grad(model, x), _fd_grad(model, x), rtol=1e-6, atol=1e-8)
    assert energy_grad(model, x)[3] == pytest.approx(-3.0)


def test_coincident_particles_raise() -> None:
    model = LennardJones(n_particles=2, space_dim=3)
    with pytest.raises(NonFinite):
        model.energy(np.zeros(6))


def test_non_finite_input_raises() -> None:
    with pytest.raises(NonFinite):
        ManyWell().grad(np.array([np.nan, 0, 0, 0, 0]))


def test_batch_and_single_agree(rng) -> None:
    model = ManyWell()
    x = rng.standard_normal((4, 5))
    np.testing.assert_allclose(model.energy(x), [model.energy(row) for row in x])
    assert model.energy(np.zeros((0, 5))).shape == (0,)


def test_evaluation_counter_counts_samples(rng) -> None:
    model = ManyWell()
    model.energy(rng.standard_normal((7, 5)))
    model.grad(rng.standard_normal(5))
    assert model.evaluations == 8
    model.reset_counter()
    assert model.evaluations == 0


@pytest.mark.parametrize(
    "g, alpha_max, expected",
    [((3.0, 4.0), 10.0, (3.0, 4.0)), ((3.0, 4.0), 5.0, (3.0, 4.0)), ((6.0, 8.0), 5.0, (3.0, 4.0))],
)
def test_clip_grad_examples(g, alpha_max, expected) -> None:
    np.testing.assert_allclose(clip_grad(np.array(g), GradClipRule(alpha_max)), expected)


def test_clip_grad_is_row_wise(rng) -> None:
    g = rng.standard_normal((100, 3)) * 10
    clipped = clip_grad(g, GradClipRule(1.5))
    assert np.all(np.linalg.norm(clipped, axis=1) <= 1.5 + 1e-12)
    np.testing.assert_array_equal(clip_grad(g, None), g)


def test_clip_rule_must_be_positive() -> None:
    with pytest.raises(ValueError):
        GradClipRule(0.0)


def test_zcom_examples(rng) -> None:
    np.testing.assert_allclose(zcom_project(np.array([1.0, 3.0]), 2, 1), [-1.0, 1.0])

    n, k = 4, 2
    projector = np.kron(np.eye(n) - np.ones((n, n)) / n, np.eye(k))
    x, y = rng.standard_normal(n * k), rng.standard_normal(n * k)
    px = zcom_project(x, n, k)
    np.testing.assert_allclose(px, projector @ x, atol=1e-12)
    np.testing.assert_allclose(zcom_project(px, n, k), px, atol=1e-12)
    assert px @ y == pytest.approx(x @ zcom_project(y, n, k), abs=1e-12)


def test_gmm40_centers_are_reproducible() -> None:
    np.testing.assert_array_equal(GaussianMixture40(seed=40).centers, GaussianMixture40(seed=40).centers)
    assert not np.array_equal(GaussianMixture40(seed=40).centers, GaussianMixture40(seed=41).centers)
    assert GaussianMixture40().centers.shape == (40, 2)


def test_gmm40_truth_sampling(rng) -> None:
    model = GaussianMixture40()
    assert gmm40_sample_truth(model, rng, 0).shape == (0, 2)

    count = 100_000
    samples = gmm40_sample_truth(model, rng, count)
    centers = model.centers
    separation = np.linalg.norm(centers[:, None] - centers[None], axis=-1) + np.eye(40) * 1e9
    isolated = np.where(separation.min(axis=1) > 10.0)[0]
    nearest = np.argmin(np.linalg.norm(samples[:, None] - centers[None], axis=-1), axis=1)
    p = 1 / 40
    bound = 5 * np.sqrt(count * p * (1 - p))
    for mode in isolated:
        assert abs(np.sum(nearest == mode) - count * p) < bound


def test_make_energy() -> None:
    assert isinstance(make_energy("MW", dim=3), ManyWell)
    assert make_energy(EnergyFamily.LJ, n_particles=13).dim == 39
    with pytest.raises(TypeError):
        make_energy("MW", sigma=1.0)
    with pytest.raises(ValueError):
        make_energy("XY")


def test_make_energy_accepts_flat_switch_names() -> None:
    assert make_energy("DW4", dw4_exponentiated=True).exponentiated
    assert not make_energy("DW4", dw4_exponentiated=False).exponentiated
    assert make_energy("LJ", n_particles=3, lj_flip_sign=True).flip_sign
    with pytest.raises(TypeError, match="lj_flip_sign"):
        make_energy("LJ", n_particles=3, lj_flip_sign=True, flip_sign=False)
    with pytest.raises(TypeError):
        make_energy("MW", dim=2, lj_flip_sign=True)


def test_lj_oscillator_term_is_centered_harmonic(rng) -> None:
    model = LennardJones(n_particles=4, space_dim=3, c_osc=0.7)
    x = 3.0 * rng.standard_normal((3, 12)) + 2.0
    expected = []
    for row in x:
        particles = row.reshape(4, 3)
        center = particles.sum(axis=0) / 4
        expected.append(0.35 * sum(np.dot(p - center, p - center) for p in particles))
    np.testing.assert_allclose(model.oscillator_energy(x), expected, rtol=1e-12)

    pair_only = LennardJones(n_particles=4, space_dim=3, c_osc=0.0)
    np.testing.assert_allclose(model.energy(x) - pair_only.energy(x), expected, rtol=1e-9, atol=1e-9)
