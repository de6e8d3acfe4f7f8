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
"""Command-line entry point: ``asbs train|sample|eval|demo-memoryless|langevin``.

Exit codes:
    - 0: success
    - 2: configuration or checkpoint error
    - 3: a state, energy or loss left the finite range
    - 4: an evaluation precondition failed or an input file is missing
"""

import argparse
import hashlib
import json
import logging
import os
import sys
import time

from datetime import datetime, timezone

import numpy as np

from pydantic import BaseModel, ConfigDict, Field

from asbs.core.baseproc import langevin_sample
from asbs.core.energy import EnergyFamily, EnergyModel, GaussianMixture40, ManyWell, gmm40_sample_truth
from asbs.core.errors import (
    CheckpointError,
    ConfigError,
    EmptyReference,
    NonFinite,
    SizeMismatch,
    UnsupportedBase,
)
from asbs.core.utils import padder
from asbs.core.utils.io import read_samples_csv, write_samples_csv
from asbs.metrics import (
    MetricReport,
    MetricResult,
    energy_histogram,
    energy_w2,
    geometric_w2,
    histogram_from_values,
    mode_coverage,
    mw5_truth_sample,
    sinkhorn_distance,
    w2_exact,
    write_histogram_csv,
    write_report,
)
from asbs.train import (
    METRIC_NAMES,
    RUNNERS,
    RunConfig,
    config_help,
    initial_state,
    latest_stage_dir,
    load_checkpoint,
    load_configuration,
    rng_streams,
    sample,
    save_checkpoint,
    warm_start,
    write_loss_trace,
)


logger = logging.getLogger(__name__)

LOG_FORMAT = "[%(asctime)s.%(msecs)03d] [%(levelname)-3s] [%(name)s] %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_EVAL = 4

ANALYTIC_PREFIX = "analytic:"
MANIFEST_FILE = "manifest.json"
DEMO_PRESETS = ("demo_vp", "demo_naive", "demo_asbs")


class RunManifest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    run_id: str
    command: str
    status: str = "ok"
    config: dict | None = None
    content_hash: str
    inputs: dict[str, str] = Field(default_factory=dict)
    checkpoints: list[str] = Field(default_factory=list)
    outputs: list[str] = Field(default_factory=list)
    metrics: list[MetricResult] = Field(default_factory=list)
    started_at: str
    wall_clock_seconds: float = 0.0
    energy_evaluations: int = 0


def git_blob_hash(path: str) -> str:
    """``git hash-object`` of a file."""
    with open(path, "rb") as f:
        data = f.read()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


class _ManifestWriter:
    """Collects what a subcommand produced and writes ``manifest.json`` on exit."""

    def __init__(self, command: str, out_dir: str, config: RunConfig | None = None, inputs=()):
        self.out_dir = out_dir
        self._start = time.perf_counter()
        inputs = {path: git_blob_hash(path) for path in inputs if path and os.path.isfile(path)}
        digest = hashlib.sha1()
        digest.update(command.encode("utf-8"))
        if config is not None:
            digest.update(config.content_hash().encode("utf-8"))
        for path in sorted(inputs):
            digest.update(inputs[path].encode("utf-8"))
        content_hash = digest.hexdigest()
        self.manifest = RunManifest(
            run_id=content_hash[:12],
            command=command,
            config=None if config is None else config.snapshot(),
            content_hash=content_hash,
            inputs=inputs,
            started_at=datetime.now(timezone.utc).isoformat(),
        )

    def write(self, status: str, energy: EnergyModel | None = None) -> None:
        manifest = self.manifest
        manifest.status = status
        manifest.wall_clock_seconds = time.perf_counter() - self._start
        manifest.energy_evaluations = 0 if energy is None else energy.evaluations
        manifest.outputs = [p for p in manifest.outputs if os.path.exists(p)]
        manifest.checkpoints = [p for p in manifest.checkpoints if os.path.exists(p)]
        os.makedirs(self.out_dir, exist_ok=True)
        with open(os.path.join(self.out_dir, MANIFEST_FILE), "w", encoding="utf-8") as f:
            json.dump(manifest.model_dump(), f, indent=2)


def cmd_train(config_path: str, out_dir: str, overrides=()) -> int:
    """Train a sampler per the configured mode and write checkpoints, loss traces and a manifest."""
    cfg = load_configuration(config_path, overrides)
    reference = cfg.warm_start.reference if cfg.warm_start.steps > 0 else None
    writer = _ManifestWriter("train", out_dir, cfg, inputs=[reference])
    streams = rng_streams(cfg.seeds.master)
    energy = cfg.build_energy()
    os.makedirs(out_dir, exist_ok=True)

    state = initial_state(cfg, streams["train"], energy)
    last_good = [state]

    def on_stage(stage_state):
        last_good[0] = stage_state
        writer.manifest.checkpoints.append(save_checkpoint(stage_state, out_dir))

    status = "failed"
    try:
        if reference is not None:
            samples = read_samples_csv(reference, allow_empty=False)
            state = last_good[0] = warm_start(state, samples, cfg, streams["warm_start"])
        if cfg.train.stages == 0:
            on_stage(state)
        state = RUNNERS[cfg.mode](cfg, streams["train"], on_stage=on_stage, state=state)
        status = "ok"
    finally:
        losses = os.path.join(out_dir, "losses.csv")
        write_loss_trace(losses, last_good[0])
        writer.manifest.outputs.append(losses)
        writer.write(status, energy)
    logger.info(f"Training finished after {state.stage} stages ({energy.evaluations} energy evaluations)")
    return EXIT_OK


def cmd_sample(checkpoint: str, count: int, out_csv: str, seed: int | None = None) -> int:
    """Draw ``count`` terminal samples from a checkpoint and write them as CSV."""
    state = load_checkpoint(checkpoint)
    master = state.config.seeds.master if seed is None else seed
    samples = sample(state, count, rng_streams(master)["sample"])
    write_samples_csv(out_csv, samples)
    logger.info(f"Wrote {samples.shape[0]} samples to {out_csv}")
    return EXIT_OK


def _is_checkpoint(path: str) -> bool:
    if not os.path.isdir(path):
        return False
    try:
        latest_stage_dir(path)
    except CheckpointError:
        return False
    return True


def _default_energy(truth: str) -> EnergyModel | None:
    if truth == f"{ANALYTIC_PREFIX}mw5":
        return ManyWell()
    if truth == f"{ANALYTIC_PREFIX}gmm40":
        return GaussianMixture40()
    return None


def _truth_samples(truth: str, energy: EnergyModel | None, rng, count: int) -> np.ndarray:
    if truth == f"{ANALYTIC_PREFIX}mw5":
        params = energy.params if isinstance(energy, ManyWell) else ManyWell().params
        return mw5_truth_sample(rng, count, delta=params["delta"], dim=params["dim"])
    if truth == f"{ANALYTIC_PREFIX}gmm40":
        model = energy if isinstance(energy, GaussianMixture40) else GaussianMixture40()
        return gmm40_sample_truth(model, rng, count)
    if truth.startswith(ANALYTIC_PREFIX):
        raise ConfigError(f"Unknown analytic truth source '{truth}', expected analytic:mw5 or analytic:gmm40")
    return read_samples_csv(truth, allow_empty=False)


def _need_energy(energy: EnergyModel | None, metric: str) -> EnergyModel:
    if energy is None:
        raise ConfigError(f"Metric '{metric}' needs an energy: pass --config or evaluate a checkpoint")
    return energy


def compute_metrics(metrics, cfg: RunConfig | None, energy: EnergyModel | None, a, b) -> list[MetricResult]:
    """Evaluate the requested metrics on samples ``a`` against reference ``b``."""
    eval_cfg = cfg.eval if cfg is not None else RunConfig.model_fields["eval"].default_factory()
    results = []
    for metric in metrics:
        logger.info(padder(metric))
        if metric == "sinkhorn":
            res = sinkhorn_distance(a, b, eval_cfg.sinkhorn)
            results.append(
                MetricResult(
                    name=metric,
                    value=res.value,
                    sqrt_value=res.sqrt_value,
                    converged=res.converged,
                    iterations=res.iterations,
                    config=eval_cfg.sinkhorn.model_dump(),
                )
            )
        elif metric == "w2":
            results.append(MetricResult(name=metric, value=w2_exact(a, b)))
        elif metric == "energy_w2":
            results.append(MetricResult(name=metric, value=energy_w2(_need_energy(energy, metric), a, b)))
        elif metric == "geometric_w2":
            model = _need_energy(energy, metric)
            if model.n_particles <= 0:
                raise UnsupportedBase(f"geometric_w2 needs a particle system, got {model.name}")
            value = geometric_w2(a, b, model.n_particles, model.space_dim, eval_cfg.align)
            results.append(MetricResult(name=metric, value=value, config=eval_cfg.align.model_dump()))
        elif metric == "mode_coverage":
            model = _need_energy(energy, metric)
            if model.family is not EnergyFamily.GMM40:
                raise UnsupportedBase(f"mode_coverage needs the GMM40 energy, got {model.name}")
            radius = eval_cfg.mode_radius or 3.0 * model.mode_std
            found, mask = mode_coverage(a, model.centers, radius)
            config = {"radius": radius, "n_modes": model.n_modes, "found_mask": mask.tolist()}
            results.append(MetricResult(name=metric, value=found, config=config))
        else:
            raise ConfigError(f"Unknown metric '{metric}', expected one of {', '.join(METRIC_NAMES)}")
    return results


def cmd_eval(
    source: str,
    truth: str,
    metrics,
    out_json: str,
    config_path: str | None = None,
    count: int | None = None,
    seed: int | None = None,
    overrides=(),
) -> int:
    """Compare a checkpoint or sample CSV against a truth source and write a JSON report."""
    unknown = [m for m in metrics or () if m not in METRIC_NAMES]
    if unknown:
        raise ConfigError(f"Unknown metric(s) {', '.join(unknown)}, expected one of {', '.join(METRIC_NAMES)}")
    cfg = None
    state = None
    if _is_checkpoint(source):
        state = load_checkpoint(source)
        cfg = state.config
    elif config_path is not None:
        cfg = load_configuration(config_path, overrides)
    energy = cfg.build_energy() if cfg is not None else _default_energy(truth)
    count = count or (cfg.eval.sample_count if cfg is not None else 2000)
    master = seed if seed is not None else (cfg.seeds.master if cfg is not None else 0)
    streams = rng_streams(master)

    if not truth.startswith(ANALYTIC_PREFIX) and not os.path.isfile(truth):
        raise FileNotFoundError(truth)
    if state is not None:
        a = sample(state, count, streams["sample"])
    else:
        if not os.path.isfile(source):
            raise FileNotFoundError(source)
        a = read_samples_csv(source, allow_empty=False)
    b = _truth_samples(truth, energy, streams["eval"], count)
    if a.shape[1] != b.shape[1]:
        raise SizeMismatch(f"Sample dimension {a.shape[1]} does not match reference dimension {b.shape[1]}")

    metrics = list(metrics or (cfg.eval.metrics if cfg is not None else ["sinkhorn"]))
    results = compute_metrics([m for m in metrics if m != "energy_histogram"], cfg, energy, a, b)

    histograms = []
    if "energy_histogram" in metrics:
        model = _need_energy(energy, "energy_histogram")
        bins = cfg.eval.histogram_bins if cfg is not None else 50
        value_range = cfg.eval.histogram_range if cfg is not None else None
        if value_range is None:
            both = np.concatenate([np.atleast_1d(model.energy(a)), np.atleast_1d(model.energy(b))])
            value_range = (float(both.min()), float(both.max()))
        stem = os.path.splitext(out_json)[0]
        for label, samples in (("samples", a), ("reference", b)):
            path = f"{stem}_{label}_energy_hist.csv"
            write_histogram_csv(path, energy_histogram(model, samples, bins, value_range))
            histograms.append(path)

    report = MetricReport(
        source=source,
        reference=truth,
        sample_count=int(a.shape[0]),
        reference_count=int(b.shape[0]),
        metrics=results,
        histograms=histograms,
    )
    write_report(out_json, report)
    return EXIT_OK


def cmd_demo_memoryless(out_dir: str, overrides=()) -> int:
    """Train the VP-memoryless, naive non-memoryless and ASBS variants on a 1D bimodal toy.

    Writes one terminal-sample histogram per variant plus one of the exact target.
    """
    writer = _ManifestWriter("demo-memoryless", out_dir)
    os.makedirs(out_dir, exist_ok=True)
    results = []
    cfg = None
    for name in DEMO_PRESETS:
        cfg = load_configuration(f"preset:{name}", overrides)
        logger.info(padder(f"{name} ({cfg.mode})"))
        streams = rng_streams(cfg.seeds.master)
        energy = cfg.build_energy()
        state = RUNNERS[cfg.mode](cfg, streams["train"], state=initial_state(cfg, streams["train"], energy))
        samples = sample(state, cfg.eval.sample_count, streams["sample"])
        truth = mw5_truth_sample(
            streams["eval"], cfg.eval.sample_count, delta=energy.params["delta"], dim=energy.params["dim"]
        )
        value_range = cfg.eval.histogram_range or (-3.0, 3.0)
        hist_path = os.path.join(out_dir, f"{name}_hist.csv")
        write_histogram_csv(hist_path, histogram_from_values(samples, cfg.eval.histogram_bins, value_range))
        loss_path = os.path.join(out_dir, f"{name}_losses.csv")
        write_loss_trace(loss_path, state)
        writer.manifest.outputs.extend([hist_path, loss_path])
        results.append(MetricResult(name=f"{name}.w2", value=w2_exact(samples, truth), config={"mode": cfg.mode}))

    target_path = os.path.join(out_dir, "target_hist.csv")
    truth = mw5_truth_sample(
        rng_streams(cfg.seeds.master)["eval"], cfg.eval.sample_count, delta=energy.params["delta"], dim=1
    )
    write_histogram_csv(target_path, histogram_from_values(truth, cfg.eval.histogram_bins, value_range))
    writer.manifest.outputs.append(target_path)
    writer.manifest.metrics = results
    writer.write("ok")
    for result in results:
        logger.info(f"{result.name}: {result.value:.4f}")
    return EXIT_OK


def cmd_langevin(config_path: str, out_csv: str, overrides=()) -> int:
    """Run the unadjusted Langevin baseline from the configured prior and write final states."""
    cfg = load_configuration(config_path, overrides)
    energy = cfg.build_energy()
    lcfg = cfg.langevin
    samples = langevin_sample(
        energy, lcfg.step_size, lcfg.n_steps, cfg.prior, rng_streams(cfg.seeds.master)["langevin"], lcfg.count
    )
    write_samples_csv(out_csv, samples)
    logger.info(f"Langevin: {lcfg.count} chains x {lcfg.n_steps} steps, {energy.evaluations} gradient evaluations")
    return EXIT_OK


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (ConfigError, CheckpointError)):
        return EXIT_CONFIG
    if isinstance(exc, NonFinite):
        return EXIT_DIVERGED
    # ConfigError derives from ValueError, so the config check has to come first.
    if isinstance(exc, (SizeMismatch, EmptyReference, UnsupportedBase, ValueError, OSError)):
        return EXIT_EVAL
    raise exc


def build_parser() -> argparse.ArgumentParser:
    help_text = config_help()
    parser = argparse.ArgumentParser(
        prog="asbs",
        description="Adjoint Schrödinger bridge sampler for Boltzmann densities.",
        epilog=help_text,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_overrides(p):
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="Override a configuration key (repeatable)",
        )

    train = sub.add_parser(
        "train", help="Train a sampler", epilog=help_text, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    train.add_argument("config", help="JSON configuration file or preset:<name>")
    train.add_argument("--out", required=True, help="Output directory")
    add_overrides(train)

    smp = sub.add_parser("sample", help="Sample from a checkpoint")
    smp.add_argument("checkpoint", help="Run directory or stage directory")
    smp.add_argument("--count", type=int, default=2000)
    smp.add_argument("--out", required=True, help="Output CSV")
    smp.add_argument("--seed", type=int, default=None, help="Master seed (defaults to the checkpoint's)")

    ev = sub.add_parser("eval", help="Evaluate samples against a truth source")
    ev.add_argument("source", help="Checkpoint directory or sample CSV")
    ev.add_argument("--truth", required=True, help="analytic:mw5, analytic:gmm40 or a CSV path")
    ev.add_argument("--metrics", default=None, help="Comma-separated metric names")
    ev.add_argument("--out", required=True, help="Output JSON report")
    ev.add_argument("--config", default=None, help="Configuration for CSV sources")
    ev.add_argument("--count", type=int, default=None)
    ev.add_argument("--seed", type=int, default=None)
    add_overrides(ev)

    demo = sub.add_parser("demo-memoryless", help="Memoryless-condition demo on a 1D toy")
    demo.add_argument("--out", required=True, help="Output directory")
    add_overrides(demo)

    lang = sub.add_parser("langevin", help="Unadjusted Langevin baseline")
    lang.add_argument("config", help="JSON configuration file or preset:<name>")
    lang.add_argument("--out", required=True, help="Output CSV")
    add_overrides(lang)
    return parser


def dispatch(args: argparse.Namespace) -> int:
    if args.command == "train":
        return cmd_train(args.config, args.out, args.overrides)
    if args.command == "sample":
        return cmd_sample(args.checkpoint, args.count, args.out, args.seed)
    if args.command == "eval":
        metrics = [m.strip() for m in args.metrics.split(",") if m.strip()] if args.metrics else None
        return cmd_eval(args.source, args.truth, metrics, args.out, args.config, args.count, args.seed, args.overrides)
    if args.command == "demo-memoryless":
        return cmd_demo_memoryless(args.out, args.overrides)
    return cmd_langevin(args.config, args.out, args.overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format=LOG_FORMAT,
        datefmt=LOG_DATE_FORMAT,
    )
    try:
        return dispatch(args)
    except Exception as exc:
        code = _exit_code(exc)
        logger.error(f"{type(exc).__name__}: {exc}")
        return code


if __name__ == "__main__":
    sys.exit(main())
