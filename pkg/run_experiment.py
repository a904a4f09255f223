"""
Command line entry point.

    run_experiment.py run <config.yaml>
    run_experiment.py sweep "<glob>"
    run_experiment.py validate <config.yaml>

Exit status: 0 when the run reached its final time, 2 when an integration ended
by the blow-up cap or dt underflow, 1 on any error.
"""
import argparse
import dataclasses
import datetime
import functools
import glob
import logging
import multiprocessing
import pathlib
import sys

try:
    from . import cascade
    from . import common
    from . import config
    from . import diagnostics
    from . import experiment_config
    from . import fmodel
    from . import hmodel
    from . import output_writer
    from .experiment_config import Experiment, ExperimentConfig
except ImportError:
    import cascade
    import common
    import config
    import diagnostics
    import experiment_config
    import fmodel
    import hmodel
    import output_writer
    from experiment_config import Experiment, ExperimentConfig

logger = logging.getLogger(__name__)

REACHED = fmodel.Termination.REACHED_T_END.value
RESIDUAL_MARGIN_CELLS = 3


@dataclasses.dataclass(frozen=True)
class ExperimentOutcome:
    termination: str
    final_time: float | None = None
    extra: dict = dataclasses.field(default_factory=dict)


def _run_fmodel(cfg: ExperimentConfig, writer: output_writer.OutputWriter) -> ExperimentOutcome:
    f0 = cfg.initial_condition.spectral(cfg.grid)
    rhs = fmodel.resolve_rhs(cfg.fmodel.variant)
    if cfg.fmodel.variant is fmodel.FModelVariant.LINEARIZED:
        rhs = functools.partial(fmodel.rhs_linearized, form=cfg.fmodel.linearization)
    record = fmodel.integrate(f0, rhs, cfg.integrator, cfg.params)
    output_writer.emit_outputs(record, writer, cfg.grid)
    return ExperimentOutcome(
        termination=record.termination.value,
        final_time=record.final_time,
        extra={"accepted_steps": len(record.times) - 1, "rejected_steps": record.rejected_steps},
    )


def _run_cascade(cfg: ExperimentConfig, writer: output_writer.OutputWriter) -> ExperimentOutcome:
    f0 = cfg.initial_condition.spectral(cfg.grid)
    comparisons = [
        cascade.compose_and_compare(f0, epsilon, cfg.cascade.t_end, cfg.params, cfg.integrator)
        for epsilon in cfg.cascade.epsilons
    ]
    output_writer.emit_cascade(writer, comparisons)
    stopped = [c.direct_termination.value for c in comparisons if c.direct_termination.value != REACHED]
    return ExperimentOutcome(termination=stopped[0] if stopped else REACHED, final_time=cfg.cascade.t_end)


def _run_hmodel(cfg: ExperimentConfig, writer: output_writer.OutputWriter) -> ExperimentOutcome:
    section = cfg.hmodel
    initial = cfg.initial_condition.height(cfg.fd_grid, cfg.params, section.variant, section.radius)
    trajectory = hmodel.evolve(
        initial, section.t_end, section.dt, cfg.params, section.variant, section.radius,
        snapshot_times=section.snapshot_times or None, scheme=section.scheme, threshold=section.threshold,
    )
    output_writer.emit_outputs(trajectory, writer)
    if cfg.experiment is Experiment.HMODEL_SELFSIMILAR and section.residual_times:
        orig = hmodel.HVariant.ORIG_RADIAL if section.variant.geometry is hmodel.Geometry.RADIAL \
            else hmodel.HVariant.ORIG_SLAB
        source = hmodel.selfsimilar_source(section.radius, cfg.params)
        residuals = hmodel.residual_check(source, section.residual_times, cfg.params, cfg.fd_grid, section.radius, orig)
        interior = hmodel.selfsimilar_interior(section.radius, cfg.params, RESIDUAL_MARGIN_CELLS * cfg.fd_grid.dr)
        interior_residuals = hmodel.residual_check(source, section.residual_times, cfg.params, cfg.fd_grid,
                                                   section.radius, orig, interior=interior)
        output_writer.emit_residuals(writer, section.residual_times, residuals, interior_residuals)
    return ExperimentOutcome(
        termination=REACHED,
        final_time=float(trajectory.times[-1]),
        extra={"steps": trajectory.steps},
    )


def _run_stability(cfg: ExperimentConfig, writer: output_writer.OutputWriter) -> ExperimentOutcome:
    section = cfg.stability
    queries = [
        diagnostics.StabilityQuery(
            c=section.c, wavenumber=a, delta=section.delta, t=section.t, p=cfg.params,
            growth_factor=section.growth_factor, delta_decay=section.delta_decay,
        )
        for a in section.wavenumbers
    ]
    output_writer.emit_stability(writer, queries)
    return ExperimentOutcome(termination=REACHED)


def _run_dispersion(cfg: ExperimentConfig, writer: output_writer.OutputWriter) -> ExperimentOutcome:
    output_writer.emit_dispersion(writer, cfg.dispersion.n_max)
    return ExperimentOutcome(termination=REACHED)


RUNNERS = {
    Experiment.FMODEL_RUN: _run_fmodel,
    Experiment.FMODEL_LINEAR: _run_fmodel,
    Experiment.CASCADE_CHECK: _run_cascade,
    Experiment.HMODEL_BUMP: _run_hmodel,
    Experiment.HMODEL_SELFSIMILAR: _run_hmodel,
    Experiment.STABILITY_SCAN: _run_stability,
    Experiment.DISPERSION_TABLE: _run_dispersion,
}


def execute(cfg: ExperimentConfig, output_root: pathlib.Path | None = None) -> ExperimentOutcome:
    started = datetime.datetime.now()
    directory = experiment_config.resolve_output_dir(cfg, output_root)
    writer = output_writer.OutputWriter(directory)
    outcome = RUNNERS[cfg.experiment](cfg, writer)
    manifest = output_writer.make_manifest(
        cfg.experiment.value, cfg.source_path, cfg.echo, outcome.termination, started,
        final_time=outcome.final_time, **outcome.extra
    )
    writer.finish(manifest)
    return outcome


def run(config_path, output_root: pathlib.Path | None = None) -> int:
    try:
        cfg = experiment_config.load(pathlib.Path(config_path))
        print("Running {} ({})".format(cfg.name, cfg.experiment.value))
        outcome = execute(cfg, output_root)
    except (common.BiofilmError, OSError) as e:
        logger.error("{}: {}".format(config_path, e))
        print("Error: {}".format(e), file=sys.stderr)
        return 1
    if outcome.final_time is None:
        print("{}: {}".format(cfg.name, outcome.termination))
    else:
        print("{}: {} at t={:.6g}".format(cfg.name, outcome.termination, outcome.final_time))
    return common.TERMINATION_EXIT_CODES[outcome.termination]


def validate(config_path) -> int:
    try:
        cfg = experiment_config.load(pathlib.Path(config_path))
    except common.ConfigError as e:
        print("Invalid: {}".format(e), file=sys.stderr)
        return 1
    print("{}: valid {} experiment".format(config_path, cfg.experiment.value))
    return 0


def sweep(pattern: str, workers: int = config.sweep_workers, output_root: pathlib.Path | None = None) -> int:
    paths = sorted(glob.glob(pattern))
    if not paths:
        print("No config matches {}".format(pattern), file=sys.stderr)
        return 1
    with multiprocessing.Pool(min(workers, len(paths))) as pool:
        codes = pool.map(functools.partial(run, output_root=output_root), paths)
    for path, code in zip(paths, codes):
        print("{} -> exit {}".format(path, code))
    if 1 in codes:
        return 1
    return max(codes)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Biofilm lubrication model experiments")
    parser.add_argument("--log-level", default=config.log_level)
    parser.add_argument("--output-root", type=pathlib.Path, default=None,
                        help="overrides config.output_root / BIOFILM_OUTPUT_ROOT")
    subparsers = parser.add_subparsers(dest="command", required=True)
    run_parser = subparsers.add_parser("run")
    run_parser.add_argument("config")
    sweep_parser = subparsers.add_parser("sweep")
    sweep_parser.add_argument("pattern")
    sweep_parser.add_argument("--workers", type=int, default=config.sweep_workers)
    validate_parser = subparsers.add_parser("validate")
    validate_parser.add_argument("config")
    args = parser.parse_args(argv)

    logging.basicConfig(level=args.log_level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    if args.command == "run":
        return run(args.config, args.output_root)
    if args.command == "sweep":
        return sweep(args.pattern, args.workers, args.output_root)
    return validate(args.config)


if __name__ == "__main__":
    sys.exit(main())
