import csv
import datetime
import io
import json
import logging
import pathlib
import platform
from typing import Iterable, Sequence

import crcmod
import crcmod.predefined
import numpy as np
import scipy

try:
    from . import common
    from . import diagnostics
    from . import field
    from . import fmodel
    from . import hmodel
    from .common.manifest import OutputChecksum, RunManifest, SoftwareVersions
except ImportError:
    import common
    import diagnostics
    import field
    import fmodel
    import hmodel
    from common.manifest import OutputChecksum, RunManifest, SoftwareVersions

logger = logging.getLogger(__name__)

crc64 = crcmod.predefined.mkCrcFun("crc-64")

DIAGNOSTICS_HEADER = ("t", "linf", "h2", "energy_E", "dissipation_D", "continuation_integral", "dt")
CHECKSUMS_FILE = "checksums-crc64"


def software_versions() -> SoftwareVersions:
    return SoftwareVersions(
        package=common.VERSION,
        python=platform.python_version(),
        numpy=np.__version__,
        scipy=scipy.__version__,
    )


class OutputWriter:
    """
    Writes the files of one run into a directory and keeps the CRC-64 list
    that finish() stores next to them.
    """

    def __init__(self, directory: pathlib.Path):
        self.directory = pathlib.Path(directory)
        self.checksums: list[OutputChecksum] = []
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OSError("cannot create output directory \"{}\": {}".format(self.directory, e.strerror))

    def _write(self, name: str, buffer: io.StringIO, write_crc=True):
        encoded_data = buffer.getvalue().encode("utf-8")
        if write_crc:
            self.checksums.append(OutputChecksum(crc64(encoded_data), name))
        path = self.directory.joinpath(name)
        try:
            with path.open("wb") as f:
                f.write(encoded_data)
        except OSError as e:
            raise OSError("cannot write \"{}\": {}".format(path, e.strerror))
        logger.debug("wrote {}".format(path))

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence]):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([value if isinstance(value, str) else common.csv_number(value) for value in row])
        self._write(name, buffer)

    def write_json(self, name: str, document):
        buffer = io.StringIO()
        json.dump(document, buffer, indent=2, sort_keys=True)
        buffer.write("\n")
        self._write(name, buffer)

    def finish(self, manifest: RunManifest):
        manifest.outputs = list(self.checksums)
        self.write_json("run.json", manifest.json_serializable())
        checksums_io = io.StringIO()
        for checksum in self.checksums:
            checksums_io.write(checksum.line())
        self._write(CHECKSUMS_FILE, checksums_io, write_crc=False)


def _snapshot_rows(times, profiles, nodes):
    for t, profile in zip(times, profiles):
        for x, value in zip(nodes, profile):
            yield t, x, value


def emit_fmodel(writer: OutputWriter, record: fmodel.RunRecord, grid: field.GridSpec):
    physical = [field.to_physical(snapshot) for snapshot in record.snapshots]
    writer.write_csv("snapshots.csv", ("t", "x", "value"), _snapshot_rows(record.snapshot_times, physical, grid.nodes()))
    writer.write_csv("diagnostics.csv", DIAGNOSTICS_HEADER, zip(
        record.times, record.sup_norms, record.h2_norms, record.energies, record.dissipations,
        record.continuation_integral, record.step_sizes,
    ))


def emit_heights(writer: OutputWriter, trajectory: hmodel.HeightTrajectory):
    nodes = trajectory.grid.nodes()
    coordinate = "r" if trajectory.grid.geometry is hmodel.Geometry.RADIAL else "x"
    writer.write_csv("snapshots.csv", ("t", coordinate, "value"),
                     _snapshot_rows(trajectory.times, trajectory.heights, nodes))
    writer.write_csv("scaled_snapshots.csv", ("t", coordinate, "value"),
                     _snapshot_rows(trajectory.times, trajectory.scaled_heights, nodes))
    writer.write_csv("fronts.csv", ("t", "max_height", "support_width", "front_position"), zip(
        trajectory.times, trajectory.max_heights, trajectory.support_widths, trajectory.front_positions,
    ))


def emit_outputs(result, writer: OutputWriter, grid: field.GridSpec | None = None):
    if isinstance(result, fmodel.RunRecord):
        if grid is None:
            raise common.ArgumentError("spectral run output needs its grid")
        emit_fmodel(writer, result, grid)
    elif isinstance(result, hmodel.HeightTrajectory):
        emit_heights(writer, result)
    else:
        raise common.ArgumentError("no output format for {}".format(type(result).__name__))


def emit_residuals(writer: OutputWriter, times, residuals, interior_residuals):
    writer.write_csv("residuals.csv", ("t", "residual_l2", "interior_residual_l2"),
                     zip(times, residuals, interior_residuals))


def emit_cascade(writer: OutputWriter, comparisons):
    writer.write_csv("cascade.csv", ("epsilon", "t_end", "err_norm", "direct_termination"), (
        (c.epsilon, c.t_end, c.err_norm, c.direct_termination.value) for c in comparisons
    ))


def emit_stability(writer: OutputWriter, queries: Sequence[diagnostics.StabilityQuery]):
    writer.write_csv("stability.csv", ("wavenumber", "beta"), (
        (q.wavenumber, diagnostics.planewave_beta(q)) for q in queries
    ))


def emit_dispersion(writer: OutputWriter, n_max: int):
    n = np.arange(n_max + 1)
    writer.write_csv("dispersion.csv", ("n", "lambda"), zip((str(k) for k in n), diagnostics.dispersion_lambda(n)))


def make_manifest(experiment: str, config_path: pathlib.Path | None, config_echo: dict, termination: str,
                  started: datetime.datetime, final_time: float | None = None, **extra) -> RunManifest:
    return RunManifest(
        experiment=experiment,
        config_path=config_path,
        config_echo=config_echo,
        termination=termination,
        versions=software_versions(),
        started=started,
        wall_time=(datetime.datetime.now() - started).total_seconds(),
        final_time=final_time,
        extra=extra,
    )
