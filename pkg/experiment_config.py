"""
Experiment files: YAML documents describing one run. See experiment_configs/README.md
for the schema.
"""
import dataclasses
import enum
import logging
import pathlib
import re
from typing import Any

import numpy as np
import yaml

try:
    from . import common
    from . import config
    from . import field
    from . import fmodel
    from . import hmodel
    from .multipliers import ModelParams
except ImportError:
    import common
    import config
    import field
    import fmodel
    import hmodel
    from multipliers import ModelParams

logger = logging.getLogger(__name__)


class Experiment(enum.Enum):
    FMODEL_RUN = "fmodel_run"
    FMODEL_LINEAR = "fmodel_linear"
    CASCADE_CHECK = "cascade_check"
    HMODEL_BUMP = "hmodel_bump"
    HMODEL_SELFSIMILAR = "hmodel_selfsimilar"
    STABILITY_SCAN = "stability_scan"
    DISPERSION_TABLE = "dispersion_table"


class InitialKind(enum.Enum):
    SINE = "sine"
    GAUSSIAN_BUMP = "gaussian_bump"
    CONSTANT = "constant"
    SELFSIMILAR_MATCHED = "selfsimilar_matched"
    PERTURBED_CONSTANT = "perturbed_constant"
    CUSTOM_SAMPLES = "custom_samples"


SPECTRAL_EXPERIMENTS = (Experiment.FMODEL_RUN, Experiment.FMODEL_LINEAR, Experiment.CASCADE_CHECK)
HEIGHT_EXPERIMENTS = (Experiment.HMODEL_BUMP, Experiment.HMODEL_SELFSIMILAR)


@dataclasses.dataclass(frozen=True)
class InitialCondition:
    kind: InitialKind
    k: int = 1
    amplitude: float = 1.0
    width: float = 1.0
    c: float = 1.0
    t0: float = 0.0
    file: pathlib.Path | None = None

    def __post_init__(self):
        if self.kind is InitialKind.SINE and (int(self.k) != self.k or self.k == 0):
            raise common.ConfigError("sine initial condition needs a nonzero integer k, got {}".format(self.k))
        if self.kind is InitialKind.CUSTOM_SAMPLES and self.file is None:
            raise common.ConfigError("custom_samples initial condition needs a file")

    def _samples(self, n: int) -> np.ndarray:
        try:
            samples = np.loadtxt(self.file, dtype=np.float64, ndmin=1)
        except OSError as e:
            raise OSError("cannot read samples \"{}\": {}".format(self.file, e))
        if samples.shape != (n,):
            raise common.ConfigError("{} holds {} samples, grid needs {}".format(self.file, samples.size, n))
        return samples

    def spectral(self, grid: field.GridSpec) -> field.SpectralField:
        if self.kind is InitialKind.SINE:
            k = 2 * np.pi * self.k / grid.period
            f0 = field.SpectralField.from_function(lambda x: self.amplitude * np.sin(k * x), grid)
        elif self.kind is InitialKind.CUSTOM_SAMPLES:
            f0 = field.to_spectral(self._samples(grid.n_nodes), grid)
            if abs(f0.mean) > common.MEAN_ZERO_TOL:
                logger.warning("removing mean {:.3e} from custom samples".format(f0.mean))
        else:
            raise common.ConfigError("{} is not a periodic initial condition".format(self.kind.value))
        return field.project_mean_zero(f0)

    def height(self, grid: hmodel.FdGrid, p: ModelParams, variant: hmodel.HVariant,
               radius: hmodel.RadiusLaw) -> hmodel.HeightField:
        if self.kind is InitialKind.GAUSSIAN_BUMP:
            return hmodel.gaussian_bump(grid, p, self.amplitude, self.width)
        if self.kind is InitialKind.CONSTANT:
            return hmodel.constant(grid, self.c)
        if self.kind is InitialKind.PERTURBED_CONSTANT:
            return hmodel.perturbed_constant(grid, p, self.c, self.amplitude, self.k)
        if self.kind is InitialKind.SELFSIMILAR_MATCHED:
            return hmodel.selfsimilar_matched(grid, self.t0, radius, p, variant)
        if self.kind is InitialKind.CUSTOM_SAMPLES:
            return hmodel.HeightField(grid, np.maximum(self._samples(grid.n_cells), p.h_inf))
        raise common.ConfigError("{} is not a height initial condition".format(self.kind.value))


@dataclasses.dataclass(frozen=True)
class FModelSection:
    variant: fmodel.FModelVariant = fmodel.FModelVariant.NONAUTONOMOUS
    linearization: fmodel.LinearizationForm = fmodel.LinearizationForm.DISPERSION


@dataclasses.dataclass(frozen=True)
class HModelSection:
    variant: hmodel.HVariant
    dt: float
    t_end: float
    radius: hmodel.RadiusLaw
    scheme: hmodel.TimeScheme = hmodel.TimeScheme.EULER
    snapshot_times: tuple[float, ...] = ()
    threshold: float | None = None
    residual_times: tuple[float, ...] = ()


@dataclasses.dataclass(frozen=True)
class CascadeSection:
    epsilons: tuple[float, ...]
    t_end: float


@dataclasses.dataclass(frozen=True)
class StabilitySection:
    c: float
    wavenumbers: tuple[float, ...]
    delta: float = 0.0
    t: float = 0.0
    growth_factor: bool = True
    delta_decay: float = 0.0


@dataclasses.dataclass(frozen=True)
class DispersionSection:
    n_max: int = 64


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    experiment: Experiment
    name: str
    params: ModelParams
    output_dir: pathlib.Path
    echo: dict[str, Any]
    source_path: pathlib.Path | None = None
    grid: field.GridSpec | None = None
    fd_grid: hmodel.FdGrid | None = None
    integrator: fmodel.IntegratorConfig | None = None
    initial_condition: InitialCondition | None = None
    fmodel: FModelSection = FModelSection()
    hmodel: HModelSection | None = None
    cascade: CascadeSection | None = None
    stability: StabilitySection | None = None
    dispersion: DispersionSection | None = None


# YAML 1.1 reads 1e-10 as a string
_EXPONENT_NUMBER = re.compile(r"^[-+]?(\d+\.?\d*|\.\d+)[eE][-+]?\d+$")


def _coerce_numbers(value):
    if isinstance(value, dict):
        return {key: _coerce_numbers(item) for key, item in value.items()}
    if isinstance(value, list):
        return [_coerce_numbers(item) for item in value]
    if isinstance(value, str) and _EXPONENT_NUMBER.match(value):
        return float(value)
    return value


def _section(document: dict, key: str, required: bool) -> dict | None:
    value = document.get(key)
    if value is None:
        if required:
            raise common.ConfigError("missing section \"{}\"".format(key))
        return None
    if not isinstance(value, dict):
        raise common.ConfigError("section \"{}\" must be a mapping".format(key))
    return value


def _enum(enum_type, value, key: str):
    try:
        return enum_type(value)
    except ValueError:
        allowed = ", ".join(member.value for member in enum_type)
        raise common.ConfigError("{}: \"{}\" is not one of {}".format(key, value, allowed))


def _float_tuple(values, key: str) -> tuple[float, ...]:
    if not isinstance(values, (list, tuple)):
        raise common.ConfigError("{} must be a list".format(key))
    return tuple(float(value) for value in values)


def _initial_condition(section: dict, base_dir: pathlib.Path) -> InitialCondition:
    kind = _enum(InitialKind, section.get("kind"), "initial_condition.kind")
    options = {key: value for key, value in section.items() if key != "kind"}
    if "file" in options:
        options["file"] = base_dir.joinpath(options["file"])
    return InitialCondition(kind=kind, **options)


def _radius(section: dict | None, p: ModelParams) -> hmodel.RadiusLaw:
    section = section or {"kind": "self_similar"}
    kind = _enum(hmodel.RadiusKind, section.get("kind"), "hmodel.radius.kind")
    return hmodel.radius_law(
        kind, section.get("alpha"), p, float(section.get("factor", common.SELFSIMILAR_FACTOR))
    )


def _integrator(section: dict) -> fmodel.IntegratorConfig:
    defaults = {
        "abs_tol": config.abs_tol, "rel_tol": config.rel_tol,
        "dt_min": config.dt_min, "blowup_cap": config.blowup_cap,
    }
    return fmodel.IntegratorConfig(**(defaults | section))


def parse(document: dict, source_path: pathlib.Path | None = None) -> ExperimentConfig:
    """
    Build an ExperimentConfig from a parsed YAML document.
    :raises ConfigError: on missing sections, unknown keys or invalid values
    """
    if not isinstance(document, dict):
        raise common.ConfigError("experiment file must hold a mapping")
    base_dir = source_path.parent if source_path is not None else pathlib.Path(".")
    document = _coerce_numbers(document)
    try:
        experiment = _enum(Experiment, document.get("experiment"), "experiment")
        name = str(document.get("name", source_path.stem if source_path is not None else experiment.value))
        params = ModelParams(**(_section(document, "params", False) or {}))
        options: dict[str, Any] = {}

        if experiment in SPECTRAL_EXPERIMENTS:
            options["grid"] = field.GridSpec(**_section(document, "grid", True))
            options["initial_condition"] = _initial_condition(_section(document, "initial_condition", True), base_dir)
        if experiment in (Experiment.FMODEL_RUN, Experiment.FMODEL_LINEAR):
            options["integrator"] = _integrator(_section(document, "integrator", True))
            section = _section(document, "fmodel", False) or {}
            variant = fmodel.FModelVariant.LINEARIZED if experiment is Experiment.FMODEL_LINEAR else \
                _enum(fmodel.FModelVariant, section.get("variant", "nonautonomous"), "fmodel.variant")
            options["fmodel"] = FModelSection(
                variant=variant,
                linearization=_enum(fmodel.LinearizationForm, section.get("linearization", "dispersion"),
                                    "fmodel.linearization"),
            )
        if experiment is Experiment.CASCADE_CHECK:
            section = _section(document, "cascade", True)
            options["cascade"] = CascadeSection(
                epsilons=_float_tuple(section["epsilons"], "cascade.epsilons"), t_end=float(section["t_end"])
            )
            integrator = _section(document, "integrator", False)
            if integrator is not None:
                options["integrator"] = _integrator(integrator)

        if experiment in HEIGHT_EXPERIMENTS:
            section = _section(document, "hmodel", True)
            variant = _enum(hmodel.HVariant, section.get("variant", "orig_radial"), "hmodel.variant")
            grid_section = _section(document, "fd_grid", True)
            options["fd_grid"] = hmodel.FdGrid.from_spacing(
                variant.geometry, float(grid_section["dr"]), float(grid_section.get("extent", config.fd_extent))
            )
            options["hmodel"] = HModelSection(
                variant=variant,
                dt=float(section["dt"]),
                t_end=float(section["t_end"]),
                radius=_radius(section.get("radius"), params),
                scheme=_enum(hmodel.TimeScheme, section.get("scheme", "euler"), "hmodel.scheme"),
                snapshot_times=_float_tuple(section.get("snapshot_times", []), "hmodel.snapshot_times"),
                threshold=section.get("threshold"),
                residual_times=_float_tuple(section.get("residual_times", []), "hmodel.residual_times"),
            )
            ic_section = _section(document, "initial_condition", experiment is Experiment.HMODEL_BUMP)
            if ic_section is None:
                ic_section = {"kind": "selfsimilar_matched"}
            options["initial_condition"] = _initial_condition(ic_section, base_dir)

        if experiment is Experiment.STABILITY_SCAN:
            section = dict(_section(document, "stability", True))
            section["wavenumbers"] = _float_tuple(section.get("wavenumbers", []), "stability.wavenumbers")
            options["stability"] = StabilitySection(**section)
        if experiment is Experiment.DISPERSION_TABLE:
            options["dispersion"] = DispersionSection(**(_section(document, "dispersion", False) or {}))

        output_dir = pathlib.Path(str(document.get("output_dir", name)))
    except (TypeError, KeyError) as e:
        raise common.ConfigError("invalid experiment file: {}".format(e))
    except ValueError as e:
        raise common.ConfigError(str(e))

    return ExperimentConfig(
        experiment=experiment, name=name, params=params, output_dir=output_dir,
        echo=document, source_path=source_path, **options
    )


def load(path: pathlib.Path) -> ExperimentConfig:
    path = pathlib.Path(path)
    try:
        with path.open("r") as f:
            document = yaml.safe_load(f)
    except OSError as e:
        raise common.ConfigError("cannot read \"{}\": {}".format(path, e.strerror))
    except yaml.YAMLError as e:
        raise common.ConfigError("\"{}\" is not valid YAML: {}".format(path, e))
    return parse(document, path)


def resolve_output_dir(cfg: ExperimentConfig, root: pathlib.Path | None = None) -> pathlib.Path:
    """Absolute output directories are kept, relative ones live under the output root."""
    if cfg.output_dir.is_absolute():
        return cfg.output_dir
    return pathlib.Path(root if root is not None else config.output_root).joinpath(cfg.output_dir)
