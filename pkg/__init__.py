from . import common
from . import config
from . import field
from . import multipliers
from . import fmodel
from . import cascade
from . import hmodel
from . import diagnostics
from . import experiment_config
from . import output_writer
from .field import GridSpec, SpectralField
from .multipliers import ModelParams
from .fmodel import IntegratorConfig, RunRecord, Termination, integrate
from .hmodel import FdGrid, HeightField, HVariant, evolve

__version__ = common.VERSION
