import numpy as np
from hypothesis import strategies as st

try:
    from .. import field
    from ..multipliers import ModelParams
except ImportError:
    import field
    from multipliers import ModelParams


AUTONOMOUS = ModelParams(K=1.0, R0=1.0, alpha=-3.0)
GROWING_RADIUS = ModelParams(K=1.0, R0=1.0, alpha=0.0)
BIOFILM = ModelParams(K=1e-5, R0=1.0, alpha=-3.0, h_inf=1e-3)


def random_mean_zero_field(grid: field.GridSpec, rng: np.random.Generator, max_mode: int | None = None,
                           amplitude: float = 1.0) -> field.SpectralField:
    """
    Random real field with modes 1..max_mode (default N/4 - 1, so that
    quadratic products are free of aliasing).
    """
    max_mode = grid.n_nodes // 4 - 1 if max_mode is None else max_mode
    half = np.zeros(grid.half_size, dtype=np.complex128)
    half[1:max_mode + 1] = amplitude * (rng.standard_normal(max_mode) + 1j * rng.standard_normal(max_mode))
    return field.SpectralField(grid, half)


def single_mode(grid: field.GridSpec, n: int, amplitude: float = 1.0) -> field.SpectralField:
    """amplitude * cos(n x): coefficient amplitude / 2 at +-n."""
    half = np.zeros(grid.half_size, dtype=np.complex128)
    half[n] = amplitude / 2
    return field.SpectralField(grid, half)


def sine(grid: field.GridSpec, k: int, amplitude: float = 1.0) -> field.SpectralField:
    return field.project_mean_zero(field.SpectralField.from_function(lambda x: amplitude * np.sin(k * x), grid))


@st.composite
def mean_zero_fields(draw, grid: field.GridSpec, max_mode: int | None = None):
    max_mode = grid.n_nodes // 4 - 1 if max_mode is None else max_mode
    components = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
    real = draw(st.lists(components, min_size=max_mode, max_size=max_mode))
    imag = draw(st.lists(components, min_size=max_mode, max_size=max_mode))
    half = np.zeros(grid.half_size, dtype=np.complex128)
    half[1:max_mode + 1] = np.array(real) + 1j * np.array(imag)
    return field.SpectralField(grid, half)
