"""
Real periodic fields stored by their Fourier coefficients.

Coefficients are kept in the half-spectrum layout of numpy.fft.rfft (n = 0..N/2),
normalised by 1/N so that coeff(0) is the mean of the samples. Hermitian symmetry
of the full spectrum is therefore structural; only the imaginary parts of the
mean and Nyquist modes can break it.
"""
import dataclasses
import functools
from typing import Callable

import numpy as np

try:
    from . import common
except ImportError:
    import common


@dataclasses.dataclass(frozen=True)
class GridSpec:
    n_nodes: int
    period: float = 2 * np.pi

    def __post_init__(self):
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 4 or self.n_nodes % 2:
            raise common.ArgumentError("n_nodes must be an even integer >= 4, got {}".format(self.n_nodes))
        if not self.period > 0:
            raise common.ArgumentError("period must be positive, got {}".format(self.period))

    @property
    def dealias_cutoff(self) -> int:
        return self.n_nodes // 3

    @property
    def half_size(self) -> int:
        return self.n_nodes // 2 + 1

    @functools.cached_property
    def indices(self) -> np.ndarray:
        """Wavenumber indices n = 0..N/2 of the stored half spectrum."""
        return np.arange(self.half_size)

    @functools.cached_property
    def wavenumbers(self) -> np.ndarray:
        """Effective wavenumbers 2*pi*n/L of the stored half spectrum."""
        return 2 * np.pi * self.indices / self.period

    @functools.cached_property
    def parseval_weights(self) -> np.ndarray:
        # every stored mode except n = 0 and n = N/2 stands for a +-n pair
        weights = np.full(self.half_size, 2.0)
        weights[0] = 1.0
        weights[-1] = 1.0
        return weights

    def nodes(self) -> np.ndarray:
        return np.arange(self.n_nodes) * (self.period / self.n_nodes)


@dataclasses.dataclass(frozen=True, eq=False)
class SpectralField:
    grid: GridSpec
    half: np.ndarray

    def __post_init__(self):
        half = np.array(self.half, dtype=np.complex128)
        if half.shape != (self.grid.half_size,):
            raise common.ArgumentError(
                "half spectrum of length {} expected, got shape {}".format(self.grid.half_size, half.shape)
            )
        half.flags.writeable = False
        object.__setattr__(self, "half", half)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralField":
        return cls(grid, np.zeros(grid.half_size, dtype=np.complex128))

    @classmethod
    def from_coefficients(cls, grid: GridSpec, coeffs) -> "SpectralField":
        """
        Build a field from its full spectrum, ordered by wavenumber -N/2..N/2-1.
        :raises StateError: when the spectrum is not Hermitian within IMAG_RESIDUE_TOL
        """
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        n_nodes = grid.n_nodes
        if coeffs.shape != (n_nodes,):
            raise common.ArgumentError("{} coefficients expected, got {}".format(n_nodes, coeffs.shape))
        fft_ordered = np.fft.ifftshift(coeffs)
        positive = fft_ordered[:n_nodes // 2 + 1]
        mirrored = np.conj(np.concatenate(([fft_ordered[0]], fft_ordered[:n_nodes // 2:-1], [fft_ordered[n_nodes // 2]])))
        residue = np.max(np.abs(positive - mirrored))
        scale = max(1.0, float(np.max(np.abs(coeffs))))
        if residue > common.IMAG_RESIDUE_TOL * scale:
            raise common.StateError("spectrum is not Hermitian, residue {:.3e}".format(residue))
        half = 0.5 * (positive + mirrored)
        return cls(grid, half)

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], grid: GridSpec) -> "SpectralField":
        return to_spectral(func(grid.nodes()), grid)

    @property
    def coeffs(self) -> np.ndarray:
        """Full spectrum ordered by wavenumber -N/2..N/2-1."""
        n_nodes = self.grid.n_nodes
        fft_ordered = np.empty(n_nodes, dtype=np.complex128)
        fft_ordered[:n_nodes // 2 + 1] = self.half
        fft_ordered[n_nodes // 2 + 1:] = np.conj(self.half[1:n_nodes // 2][::-1])
        return np.fft.fftshift(fft_ordered)

    def coeff(self, n: int) -> complex:
        n_nodes = self.grid.n_nodes
        if not -n_nodes // 2 <= n < n_nodes // 2:
            raise common.ArgumentError("wavenumber {} outside [-{}, {})".format(n, n_nodes // 2, n_nodes // 2))
        if n >= 0:
            return complex(self.half[n])
        if n == -n_nodes // 2:
            return complex(self.half[-1])
        return complex(np.conj(self.half[-n]))

    @property
    def mean(self) -> float:
        return float(self.half[0].real)

    @property
    def is_mean_zero(self) -> bool:
        return bool(self.half[0] == 0)

    def with_half(self, half: np.ndarray) -> "SpectralField":
        return SpectralField(self.grid, half)


def to_spectral(samples, grid: GridSpec) -> SpectralField:
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape != (grid.n_nodes,):
        raise common.ArgumentError("{} samples expected, got shape {}".format(grid.n_nodes, samples.shape))
    return SpectralField(grid, np.fft.rfft(samples) / grid.n_nodes)


def to_physical(f: SpectralField) -> np.ndarray:
    residue = max(abs(f.half[0].imag), abs(f.half[-1].imag))
    if residue > common.IMAG_RESIDUE_TOL:
        raise common.StateError(
            "mean or Nyquist coefficient carries imaginary part {:.3e}; field is not real".format(residue)
        )
    return np.fft.irfft(f.half * f.grid.n_nodes, n=f.grid.n_nodes)


def derivative(f: SpectralField, order: int = 1) -> SpectralField:
    """
    Multiply coeff(n) by (i*2*pi*n/L)**order. The Nyquist mode has no real
    derivative and is dropped.
    """
    if int(order) != order or order < 1:
        raise common.ArgumentError("derivative order must be a positive integer, got {}".format(order))
    ik = 1j * f.grid.wavenumbers
    ik[-1] = 0.0
    half = f.half
    # repeated first-order factors, so d(d f) and d2 f agree bit for bit
    for _ in range(order):
        half = half * ik
    return f.with_half(half)


def dealias(f: SpectralField) -> SpectralField:
    half = f.half.copy()
    half[f.grid.dealias_cutoff + 1:] = 0.0
    return f.with_half(half)


def _check_same_grid(f: SpectralField, g: SpectralField):
    if f.grid != g.grid:
        raise common.ArgumentError("grid mismatch: {} vs {}".format(f.grid, g.grid))


def multiply(f: SpectralField, g: SpectralField) -> SpectralField:
    _check_same_grid(f, g)
    return dealias(to_spectral(to_physical(f) * to_physical(g), f.grid))


def add(f: SpectralField, g: SpectralField) -> SpectralField:
    _check_same_grid(f, g)
    return f.with_half(f.half + g.half)


def scale(f: SpectralField, factor: float) -> SpectralField:
    return f.with_half(f.half * factor)


def project_mean_zero(f: SpectralField) -> SpectralField:
    half = f.half.copy()
    half[0] = 0.0
    return f.with_half(half)


@dataclasses.dataclass(frozen=True)
class Norms:
    l2: float
    linf: float
    hdot1: float
    hdot2: float
    h2: float


def _homogeneous_sq(f: SpectralField, s: int) -> float:
    grid = f.grid
    weights = grid.parseval_weights * np.abs(grid.wavenumbers) ** (2 * s)
    return float(grid.period * np.sum(weights * np.abs(f.half) ** 2))


def norms(f: SpectralField) -> Norms:
    l2_sq = _homogeneous_sq(f, 0)
    hdot2_sq = _homogeneous_sq(f, 2)
    return Norms(
        l2=np.sqrt(l2_sq),
        linf=float(np.max(np.abs(to_physical(f)))),
        hdot1=np.sqrt(_homogeneous_sq(f, 1)),
        hdot2=np.sqrt(hdot2_sq),
        h2=np.sqrt(l2_sq + hdot2_sq),
    )
