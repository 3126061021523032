"""Sampled-function calculus and wave packets.

GridFunction is the universal representation: complex samples on a uniform
grid, with the DFT convention xi_m = m/(N*spacing) (wrapped symmetrically).
Wave packets are built in frequency, so their transform support is exact
at grid level, and are L^2-normalized against the quadrature norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .grid import DyadicInterval, Interval, Tile
from .profiles import CutoffProfile, PiecewisePolynomial, bump_ppoly


class GridResolutionError(ValueError):
    """A tile cannot be resolved on the requested grid."""


@dataclass(frozen=True)
class GridGeometry:
    """Uniform sample grid: x_m = origin + m * spacing, m = 0..count-1."""

    count: int
    spacing: float
    origin: float = 0.0

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("need at least two samples")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")

    @property
    def xs(self) -> np.ndarray:
        return self.origin + self.spacing * np.arange(self.count)

    @property
    def freqs(self) -> np.ndarray:
        return np.fft.fftfreq(self.count, d=self.spacing)

    @property
    def span(self) -> float:
        return self.count * self.spacing

    def zeros(self) -> "GridFunction":
        return GridFunction(np.zeros(self.count, dtype=complex), self.origin, self.spacing)

    def function(self, values) -> "GridFunction":
        vals = np.asarray(values, dtype=complex)
        if vals.shape != (self.count,):
            raise ValueError(f"expected {self.count} samples, got {vals.shape}")
        return GridFunction(vals, self.origin, self.spacing)

    def indicator(self, intervals: Iterable[Tuple[float, float]]) -> "GridFunction":
        xs = self.xs
        mask = np.zeros(self.count, dtype=bool)
        for lo, hi in intervals:
            mask |= (xs >= float(lo)) & (xs < float(hi))
        return self.function(mask.astype(complex))


@dataclass(frozen=True)
class GridFunction:
    """Complex samples on a uniform grid."""

    samples: np.ndarray
    origin: float
    spacing: float

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=complex)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        if arr.ndim != 1 or arr.shape[0] < 2:
            raise ValueError("need a 1-d array of at least two samples")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    @property
    def geometry(self) -> GridGeometry:
        return GridGeometry(self.count, self.spacing, self.origin)

    @property
    def xs(self) -> np.ndarray:
        return self.origin + self.spacing * np.arange(self.count)

    @property
    def freqs(self) -> np.ndarray:
        return np.fft.fftfreq(self.count, d=self.spacing)

    def fourier_coefficients(self) -> np.ndarray:
        """Continuum-transform samples at self.freqs (lossless round-trip)."""
        hat = self.spacing * np.fft.fft(self.samples)
        return hat * np.exp(-2j * np.pi * self.freqs * self.origin)

    def norm2(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.samples) ** 2)) * self.spacing)

    def map_samples(self, values) -> "GridFunction":
        return GridFunction(values, self.origin, self.spacing)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _require_same_grid(self, other)
        return self.map_samples(self.samples + other.samples)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _require_same_grid(self, other)
        return self.map_samples(self.samples - other.samples)

    def __mul__(self, scalar) -> "GridFunction":
        return self.map_samples(self.samples * complex(scalar))

    __rmul__ = __mul__


def from_frequency(geometry: GridGeometry, hat_values: np.ndarray) -> GridFunction:
    """Grid function whose fourier_coefficients equal `hat_values`."""
    hat = np.asarray(hat_values, dtype=complex)
    if hat.shape != (geometry.count,):
        raise ValueError("frequency data must match the grid size")
    spectrum = hat * np.exp(2j * np.pi * geometry.freqs * geometry.origin)
    samples = np.fft.ifft(spectrum) / geometry.spacing
    return GridFunction(samples, geometry.origin, geometry.spacing)


def _require_same_grid(f: GridFunction, g: GridFunction) -> None:
    if f.count != g.count or f.spacing != g.spacing or f.origin != g.origin:
        raise ValueError("grid mismatch")


def inner_product(f: GridFunction, g: GridFunction) -> complex:
    """spacing * sum f conj(g): linear in f, conjugate-linear in g."""
    _require_same_grid(f, g)
    return complex(np.sum(f.samples * np.conj(g.samples)) * f.spacing)


# ---------------------------------------------------------------------------
# Weight, packets, adaptedness
# ---------------------------------------------------------------------------


def chi_tilde(interval, x, M: float) -> np.ndarray:
    """M-th power of the interval weight: (1 + ((x - c)/|I|)^2)^(-M/2)."""
    if M <= 0:
        raise ValueError("M must be positive")
    c = float(interval.center)
    length = float(interval.length)
    if length <= 0:
        raise ValueError("interval must have positive length")
    u = (np.asarray(x, dtype=float) - c) / length
    return (1.0 + u * u) ** (-M / 2.0)


#: Frequency envelope: bump on [-1/2, 1/2] supported in [-0.45, 0.45],
#: i.e. inside nine tenths of the unit interval.
DEFAULT_ENVELOPE_SMOOTHNESS = 8


def _envelope(smoothness: int) -> PiecewisePolynomial:
    return bump_ppoly(
        (Fraction(-9, 20), Fraction(9, 20)),
        (Fraction(-3, 10), Fraction(3, 10)),
        smoothness,
    )


def wave_packet(
    tile: Tile,
    modulation: int = 0,
    geometry: Optional[GridGeometry] = None,
    envelope_smoothness: int = DEFAULT_ENVELOPE_SMOOTHNESS,
) -> GridFunction:
    """L^2-normalized packet with transform support inside (9/10) of the
    tile's frequency interval, spatially concentrated on the tile.

    `modulation` translates the packet by that many spatial tile lengths
    (a frequency-side modulation).  The grid must resolve the tile: at
    least 8 samples per spatial length and 8 frequency bins per frequency
    length.
    """
    if geometry is None:
        raise ValueError("a grid geometry is required")
    ilen = float(tile.spatial.length)
    wlen = float(tile.freq.length)
    if ilen / geometry.spacing < 8 - 1e-9:
        raise GridResolutionError(
            f"spatial interval {ilen} under-resolved at spacing {geometry.spacing}"
        )
    if wlen * geometry.span < 8 - 1e-9:
        raise GridResolutionError(
            f"frequency interval {wlen} under-resolved on span {geometry.span}"
        )
    env = _envelope(envelope_smoothness)
    freqs = geometry.freqs
    hat = env((freqs - float(tile.freq.center)) / wlen).astype(complex)
    center = float(tile.spatial.center) + modulation * ilen
    hat *= np.exp(-2j * np.pi * freqs * center)
    phi = from_frequency(geometry, hat)
    norm = phi.norm2()
    if norm == 0:
        raise GridResolutionError("packet vanished on the grid; refine the grid")
    return phi * (1.0 / norm)


@dataclass(frozen=True)
class AdaptednessReport:
    norm_error: float
    leakage: float
    constants: Tuple[Tuple[float, float], ...]  # (M, smallest C on the grid)

    def constant(self, M: float) -> float:
        for m, c in self.constants:
            if m == M:
                return c
        raise KeyError(f"M={M} was not certified")


def verify_adapted(
    phi: GridFunction,
    tile: Tile,
    orders: Sequence[float] = (2.0, 4.0, 8.0, 16.0),
) -> AdaptednessReport:
    """Certify normalization, transform support, and spatial decay.

    For each M in `orders`, reports the smallest C on the grid with
    |phi(x)| <= C |I|^(-1/2) chi_tilde(x)^M.
    """
    norm_error = abs(phi.norm2() - 1.0)
    hat = phi.fourier_coefficients()
    enlarged = tile.freq.dilate(Fraction(9, 10))
    lo, hi = float(enlarged.left), float(enlarged.right)
    outside = (phi.freqs < lo) | (phi.freqs > hi)
    total = float(np.sum(np.abs(hat) ** 2))
    leakage = float(np.sum(np.abs(hat[outside]) ** 2)) / total if total else 0.0
    mags = np.abs(phi.samples)
    scale = math.sqrt(float(tile.spatial.length))
    consts = []
    for M in orders:
        weight = chi_tilde(tile.spatial, phi.xs, M)
        consts.append((float(M), float(np.max(mags * scale / weight))))
    return AdaptednessReport(norm_error, leakage, tuple(consts))


# ---------------------------------------------------------------------------
# Hardy-Littlewood maximal operator
# ---------------------------------------------------------------------------


def hl_maximal(f: GridFunction) -> GridFunction:
    """Maximal dyadic-radius average of |f|, zero-extended off the grid.

    Radii run over spacing * 2^k for k >= 0, plus the half-cell radius
    whose average is |f| itself, so Mf >= |f| pointwise exactly.
    """
    n = f.count
    mags = np.abs(f.samples)
    padded = np.zeros(3 * n)
    padded[n : 2 * n] = mags
    cs = np.concatenate([[0.0], np.cumsum(padded)])
    best = mags.copy()
    idx = np.arange(n) + n
    max_k = int(math.ceil(math.log2(n))) + 1
    for k in range(0, max_k + 1):
        half = 2**k
        if half > n:
            half = n  # windows beyond the padded span contribute nothing new
        interior = cs[idx + half] - cs[idx - half + 1]
        ends = 0.5 * (padded[idx - half] + padded[idx + half])
        avg = (interior + ends) / (2 * half)
        np.maximum(best, avg, out=best)
        if half == n:
            break
    return f.map_samples(best.astype(complex))


# ---------------------------------------------------------------------------
# Truncation by a pointwise scale cutoff
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncationFunction:
    """Integer-valued scale cutoff, one value per grid cell."""

    levels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.levels)
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError("levels must be integers")
        arr.setflags(write=False)
        object.__setattr__(self, "levels", arr)

    @classmethod
    def constant(cls, level: int, count: int) -> "TruncationFunction":
        return cls(np.full(count, int(level), dtype=np.int64))

    @classmethod
    def step(cls, geometry: GridGeometry, x_star: float, left: int, right: int) -> "TruncationFunction":
        levels = np.where(geometry.xs < x_star, int(left), int(right))
        return cls(levels.astype(np.int64))


def truncate_packet(
    phi: GridFunction, tile: Tile, cutoff: TruncationFunction
) -> GridFunction:
    """Pointwise product with the indicator of |I| >= 2^cutoff(x).

    The comparison is exact integer arithmetic on dyadic scales.
    """
    if cutoff.levels.shape != (phi.count,):
        raise ValueError("cutoff grid does not match the function grid")
    keep = tile.spatial.scale >= cutoff.levels
    return phi.map_samples(np.where(keep, phi.samples, 0.0))
