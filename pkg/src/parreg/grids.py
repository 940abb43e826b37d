"""Space-time grids and sampled fields.

Space is a periodic box [-L_a, L_a) per axis with a power-of-two point count;
time is a uniform closed range [t0, t1].  Field values are stored C-order
with time slowest.  The spectral representation uses the unnormalized DFT per
time slice with angular frequencies 2*pi*fftfreq(n, dx).
"""

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch

MIN_POINTS = 16


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    dim: int
    half_widths: tuple
    points: tuple
    t0: float
    t1: float
    nt: int

    def __post_init__(self):
        if len(self.half_widths) != self.dim or len(self.points) != self.dim:
            raise ValueError("half_widths/points length must equal dim")
        for n in self.points:
            if not _is_pow2(n) or n < MIN_POINTS:
                raise ValueError(f"points per axis must be a power of two >= {MIN_POINTS}, got {n}")
        if not (self.t1 > self.t0 and self.nt >= 2):
            raise ValueError("need t1 > t0 and nt >= 2")

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / (self.nt - 1)

    @property
    def dx(self) -> tuple:
        return tuple(2.0 * L / n for L, n in zip(self.half_widths, self.points))

    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.nt)

    def axis(self, a: int) -> np.ndarray:
        """Physical coordinates along spatial axis ``a`` (0-based)."""
        L, n = self.half_widths[a], self.points[a]
        return -L + (2.0 * L / n) * np.arange(n)

    def freq(self, a: int) -> np.ndarray:
        """Angular frequencies along spatial axis ``a`` (0-based)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points[a], d=self.dx[a])

    def cell_volume(self) -> float:
        out = 1.0
        for h in self.dx:
            out *= h
        return out

    def scaled(self, factor: float) -> "GridSpec":
        """Same sample layout on a box dilated by ``factor``."""
        return GridSpec(
            dim=self.dim,
            half_widths=tuple(L * factor for L in self.half_widths),
            points=self.points,
            t0=self.t0,
            t1=self.t1,
            nt=self.nt,
        )


def make_grid(half_widths, points, t_range, dt) -> GridSpec:
    """Build a GridSpec from a time step; ``dt`` must tile the range."""
    t0, t1 = float(t_range[0]), float(t_range[1])
    steps = (t1 - t0) / dt
    nt = int(round(steps)) + 1
    if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
        raise ValueError(f"dt = {dt} does not tile [{t0}, {t1}]")
    hw = tuple(float(h) for h in np.atleast_1d(half_widths))
    pts = tuple(int(p) for p in np.atleast_1d(points))
    return GridSpec(dim=len(hw), half_widths=hw, points=pts, t0=t0, t1=t1, nt=nt)


@dataclass(frozen=True)
class Field:
    """Real samples on (time x space) nodes."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        expect = (self.grid.nt, *self.grid.points)
        if self.values.shape != expect:
            raise ValueError(f"values shape {self.values.shape} != {expect}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite field values")


@dataclass(frozen=True)
class SpectralField:
    """Complex per-slice spectra on (time x frequency) nodes."""

    grid: GridSpec
    values: np.ndarray


def same_grid(a, b) -> None:
    if a.grid != b.grid:
        raise GridMismatch("fields live on different grids")


def partial_fourier(f, direction: str):
    """DFT in space only, one transform per time slice.

    ``forward`` maps Field -> SpectralField, ``inverse`` the other way;
    the composition is the identity to roundoff.
    """
    axes = tuple(range(1, f.grid.dim + 1))
    if direction == "forward":
        return SpectralField(grid=f.grid, values=np.fft.fftn(f.values, axes=axes))
    if direction == "inverse":
        vals = np.fft.ifftn(f.values, axes=axes)
        scale = float(np.max(np.abs(vals))) or 1.0
        if float(np.max(np.abs(vals.imag))) > 1e-8 * scale:
            raise ValueError("inverse transform of a non-conjugate-symmetric spectrum")
        return Field(grid=f.grid, values=vals.real.copy())
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def zero_field(grid: GridSpec) -> Field:
    return Field(grid=grid, values=np.zeros((grid.nt, *grid.points)))
