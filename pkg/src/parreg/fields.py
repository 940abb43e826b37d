"""Constructors for sampled source fields.

Everything here is compactly supported: space and time envelopes are C-infinity
bumps that vanish identically outside their radius, which keeps the periodic
solver's padding invariant checkable.
"""

import numpy as np

from . import rng
from .grids import Field, GridSpec


def bump(u: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1 - u^2)) inside |u| < 1, exactly zero outside."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ui * ui))
    return out


def plateau(u: np.ndarray, flat: float = 0.5) -> np.ndarray:
    """Smooth window equal to 1 on |u| <= flat, vanishing at |u| >= 1."""
    u = np.asarray(u, dtype=float)
    out = np.ones_like(u)
    out[np.abs(u) >= 1.0] = 0.0
    edge = (np.abs(u) > flat) & (np.abs(u) < 1.0)
    s = (np.abs(u[edge]) - flat) / (1.0 - flat)
    out[edge] = np.exp(1.0 - 1.0 / (1.0 - s * s))
    return out


def envelope(grid: GridSpec, space_radii, t_center: float, t_radius: float,
             space_flat: float = 0.0, t_flat: float = 0.0) -> np.ndarray:
    """Separable space-time window on the grid, shape (nt, *points)."""
    tw = plateau((grid.times() - t_center) / t_radius, t_flat) if t_flat > 0 else \
        bump((grid.times() - t_center) / t_radius)
    out = tw.reshape(-1, *([1] * grid.dim))
    radii = np.atleast_1d(np.asarray(space_radii, dtype=float))
    for a in range(grid.dim):
        xa = grid.axis(a) / radii[a]
        wa = plateau(xa, space_flat) if space_flat > 0 else bump(xa)
        shape = [1] * (grid.dim + 1)
        shape[a + 1] = grid.points[a]
        out = out * wa.reshape(shape)
    return out


def gaussian_time_bump(grid: GridSpec, width=1.0, t_center=0.5, t_radius=0.5) -> Field:
    """f(t, x) = time-bump(t) * exp(-|x/width|^2)."""
    vals = bump((grid.times() - t_center) / t_radius).reshape(-1, *([1] * grid.dim))
    vals = np.broadcast_to(vals, (grid.nt, *grid.points)).copy()
    widths = np.broadcast_to(np.atleast_1d(np.asarray(width, float)), (grid.dim,))
    for a in range(grid.dim):
        xa = grid.axis(a) / widths[a]
        shape = [1] * (grid.dim + 1)
        shape[a + 1] = grid.points[a]
        vals *= np.exp(-(xa * xa)).reshape(shape)
    return Field(grid=grid, values=vals)


def random_smooth_family(grid: GridSpec, count: int, seed: int, *,
                         kmax: float = 4.0, modes: int = 6,
                         space_radii=None, t_center=None, t_radius=None,
                         active_axes=None) -> list:
    """``count`` compactly supported random-Fourier fields, seeded.

    Member m draws its modes from stream (seed, FIELD_FAMILY, m): amplitudes,
    incommensurate wave vectors up to ``kmax`` and phases, all under a fixed
    space-time bump envelope.  ``active_axes`` (0-based) restricts spatial
    variation to a subset of axes; the field is constant along the rest.
    """
    if space_radii is None:
        space_radii = [0.35 * L for L in grid.half_widths]
    if t_center is None:
        t_center = 0.5 * (grid.t0 + grid.t1)
    if t_radius is None:
        t_radius = 0.35 * (grid.t1 - grid.t0)
    if active_axes is None:
        active_axes = list(range(grid.dim))
    env = envelope(grid, space_radii, t_center, t_radius)
    ts = grid.times().reshape(-1, *([1] * grid.dim))
    coords = []
    for a in range(grid.dim):
        shape = [1] * (grid.dim + 1)
        shape[a + 1] = grid.points[a]
        coords.append(grid.axis(a).reshape(shape))
    out = []
    for m in range(count):
        gen = rng.stream(seed, rng.FIELD_FAMILY, m)
        vals = np.zeros((grid.nt, *grid.points))
        for _ in range(modes):
            amp = gen.standard_normal()
            k = gen.uniform(-kmax, kmax, size=grid.dim)
            om = gen.uniform(-2.0, 2.0)
            phase = gen.uniform(0.0, 2.0 * np.pi)
            arg = om * ts + phase
            for a in active_axes:
                arg = arg + k[a] * coords[a]
            vals = vals + amp * np.cos(arg)
        out.append(Field(grid=grid, values=vals * env))
    return out


def modulated_mode(grid: GridSpec, wavenumbers, *, space_radii=None,
                   t_center=None, t_radius=None, space_flat=0.6,
                   t_flat=0.6) -> Field:
    """Plane-wave product cos(k_1 x_1) * ... under a wide plateau envelope.

    With the plateau flat over most of the support and a long time plateau,
    the spectrum concentrates near (tau, xi) = (0, k): the quasi-static regime
    where second-derivative multipliers attain their supremum.
    """
    if space_radii is None:
        space_radii = [0.45 * L for L in grid.half_widths]
    if t_center is None:
        t_center = 0.5 * (grid.t0 + grid.t1)
    if t_radius is None:
        t_radius = 0.4 * (grid.t1 - grid.t0)
    env = envelope(grid, space_radii, t_center, t_radius,
                   space_flat=space_flat, t_flat=t_flat)
    vals = env
    ks = np.atleast_1d(np.asarray(wavenumbers, dtype=float))
    for a in range(grid.dim):
        if ks[a] == 0.0:
            continue
        xa = grid.axis(a)
        shape = [1] * (grid.dim + 1)
        shape[a + 1] = grid.points[a]
        vals = vals * np.cos(ks[a] * xa).reshape(shape)
    return Field(grid=grid, values=vals)
