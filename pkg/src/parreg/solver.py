"""Solution operator for u_t + Tr(c(t) D^2 u) = f on a periodic space-time grid.

The solved equation is backward: the value at time s integrates the data over
r >= s against Gaussian kernels with accumulated covariance parameter
C(s, r) = integral_s^r c(t) dt,

    u_hat(s, xi) = - integral_s^inf exp(-<C(s,r) xi, xi>) f_hat(r, xi) dr,

discretized with trapezoid weights in r.  Exponents are assembled from the
per-step increments C(t_k, t_{k+1}) so additivity of C holds exactly on the
time grid.  A physical-space quadrature oracle implements the same formula by
direct kernel convolution, giving an independent cross-check.
"""

import numpy as np

from . import gauss
from .coeffs import CoefficientPath, cov_accumulate
from .errors import AxisOutOfRange, GridTooSmall, SingularCovariance
from .grids import Field, SpectralField, partial_fourier, same_grid

PADDING_SIGMAS = 6.0
SUPPORT_RTOL = 1e-12


def varying_axes(f: Field) -> list:
    """Spatial axes (0-based) along which the samples are not constant."""
    scale = float(np.max(np.abs(f.values))) or 1.0
    out = []
    for a in range(f.grid.dim):
        var = float(np.max(np.ptp(f.values, axis=a + 1)))
        if var > SUPPORT_RTOL * scale:
            out.append(a)
    return out


def support_half_width(f: Field, axis: int) -> float:
    """Largest |x_axis| over the support of f (0 for an identically zero f)."""
    scale = float(np.max(np.abs(f.values)))
    if scale == 0.0:
        return 0.0
    mask = np.abs(f.values) > SUPPORT_RTOL * scale
    other = tuple(k for k in range(f.values.ndim) if k != axis + 1)
    line = mask.any(axis=other)
    xs = f.grid.axis(axis)[line]
    return float(np.max(np.abs(xs))) if xs.size else 0.0


def check_grid(path: CoefficientPath, f: Field) -> None:
    """Padding invariant: support + 6 standard deviations of the largest
    accumulated kernel must fit in the box, on every axis where f varies.
    Also requires f to vanish on the final time slice (compact time support).
    """
    g = f.grid
    scale = float(np.max(np.abs(f.values)))
    if scale == 0.0:
        return
    if float(np.max(np.abs(f.values[-1]))) > SUPPORT_RTOL * scale:
        raise GridTooSmall("data does not vanish at the final time slice")
    c_total = cov_accumulate(path, g.t0, g.t1)
    for a in varying_axes(f):
        sigma = float(np.sqrt(max(0.0, 2.0 * c_total[a, a])))
        need = support_half_width(f, a) + PADDING_SIGMAS * sigma
        if need > g.half_widths[a]:
            raise GridTooSmall(
                f"axis {a + 1}: need half-width {need:.3g} "
                f"(support {support_half_width(f, a):.3g} + {PADDING_SIGMAS}*sigma), "
                f"box gives {g.half_widths[a]:.3g}"
            )


def _freq_mesh(grid, zero_nyquist: bool = False) -> list:
    """Frequency meshgrid; ``zero_nyquist`` clears the unpaired mode.

    Odd powers of a frequency have no conjugate-symmetric value at the
    Nyquist index, so factors entering an odd total power use the zeroed
    axes; even powers keep the true value.
    """
    axes = []
    for a in range(grid.dim):
        ax = grid.freq(a).copy()
        if zero_nyquist:
            ax[grid.points[a] // 2] = 0.0
        axes.append(ax)
    return np.meshgrid(*axes, indexing="ij") if grid.dim > 1 else [axes[0]]


def _quadratic_form(c: np.ndarray, mesh, mesh_odd) -> np.ndarray:
    d = len(mesh)
    out = np.zeros_like(mesh[0])
    for a in range(d):
        out += c[a, a] * mesh[a] * mesh[a]
        for b in range(a + 1, d):
            out += 2.0 * c[a, b] * mesh_odd[a] * mesh_odd[b]
    return out


def step_covariances(path: CoefficientPath, grid) -> np.ndarray:
    """Per-step increments C(t_k, t_{k+1}), shape (nt-1, d, d)."""
    ts = grid.times()
    return np.array([cov_accumulate(path, ts[k], ts[k + 1]) for k in range(grid.nt - 1)])


def solve_duhamel(path: CoefficientPath, f: Field, *, skip_grid_check: bool = False) -> Field:
    """Spectral backward solve; returns the physical-space solution field.

    The value at the k-th time node accumulates trapezoid-weighted data slices
    at nodes j >= k, attenuated by exp(-<C(t_k, t_j) xi, xi>) built as an exact
    running product of per-step factors.
    """
    if not skip_grid_check:
        check_grid(path, f)
    g = f.grid
    fhat = partial_fourier(f, "forward").values
    mesh = _freq_mesh(g)
    mesh_odd = _freq_mesh(g, zero_nyquist=True)
    incs = step_covariances(path, g)
    step_factor = [np.exp(-_quadratic_form(incs[k], mesh, mesh_odd))
                   for k in range(g.nt - 1)]
    dt = g.dt
    uhat = np.empty_like(fhat)
    # tail(k) = sum_{j >= k} w_j exp(-<C(t_k,t_j) xi, xi>) fhat_j, with w_j = dt
    # except dt/2 at the last node; the k-th trapezoid then subtracts dt/2 fhat_k.
    tail = 0.5 * dt * fhat[g.nt - 1]
    uhat[g.nt - 1] = np.zeros_like(fhat[0])
    for k in range(g.nt - 2, -1, -1):
        tail = dt * fhat[k] + step_factor[k] * tail
        uhat[k] = -(tail - 0.5 * dt * fhat[k])
    return partial_fourier(SpectralField(grid=g, values=uhat), "inverse")


def second_derivative(u: Field, i: int, j: int) -> Field:
    """Spectral mixed second derivative along axes ``i`` and ``j`` (1-based)."""
    g = u.grid
    if not (1 <= i <= g.dim and 1 <= j <= g.dim):
        raise AxisOutOfRange(f"axes ({i}, {j}) outside 1..{g.dim}")
    mesh = _freq_mesh(g, zero_nyquist=(i != j))
    mult = -mesh[i - 1] * mesh[j - 1]
    uhat = partial_fourier(u, "forward").values
    return partial_fourier(SpectralField(grid=g, values=mult * uhat), "inverse")


def time_derivative(u: Field) -> np.ndarray:
    """Centered differences in t, one-sided second order at the ends."""
    v = u.values
    dt = u.grid.dt
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * dt)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * dt)
    return out


def residual(u: Field, f: Field, path: CoefficientPath) -> Field:
    """r = D_t u + sum_ij c_ij(t) u_{x_i x_j} - f, the a-posteriori check."""
    same_grid(u, f)
    g = u.grid
    vals = time_derivative(u) - f.values
    ts = g.times()
    cs = np.array([path(t) for t in ts])
    for i in range(1, g.dim + 1):
        for j in range(i, g.dim + 1):
            dij = second_derivative(u, i, j).values
            w = cs[:, i - 1, j - 1] if i == j else 2.0 * cs[:, i - 1, j - 1]
            vals += w.reshape(-1, *([1] * g.dim)) * dij
    return Field(grid=g, values=vals)


def _axis_kernel_matrix(c_entry: float, x: np.ndarray, h: float) -> np.ndarray:
    """Dense kernel K[m, m'] = Gaussian cell mass at offset x[m'] - x[m]."""
    offsets = x[None, :] - x[:, None]
    n = len(x)
    masses = gauss.cell_masses_1d(c_entry, offsets.ravel(), h)
    return masses.reshape(n, n)


def _dense_kernel_apply(c_active: np.ndarray, coords: np.ndarray,
                        cell_vol: float, slab_flat: np.ndarray) -> np.ndarray:
    """Apply a non-separable Gaussian kernel by direct density quadrature.

    ``coords`` has shape (N, da) over the flattened active-axes mesh.  Memory
    is O(N^2); callers guard the size.
    """
    eigs, vecs = np.linalg.eigh(c_active)
    if eigs[0] <= 1e-14 * (1.0 + eigs[-1]):
        raise SingularCovariance(
            "kernel covariance couples varying axes but is singular; "
            "only axis-aligned degeneracy is supported"
        )
    da = c_active.shape[0]
    delta = coords[None, :, :] - coords[:, None, :]
    y = delta @ vecs
    quad = np.einsum("ijk,k->ij", y * y, 1.0 / eigs)
    norm = cell_vol / np.sqrt((4.0 * np.pi) ** da * np.prod(eigs))
    return (norm * np.exp(-0.25 * quad)) @ slab_flat


def solve_space_oracle(path: CoefficientPath, f: Field, *,
                       degenerate: bool = True,
                       skip_grid_check: bool = False,
                       dense_limit: int = 4096) -> Field:
    """Physical-space quadrature of the kernel representation.

    For every pair of time nodes the data slice is convolved with the Gaussian
    kernel of the accumulated covariance, then trapezoid-accumulated over r.
    When the active block of C is diagonal the kernel factorizes and each axis
    uses exact per-cell masses; a coupled block falls back to dense density
    quadrature (grids up to ``dense_limit`` spatial points).  Axes along which
    f is constant are skipped; with ``degenerate`` false, a kernel that is
    singular along a varying axis raises instead of acting as a Dirac.

    Deliberately shares no code path with the spectral solve: no transforms,
    no multipliers; this is the cross-check oracle.
    """
    if not skip_grid_check:
        check_grid(path, f)
    g = f.grid
    active = varying_axes(f)
    incs = step_covariances(path, g)
    dt = g.dt
    out = np.zeros_like(f.values)
    axes_x = {a: g.axis(a) for a in active}
    coords_flat = None
    for k in range(g.nt - 1):
        # Slice j = k contributes with weight dt/2 and a Dirac kernel (C = 0).
        out[k] += 0.5 * dt * f.values[k]
        c_run = np.zeros((g.dim, g.dim))
        for j in range(k + 1, g.nt):
            c_run = c_run + incs[j - 1]
            w = dt if j < g.nt - 1 else 0.5 * dt
            slab = f.values[j]
            if float(np.max(np.abs(slab))) == 0.0:
                continue
            sub = c_run[np.ix_(active, active)]
            coupled = len(active) > 1 and float(
                np.max(np.abs(sub - np.diag(np.diag(sub))))
            ) > 1e-12 * (1.0 + float(np.max(np.abs(sub))))
            if coupled:
                n_space = int(np.prod(g.points))
                if n_space > dense_limit:
                    raise SingularCovariance(
                        f"coupled kernel needs a dense N^2 quadrature; "
                        f"{n_space} spatial points exceeds the {dense_limit} limit"
                    )
                if coords_flat is None:
                    mesh = np.meshgrid(*[g.axis(a) for a in range(g.dim)], indexing="ij")
                    coords_flat = np.stack([m.ravel() for m in mesh], axis=1)
                vol = float(np.prod([g.dx[a] for a in active]))
                res = _dense_kernel_apply(sub, coords_flat[:, active], vol, slab.ravel())
                out[k] += w * res.reshape(slab.shape)
                continue
            conv = slab
            for a in active:
                c_aa = float(c_run[a, a])
                if c_aa <= 0.0:
                    if not degenerate:
                        raise SingularCovariance(
                            f"C(s, r) degenerate along varying axis {a + 1}"
                        )
                    continue  # Dirac along this axis
                kmat = _axis_kernel_matrix(c_aa, axes_x[a], g.dx[a])
                conv = np.moveaxis(np.tensordot(kmat, np.moveaxis(conv, a, 0), axes=(1, 0)), 0, a)
            out[k] += w * conv
    return Field(grid=g, values=-out)
