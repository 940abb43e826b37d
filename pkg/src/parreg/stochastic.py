"""Wiener increments, partition-sum stochastic integrals, and Monte-Carlo checks.

The integral of a matrix path F over [a, b] against a d-dimensional Wiener
process is the limit of left-endpoint partition sums
sum_k F(t_k) (W_{t_{k+1}} - W_{t_k}); the law of sqrt(2) * integral F dW is
the centered Gaussian with parameter Gamma(a, b) = integral F F^T, i.e.
covariance 2 Gamma.  These facts are what the Monte-Carlo paths here verify
and what the sampling solution estimator builds on.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import rng
from .coeffs import CoefficientPath, simpson_matrix
from .errors import BadPartition, Indefinite, NotSymmetric, ReversedInterval
from .grids import Field

_CHUNK = 1024


@dataclass(frozen=True)
class MatrixPath:
    """Square-integrable map t -> d x d matrix on [a, b]."""

    dim: int
    eval_fn: Callable[[float], np.ndarray]
    a: float
    b: float

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.eval_fn(float(t)), dtype=float)


@dataclass(frozen=True)
class McReport:
    """Sample-law comparison: covariance of sqrt(2)*J against 2*Gamma."""

    n: int
    target: np.ndarray
    estimate: np.ndarray
    max_z: float
    char_fn_max_err: float
    char_fn_tol: float
    passed: bool


def matrix_sqrt_psd(m) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition.

    Eigenvalues in [-1e-10*(1+|m|), 0) are treated as roundoff and clamped.
    """
    m = np.asarray(m, dtype=float)
    asym = float(np.max(np.abs(m - m.T)))
    if asym > 1e-12 * (1.0 + float(np.max(np.abs(m)))):
        raise NotSymmetric(f"asymmetry {asym:.3e}")
    eigs, vecs = np.linalg.eigh(0.5 * (m + m.T))
    scale = 1.0 + float(np.max(np.abs(eigs)))
    if eigs[0] < -1e-10 * scale:
        raise Indefinite(f"eigenvalue {eigs[0]:.3e} below clamping tolerance")
    return (vecs * np.sqrt(np.clip(eigs, 0.0, None))) @ vecs.T


def _check_partition(partition: np.ndarray, a: float, b: float) -> None:
    if partition.ndim != 1 or partition.size < 1:
        raise BadPartition("partition must be a non-empty 1-d array of times")
    if np.any(np.diff(partition) < 0):
        raise BadPartition("partition times must be non-decreasing")
    tol = 1e-9 * (1.0 + abs(a) + abs(b))
    if abs(partition[0] - a) > tol or abs(partition[-1] - b) > tol:
        raise BadPartition(
            f"partition [{partition[0]}, {partition[-1]}] does not span [{a}, {b}]"
        )


def wiener_increments(partition, d: int, seed: int, stream_index: int = 0) -> np.ndarray:
    """Independent increments W_{t_{k+1}} - W_{t_k}, shape (len(partition)-1, d)."""
    partition = np.asarray(partition, dtype=float)
    deltas = np.diff(partition)
    gen = rng.stream(seed, rng.WIENER, stream_index)
    return gen.standard_normal((len(deltas), d)) * np.sqrt(deltas)[:, None]


def stochastic_integral(f: MatrixPath, partition, seed: int,
                        increments: np.ndarray | None = None) -> np.ndarray:
    """Left-endpoint partition sum sum_k F(t_k) (W_{t_{k+1}} - W_{t_k}).

    Pass ``increments`` to reuse a shared Wiener path (e.g. restricted to a
    sub-partition); otherwise fresh increments are drawn from ``seed``.
    """
    partition = np.asarray(partition, dtype=float)
    _check_partition(partition, f.a, f.b)
    if len(partition) == 1:
        return np.zeros(f.dim)
    if increments is None:
        increments = wiener_increments(partition, f.dim, seed)
    if increments.shape != (len(partition) - 1, f.dim):
        raise BadPartition(
            f"increments shape {increments.shape} != {(len(partition) - 1, f.dim)}"
        )
    out = np.zeros(f.dim)
    for k in range(len(partition) - 1):
        out = out + f(partition[k]) @ increments[k]
    return out


def gamma_ab(f: MatrixPath, a: float, b: float) -> np.ndarray:
    """Gamma(a, b) = integral_a^b F(s) F(s)^T ds, symmetric PSD."""
    if b < a:
        raise ReversedInterval(f"b = {b} < a = {a}")
    return simpson_matrix(lambda t: f(t) @ f(t).T, a, b)


def _sample_integrals(f: MatrixPath, partition: np.ndarray, n: int, seed: int) -> np.ndarray:
    """n independent samples of the partition sum, one stream per sample.

    Samples are produced in fixed chunks; sample i always uses stream
    (seed, MC_PATHS, i), so the result is independent of chunking/workers.
    """
    steps = len(partition) - 1
    mats = np.array([f(partition[k]) for k in range(steps)])
    sq_dt = np.sqrt(np.diff(partition))
    out = np.empty((n, f.dim))
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        block = np.empty((stop - start, steps, f.dim))
        for i in range(start, stop):
            gen = rng.stream(seed, rng.MC_PATHS, i)
            block[i - start] = gen.standard_normal((steps, f.dim))
        block *= sq_dt[None, :, None]
        out[start:stop] = np.einsum("kij,nkj->ni", mats, block)
    return out


_CHAR_DIRECTIONS = np.array([
    [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0],
    [1.0, -1.0, 0.0], [0.5, 0.25, 1.0],
])


def mc_law_check(f: MatrixPath, a: float, b: float, n: int, seed: int) -> McReport:
    """Sample sqrt(2) * integral F dW and test its law against N(0, Gamma).

    Covariance entries are z-scored with the exact Gaussian fourth-moment
    variance; the characteristic function is checked at 5 fixed frequencies
    against exp(-<xi, Gamma xi>) within 3/sqrt(n).
    """
    if n < 1000:
        raise ValueError("need n >= 1000 samples")
    gamma = gamma_ab(f, a, b)
    target = 2.0 * gamma
    if a == b:
        samples = np.zeros((n, f.dim))
    else:
        steps = max(2, int(math.ceil((b - a) * 256)))
        partition = np.linspace(a, b, steps + 1)
        samples = math.sqrt(2.0) * _sample_integrals(f, partition, n, seed)
    est = (samples.T @ samples) / n
    # Var of the (i, j) covariance estimator for a centered Gaussian:
    # (S_ii S_jj + S_ij^2) / n evaluated at the target covariance S.
    var = (np.outer(np.diag(target), np.diag(target)) + target ** 2) / n
    denom = np.sqrt(np.where(var > 0, var, 1.0))
    z = np.where(var > 0, np.abs(est - target) / denom, 0.0)
    max_z = float(np.max(z)) if z.size else 0.0
    dirs = _CHAR_DIRECTIONS[:, : f.dim] if f.dim <= 3 else np.pad(
        _CHAR_DIRECTIONS, ((0, 0), (0, f.dim - 3))
    )
    char_err = 0.0
    for xi in dirs:
        emp = float(np.mean(np.cos(samples @ xi)))
        char_err = max(char_err, abs(emp - math.exp(-xi @ gamma @ xi)))
    tol = 3.0 / math.sqrt(n)
    passed = max_z <= 3.0 and char_err <= tol
    return McReport(n=n, target=target, estimate=est, max_z=max_z,
                    char_fn_max_err=char_err, char_fn_tol=tol, passed=passed)


def _slice_interpolator(grid, slab: np.ndarray):
    """Cubic interpolant of one spatial slice, zero outside the box.

    Cubic keeps the interpolation bias far below the Monte-Carlo standard
    error at the sample counts used here; linear would not.
    """
    from scipy.interpolate import CubicSpline, RegularGridInterpolator

    axes = [grid.axis(a) for a in range(grid.dim)]
    if grid.dim == 1:
        spline = CubicSpline(axes[0], slab)
        xmin, xmax = axes[0][0], axes[0][-1]

        def ev(pts: np.ndarray) -> np.ndarray:
            q = pts[:, 0]
            inside = (q >= xmin) & (q <= xmax)
            out = np.zeros(len(q))
            out[inside] = spline(q[inside])
            return out

        return ev
    interp = RegularGridInterpolator(axes, slab, method="cubic",
                                     bounds_error=False, fill_value=0.0)
    return interp


def mc_solve(path: CoefficientPath, f: Field, s: float, x, n: int, seed: int,
             substeps: int = 4) -> tuple:
    """Sampling estimator of the solution value u(s, x).

    Each of ``n`` paths accumulates Gaussian position increments whose
    covariance parameter over a substep is exactly the accumulated C of that
    substep, so the position at any node r is exactly N(0, C(s, r))
    distributed; the data integral over r is a per-path trapezoid on the
    field's time nodes, evaluated by multilinear interpolation.  Returns
    (estimate, standard error).  ``s`` snaps to the nearest grid time node.
    """
    g = f.grid
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ts = g.times()
    k0 = int(np.argmin(np.abs(ts - s)))
    if k0 >= g.nt - 1:
        return 0.0, 0.0
    if float(np.max(np.abs(f.values[k0:]))) == 0.0:
        return 0.0, 0.0
    # Per-substep PSD roots of the exact accumulated covariance (times 2).
    roots = []
    for k in range(k0, g.nt - 1):
        for q in range(substeps):
            ta = ts[k] + (ts[k + 1] - ts[k]) * q / substeps
            tb = ts[k] + (ts[k + 1] - ts[k]) * (q + 1) / substeps
            c_inc = simpson_matrix(path, ta, tb, nodes_per_unit=max(4, 256 // substeps))
            roots.append(matrix_sqrt_psd(2.0 * c_inc))
    roots = np.array(roots)
    n_sub = len(roots)
    n_nodes = g.nt - k0
    dt = g.dt
    w = np.full(n_nodes, dt)
    w[0] = w[-1] = 0.5 * dt
    interps = [
        _slice_interpolator(g, f.values[k0 + jj])
        if float(np.max(np.abs(f.values[k0 + jj]))) > 0.0 else None
        for jj in range(n_nodes)
    ]
    vals = np.empty(n)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        m = stop - start
        z = np.empty((m, n_sub, g.dim))
        for i in range(start, stop):
            gen = rng.stream(seed, rng.MC_PATHS, i)
            z[i - start] = gen.standard_normal((n_sub, g.dim))
        incs = np.einsum("kij,nkj->nki", roots, z)
        pos = np.zeros((m, n_nodes, g.dim))
        pos[:, 1:] = np.cumsum(incs, axis=1)[:, substeps - 1::substeps]
        contrib = np.zeros((m, n_nodes))
        for jj in range(n_nodes):
            if interps[jj] is not None:
                contrib[:, jj] = interps[jj](x[None, :] + pos[:, jj])
        vals[start:stop] = -(contrib @ w)
    est = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return est, stderr
