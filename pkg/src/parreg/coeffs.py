"""Time-dependent diffusion matrices c(t) and their certification.

A coefficient path is a map t -> symmetric non-negative d x d matrix.  The
accumulated matrix ``C(s, r) = integral_s^r c(t) dt`` is the covariance
parameter of the solution kernel, and the directional parabolicity constant

    lambda = sup { l >= 0 :  c(t) - l * I0  is PSD for all sampled t }

(I0 the projection onto the first p0 coordinates) controls every estimate
downstream.  Certification scans a user-provided time grid.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NotPSD, NotSymmetric, ReversedInterval

NODES_PER_UNIT = 256
BISECTION_TOL = 1e-8
_SYM_TOL = 1e-12
_PSD_REL_TOL = 1e-10


@dataclass(frozen=True)
class CoefficientPath:
    """Map t -> c(t); evaluation clamps t into [t_lo, t_hi].

    Infinite bounds (the default) disable clamping.  Clamped bounds are how a
    drift-reduced path freezes its endpoint values outside the time horizon.
    """

    dim: int
    eval_fn: Callable[[float], np.ndarray]
    t_lo: float = -math.inf
    t_hi: float = math.inf

    def __call__(self, t: float) -> np.ndarray:
        tc = min(max(float(t), self.t_lo), self.t_hi)
        return np.asarray(self.eval_fn(tc), dtype=float)


@dataclass(frozen=True)
class ParabolicityCertificate:
    """Result of scanning c(t) - lambda*I0 over a time grid.

    ``lam`` is the minimum of the per-time constants; ``passed`` iff it is
    strictly positive.
    """

    p0: int
    lam: float
    t_samples: tuple = field(repr=False)
    passed: bool = True


def constant_path(m) -> CoefficientPath:
    m = np.asarray(m, dtype=float)
    return CoefficientPath(dim=m.shape[0], eval_fn=lambda t: m)


def polynomial_path(coeff_matrices: Sequence) -> CoefficientPath:
    """c(t) = sum_k M_k t^k with matrix coefficients M_k."""
    mats = [np.asarray(m, dtype=float) for m in coeff_matrices]
    d = mats[0].shape[0]

    def ev(t: float) -> np.ndarray:
        acc = np.zeros((d, d))
        tk = 1.0
        for m in mats:
            acc += tk * m
            tk *= t
        return acc

    return CoefficientPath(dim=d, eval_fn=ev)


def table_path(times, matrices) -> CoefficientPath:
    """Linear interpolation of tabulated matrices; clamped outside the table."""
    times = np.asarray(times, dtype=float)
    mats = np.asarray(matrices, dtype=float)
    if times.ndim != 1 or len(times) < 2 or np.any(np.diff(times) <= 0):
        raise ValueError("table times must be strictly increasing, length >= 2")
    d = mats.shape[1]
    flat = mats.reshape(len(times), d * d)

    def ev(t: float) -> np.ndarray:
        row = np.array([np.interp(t, times, flat[:, k]) for k in range(d * d)])
        return row.reshape(d, d)

    return CoefficientPath(dim=d, eval_fn=ev, t_lo=float(times[0]), t_hi=float(times[-1]))


def table_path_from_csv(text: str) -> CoefficientPath:
    """Parse a table path from CSV with header ``t, c11, c12, ..., cdd``."""
    reader = csv.reader(io.StringIO(text))
    header = [h.strip() for h in next(reader)]
    if not header or header[0] != "t":
        raise ValueError("first CSV column must be 't'")
    n_entries = len(header) - 1
    d = int(round(math.sqrt(n_entries)))
    if d * d != n_entries:
        raise ValueError(f"{n_entries} coefficient columns is not a square count")
    times, mats = [], []
    for row in reader:
        if not row:
            continue
        vals = [float(v) for v in row]
        times.append(vals[0])
        mats.append(np.array(vals[1:]).reshape(d, d))
    return table_path(times, mats)


def scale_path(path: CoefficientPath, factor: float) -> CoefficientPath:
    return CoefficientPath(
        dim=path.dim,
        eval_fn=lambda t: factor * path(t),
        t_lo=path.t_lo,
        t_hi=path.t_hi,
    )


def coordinate_projection(d: int, p0: int) -> np.ndarray:
    """Orthogonal projection onto the span of the first p0 coordinates."""
    proj = np.zeros((d, d))
    proj[:p0, :p0] = np.eye(p0)
    return proj


def simpson_matrix(fn: Callable[[float], np.ndarray], a: float, b: float,
                   nodes_per_unit: int = NODES_PER_UNIT) -> np.ndarray:
    """Composite Simpson quadrature of a matrix-valued function.

    The subinterval count is even and proportional to the interval length, so
    quadratures over [s, u] and [u, r] use the same lattice as the quadrature
    over [s, r] whenever the endpoints are lattice-aligned.
    """
    fa = np.asarray(fn(a), dtype=float)
    if b == a:
        return np.zeros_like(fa)
    m = 2 * max(1, math.ceil((b - a) * nodes_per_unit / 2))
    ts = np.linspace(a, b, m + 1)
    h = (b - a) / m
    acc = fa + np.asarray(fn(b), dtype=float)
    acc += 4.0 * sum(np.asarray(fn(t), dtype=float) for t in ts[1:-1:2])
    acc += 2.0 * sum(np.asarray(fn(t), dtype=float) for t in ts[2:-1:2])
    out = (h / 3.0) * acc
    return 0.5 * (out + out.T)


def cov_accumulate(path: CoefficientPath, s: float, r: float,
                   nodes_per_unit: int = NODES_PER_UNIT) -> np.ndarray:
    """Accumulated diffusion ``integral_s^r c(t) dt``, symmetric PSD."""
    if r < s:
        raise ReversedInterval(f"r = {r} < s = {s}")
    return simpson_matrix(path, s, r, nodes_per_unit)


def _is_psd(m: np.ndarray, tol: float) -> bool:
    return bool(np.linalg.eigvalsh(m)[0] >= -tol)


def directional_lambda(c: np.ndarray, p0: int, tol: float = BISECTION_TOL) -> float:
    """sup { l >= 0 : c - l*I0 PSD }, by bisection to absolute tolerance."""
    d = c.shape[0]
    proj = coordinate_projection(d, p0)
    scale = 1.0 + float(np.max(np.abs(c)))
    psd_tol = 1e-12 * scale
    hi = float(np.min(np.diag(c)[:p0]))  # necessary: diagonal entries bound l
    if hi <= 0.0:
        return 0.0
    if _is_psd(c - hi * proj, psd_tol):
        return hi
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _is_psd(c - mid * proj, psd_tol):
            lo = mid
        else:
            hi = mid
    return lo


def certify_parabolicity(path: CoefficientPath, p0: int, t_grid,
                         tol: float = BISECTION_TOL) -> ParabolicityCertificate:
    """Scan ``t_grid``, bounding lambda(t) per time and taking the minimum.

    Raises NotPSD (with the offending time) if some c(t) is indefinite beyond
    roundoff, and NotSymmetric if evaluation returns an asymmetric matrix.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if not 1 <= p0 <= path.dim:
        raise ValueError(f"p0 = {p0} outside 1..{path.dim}")
    if t_grid.size == 0:
        raise ValueError("empty time grid")
    samples = []
    for t in t_grid:
        c = path(t)
        asym = float(np.max(np.abs(c - c.T)))
        if asym > _SYM_TOL * (1.0 + np.max(np.abs(c))):
            raise NotSymmetric(f"c({t}) asymmetry {asym:.3e}")
        c = 0.5 * (c + c.T)
        eigs = np.linalg.eigvalsh(c)
        scale = 1.0 + float(np.max(np.abs(eigs)))
        if eigs[0] < -_PSD_REL_TOL * scale:
            raise NotPSD(f"c({t}) has eigenvalue {eigs[0]:.3e}", t=float(t))
        samples.append((float(t), directional_lambda(c, p0, tol)))
    lam = min(v for _, v in samples)
    return ParabolicityCertificate(p0=p0, lam=lam, t_samples=tuple(samples),
                                   passed=lam > 0.0)
