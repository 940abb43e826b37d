"""Centered Gaussian measures under the exp(-<xi, Q xi>) transform convention.

A measure with parameter matrix Q has characteristic function
exp(-<xi, Q xi>), hence covariance 2Q, and (for invertible Q) Lebesgue
density (4 pi)^{-d/2} det(Q)^{-1/2} exp(-<Q^{-1} x, x>/4).  Q = 0 is the
Dirac mass at the origin.  Convolution adds parameters.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from . import rng
from .errors import DimensionMismatch, NotPSD, NotSymmetric, SingularCovariance

SYMMETRY_TOL = 1e-12
PSD_REL_TOL = 1e-10
# Positive definiteness threshold used by the density (absolute).
PD_MIN_EIG = 1e-10

_SAMPLE_CHUNK = 4096


@dataclass(frozen=True)
class GaussianMeasure:
    """Centered Gaussian with parameter ``q``; the covariance matrix is 2q."""

    dim: int
    q: np.ndarray


def make_gaussian(q) -> GaussianMeasure:
    """Validate ``q`` (symmetric, non-negative definite) and wrap it.

    Eigenvalues down to -1e-10*(1 + |q|) are accepted as roundoff; they are
    clamped to zero wherever an operation needs a true PSD factor.  The zero
    matrix is allowed and represents the Dirac mass.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {q.shape}")
    asym = float(np.max(np.abs(q - q.T))) if q.size else 0.0
    if asym > SYMMETRY_TOL:
        raise NotSymmetric(f"asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:.0e}")
    eigs = np.linalg.eigvalsh(q)
    scale = 1.0 + (float(np.max(np.abs(eigs))) if eigs.size else 0.0)
    if eigs.size and eigs[0] < -PSD_REL_TOL * scale:
        raise NotPSD(f"minimum eigenvalue {eigs[0]:.3e} below -{PSD_REL_TOL:.0e}*(1+|q|)")
    return GaussianMeasure(dim=q.shape[0], q=q)


def density_at(mu: GaussianMeasure, x) -> float:
    """Density of ``mu`` at ``x``; requires a positive definite parameter."""
    x = np.asarray(x, dtype=float)
    eigs, vecs = np.linalg.eigh(mu.q)
    if eigs[0] <= PD_MIN_EIG:
        raise SingularCovariance(
            f"minimum eigenvalue {eigs[0]:.3e} <= {PD_MIN_EIG:.0e}; density undefined"
        )
    y = vecs.T @ x
    quad = float(np.sum(y * y / eigs))
    log_det = float(np.sum(np.log(eigs)))
    return float(np.exp(-0.25 * quad - 0.5 * log_det - 0.5 * mu.dim * np.log(4.0 * np.pi)))


def char_fn(mu: GaussianMeasure, xi) -> float:
    """Characteristic function exp(-<xi, Q xi>), real and in (0, 1]."""
    xi = np.asarray(xi, dtype=float)
    return float(np.exp(-xi @ mu.q @ xi))


def convolve(mu1: GaussianMeasure, mu2: GaussianMeasure) -> GaussianMeasure:
    """Convolution of two measures: parameters add."""
    if mu1.dim != mu2.dim:
        raise DimensionMismatch(f"dimensions {mu1.dim} and {mu2.dim} differ")
    return make_gaussian(mu1.q + mu2.q)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Symmetric square root with negative roundoff eigenvalues clamped."""
    eigs, vecs = np.linalg.eigh(m)
    return (vecs * np.sqrt(np.clip(eigs, 0.0, None))) @ vecs.T


def sample(mu: GaussianMeasure, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` i.i.d. points with mean 0 and covariance 2Q.

    Degenerate parameters are supported: samples stay in range(Q).  Output is
    a deterministic function of ``seed``; samples are produced in fixed-size
    chunks, one counter-based stream per chunk, so the result does not depend
    on how chunks are scheduled across workers.
    """
    if n < 1:
        raise ValueError("need n >= 1 samples")
    root = _psd_sqrt(2.0 * mu.q)
    out = np.empty((n, mu.dim))
    for chunk, start in enumerate(range(0, n, _SAMPLE_CHUNK)):
        stop = min(start + _SAMPLE_CHUNK, n)
        gen = rng.stream(seed, rng.GAUSS_SAMPLES, chunk)
        out[start:stop] = gen.standard_normal((stop - start, mu.dim)) @ root
    return out


def cell_masses_1d(c_param: float, centers: np.ndarray, h: float) -> np.ndarray:
    """Measure of the cells ``[center - h/2, center + h/2]`` under a
    one-dimensional measure with parameter ``c_param`` (variance ``2 c_param``).

    ``c_param = 0`` gives the Dirac mass: weight 1 for the cell containing the
    origin.  Used for kernel quadrature where sampling the density would lose
    mass once the standard deviation falls below the cell size.
    """
    centers = np.asarray(centers, dtype=float)
    if c_param < 0.0:
        raise SingularCovariance(f"negative variance parameter {c_param:.3e}")
    if c_param == 0.0:
        return (np.abs(centers) <= 0.5 * h).astype(float)
    s = 2.0 * np.sqrt(c_param)  # erf scale: density is exp(-y^2/(4 c))/sqrt(4 pi c)
    return 0.5 * (erf((centers + 0.5 * h) / s) - erf((centers - 0.5 * h) / s))
