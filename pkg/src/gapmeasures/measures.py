"""Gaussian, adjusted Gaussian and GAP measures: sampling and closed forms.

Samples are drawn in the eigenbasis of the covariance and rotated into the
ambient coordinates.  Every sampler has a batch form ``*_batch(target, seed,
n, start=0)`` whose row ``j`` is the sample for sub-stream
``(seed, start + j)``; the single-sample forms take a
:class:`~gapmeasures.streams.RandomStream` and agree with the batch rows
bit for bit.

Uniform slots per sub-stream, shared by all samplers::

    slot 0          mixture component (GAP sampler only)
    slot 1 + 3m     exponential for coordinate m
    slot 2 + 3m     second exponential, size-biased coordinate only
    slot 3 + 3m     phase of coordinate m
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (DimMismatch, NonzeroMean, OffSupport, TailBoundTooLoose,
                     ZeroVector)
from .spectral import DensityOperator, SpectralDecomposition
from .streams import RandomStream, uniforms

OFF_SUPPORT_TOL = 1e-8
ZERO_NORM = 1e-300
TRUNCATION_CAP = 10**6
TWO_PI = 2.0 * math.pi


def _nslots(dim):
    return 1 + 3 * dim


@dataclass(frozen=True, eq=False)
class GaussianMeasureSpec:
    """Mean vector and covariance spectral data of a Gaussian measure."""

    mean: np.ndarray
    covariance: SpectralDecomposition

    def __post_init__(self):
        if self.mean.shape != (self.covariance.dim,):
            raise DimMismatch(f"mean has shape {self.mean.shape}, covariance dim {self.covariance.dim}")
        if np.any(self.covariance.eigenvalues < 0):
            raise ValueError("covariance eigenvalues must be nonnegative")

    @classmethod
    def centered(cls, covariance, mean=None):
        """Spec with covariance ``covariance`` (DensityOperator or decomposition)."""
        if isinstance(covariance, DensityOperator):
            covariance = covariance.spectral
        if mean is None:
            mean = np.zeros(covariance.dim, dtype=complex)
        return cls(np.asarray(mean, dtype=complex), covariance)

    @property
    def dim(self):
        return self.covariance.dim

    @property
    def trace(self):
        return float(self.covariance.eigenvalues.sum())


def as_density(target):
    """Density operator for a GAP construction.

    GAP measures are built from mean-zero Gaussians only; a spec with a
    nonzero mean raises :class:`NonzeroMean`.  A spec's covariance is
    rescaled to unit trace.
    """
    if isinstance(target, DensityOperator):
        return target
    if np.any(target.mean != 0):
        raise NonzeroMean("GAP measures are defined from mean-zero Gaussian measures")
    p = target.covariance.eigenvalues
    return DensityOperator(SpectralDecomposition(p / p.sum(), target.covariance.eigenvectors))


def _as_spec(target):
    if isinstance(target, DensityOperator):
        return GaussianMeasureSpec.centered(target)
    return target


def _complex_from(variance, exp_a, phase, exp_b=None):
    # |z|^2 = variance * Exp(1) (or Gamma(2) with exp_b), phase uniform
    r2 = -np.log1p(-exp_a)
    if exp_b is not None:
        r2 = r2 - np.log1p(-exp_b)
    r = np.sqrt(variance * r2)
    theta = TWO_PI * phase
    return r * np.cos(theta) + 1j * (r * np.sin(theta))


def sample_complex_gaussian(stream: RandomStream, variance: float) -> complex:
    """One complex Gaussian of the given variance, mean zero.

    Real and imaginary parts are independent normals of variance
    ``variance / 2`` (Box-Muller in polar form).  Variance 0 gives exactly 0.
    """
    if not (variance >= 0 and math.isfinite(variance)):
        raise ValueError(f"variance must be finite and nonnegative, got {variance}")
    u = stream.uniforms(4)
    return complex(_complex_from(variance, u[1], u[3]))


def _assemble(z, vectors):
    # fixed-order accumulation keeps rows independent of batch shape
    out = np.zeros((z.shape[0], vectors.shape[0]), dtype=complex)
    for m in range(vectors.shape[1]):
        out += z[:, m, None] * vectors[None, :, m]
    return out


def _row_norms(x):
    s = np.zeros(x.shape[0])
    for j in range(x.shape[1]):
        s += x[:, j].real ** 2 + x[:, j].imag ** 2
    return np.sqrt(s)


def _gaussian_coordinates(p, u):
    z = np.empty((u.shape[0], p.size), dtype=complex)
    for m in range(p.size):
        z[:, m] = _complex_from(p[m], u[:, 1 + 3 * m], u[:, 3 + 3 * m])
    return z


def sample_G_batch(target, seed, n, start=0):
    """``n`` draws from the Gaussian measure, as rows of an ``(n, dim)`` array.

    ``target`` is a :class:`GaussianMeasureSpec` or a density operator (taken
    as a mean-zero covariance).
    """
    spec = _as_spec(target)
    p = spec.covariance.eigenvalues
    u = uniforms(seed, np.arange(start, start + n), _nslots(p.size))
    psi = _assemble(_gaussian_coordinates(p, u), spec.covariance.eigenvectors)
    return psi + spec.mean[None, :]


def sample_G(target, stream: RandomStream):
    return sample_G_batch(target, stream.seed, 1, stream.index)[0]


def project(psi):
    """``psi / ||psi||``; raises :class:`ZeroVector` at the origin."""
    psi = np.asarray(psi, dtype=complex)
    norm = float(_row_norms(psi[None, :])[0])
    if norm < ZERO_NORM:
        raise ZeroVector("cannot project the zero vector onto the unit sphere")
    return psi / norm


def sample_GAP_mixture_batch(rho, seed, n, start=0):
    """``n`` exact draws from GAP(rho).

    The adjusted Gaussian is the mixture over ``k`` (weight ``p_k``) of the
    Gaussian with coordinate ``k`` replaced by its ``|z|^2``-biased version,
    whose squared radius is Gamma(2, p_k).  Each draw picks ``k``, builds the
    coordinates, rotates to the ambient basis and projects.
    """
    rho = as_density(rho)
    p = rho.eigenvalues
    d = p.size
    u = uniforms(seed, np.arange(start, start + n), _nslots(d))
    cdf = np.cumsum(p)
    last = int(np.flatnonzero(p > 0)[-1])
    k = np.minimum(np.searchsorted(cdf, u[:, 0] * cdf[-1], side="right"), last)
    z = np.empty((n, d), dtype=complex)
    for m in range(d):
        second = np.where(k == m, u[:, 2 + 3 * m], 0.0)
        z[:, m] = _complex_from(p[m], u[:, 1 + 3 * m], u[:, 3 + 3 * m], second)
    psi = _assemble(z, rho.eigenvectors)
    return psi / _row_norms(psi)[:, None]


def sample_GAP_mixture(rho, stream: RandomStream):
    return sample_GAP_mixture_batch(rho, stream.seed, 1, stream.index)[0]


@dataclass(frozen=True, eq=False)
class WeightedSample:
    vector: np.ndarray
    weight: float


def sample_GAP_reweight_batch(rho, seed, n, start=0):
    """Gaussian draws projected to the sphere, weighted by ``||psi||^2``.

    Returns ``(vectors, weights)``.  Weighted averages, normalized by the
    weight sum, estimate GAP(rho) expectations.  A zero draw (probability 0)
    gets weight 0 and an arbitrary unit vector.
    """
    psi = sample_G_batch(as_density(rho), seed, n, start)
    norms = _row_norms(psi)
    zero = norms < ZERO_NORM
    safe = np.where(zero, 1.0, norms)
    vectors = psi / safe[:, None]
    if zero.any():
        vectors[zero] = 0.0
        vectors[zero, 0] = 1.0
    return vectors, np.where(zero, 0.0, norms ** 2)


def sample_GAP_reweight(rho, stream: RandomStream, batch_size: int):
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    vectors, weights = sample_GAP_reweight_batch(rho, stream.seed, batch_size, stream.index)
    return [WeightedSample(v, float(w)) for v, w in zip(vectors, weights)]


def _support_coordinates(support, psi):
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (support.dim,):
        raise DimMismatch(f"vector has shape {psi.shape}, expected ({support.dim},)")
    c = support.basis.conj().T @ psi
    residual = np.linalg.norm(psi - support.basis @ c)
    if residual > OFF_SUPPORT_TOL:
        raise OffSupport(f"vector has component {residual:.3e} outside the support")
    return c


def log_g_density(support, psi):
    """Log-density of G(rho) relative to Lebesgue measure on the support."""
    c = _support_coordinates(support, psi)
    p = support.positive_eigenvalues
    quad = float(np.sum((c.real ** 2 + c.imag ** 2) / p))
    return -quad - support.k * math.log(math.pi) - float(np.sum(np.log(p)))


def g_density(support, psi):
    return math.exp(log_g_density(support, psi))


def ga_density(support, psi):
    """Density of the adjusted Gaussian, ``||psi||^2`` times the Gaussian density."""
    psi = np.asarray(psi, dtype=complex)
    norm2 = float(np.vdot(psi, psi).real)
    dens = g_density(support, psi)
    return norm2 * dens


def char_fn_gaussian(spec: GaussianMeasureSpec, psi):
    """Characteristic function ``E exp(i Re<phi, psi>)`` of a Gaussian measure.

    Closed form ``exp(i Re<m, psi> - <psi, C psi> / 4)``: for ``phi`` with
    covariance ``C``, ``<phi, psi>`` is a complex Gaussian of variance
    ``<psi, C psi>`` whose real part has half that variance.
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (spec.dim,):
        raise DimMismatch(f"vector has shape {psi.shape}, expected ({spec.dim},)")
    c = spec.covariance.eigenvectors.conj().T @ psi
    quad = float(np.sum(spec.covariance.eigenvalues * (c.real ** 2 + c.imag ** 2)))
    shift = float(np.vdot(spec.mean, psi).real)
    return complex(np.exp(1j * shift - 0.25 * quad))


@dataclass(frozen=True)
class EigenvalueSequence:
    """Trace-class spectrum ``p_1, p_2, ...`` with a certified tail bound.

    ``tail_bound(N)`` must bound ``sum_{n > N} p_n`` from above and be
    nonincreasing in ``N``.
    """

    generator: Callable[[int], float]
    tail_bound: Callable[[int], float]
    total: float


def geometric_sequence(ratio=0.5):
    """``p_n = (1 - r) r^(n-1)``; for r = 1/2 this is ``2^-n``."""
    return EigenvalueSequence(lambda n: (1.0 - ratio) * ratio ** (n - 1),
                              lambda n: ratio ** n, 1.0)


def thermal_oscillator_sequence(beta):
    """``p_n`` proportional to ``exp(-beta (n-1))``, n >= 1, unit total."""
    q = math.exp(-beta)
    return EigenvalueSequence(lambda n: (1.0 - q) * q ** (n - 1), lambda n: q ** n, 1.0)


@dataclass(frozen=True, eq=False)
class Truncation:
    spec: GaussianMeasureSpec
    tail: float
    labels: Optional[list] = field(default=None)

    @property
    def n(self):
        return self.spec.dim


def truncate(seq: EigenvalueSequence, epsilon: float, basis_labeling=None, cap=TRUNCATION_CAP):
    """Keep the first ``N`` eigenvalues, ``N`` minimal with ``tail_bound(N) <= epsilon``.

    Returns a :class:`Truncation` holding the diagonal mean-zero spec of
    dimension ``N`` (sorted descending, basis vectors permuted to match), the
    achieved tail bound, and ``basis_labeling(n)`` for n = 1..N if given.
    """
    if not 0 < epsilon < seq.total:
        raise ValueError("epsilon must lie in (0, total)")
    if seq.tail_bound(cap) > epsilon:
        raise TailBoundTooLoose(f"tail bound exceeds {epsilon} at the cap N = {cap}")
    lo, hi = 1, cap
    if seq.tail_bound(1) <= epsilon:
        hi = 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if seq.tail_bound(mid) <= epsilon:
            hi = mid
        else:
            lo = mid
    n = hi
    p = np.array([seq.generator(i) for i in range(1, n + 1)], dtype=float)
    if np.any(p < 0):
        raise ValueError("eigenvalue sequence produced a negative value")
    order = np.argsort(-p, kind="stable")
    cov = SpectralDecomposition(p[order], np.eye(n, dtype=complex)[:, order])
    labels = [basis_labeling(i) for i in range(1, n + 1)] if basis_labeling else None
    return Truncation(GaussianMeasureSpec.centered(cov), float(seq.tail_bound(n)), labels)
