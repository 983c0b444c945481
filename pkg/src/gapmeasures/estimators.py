"""Streaming, mergeable empirical estimators.

An :class:`Accumulator` keeps weighted sums over a batch of vectors:
the weight total, the first moment and second moment taken about a fixed
shift (the first vector seen), and the uncentered second moment.  Unweighted
samples carry weight 1; weighted averages are self-normalized (divided by the
weight sum).  All estimates use 1/n normalization.
"""

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimMismatch, EmptyBatch, NotOnSphere
from .fileio import SampleBatch, matrix_to_json
from .measures import WeightedSample
from .spectral import trace_distance

SPHERE_TOL = 1e-8


@dataclass
class Accumulator:
    dim: int
    n: int = 0
    wsum: float = 0.0
    w2sum: float = 0.0
    shift: Optional[np.ndarray] = None
    shifted_sum: Optional[np.ndarray] = None
    shifted_outer: Optional[np.ndarray] = None
    outer: Optional[np.ndarray] = None
    norm_min: float = np.inf
    norm_max: float = -np.inf

    def __post_init__(self):
        d = self.dim
        if self.shifted_sum is None:
            self.shifted_sum = np.zeros(d, dtype=complex)
            self.shifted_outer = np.zeros((d, d), dtype=complex)
            self.outer = np.zeros((d, d), dtype=complex)

    def add_batch(self, vectors, weights=None):
        """Accumulate rows of ``vectors`` in place; returns ``self``."""
        x = np.asarray(vectors, dtype=complex)
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise DimMismatch(f"expected rows of length {self.dim}, got shape {x.shape}")
        if x.shape[0] == 0:
            return self
        w = np.ones(x.shape[0]) if weights is None else np.asarray(weights, dtype=float)
        if w.shape != (x.shape[0],):
            raise DimMismatch("one weight per sample required")
        if self.shift is None:
            self.shift = x[0].copy()
        y = x - self.shift
        wy = y * w[:, None]
        self.shifted_sum += wy.sum(axis=0)
        self.shifted_outer += wy.T @ y.conj()
        self.outer += (x * w[:, None]).T @ x.conj()
        self.n += x.shape[0]
        self.wsum += float(w.sum())
        self.w2sum += float(np.dot(w, w))
        norms = np.sqrt(np.sum(x.real ** 2 + x.imag ** 2, axis=1))
        self.norm_min = min(self.norm_min, float(norms.min()))
        self.norm_max = max(self.norm_max, float(norms.max()))
        return self

    def merge(self, other):
        """Return a new accumulator equivalent to accumulating both batches."""
        if other.dim != self.dim:
            raise DimMismatch(f"cannot merge dims {self.dim} and {other.dim}")
        if self.n == 0:
            return other.copy()
        if other.n == 0:
            return self.copy()
        # re-express other's shifted sums about self.shift
        delta = other.shift - self.shift
        a = other.shifted_sum
        moved_outer = (other.shifted_outer + np.outer(a, delta.conj()) + np.outer(delta, a.conj())
                       + other.wsum * np.outer(delta, delta.conj()))
        return Accumulator(
            self.dim, self.n + other.n, self.wsum + other.wsum, self.w2sum + other.w2sum,
            self.shift.copy(), self.shifted_sum + a + other.wsum * delta,
            self.shifted_outer + moved_outer, self.outer + other.outer,
            min(self.norm_min, other.norm_min), max(self.norm_max, other.norm_max))

    def copy(self):
        return Accumulator(self.dim, self.n, self.wsum, self.w2sum,
                           None if self.shift is None else self.shift.copy(),
                           self.shifted_sum.copy(), self.shifted_outer.copy(), self.outer.copy(),
                           self.norm_min, self.norm_max)


def accumulate(acc, sample):
    """Add one state vector or :class:`WeightedSample`; returns ``acc``."""
    if isinstance(sample, WeightedSample):
        return acc.add_batch(np.asarray(sample.vector)[None, :], [sample.weight])
    return acc.add_batch(np.asarray(sample)[None, :])


def accumulate_batch(batch, acc=None):
    if isinstance(batch, SampleBatch):
        vectors, weights = batch.vectors, batch.weights
    else:
        vectors, weights = np.asarray(batch), None
    acc = Accumulator(vectors.shape[1]) if acc is None else acc
    return acc.add_batch(vectors, weights)


def _require(acc, n_min=1):
    if acc.n < n_min or acc.wsum <= 0:
        raise EmptyBatch(f"need at least {n_min} sample(s) with positive total weight, have {acc.n}")


def _hermitize(m):
    return 0.5 * (m + m.conj().T)


def empirical_mean(acc):
    _require(acc)
    return acc.shift + acc.shifted_sum / acc.wsum


def empirical_covariance(acc):
    _require(acc, 2)
    dev = acc.shifted_sum / acc.wsum
    cov = acc.shifted_outer / acc.wsum - np.outer(dev, dev.conj())
    return _hermitize(cov)


def second_moment(acc):
    """``E |psi><psi|``; its trace is the mean of ``||psi||^2``."""
    _require(acc)
    return _hermitize(acc.outer / acc.wsum)


def empirical_density_operator(acc):
    """Density operator of a batch of unit vectors.

    Raises :class:`NotOnSphere` if any accumulated vector has norm off 1 by
    more than 1e-8.
    """
    _require(acc)
    if max(abs(acc.norm_min - 1.0), abs(acc.norm_max - 1.0)) > SPHERE_TOL:
        raise NotOnSphere(f"sample norms span [{acc.norm_min:.12g}, {acc.norm_max:.12g}]")
    return second_moment(acc)


def empirical_char_fn(batch, psi, weights=None):
    """Average of ``exp(i Re<phi_j, psi>)`` over the batch rows ``phi_j``."""
    if isinstance(batch, SampleBatch):
        batch, weights = batch.vectors, batch.weights
    x = np.asarray(batch, dtype=complex)
    if x.shape[0] == 0:
        raise EmptyBatch("empty batch")
    psi = np.asarray(psi, dtype=complex)
    if x.shape[1] != psi.size:
        raise DimMismatch(f"batch dim {x.shape[1]} vs vector dim {psi.size}")
    phase = np.exp(1j * (x.conj() @ psi).real)
    if weights is None:
        return complex(phase.mean())
    w = np.asarray(weights, dtype=float)
    return complex(np.dot(w, phase) / w.sum())


def mean_and_se(values, weights=None):
    """Plug-in mean and standard error of a scalar functional.

    Weighted input uses the self-normalized ratio estimator and its delta
    method standard error.
    """
    f = np.asarray(values)
    if f.size == 0:
        raise EmptyBatch("empty batch")
    if weights is None:
        est = f.mean()
        return est, float(np.sqrt(np.mean(np.abs(f - est) ** 2) / f.size))
    w = np.asarray(weights, dtype=float)
    # same summation order in numerator and denominator: constants come out exact
    est = np.sum(w * f) / np.sum(w)
    return est, float(np.sqrt(np.sum(w ** 2 * np.abs(f - est) ** 2)) / w.sum())


@dataclass(eq=False)
class EstimatorReport:
    n: int
    mean_hat: np.ndarray
    cov_hat: Optional[np.ndarray]
    rho_hat: np.ndarray
    se_scale: float
    mean_norm2: float
    mean_norm2_se: float
    trace_distance: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def to_json(self):
        out = {
            "n": self.n,
            "dim": int(self.mean_hat.size),
            "mean_hat": [[float(z.real), float(z.imag)] for z in self.mean_hat],
            "mean_norm": float(np.linalg.norm(self.mean_hat)),
            "cov_hat": None if self.cov_hat is None else matrix_to_json(self.cov_hat),
            "rho_hat": matrix_to_json(self.rho_hat),
            "se_scale": self.se_scale,
            "mean_norm2": self.mean_norm2,
            "mean_norm2_se": self.mean_norm2_se,
        }
        if self.trace_distance is not None:
            out["trace_distance"] = self.trace_distance
        out.update(self.extra)
        return out

    def dumps(self):
        return json.dumps(self.to_json(), indent=2) + "\n"


def estimate(batch, rho_ref=None, on_sphere=None):
    """Full :class:`EstimatorReport` for a batch.

    ``rho_hat`` is the density operator (sphere-checked) for GAP batches and
    the uncentered second moment otherwise.  ``on_sphere`` defaults to
    ``True`` unless the batch is a Gaussian (``"G"``) batch.
    """
    if not isinstance(batch, SampleBatch):
        batch = SampleBatch(np.asarray(batch, dtype=complex), "G", None)
    if on_sphere is None:
        on_sphere = batch.measure != "G"
    acc = accumulate_batch(batch)
    rho_hat = empirical_density_operator(acc) if on_sphere else second_moment(acc)
    cov = empirical_covariance(acc) if acc.n >= 2 else None
    norm2 = np.sum(batch.vectors.real ** 2 + batch.vectors.imag ** 2, axis=1)
    m2, m2_se = mean_and_se(norm2, batch.weights)
    report = EstimatorReport(acc.n, empirical_mean(acc), cov, rho_hat, 1.0 / np.sqrt(acc.n),
                             float(m2), m2_se)
    if rho_ref is not None:
        ref = getattr(rho_ref, "matrix", rho_ref)
        report.trace_distance = trace_distance(rho_hat, ref)
    return report

