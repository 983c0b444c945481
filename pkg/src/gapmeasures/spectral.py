"""Finite-dimensional Hermitian linear algebra.

Matrices and vectors are plain complex numpy arrays.  The structured
objects are :class:`SpectralDecomposition`, :class:`DensityOperator` and
:class:`SupportRestriction`; all are immutable once built.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (AsymmetryExceeded, ConvergenceFailure, EmptySupport,
                     NonFinite, NotNormalized, NotPositive)

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
CLAMP_TOL = 1e-10
TRACE_TOL = 1e-10
DEFAULT_CUTOFF = 1e-12


def as_matrix(m):
    m = np.array(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFinite("matrix has NaN or infinite entries")
    return m


def validate_hermitian(m, tol=1e-9):
    """Return ``(M + M*)/2`` after checking ``M`` is Hermitian within ``tol``.

    Raises
    ------
    AsymmetryExceeded
        if ``max |M_ij - conj(M_ji)| > tol``.
    NonFinite
        if any entry is NaN or infinite.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    m = as_matrix(m)
    dev = float(np.max(np.abs(m - m.conj().T)))
    if dev > tol:
        raise AsymmetryExceeded(dev)
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues (descending) and orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _fix_phases(v):
    # largest-magnitude component of each column made real positive
    rows = np.argmax(np.abs(v), axis=0)
    pivots = v[rows, np.arange(v.shape[1])]
    cols = np.arange(v.shape[1])
    v = v * (np.abs(pivots) / pivots)
    v[rows, cols] = v[rows, cols].real  # drop rounding residue in the pivot
    return v


def _jacobi(a, tol, max_sweeps):
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    target = tol * scale
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        if np.linalg.norm(a[offdiag]) <= target:
            return np.real(np.diag(a)).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                # R = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                r = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = a[:, [p, q]] @ r
                a[:, p], a[:, q] = cols[:, 0], cols[:, 1]
                rows = r.conj().T @ a[[p, q], :]
                a[p, :], a[q, :] = rows[0], rows[1]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vc = v[:, [p, q]] @ r
                v[:, p], v[:, q] = vc[:, 0], vc[:, 1]
    raise ConvergenceFailure(
        f"Jacobi iteration did not converge within {max_sweeps} sweeps")


def eigh(h, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Spectral decomposition of a Hermitian matrix by cyclic complex Jacobi.

    Converges when the off-diagonal Frobenius norm drops below
    ``tol * ||h||_F``.  Eigenvalues are returned in descending order and each
    eigenvector's largest-magnitude component is made real positive.
    """
    a = validate_hermitian(h, tol=np.inf)
    w, v = _jacobi(a, tol, max_sweeps)
    order = np.argsort(-w, kind="stable")
    return SpectralDecomposition(w[order], _fix_phases(v[:, order]))


def _clamp(p):
    worst = p.min()
    if worst < -CLAMP_TOL:
        raise NotPositive(float(worst))
    p = np.where(p < 0.0, 0.0, p)
    return p / p.sum()


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Positive unit-trace operator held through its spectral decomposition."""

    spectral: SpectralDecomposition

    def __post_init__(self):
        p = self.spectral.eigenvalues
        if p.min() < 0.0:
            raise NotPositive(float(p.min()))
        if abs(p.sum() - 1.0) > TRACE_TOL:
            raise NotNormalized(f"trace is {p.sum():.15g}, expected 1")

    @classmethod
    def from_matrix(cls, m, tol=1e-9):
        """Validate, diagonalize and clamp a density matrix.

        Negative eigenvalues of magnitude at most 1e-10 are set to zero and the
        trace renormalized; larger ones raise :class:`NotPositive`.
        """
        dec = eigh(validate_hermitian(m, tol))
        total = dec.eigenvalues.sum()
        if abs(total - 1.0) > TRACE_TOL:
            raise NotNormalized(f"trace is {total:.15g}, expected 1")
        return cls(SpectralDecomposition(_clamp(dec.eigenvalues), dec.eigenvectors))

    @classmethod
    def from_spectrum(cls, probabilities, eigenvectors=None):
        """Build from eigenvalues and (optionally) eigenvector columns.

        The standard basis is used when ``eigenvectors`` is omitted.  Input is
        reordered to descending eigenvalues.
        """
        p = np.asarray(probabilities, dtype=float)
        if not np.all(np.isfinite(p)):
            raise NonFinite("probabilities have NaN or infinite entries")
        v = np.eye(p.size, dtype=complex) if eigenvectors is None else np.array(eigenvectors, dtype=complex)
        if abs(p.sum() - 1.0) > TRACE_TOL:
            raise NotNormalized(f"trace is {p.sum():.15g}, expected 1")
        order = np.argsort(-p, kind="stable")
        return cls(SpectralDecomposition(_clamp(p[order]), v[:, order]))

    @property
    def dim(self):
        return self.spectral.dim

    @property
    def eigenvalues(self):
        return self.spectral.eigenvalues

    @property
    def eigenvectors(self):
        return self.spectral.eigenvectors

    @cached_property
    def matrix(self):
        m = self.spectral.reconstruct()
        return 0.5 * (m + m.conj().T)


def maximally_mixed(dim):
    return DensityOperator.from_spectrum(np.full(dim, 1.0 / dim))


def pure_state(phi):
    phi = np.asarray(phi, dtype=complex)
    phi = phi / np.linalg.norm(phi)
    basis = np.linalg.qr(np.column_stack([phi, np.eye(phi.size)[:, :-1]]))[0]
    basis[:, 0] = phi
    p = np.zeros(phi.size)
    p[0] = 1.0
    return DensityOperator.from_spectrum(p, basis)


def thermal_state(h, beta):
    """Canonical state ``exp(-beta H) / tr exp(-beta H)``.

    Evaluated on the spectrum of ``H`` with the exponent shifted by its
    maximum, so large ``beta`` cannot overflow.
    """
    beta = float(beta)
    if not math.isfinite(beta) or beta < 0:
        raise ValueError(f"beta must be finite and nonnegative, got {beta}")
    dec = eigh(h)
    energies = dec.eigenvalues[::-1]  # ascending: largest weight first
    logw = -beta * (energies - energies[0])
    w = np.exp(logw)
    return DensityOperator(SpectralDecomposition(w / w.sum(), dec.eigenvectors[:, ::-1].copy()))


def thermal_oscillator(beta, dim):
    """``p_n`` proportional to ``exp(-beta n)``, n = 0..dim-1, renormalized."""
    logw = -float(beta) * np.arange(dim)
    w = np.exp(logw)
    return DensityOperator.from_spectrum(w / w.sum())


def trace_norm(m):
    """Sum of singular values of ``m``.

    Hermitian input is summed over absolute eigenvalues directly; otherwise
    singular values come from the eigenvalues of ``M*M``.
    """
    m = as_matrix(m)
    if np.array_equal(m, m.conj().T):
        return float(np.sum(np.abs(eigh(m).eigenvalues)))
    s2 = eigh(m.conj().T @ m).eigenvalues
    return float(np.sum(np.sqrt(np.clip(s2, 0.0, None))))


def trace_distance(a, b):
    """``||a - b||_1`` for matrices or density operators."""
    a = a.matrix if isinstance(a, DensityOperator) else a
    b = b.matrix if isinstance(b, DensityOperator) else b
    d = np.asarray(a) - np.asarray(b)
    return trace_norm(0.5 * (d + d.conj().T))


@dataclass(frozen=True, eq=False)
class SupportRestriction:
    """Eigenpairs of a density operator with eigenvalue above a cutoff."""

    basis: np.ndarray
    positive_eigenvalues: np.ndarray
    cutoff: float

    @property
    def k(self):
        return self.positive_eigenvalues.size

    @property
    def dim(self):
        return self.basis.shape[0]


def support_restriction(rho, cutoff=DEFAULT_CUTOFF):
    if not 0 <= cutoff < 1:
        raise ValueError("cutoff must lie in [0, 1)")
    keep = rho.eigenvalues > cutoff
    if not keep.any():
        raise EmptySupport(f"no eigenvalue exceeds cutoff {cutoff}")
    return SupportRestriction(rho.eigenvectors[:, keep], rho.eigenvalues[keep], cutoff)
