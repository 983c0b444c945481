"""Desk-scale experiments on the continuity of rho -> GAP(rho).

Weak convergence is probed on a finite panel of bounded continuous test
functions; the characteristic-function and tail-compactness quantities are
evaluated in closed form.
"""

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .estimators import mean_and_se
from .measures import sample_G_batch, sample_GAP_mixture_batch
from .spectral import DensityOperator, maximally_mixed, trace_norm
from .streams import derive_seed

DEFAULT_PANEL_SIZE = 12

# stream tags, so reference and legs never share sub-streams
_TAG_PANEL = 1
_TAG_REFERENCE = 2
_TAG_LEG = 3


@dataclass(frozen=True, eq=False)
class TestFunctionPanel:
    """Bounded test functions ``f_j`` on the state space.

    ``const``: 1; ``cos``: ``cos(Re<chi_j, psi>)``; ``gauss``:
    ``exp(-||psi - chi_j||^2)``.
    """

    __test__ = False  # not a pytest class

    kinds: tuple
    anchors: np.ndarray

    @property
    def m(self):
        return len(self.kinds)

    @property
    def dim(self):
        return self.anchors.shape[1]

    def evaluate(self, vectors):
        """Values as an ``(n, m)`` array for the rows of ``vectors``."""
        x = np.atleast_2d(np.asarray(vectors, dtype=complex))
        out = np.empty((x.shape[0], self.m))
        for j, (kind, chi) in enumerate(zip(self.kinds, self.anchors)):
            if kind == "const":
                out[:, j] = 1.0
            elif kind == "cos":
                out[:, j] = np.cos((x @ chi.conj()).real)
            else:
                diff = x - chi
                out[:, j] = np.exp(-np.sum(diff.real ** 2 + diff.imag ** 2, axis=1))
        return out


def make_panel(dim, seed, m=DEFAULT_PANEL_SIZE):
    """Deterministic panel: the constant function, then alternating cos/gauss.

    Anchors are draws from G(I/dim) on a stream derived from ``seed``.
    """
    if m < 3:
        raise ValueError("panel needs at least 3 functions")
    kinds = ("const",) + tuple("cos" if j % 2 else "gauss" for j in range(1, m))
    anchors = sample_G_batch(maximally_mixed(dim), derive_seed(seed, _TAG_PANEL), m)
    anchors[0] = 0.0
    return TestFunctionPanel(kinds, anchors)


def panel_expectations(batch, panel, weights=None):
    """Per-function ``(estimate, se)`` arrays, self-normalized if weighted."""
    vectors = getattr(batch, "vectors", batch)
    if weights is None:
        weights = getattr(batch, "weights", None)
    values = panel.evaluate(vectors)
    est = np.empty(panel.m)
    se = np.empty(panel.m)
    for j in range(panel.m):
        est[j], se[j] = mean_and_se(values[:, j], weights)
    return est, se


def compare_panels(batch_a, batch_b, panel):
    """Absolute discrepancies and combined standard errors of two batches."""
    ea, sa = panel_expectations(batch_a, panel)
    eb, sb = panel_expectations(batch_b, panel)
    return np.abs(ea - eb), np.hypot(sa, sb)


@dataclass(frozen=True, eq=False)
class ConvergenceRecord:
    n: int
    trace_distance: float
    discrepancies: np.ndarray
    standard_errors: np.ndarray


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    kinds: tuple
    records: tuple

    def record(self, n):
        for rec in self.records:
            if rec.n == n:
                return rec
        raise KeyError(n)

    def to_json(self):
        return [{"n": r.n, "trace_distance": r.trace_distance,
                 "panel": [{"kind": k, "estimate": float(d), "se": float(s)}
                           for k, d, s in zip(self.kinds, r.discrepancies, r.standard_errors)]}
                for r in self.records]

    def dumps(self):
        return json.dumps(self.to_json(), indent=2) + "\n"

    def to_csv(self):
        lines = ["n,trace_distance,function,kind,discrepancy,se"]
        for r in self.records:
            for j, (k, d, s) in enumerate(zip(self.kinds, r.discrepancies, r.standard_errors)):
                lines.append(f"{r.n},{r.trace_distance!r},{j},{k},{float(d)!r},{float(s)!r}")
        return "\n".join(lines) + "\n"


def mixture_path(rho, sigma, n):
    """The matrix ``(1 - 1/n) rho + (1/n) sigma``."""
    t = 1.0 / n
    return (1.0 - t) * rho.matrix + t * sigma.matrix


def continuity_experiment(rho, sigma, ns, N, seed, panel=None):
    """Panel discrepancies between GAP(rho_n) and GAP(rho) along the mixture path.

    The reference batch and each leg use independent streams derived from
    ``seed``.  Trace distances are computed on the path matrices.
    """
    ns = [int(n) for n in ns]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("ns must be strictly increasing")
    if np.array_equal(rho.matrix, sigma.matrix):
        raise ValueError("rho and sigma must differ")
    panel = make_panel(rho.dim, seed) if panel is None else panel
    reference = sample_GAP_mixture_batch(rho, derive_seed(seed, _TAG_REFERENCE), N)
    ref_est, ref_se = panel_expectations(reference, panel)
    records = []
    for n in ns:
        path = mixture_path(rho, sigma, n)
        rho_n = DensityOperator.from_matrix(path)
        leg = sample_GAP_mixture_batch(rho_n, derive_seed(seed, _TAG_LEG, n), N)
        est, se = panel_expectations(leg, panel)
        records.append(ConvergenceRecord(n, trace_norm(path - rho.matrix),
                                         np.abs(est - ref_est), np.hypot(se, ref_se)))
    return ConvergenceReport(panel.kinds, tuple(records))


@dataclass(frozen=True, eq=False)
class CharFnConvergence:
    ns: tuple
    gaps: np.ndarray    # (len(ns), len(vectors))
    bounds: np.ndarray  # ||psi||^2 * ||rho_n - rho||_1

    @property
    def max_gap(self):
        return self.gaps.max(axis=1)


def charfn_convergence(rho, sigma, ns, vectors):
    """Closed-form gaps ``|hat mu_n(psi) - hat mu(psi)|`` of the mean-zero Gaussians.

    With ``q = <psi, rho psi>`` and ``dq = <psi, (sigma - rho) psi>`` the
    path has quadratic form ``q + dq / n``, so the gap is evaluated as
    ``exp(-q/4) |expm1(-dq / 4n)|``: no cancellation, and exactly 0 when
    ``sigma == rho``.
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
    q = np.einsum("ij,jk,ik->i", vectors.conj(), rho.matrix, vectors).real
    dq = np.einsum("ij,jk,ik->i", vectors.conj(), sigma.matrix - rho.matrix, vectors).real
    norm2 = np.sum(vectors.real ** 2 + vectors.imag ** 2, axis=1)
    gaps, bounds = [], []
    for n in ns:
        gaps.append(np.exp(-0.25 * q) * np.abs(np.expm1(-0.25 * dq / n)))
        bounds.append(norm2 * trace_norm(mixture_path(rho, sigma, n) - rho.matrix))
    return CharFnConvergence(tuple(ns), np.array(gaps), np.array(bounds))


def tail_compactness(rhos, k):
    """``sup_n sum_{i >= k} <b_i, rho_n b_i>`` in the standard basis, k 1-based."""
    mats = [getattr(r, "matrix", r) for r in rhos]
    dim = mats[0].shape[0]
    if not 1 <= k <= dim + 1:
        raise ValueError(f"k must lie in [1, {dim + 1}]")
    return max(float(np.sum(np.diag(m).real[k - 1:])) for m in mats)


@dataclass(frozen=True, eq=False)
class CounterexampleReport:
    ns: tuple
    mu_values: np.ndarray        # mu_n(f_j)
    delta0_values: np.ndarray    # f_j(0)
    adjusted_values: np.ndarray  # (A mu_n)(f_j) = f_j(psi_n)
    adjusted_mass: tuple         # exact Fractions, all 1
    limit_mass: Fraction         # (A delta_0)(1) = 0

    def to_json(self):
        return {"ns": list(self.ns),
                "mu_values": self.mu_values.tolist(),
                "delta0_values": self.delta0_values.tolist(),
                "adjusted_values": self.adjusted_values.tolist(),
                "adjusted_mass": [str(x) for x in self.adjusted_mass],
                "limit_mass": str(self.limit_mass)}


def adjustment_counterexample(ns, panel, direction=None):
    """Exact evaluation of ``mu_n = (1 - 1/n) delta_0 + (1/n) delta_{psi_n}``.

    ``psi_n = sqrt(n) u`` for the unit vector ``u`` (default first basis
    vector), so ``||psi_n||^2 = n``.  Masses are computed as exact fractions.
    """
    u = np.zeros(panel.dim, dtype=complex)
    if direction is None:
        u[0] = 1.0
    else:
        u = np.asarray(direction, dtype=complex)
        u = u / np.linalg.norm(u)
    f0 = panel.evaluate(np.zeros(panel.dim))[0]
    mu, adjusted, masses = [], [], []
    for n in ns:
        w_far = Fraction(1, n)
        f_far = panel.evaluate(np.sqrt(n) * u)[0]
        # f(0) + (f(psi_n) - f(0)) / n: exact wherever f(psi_n) == f(0)
        mu.append(f0 + (f_far - f0) / n)
        # A mu_n = ||0||^2 (1 - 1/n) delta_0 + ||psi_n||^2 (1/n) delta_{psi_n}
        masses.append(0 * (1 - w_far) + n * w_far)
        adjusted.append(f_far)
    return CounterexampleReport(tuple(ns), np.array(mu), f0, np.array(adjusted),
                                tuple(masses), Fraction(0))

