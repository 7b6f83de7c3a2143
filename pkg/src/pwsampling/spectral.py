"""Laplacian eigendecomposition, Paley-Wiener projections and the relations
between shell constants and the spectrum.

All spectral statements live in the unweighted space l^2(G) (vertex weights
equal to one); functions that mix partition constants with the spectrum
refuse graphs with non-unit vertex weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .graph import WeightedGraph, as_signal, laplacian_quadratic_form, weighted_gradient_norm
from .partition import (
    InadmissiblePartitionError,
    Partition,
    SubsetChain,
    chain_constants,
    partition_constants,
)
from .records import VerificationRecord, passes

DEFAULT_DENSE_LIMIT = 4096

# Relative band around an eigenvalue threshold inside which an eigenvalue is
# treated as lying on the lower side of the threshold.
BOUNDARY_TOL = 1e-10

# Relative residual below which a signal counts as a member of PW_omega.
MEMBERSHIP_TOL = 1e-8


class CapacityError(RuntimeError):
    pass


class NotBandlimitedError(ValueError):
    def __init__(self, message: str, eigenvalue: float | None = None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


def _tol(bound: float) -> float:
    return BOUNDARY_TOL * (1.0 + abs(bound))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors (columns) of ``L_w``."""

    graph: WeightedGraph = field(repr=False)
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def band(self, omega: float) -> np.ndarray:
        """Indices ``j`` with ``lambda_j <= omega`` (up to the boundary tolerance)."""
        return np.nonzero(self.eigenvalues <= omega + _tol(omega))[0]

    def coefficients(self, f) -> np.ndarray:
        return self.eigenvectors.T @ as_signal(self.graph, f)

    def synthesize(self, coeffs) -> np.ndarray:
        return self.eigenvectors @ np.asarray(coeffs, dtype=float)

    def apply_function(self, fn, f) -> np.ndarray:
        """``fn(L) f`` through the eigen-expansion."""
        lam = np.clip(self.eigenvalues, 0.0, None)
        return self.eigenvectors @ (fn(lam) * self.coefficients(f))

    def projector(self, omega: float) -> "PWProjector":
        return PWProjector(self, float(omega))


def decompose(g: WeightedGraph, max_dense: int = DEFAULT_DENSE_LIMIT) -> SpectralDecomposition:
    """Full dense symmetric eigendecomposition of the graph Laplacian.

    Eigenvector signs are normalised so that the entry of largest magnitude
    (first one on ties) is positive, making output deterministic.
    """
    n = g.n_vertices
    if n > max_dense:
        raise CapacityError(
            f"graph has {n} vertices, above the dense eigensolver limit {max_dense}; "
            "restrict to a subgraph or raise max_dense"
        )
    lam, U = np.linalg.eigh(g.dense_laplacian())
    lam = np.where(np.abs(lam) < 1e-12 * max(1.0, abs(lam[-1]) if n else 1.0), 0.0, lam)
    if n:
        pivot = np.argmax(np.abs(U) > np.abs(U).max(axis=0) * (1 - 1e-9), axis=0)
        signs = np.sign(U[pivot, np.arange(n)])
        signs[signs == 0] = 1.0
        U = U * signs
    lam.setflags(write=False)
    U.setflags(write=False)
    return SpectralDecomposition(g, lam, U)


@dataclass(frozen=True, eq=False)
class PWProjector:
    """Orthogonal projection onto ``PW_omega = span{u_j : lambda_j <= omega}``."""

    decomposition: SpectralDecomposition = field(repr=False)
    omega: float

    def __post_init__(self):
        if not self.omega >= 0:
            raise ValueError("omega must be non-negative")

    @property
    def indices(self) -> np.ndarray:
        return self.decomposition.band(self.omega)

    @property
    def dim(self) -> int:
        return int(self.indices.size)

    @property
    def basis(self) -> np.ndarray:
        return self.decomposition.eigenvectors[:, self.indices]

    def matrix(self) -> np.ndarray:
        U = self.basis
        return U @ U.T

    def __call__(self, f) -> np.ndarray:
        U = self.basis
        return U @ (U.T @ as_signal(self.decomposition.graph, f))

    def residual(self, f) -> float:
        """Relative distance of ``f`` from ``PW_omega``."""
        f = as_signal(self.decomposition.graph, f)
        nf = np.linalg.norm(f)
        if nf == 0:
            return 0.0
        return float(np.linalg.norm(f - self(f)) / nf)

    def contains(self, f, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.residual(f) <= tol

    def random_element(self, rng: np.random.Generator) -> np.ndarray:
        return self.basis @ rng.standard_normal(self.dim)


def pw_project(dec: SpectralDecomposition, f, omega: float) -> np.ndarray:
    return PWProjector(dec, float(omega))(f)


def _require_bandlimited(dec: SpectralDecomposition, f, omega: float) -> np.ndarray:
    f = as_signal(dec.graph, f)
    c = dec.coefficients(f)
    outside = dec.eigenvalues > omega + _tol(omega)
    nf = np.linalg.norm(f)
    if nf > 0 and np.linalg.norm(c[outside]) > MEMBERSHIP_TOL * nf:
        big = np.nonzero(outside & (np.abs(c) > MEMBERSHIP_TOL * nf / math.sqrt(dec.n)))[0]
        lam = float(dec.eigenvalues[big].max()) if big.size else float(dec.eigenvalues[outside].max())
        raise NotBandlimitedError(
            f"signal is not in PW_{omega}: it has energy at eigenvalue {lam:.6g} > {omega}", lam
        )
    return f


def bernstein_check(g: WeightedGraph, dec: SpectralDecomposition, f, omega: float) -> VerificationRecord:
    """``||grad_w f|| = sqrt(2) ||L^{1/2} f|| <= sqrt(2 omega) ||f||`` for ``f`` in ``PW_omega``.

    The equality is evaluated independently (edge sum vs eigen-expansion) and
    reported in ``details``.
    """
    f = _require_bandlimited(dec, f, omega)
    grad = weighted_gradient_norm(g, f, 2)
    half = float(np.linalg.norm(dec.apply_function(np.sqrt, f)))
    norm = float(np.linalg.norm(f))
    eq_err = abs(grad - math.sqrt(2) * half)
    return VerificationRecord(
        "bernstein",
        lhs=grad,
        rhs=math.sqrt(2 * omega) * norm,
        constants={"omega": omega},
        details={
            "sqrt2_half_laplacian_norm": math.sqrt(2) * half,
            "equality_error": eq_err,
            "equality_holds": eq_err <= 1e-8 * max(1.0, grad),
            "norm": norm,
        },
    )


def laplacian_power_check(dec: SpectralDecomposition, f, omega: float, t: float) -> VerificationRecord:
    """``||L^t f|| <= omega^t ||f||`` for ``f`` in ``PW_omega``."""
    f = as_signal(dec.graph, f)
    lhs = float(np.linalg.norm(dec.apply_function(lambda x: x**t, f)))
    return VerificationRecord(
        "laplacian_power", lhs=lhs, rhs=omega**t * float(np.linalg.norm(f)), constants={"omega": omega, "t": t}
    )


def count_eigenvalues(dec: SpectralDecomposition, lo: float, hi: float, half_open: bool = True) -> int:
    """Eigenvalues (with multiplicity) in ``[lo, hi)`` or ``[lo, hi]``.

    An eigenvalue within ``1e-10 (1 + |b|)`` of a boundary ``b`` is counted on
    the lower side of ``b``; consequently both interval kinds give the same
    count and ``N[0, w) + N[w, max] = N``. A lower bound ``lo <= 0`` admits
    every eigenvalue from below. ``half_open`` is kept for readability of
    call sites.
    """
    if lo > hi:
        raise ValueError("need lo <= hi")
    lam = dec.eigenvalues
    sel = np.ones(lam.size, dtype=bool) if lo <= 0 else lam > lo + _tol(lo)
    if not math.isinf(hi):
        sel &= lam <= hi + _tol(hi)
    return int(sel.sum())


def dirichlet_eigenvalue(g: WeightedGraph, M: Iterable[str]) -> float:
    """Least eigenvalue of the principal Laplacian submatrix on ``M``."""
    idx = g.indices(M)
    if idx.size == 0:
        raise ValueError("M must be non-empty")
    L = g.laplacian()[idx][:, idx].toarray()
    return float(max(0.0, np.linalg.eigvalsh(L)[0]))


def rayleigh_quotient(g: WeightedGraph, f) -> float:
    f = as_signal(g, f)
    return laplacian_quadratic_form(g, f) / float(f @ f)


@dataclass
class GeometryReport:
    delta: float
    threshold: float
    size_S0: int
    n_vertices: int
    counts_below: int
    counts_above: int
    k: int | None
    lambda_k: float | None
    lambda_k_passed: bool | None
    dirichlet_value: float | None
    dirichlet_passed: bool | None
    zero_set_checks: dict | None = None

    @property
    def counts_passed(self) -> bool:
        return self.counts_below <= self.size_S0 and self.counts_above >= self.n_vertices - self.size_S0

    @property
    def passed(self) -> bool:
        ok = self.counts_passed and self.lambda_k_passed is not False and self.dirichlet_passed is not False
        if self.zero_set_checks:
            ok = ok and all(c.get("passed") is not False for c in self.zero_set_checks.values())
        return ok

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "threshold": self.threshold,
            "counts": {
                "below": self.counts_below,
                "above": self.counts_above,
                "size_S0": self.size_S0,
                "n_vertices": self.n_vertices,
                "passed": self.counts_passed,
            },
            "lambda_k_bound": {
                "k": self.k,
                "lambda_k": self.lambda_k,
                "bound": self.threshold,
                "passed": self.lambda_k_passed,
            },
            "dirichlet": {
                "value": self.dirichlet_value,
                "bound": self.threshold,
                "passed": self.dirichlet_passed,
            },
            "zero_set_checks": self.zero_set_checks or {},
            "passed": self.passed,
        }


def _require_unit_nu(g: WeightedGraph) -> None:
    if not g.has_unit_vertex_weights():
        raise ValueError("spectral relations are stated in unweighted l^2: vertex weights must all be 1")


def spectral_geometry_report(
    g: WeightedGraph,
    dec: SpectralDecomposition,
    P: Partition,
    f=None,
    omega: float | None = None,
    chain: SubsetChain | None = None,
) -> GeometryReport:
    """Compare the p = 2 constant ``delta`` of ``P`` with the spectrum.

    Checks ``N[0, 1/(2 delta^2)) <= |S_0|``, ``N[1/(2 delta^2), max] >= N - |S_0|``,
    ``lambda_{|S_0|} >= 1/(2 delta^2)`` and ``Lambda_D(V \\ S_0) >= 1/(2 delta^2)``.

    With a nonzero ``f`` in ``PW_omega``: if ``f`` vanishes on ``S_0`` it checks
    ``delta >= 1/sqrt(2 omega)``; if ``f`` vanishes off ``S_0`` it checks
    ``delta_hat / (a_hat - 1) >= 1/sqrt(2 omega)`` for ``chain`` (defaulting to
    ``P`` read as a chain), provided the chain starts at ``S_0`` and is
    well defined with ``a_hat > 1``.
    """
    _require_unit_nu(g)
    c = partition_constants(g, P, 2.0)
    if not c.admissible:
        raise InadmissiblePartitionError("partition is not admissible")
    N = g.n_vertices
    s0 = len(P.shells[0])
    threshold = math.inf if c.delta == 0 else 1.0 / (2.0 * c.delta**2)
    if math.isinf(threshold):
        below, above = N, 0
    else:
        below = count_eigenvalues(dec, 0.0, threshold, half_open=True)
        above = count_eigenvalues(dec, threshold, math.inf, half_open=False)
    k = lam_k = lam_ok = None
    if s0 < N:
        k = s0
        lam_k = float(dec.eigenvalues[k])
        lam_ok = passes(threshold, lam_k)
    rest = [v for v in g.vertices if v not in set(P.shells[0])]
    dval = dok = None
    if rest:
        dval = dirichlet_eigenvalue(g, rest)
        dok = passes(threshold, dval)
    zero_checks = None
    if f is not None:
        if omega is None:
            raise ValueError("omega is required with a signal")
        zero_checks = _zero_set_checks(g, dec, P, chain, f, float(omega), c.delta)
    return GeometryReport(c.delta, threshold, s0, N, below, above, k, lam_k, lam_ok, dval, dok, zero_checks)


def _zero_set_checks(g, dec, P, chain, f, omega, delta) -> dict:
    f = _require_bandlimited(dec, f, omega)
    if not np.any(f != 0):
        raise ValueError("zero-set checks need a nonzero signal")
    if omega <= 0:
        raise ValueError("zero-set checks need omega > 0")
    target = 1.0 / math.sqrt(2 * omega)
    on_S0 = np.zeros(g.n_vertices, dtype=bool)
    on_S0[P.idx[0]] = True
    # Exact zeros are rare after projection; treat tiny values as zero.
    scale = float(np.abs(f).max())
    small = np.abs(f) <= 1e-10 * scale
    out: dict = {"omega": omega, "target": target}
    if np.all(small[on_S0]):
        out["Z1"] = {"value": delta, "bound": target, "passed": passes(target, delta)}
    else:
        out["Z1"] = {"applicable": False, "reason": "signal does not vanish on S_0"}
    C = chain if chain is not None else SubsetChain.from_shells(g, P.shells)
    cc = chain_constants(g, C, 2.0)
    if set(C.shells[0]) != set(P.shells[0]):
        out["Z2"] = {"applicable": False, "reason": "chain initial set differs from S_0"}
    elif not np.all(small[~on_S0]):
        out["Z2"] = {"applicable": False, "reason": "signal does not vanish off S_0"}
    elif not cc.well_defined or not cc.a_hat > 1:
        out["Z2"] = {"applicable": False, "reason": "chain constants ill-defined or a_hat <= 1"}
    else:
        val = cc.delta_hat / (cc.a_hat - 1)
        out["Z2"] = {"value": val, "bound": target, "passed": passes(target, val)}
    return out
