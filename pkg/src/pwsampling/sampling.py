"""Sampling sets for Paley-Wiener signals: frame bounds, frame vectors,
Plancherel-Polya checks and reconstruction by the frame algorithm."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .graph import WeightedGraph, as_signal
from .partition import (
    InadmissiblePartitionError,
    Partition,
    SubsetChain,
    chain_constants,
    partition_constants,
    two_set_partition,
)
from .records import SandwichRecord
from .spectral import PWProjector, SpectralDecomposition, _require_bandlimited, _require_unit_nu


class SamplingConditionError(ValueError):
    pass


@dataclass(frozen=True)
class FrameBounds:
    """Frame bounds ``A <= B`` of the sampling frame on ``PW_omega`` and the
    convergence factor ``eta = (B - A) / (A + B)``."""

    A: float
    B: float
    eta: float
    omega: float
    K0: float
    D0: float
    K0_hat: float
    D0_hat: float

    @property
    def relaxation_max(self) -> float:
        return 2.0 / self.B

    @property
    def default_relaxation(self) -> float:
        """``2 / (A + B)``, the relaxation for which ``eta`` is the contraction factor."""
        return 2.0 / (self.A + self.B)

    def rate(self, relaxation: float) -> float:
        """Guaranteed contraction ``max(|1 - r A|, |1 - r B|)`` for relaxation ``r``."""
        return max(abs(1 - relaxation * self.A), abs(1 - relaxation * self.B))

    def to_dict(self) -> dict:
        return {
            "A": self.A,
            "B": self.B,
            "eta": self.eta,
            "relaxation_max": self.relaxation_max,
            "default_relaxation": self.default_relaxation,
            "omega": self.omega,
            "K0": self.K0,
            "D0": self.D0,
            "K0_hat": self.K0_hat,
            "D0_hat": self.D0_hat,
        }


def frame_bounds(K0: float, D0: float, K0_hat: float, D0_hat: float, omega: float) -> FrameBounds:
    """Two-set frame bounds

    ``A = (1 - sqrt(2 omega / K0))^2 / (1 + D0 / K0)``,
    ``B = (1 + sqrt(2 omega / D0_hat))^2 / (1 + K0_hat / D0_hat)``.

    Requires ``omega < K0 / 2``, the condition under which ``S_0`` determines
    every signal in ``PW_omega``.
    """
    if K0 < 0 or D0 < 0:
        raise ValueError("K0 and D0 must be non-negative")
    if not (K0_hat > 0 and D0_hat > 0):
        raise ValueError("K0_hat and D0_hat must be positive")
    if omega < 0:
        raise ValueError("omega must be non-negative")
    if not omega < K0 / 2:
        raise SamplingConditionError(
            f"uniqueness condition violated: need omega < K0/2 = {K0 / 2}, got omega = {omega}"
        )
    A = (1 - math.sqrt(2 * omega / K0)) ** 2 / (1 + D0 / K0)
    B = (1 + math.sqrt(2 * omega / D0_hat)) ** 2 / (1 + K0_hat / D0_hat)
    return FrameBounds(A, B, (B - A) / (A + B), omega, K0, D0, K0_hat, D0_hat)


def two_set_constants(g: WeightedGraph, S0: Iterable[str]) -> tuple[float, float, float, float]:
    """``(K0, D0, K0_hat, D0_hat)`` for ``(S_0, V \\ S_0)``."""
    P = two_set_partition(g, S0)
    if P.n != 1:
        raise ValueError("S_0 must be a proper subset of the vertex set")
    c = partition_constants(g, P, 2.0)
    ch = chain_constants(g, P, 2.0)
    return c.K[0], c.D[0], ch.Khat[0], ch.Dhat[0]


def sampling_bounds(g: WeightedGraph, S0: Iterable[str], omega: float) -> FrameBounds:
    """:func:`frame_bounds` for the two-set partition of ``g`` at ``S_0``."""
    return frame_bounds(*two_set_constants(g, S0), omega)


def sampling_frame_vectors(dec: SpectralDecomposition, omega: float, S0: Iterable[str]) -> dict[str, np.ndarray]:
    """``theta_v``: projection of the Dirac at ``v`` onto ``PW_omega``, for ``v`` in ``S_0``."""
    g = dec.graph
    U = PWProjector(dec, omega).basis
    return {v: U @ U[g.index[v]] for v in S0}


def frame_operator(dec: SpectralDecomposition, omega: float, S0: Iterable[str]) -> np.ndarray:
    """Matrix of ``f -> sum_{v in S_0} <f, theta_v> theta_v``."""
    g = dec.graph
    U = PWProjector(dec, omega).basis
    Us = U[g.indices(S0)]
    return U @ (Us.T @ Us) @ U.T


def exact_frame_bounds(dec: SpectralDecomposition, omega: float, S0: Iterable[str]) -> tuple[float, float]:
    """Smallest and largest eigenvalue of the frame operator restricted to ``PW_omega``."""
    g = dec.graph
    U = PWProjector(dec, omega).basis
    if U.shape[1] == 0:
        return 0.0, 0.0
    Us = U[g.indices(S0)]
    ev = np.linalg.eigvalsh(Us.T @ Us)
    return float(max(ev[0], 0.0)), float(ev[-1])


def is_uniqueness_set(dec: SpectralDecomposition, omega: float, S0: Iterable[str]) -> bool:
    """True when no nonzero signal of ``PW_omega`` vanishes on ``S_0``."""
    lo, _ = exact_frame_bounds(dec, omega, S0)
    return lo > 1e-12


@dataclass
class PlancherelPolyaReport:
    norms: SandwichRecord
    frame: SandwichRecord
    two_set: dict | None = None

    @property
    def passed(self) -> bool:
        ok = self.norms.passed and self.frame.passed
        if self.two_set is not None:
            ok = ok and self.two_set["match"]
        return ok

    def to_dict(self) -> dict:
        return {
            "norms": self.norms.to_dict(),
            "frame": self.frame.to_dict(),
            "two_set_cross_check": self.two_set,
            "passed": self.passed,
        }


def plancherel_polya_check(
    g: WeightedGraph,
    dec: SpectralDecomposition,
    omega: float,
    P: Partition,
    C: SubsetChain,
    f,
) -> PlancherelPolyaReport:
    """Check ``(1 - eps delta)/a ||f|| <= ||f|_{S_0}|| <= (1 + eps delta_hat)/a_hat ||f||``
    with ``eps = sqrt(2 omega)``, and its squared frame form where the middle
    term is ``sum_{v in S_0} |<f, theta_v>|^2``.
    """
    _require_unit_nu(g)
    if set(P.shells[0]) != set(C.shells[0]):
        raise ValueError("partition and chain must share the initial set S_0")
    pc = partition_constants(g, P, 2.0)
    if not pc.admissible:
        raise InadmissiblePartitionError("partition is not admissible")
    cc = chain_constants(g, C, 2.0)
    if not cc.well_defined:
        raise InadmissiblePartitionError("chain constants are ill-defined")
    eps = math.sqrt(2 * omega)
    if not eps * pc.delta < 1:
        raise SamplingConditionError(
            f"sampling density insufficient: eps*delta = {eps * pc.delta:.6g} >= 1"
        )
    f = _require_bandlimited(dec, f, omega)
    S0 = P.shells[0]
    norm = float(np.linalg.norm(f))
    restricted = float(np.linalg.norm(f[P.idx[0]]))
    lower = (1 - eps * pc.delta) / pc.a
    upper = (1 + eps * cc.delta_hat) / cc.a_hat
    constants = {"eps": eps, "partition": pc.to_dict(), "chain": cc.to_dict()}
    norms = SandwichRecord(
        "plancherel_polya", lower * norm, restricted, upper * norm, constants, {"norm": norm}
    )
    theta = sampling_frame_vectors(dec, omega, S0)
    frame_sum = float(sum(float(f @ t) ** 2 for t in theta.values()))
    frame = SandwichRecord(
        "frame_inequality", lower**2 * norm**2, frame_sum, upper**2 * norm**2, constants,
        {"lower_bound": lower**2, "upper_bound": upper**2},
    )
    two_set = None
    if P.n == 1 and C.n == 1 and set(C.shells[1]) == set(P.shells[1]):
        fb = frame_bounds(pc.K[0], pc.D[0], cc.Khat[0], cc.Dhat[0], omega)
        two_set = {
            "A": fb.A,
            "B": fb.B,
            "frame_lower": lower**2,
            "frame_upper": upper**2,
            "match": bool(
                math.isclose(fb.A, lower**2, rel_tol=1e-12, abs_tol=1e-15)
                and math.isclose(fb.B, upper**2, rel_tol=1e-12)
            ),
        }
    return PlancherelPolyaReport(norms, frame, two_set)


@dataclass
class ReconstructionTrace:
    final: np.ndarray = field(repr=False)
    residuals: list[float]
    errors: list[float] | None
    iterations: int
    converged: bool
    relaxation: float
    bounds: FrameBounds

    def to_dict(self, graph: WeightedGraph | None = None) -> dict:
        out = {
            "bounds": {"A": self.bounds.A, "B": self.bounds.B, "eta": self.bounds.eta},
            "relaxation": self.relaxation,
            "guaranteed_rate": self.bounds.rate(self.relaxation),
            "iterations": self.iterations,
            "converged": self.converged,
            "residuals": self.residuals,
        }
        if self.errors is not None:
            out["errors"] = self.errors
        if graph is not None:
            out["signal"] = dict(zip(graph.vertices, self.final.tolist()))
        return out


def frame_reconstruct(
    dec: SpectralDecomposition,
    omega: float,
    S0: Iterable[str],
    samples: Mapping[str, float],
    relaxation: float | None = None,
    tol: float = 1e-10,
    max_iter: int = 10000,
    bounds: FrameBounds | None = None,
    truth=None,
) -> ReconstructionTrace:
    """Frame algorithm ``g_n = g_{n-1} + r sum_{v in S_0} (f(v) - g_{n-1}(v)) theta_v``.

    Starts from ``g_0 = 0`` and stops once ``||g_n - g_{n-1}|| < tol`` or
    after ``max_iter`` steps. ``residuals[n]`` is the l^2 misfit of ``g_n``
    on ``S_0``; with ``truth`` given, ``errors[n] = ||truth - g_n||``.
    The relaxation defaults to ``2 / (A + B)`` and must lie in ``(0, 2/B)``.
    """
    g = dec.graph
    _require_unit_nu(g)
    S0 = list(S0)
    missing = [v for v in S0 if v not in samples]
    if missing:
        raise ValueError(f"samples missing for vertices {missing[:10]}")
    if bounds is None:
        bounds = sampling_bounds(g, S0, omega)
    r = bounds.default_relaxation if relaxation is None else float(relaxation)
    if not 0 < r < bounds.relaxation_max:
        raise ValueError(f"relaxation must lie in (0, 2/B) = (0, {bounds.relaxation_max:.6g}), got {r}")
    U = PWProjector(dec, omega).basis
    idx = np.array([g.index[v] for v in S0], dtype=np.intp)
    Us = U[idx]
    s = np.array([float(samples[v]) for v in S0])
    if truth is not None:
        truth = as_signal(g, truth)
    c = np.zeros(U.shape[1])
    residuals = [float(np.linalg.norm(s))]
    errors = [float(np.linalg.norm(truth))] if truth is not None else None
    converged = False
    n = 0
    while n < max_iter:
        n += 1
        step = r * (Us.T @ (s - Us @ c))
        c += step
        residuals.append(float(np.linalg.norm(s - Us @ c)))
        if errors is not None:
            errors.append(float(np.linalg.norm(truth - U @ c)))
        if np.linalg.norm(step) < tol:
            converged = True
            break
    return ReconstructionTrace(U @ c, residuals, errors, n, converged, r, bounds)
