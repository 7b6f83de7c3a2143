"""Sampling on the integer line, emulated on cycles.

The sampling set is a residue class ``kZ``; the line is replaced by the
cycle ``C_N`` with ``N`` a multiple of ``k``, whose Laplacian symbol
``2 - 2 cos(xi)`` agrees with the line's at the DFT frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import WeightedGraph, cycle_graph
from .partition import build_closure_partition, chain_constants, partition_constants, pruned_chain
from .records import passes
from .spectral import SpectralDecomposition


class ShannonConditionError(ValueError):
    pass


@dataclass(frozen=True)
class LineConstants:
    """Shell constants of ``S = kZ`` with shells ``S_m = {+-m} + kZ``."""

    k: int
    n: int
    delta: float
    a: float
    delta_hat: float
    a_hat: float
    D: tuple[float, ...]
    K: tuple[float, ...]
    Khat: tuple[float, ...]
    Dhat: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "delta": self.delta,
            "a": self.a,
            "delta_hat": self.delta_hat,
            "a_hat": self.a_hat,
            "D": list(self.D),
            "K": list(self.K),
            "Khat": list(self.Khat),
            "Dhat": list(self.Dhat),
        }


def integer_constants(k: int) -> LineConstants:
    """Closed forms for odd ``k = 2n + 1``.

    ``D_0 = 2``, ``K_0 = 1``, ``D_m = K_m = 1`` give ``delta = sqrt(n(n+1)/2)``
    and ``a = sqrt(k)``; ``Khat_0 = 2``, ``Khat_m = Dhat_m = 1`` give
    ``delta_hat = sqrt(n(n+1)/2)`` and ``a_hat = sqrt(k)``.
    """
    if int(k) != k or k < 3 or k % 2 == 0:
        raise ValueError(f"closed forms need an odd integer k >= 3, got {k}")
    k = int(k)
    n = (k - 1) // 2
    d = math.sqrt(n * (n + 1) / 2)
    ones = (1.0,) * (n - 1)
    return LineConstants(
        k=k,
        n=n,
        delta=d,
        a=math.sqrt(k),
        delta_hat=d,
        a_hat=math.sqrt(k),
        D=(2.0,) + ones,
        K=(1.0,) + ones,
        Khat=(2.0,) + ones,
        Dhat=(1.0,) * n,
    )


def sampling_residue_class(N: int, k: int) -> list[str]:
    return [str(i) for i in range(0, N, k)]


def line_constants_generic(k: int, periods: int = 3) -> LineConstants:
    """The same constants computed by the generic partition code on ``C_{k * periods}``.

    Works for every ``k >= 2``; shells come from repeated closure of ``kZ``.
    """
    if k < 2 or periods < 1 or k * periods < 3:
        raise ValueError("need k >= 2 and a cycle with at least 3 vertices")
    g = cycle_graph(k * periods)
    P = build_closure_partition(g, sampling_residue_class(g.n_vertices, k))
    pc = partition_constants(g, P, 2.0)
    C = pruned_chain(g, P.shells)
    cc = chain_constants(g, C, 2.0)
    return LineConstants(
        k=k,
        n=P.n,
        delta=pc.delta,
        a=pc.a,
        delta_hat=cc.delta_hat,
        a_hat=cc.a_hat,
        D=tuple(pc.D),
        K=tuple(pc.K),
        Khat=tuple(cc.Khat),
        Dhat=tuple(cc.Dhat),
    )


def band_map(xi: float) -> float:
    """Laplacian eigenvalue ``2 - 2 cos(xi)`` of the frequency ``xi`` in ``[0, pi]``."""
    if not 0 <= xi <= math.pi:
        raise ValueError(f"xi must lie in [0, pi], got {xi}")
    return 4.0 * math.sin(xi / 2) ** 2


def psi(omega: float) -> float:
    """Inverse of ``xi -> sqrt(2 - 2 cos(xi))`` on ``[0, pi]``; ``omega`` in ``[0, 2]``."""
    if not 0 <= omega <= 2:
        raise ValueError(f"omega must lie in [0, 2], got {omega}")
    return 2.0 * math.asin(omega / 2)


@dataclass(frozen=True, eq=False)
class CycleModel:
    """Unit cycle ``C_N`` with its exact spectrum and real Fourier eigenbasis.

    ``frequencies[j]`` is the DFT index ``m`` in ``0..N//2`` of column ``j``.
    """

    graph: WeightedGraph = field(repr=False)
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    frequencies: np.ndarray = field(repr=False)

    def decomposition(self) -> SpectralDecomposition:
        return SpectralDecomposition(self.graph, self.eigenvalues, self.eigenvectors)


def cycle_model(N: int) -> CycleModel:
    if N < 3:
        raise ValueError("N must be at least 3")
    x = np.arange(N)
    cols, lams, freqs = [np.full(N, 1 / math.sqrt(N))], [0.0], [0]
    for m in range(1, N // 2 + 1):
        lam = 2 - 2 * math.cos(2 * math.pi * m / N)
        if 2 * m == N:
            cols.append((-1.0) ** x / math.sqrt(N))
            lams.append(lam)
            freqs.append(m)
            continue
        cols.append(math.sqrt(2 / N) * np.cos(2 * math.pi * m * x / N))
        cols.append(math.sqrt(2 / N) * np.sin(2 * math.pi * m * x / N))
        lams += [lam, lam]
        freqs += [m, m]
    order = np.argsort(lams, kind="stable")
    U = np.column_stack(cols)[:, order]
    lam = np.array(lams)[order]
    fr = np.array(freqs)[order]
    for a in (U, lam, fr):
        a.setflags(write=False)
    return CycleModel(cycle_graph(N), lam, U, fr)


@dataclass
class TightnessReport:
    k: int
    omega: float
    spread: float
    lower: float
    upper: float
    ratio: float
    cap: float
    eta_frame: float

    @property
    def eta_display(self) -> float:
        return self.spread

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "omega": self.omega,
            "spread": self.spread,
            "lower": self.lower,
            "upper": self.upper,
            "ratio": self.ratio,
            "cap": self.cap,
            "ratio_within_cap": bool(self.ratio <= self.cap),
            "eta_estimate": self.eta_frame,
            "eta_display_bound": self.eta_display,
            "eta_display_bound_holds": bool(self.eta_frame <= self.eta_display),
        }


def _spread(k: int, omega: float) -> float:
    """``(k + 1)/2 * sqrt(2 - 2 cos(omega))``."""
    return (k + 1) / 2 * math.sqrt(band_map(omega))


def oversampling_report(k: int, omega: float) -> TightnessReport:
    """Tightness of the integer-line sampling bounds.

    With ``x = (k+1)/2 sqrt(2 - 2 cos omega)`` the bounds are ``(1 -+ x)/sqrt(k)``,
    their ratio ``(1 + x)/(1 - x)`` is capped by ``1 + 4x``. ``eta_estimate`` is
    ``(B - A)/(B + A)`` for the squared bounds, i.e. ``2x / (1 + x^2)``.
    Requires ``2x < 1``.
    """
    integer_constants(k)
    if not 0 <= omega <= math.pi:
        raise ValueError("omega must lie in [0, pi]")
    x = _spread(k, omega)
    if not 2 * x < 1:
        raise ShannonConditionError(
            f"tightness bound not applicable: (k+1)*sqrt(2-2cos(omega)) = {2 * x:.6g} >= 1"
        )
    lower = (1 - x) / math.sqrt(k)
    upper = (1 + x) / math.sqrt(k)
    A, B = lower**2, upper**2
    return TightnessReport(k, omega, x, lower, upper, upper / lower, 1 + 4 * x, (B - A) / (B + A))


def critical_bandwidths(k: int, constants: LineConstants | None = None) -> dict:
    """Largest admissible bandwidths: Shannon ``pi/k`` versus the graph criteria."""
    c = constants or (integer_constants(k) if k % 2 else line_constants_generic(k))
    out = {"shannon": math.pi / k}
    if c.delta > 0:
        arg = 1 / (2 * math.sqrt(2) * c.delta)
        out["graph_exact"] = 2 * math.asin(min(arg, 1.0))
    else:
        out["graph_exact"] = math.pi
    if k % 2:
        out["graph_closed_form"] = 2 * math.asin(1 / (k + 1))
        out["oversampling_factor"] = out["shannon"] / out["graph_closed_form"]
    out["oversampling_factor_exact"] = out["shannon"] / out["graph_exact"]
    out["asymptotic_factor"] = math.pi / 2
    return out


@dataclass
class DemoReport:
    k: int
    omega: float
    N: int
    modes: list[int]
    alias_free: bool
    identity: dict
    graph_bounds: dict
    tightness: dict | None
    oversampling: dict
    constants: dict

    @property
    def passed(self) -> bool:
        ok = True
        if self.alias_free:
            ok = ok and self.identity["passed"]
        for key in ("passed", "closed_form_passed"):
            if self.graph_bounds.get(key) is False:
                ok = False
        if self.tightness is not None:
            ok = ok and self.tightness["ratio_within_cap"]
        return ok

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "omega": self.omega,
            "N": self.N,
            "modes": self.modes,
            "alias_free": self.alias_free,
            "shannon_identity": self.identity,
            "graph_bounds": self.graph_bounds,
            "tightness": self.tightness,
            "eta_estimate": None if self.tightness is None else self.tightness["eta_estimate"],
            "oversampling": self.oversampling,
            "constants": self.constants,
            "passed": self.passed,
        }


def bandlimited_signals(
    model: CycleModel, omega: float, rng: np.random.Generator, count: int
) -> tuple[np.ndarray, list[int]]:
    """``count`` random real signals on the Fourier modes with ``|xi| <= omega``.

    Coefficients are uniform on ``[-1, 1]`` in the real Fourier basis.
    """
    N = model.graph.n_vertices
    xi = 2 * math.pi * model.frequencies / N
    cols = np.nonzero(xi <= omega + 1e-12)[0]
    coeffs = rng.uniform(-1.0, 1.0, size=(cols.size, count))
    modes = sorted({int(m) for m in model.frequencies[cols]})
    return model.eigenvectors[:, cols] @ coeffs, modes


def alias_free(N: int, k: int, modes: list[int]) -> bool:
    """No two of the frequencies ``+-m`` fold onto the same one after keeping every k-th sample."""
    M = N // k
    seen = set()
    for f in {m % N for m in modes} | {(-m) % N for m in modes}:
        r = f % M
        if r in seen:
            return False
        seen.add(r)
    return True


def shannon_demo(
    k: int, omega: float, periods: int, seed: int = 0, n_signals: int = 20
) -> DemoReport:
    """Compare the exact sampling identity on ``kZ`` with the graph-theoretic bounds.

    Runs on ``C_N``, ``N = k * periods``, with ``S`` the multiples of ``k``.
    """
    if int(k) != k or k < 2:
        raise ValueError("k must be an integer >= 2")
    k = int(k)
    if not 0 <= omega <= math.pi:
        raise ValueError("omega must lie in [0, pi]")
    if not k * omega <= math.pi:
        raise ShannonConditionError(
            f"kZ is a sampling set for PW_omega iff k*omega <= pi; got k*omega = {k * omega:.6g}"
        )
    N = k * periods
    model = cycle_model(N)
    rng = np.random.default_rng(seed)
    F, modes = bandlimited_signals(model, omega, rng, n_signals)
    S = np.arange(0, N, k)
    norms = np.linalg.norm(F, axis=0)
    restricted = np.linalg.norm(F[S], axis=0)
    ratios = restricted / norms
    rel_err = np.abs(restricted * math.sqrt(k) - norms) / norms
    worst = int(np.argmax(rel_err))
    clean = alias_free(N, k, modes)
    identity = {
        "lhs": float(restricted[worst]),
        "rhs": float(norms[worst] / math.sqrt(k)),
        "error": float(rel_err.max()),
        "passed": bool(rel_err.max() <= 1e-8),
    }

    generic = line_constants_generic(k, max(periods, 3))
    if k % 2:
        closed = integer_constants(k)
        consts = closed
        match = all(
            math.isclose(getattr(closed, a), getattr(generic, a), rel_tol=1e-12, abs_tol=1e-15)
            for a in ("delta", "a", "delta_hat", "a_hat")
        )
    else:
        consts, match = generic, None
    lam = band_map(omega)
    eps = math.sqrt(2 * lam)
    bounds: dict = {
        "observed_min": float(ratios.min()),
        "observed_max": float(ratios.max()),
        "observed": float(ratios[worst]),
        "eps": eps,
    }
    if eps * consts.delta < 1:
        lo = (1 - eps * consts.delta) / consts.a
        hi = (1 + eps * consts.delta_hat) / consts.a_hat
        bounds.update(
            applicable=True,
            lower=lo,
            upper=hi,
            passed=passes(lo, float(ratios.min())) and passes(float(ratios.max()), hi),
        )
    else:
        bounds.update(applicable=False, status="not applicable", lower=None, upper=None, passed=None)
    tight = None
    if k % 2:
        x = _spread(k, omega)
        if x < 1:
            lo, hi = (1 - x) / math.sqrt(k), (1 + x) / math.sqrt(k)
            bounds.update(
                closed_form_applicable=True,
                closed_form_lower=lo,
                closed_form_upper=hi,
                closed_form_passed=passes(lo, float(ratios.min())) and passes(float(ratios.max()), hi),
            )
        else:
            bounds.update(closed_form_applicable=False, closed_form_status="not applicable", closed_form_passed=None)
        if 2 * x < 1:
            tight = oversampling_report(k, omega).to_dict()
    constants = consts.to_dict()
    constants["generic_match"] = match
    return DemoReport(
        k=k,
        omega=float(omega),
        N=N,
        modes=modes,
        alias_free=clean,
        identity=identity,
        graph_bounds=bounds,
        tightness=tight,
        oversampling=critical_bandwidths(k, consts),
        constants=constants,
    )
