"""Vertex partitions and disjoint chains, their shell constants, and the
Poincare / reverse-Poincare inequalities they certify.

Constants follow the usual conventions: an empty product is 1, an empty
sum is 0. ``q`` is always the conjugate exponent ``p / (p - 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .graph import GraphParseError, WeightedGraph, as_signal, lp_norm, weighted_gradient_norm
from .records import VerificationRecord, passes


class InadmissiblePartitionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SubsetChain:
    """Ordered, pairwise disjoint, non-empty vertex sets ``S_0, ..., S_n``."""

    shells: tuple[tuple[str, ...], ...]
    idx: tuple[np.ndarray, ...] = field(repr=False)

    @classmethod
    def from_shells(cls, g: WeightedGraph, shells: Iterable[Iterable[str]]):
        names = tuple(tuple(dict.fromkeys(str(v) for v in s)) for s in shells)
        if not names:
            raise ValueError("need at least one shell")
        seen: dict[str, int] = {}
        for m, shell in enumerate(names):
            if not shell:
                raise ValueError(f"shell {m} is empty")
            for v in shell:
                if v not in g.index:
                    raise ValueError(f"unknown vertex {v!r} in shell {m}")
                if v in seen:
                    raise ValueError(f"vertex {v!r} appears in shells {seen[v]} and {m}")
                seen[v] = m
        cls._check_cover(g, seen)
        idx = tuple(g.indices(s) for s in names)
        for a in idx:
            a.setflags(write=False)
        return cls(shells=names, idx=idx)

    @classmethod
    def _check_cover(cls, g: WeightedGraph, seen: dict) -> None:
        pass

    @property
    def n(self) -> int:
        """Length ``n``: index of the last shell."""
        return len(self.shells) - 1

    @property
    def initial(self) -> tuple[str, ...]:
        return self.shells[0]

    def masks(self, g: WeightedGraph) -> list[np.ndarray]:
        out = []
        for a in self.idx:
            m = np.zeros(g.n_vertices, dtype=bool)
            m[a] = True
            out.append(m)
        return out


@dataclass(frozen=True, eq=False)
class Partition(SubsetChain):
    """A :class:`SubsetChain` whose shells cover every vertex."""

    @classmethod
    def _check_cover(cls, g: WeightedGraph, seen: dict) -> None:
        missing = [v for v in g.vertices if v not in seen]
        if missing:
            raise ValueError(f"partition does not cover vertices: {missing[:20]}")


# -- constants ------------------------------------------------------------------


def _check_finite_p(p: float) -> float:
    p = float(p)
    if math.isinf(p):
        raise ValueError("the constants delta and a are not defined for p = inf")
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return p


def _sum_of_prefix_products(ratios: Sequence[float]) -> float:
    """``sum_{m=0}^{n} prod_{j<m} ratios[j]``."""
    total, prod = 1.0, 1.0
    for r in ratios:
        prod *= r
        total += prod
    return total


def _forward_delta(D: Sequence[float], K: Sequence[float], p: float) -> float:
    n = len(K)
    if n == 0:
        return 0.0
    r = [d / k for d, k in zip(D, K)]
    if p == 1:
        best = 0.0
        for k in range(1, n + 1):
            s, prod = 0.0, 1.0
            for m in range(k, n + 1):
                s += prod
                if m < n:
                    prod *= r[m]
            best = max(best, s / K[k - 1])
        return best
    q = p / (p - 1)
    e = q / p
    total = 0.0
    for m in range(1, n + 1):
        inner, prod = 0.0, 1.0
        for k in range(m, 0, -1):
            # prod = prod_{i=k}^{m-1} r_i
            inner += K[k - 1] ** (-e) * prod**e
            if k > 1:
                prod *= r[k - 1]
        total += inner ** (p / q)
    return total ** (1 / p)


def _reverse_delta(Kh: Sequence[float], Dh: Sequence[float], p: float) -> float:
    n = len(Kh)
    if n == 0:
        return 0.0
    r = [k / d for k, d in zip(Kh, Dh)]
    if p == 1:
        best = 0.0
        for k in range(0, n):
            s, prod = 0.0, 1.0
            for m in range(k, n + 1):
                s += prod
                if m < n:
                    prod *= r[m]
            best = max(best, s / Kh[k])
        return best
    q = p / (p - 1)
    e = q / p
    total = 0.0
    for m in range(1, n + 1):
        inner, prod = 0.0, 1.0
        for k in range(m - 1, -1, -1):
            prod *= r[k]  # prod_{i=k}^{m-1}
            inner += Kh[k] ** (-e) * prod**e
        total += inner ** (p / q)
    return total ** (1 / p)


@dataclass
class PartitionConstants:
    p: float
    D: list[float]
    K: list[float]
    delta: float | None
    a: float | None
    admissible: bool

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "D": self.D,
            "K": self.K,
            "delta": self.delta,
            "a": self.a,
            "admissible": self.admissible,
        }


@dataclass
class ChainConstants:
    p: float
    Khat: list[float]
    Dhat: list[float]
    delta_hat: float | None
    a_hat: float | None
    well_defined: bool

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "Khat": self.Khat,
            "Dhat": self.Dhat,
            "delta_hat": self.delta_hat,
            "a_hat": self.a_hat,
            "well_defined": self.well_defined,
        }


def shell_weights(g: WeightedGraph, C: SubsetChain) -> list[np.ndarray]:
    """``w_{S_m}(v) / nu(v)`` for every vertex, one array per shell."""
    return [(g.adjacency @ m.astype(float)) / g.nu for m in C.masks(g)]


def partition_constants(g: WeightedGraph, P: SubsetChain, p: float = 2.0) -> PartitionConstants:
    """``D_m = sup_{S_m} w_{S_{m+1}}/nu``, ``K_m = inf_{S_{m+1}} w_{S_m}/nu`` and
    the derived ``delta`` and ``a``.

    ``delta`` and ``a`` are left as ``None`` when some ``K_m`` vanishes.
    """
    p = _check_finite_p(p)
    ws = shell_weights(g, P)
    D, K = [], []
    for m in range(P.n):
        D.append(float(ws[m + 1][P.idx[m]].max()))
        K.append(float(ws[m][P.idx[m + 1]].min()))
    admissible = all(k > 0 for k in K)
    if not admissible:
        return PartitionConstants(p, D, K, None, None, False)
    a = _sum_of_prefix_products([d / k for d, k in zip(D, K)]) ** (1 / p)
    return PartitionConstants(p, D, K, _forward_delta(D, K, p), a, True)


def chain_constants(g: WeightedGraph, C: SubsetChain, p: float = 2.0) -> ChainConstants:
    """``Khat_m = inf_{S_m} w_{S_{m+1}}/nu``, ``Dhat_m = sup_{S_{m+1}} w_{S_m}/nu``
    and the reverse-estimate constants ``delta_hat``, ``a_hat``."""
    p = _check_finite_p(p)
    ws = shell_weights(g, C)
    Kh, Dh = [], []
    for m in range(C.n):
        Kh.append(float(ws[m + 1][C.idx[m]].min()))
        Dh.append(float(ws[m][C.idx[m + 1]].max()))
    ok = all(k > 0 for k in Kh) and all(d > 0 for d in Dh)
    if not ok:
        return ChainConstants(p, Kh, Dh, None, None, False)
    a_hat = _sum_of_prefix_products([k / d for k, d in zip(Kh, Dh)]) ** (1 / p)
    return ChainConstants(p, Kh, Dh, _reverse_delta(Kh, Dh, p), a_hat, True)


def _admissible_constants(g, P, p) -> PartitionConstants:
    c = partition_constants(g, P, p)
    if not c.admissible:
        bad = [m for m, k in enumerate(c.K) if k <= 0]
        raise InadmissiblePartitionError(f"partition is not admissible: K_m = 0 for m in {bad}")
    return c


def _well_defined_constants(g, C, p) -> ChainConstants:
    c = chain_constants(g, C, p)
    if not c.well_defined:
        raise InadmissiblePartitionError("chain constants are ill-defined: some Khat_m or Dhat_m is 0")
    return c


# -- construction ---------------------------------------------------------------


def build_closure_partition(g: WeightedGraph, S0: Iterable[str]) -> Partition:
    """Shells ``S_0``, ``b(S_0)``, ``b(cl(S_0))``, ... until the vertex set is exhausted.

    ``cl`` adds every vertex joined by a positive-weight edge; ``b`` is the
    newly added layer.
    """
    start = g.indices(S0)
    if start.size == 0:
        raise ValueError("initial set must be non-empty")
    level = np.full(g.n_vertices, -1)
    level[start] = 0
    frontier = start
    A = g.adjacency
    shells = [frontier]
    while True:
        sub = A[frontier]
        reached = np.unique(sub.indices[sub.data > 0])
        new = reached[level[reached] < 0]
        if new.size == 0:
            break
        level[new] = len(shells)
        shells.append(new)
        frontier = new
    if np.any(level < 0):
        missing = [g.vertices[i] for i in np.nonzero(level < 0)[0]]
        raise ValueError(f"vertices unreachable from the initial set: {missing}")
    return Partition.from_shells(g, [[g.vertices[i] for i in s] for s in shells])


def two_set_partition(g: WeightedGraph, S0: Iterable[str]) -> Partition:
    """The partition ``(S_0, V \\ S_0)`` (just ``(S_0,)`` when ``S_0 = V``)."""
    mask = g.mask(S0)
    shells = [[v for v, m in zip(g.vertices, mask) if m]]
    rest = [v for v, m in zip(g.vertices, mask) if not m]
    if rest:
        shells.append(rest)
    return Partition.from_shells(g, shells)


def pruned_chain(g: WeightedGraph, shells: Sequence[Iterable[str]]) -> SubsetChain:
    """Largest chain inside ``shells`` with every ``Khat_m > 0``.

    Working backwards, each shell keeps only the vertices joined to the
    (already pruned) next shell; if a shell empties out, the chain is cut
    before it and pruning restarts. ``Dhat_m > 0`` then holds automatically.
    The initial set may shrink.
    """
    work = [g.mask(s) for s in shells]
    while True:
        kept = [work[-1]]
        cut = None
        for m in range(len(work) - 2, -1, -1):
            reach = (g.adjacency @ kept[0].astype(float)) > 0
            s = work[m] & reach
            if not s.any():
                cut = m
                break
            kept.insert(0, s)
        if cut is None:
            break
        work = work[: cut + 1]
    return SubsetChain.from_shells(
        g, [[g.vertices[i] for i in np.nonzero(m)[0]] for m in kept]
    )


def anchored_chain(g: WeightedGraph, shells: Sequence[Iterable[str]]) -> SubsetChain | None:
    """Longest pruned prefix of ``shells`` that keeps the whole initial set.

    Returns ``None`` when even ``(S_0, S_1)`` loses vertices of ``S_0``, i.e.
    some vertex of ``S_0`` has no neighbour in ``S_1``.
    """
    shells = [list(s) for s in shells]
    S0 = set(shells[0])
    for length in range(len(shells), 1, -1):
        C = pruned_chain(g, shells[:length])
        if set(C.shells[0]) == S0 and C.n >= 1:
            return C
    return None


# -- inequality checks ------------------------------------------------------------


def poincare_forward_check(g: WeightedGraph, P: Partition, f, p: float = 2.0) -> VerificationRecord:
    """``||f|| <= a ||f|_{S_0}|| + delta ||grad_w f||`` for an admissible partition."""
    f = as_signal(g, f)
    c = _admissible_constants(g, P, p)
    norm = lp_norm(g, f, p)
    f0 = lp_norm(g, f, p, support=P.idx[0])
    grad = weighted_gradient_norm(g, f, p)
    return VerificationRecord(
        "poincare_forward",
        lhs=norm,
        rhs=c.a * f0 + c.delta * grad,
        constants=c.to_dict(),
        details={"norm": norm, "norm_S0": f0, "gradient_norm": grad},
    )


def poincare_zero_on_S0_check(g: WeightedGraph, P: Partition, f, p: float = 2.0) -> VerificationRecord:
    """For ``f`` vanishing on ``S_0``: ``||f|| <= delta ||grad_w f||`` (finite ``p``),
    ``||f||_inf <= n ||grad f||_inf`` (``p = inf``)."""
    f = as_signal(g, f)
    if np.any(f[P.idx[0]] != 0):
        raise ValueError("signal does not vanish on the initial set S_0")
    p = float(p)
    rest = np.setdiff1d(np.arange(g.n_vertices), P.idx[0])
    if math.isinf(p):
        c = _admissible_constants(g, P, 2.0)
        grad = weighted_gradient_norm(g, f, math.inf)
        norm = lp_norm(g, f, math.inf, support=rest)
        return VerificationRecord(
            "poincare_zero_on_S0",
            lhs=norm,
            rhs=P.n * grad,
            constants={"p": "inf", "n": P.n, "K": c.K, "D": c.D},
            details={"norm": norm, "gradient_norm": grad},
        )
    c = _admissible_constants(g, P, p)
    norm = lp_norm(g, f, p, support=rest)
    grad = weighted_gradient_norm(g, f, p)
    return VerificationRecord(
        "poincare_zero_on_S0",
        lhs=norm,
        rhs=c.delta * grad,
        constants=c.to_dict(),
        details={"norm": norm, "gradient_norm": grad},
    )


def reverse_check(g: WeightedGraph, C: SubsetChain, f, p: float = 2.0) -> VerificationRecord:
    """``a_hat ||f|_{S_0}|| <= ||f|| + delta_hat ||grad_w f||`` for a well-defined chain."""
    f = as_signal(g, f)
    c = _well_defined_constants(g, C, p)
    norm = lp_norm(g, f, p)
    f0 = lp_norm(g, f, p, support=C.idx[0])
    grad = weighted_gradient_norm(g, f, p)
    return VerificationRecord(
        "poincare_reverse",
        lhs=c.a_hat * f0,
        rhs=norm + c.delta_hat * grad,
        constants=c.to_dict(),
        details={"norm": norm, "norm_S0": f0, "gradient_norm": grad},
    )


def poincare_support_on_S0_check(g: WeightedGraph, C: SubsetChain, f, p: float = 2.0) -> VerificationRecord:
    """For ``f`` supported on ``S_0`` and ``a_hat > 1``:
    ``||f|| <= delta_hat / (a_hat - 1) ||grad_w f||``."""
    f = as_signal(g, f)
    outside = np.ones(g.n_vertices, dtype=bool)
    outside[C.idx[0]] = False
    if np.any(f[outside] != 0):
        raise ValueError("signal is not supported on the initial set S_0")
    c = _well_defined_constants(g, C, p)
    if not c.a_hat > 1:
        raise InadmissiblePartitionError("needs a_hat > 1 (chain of length >= 1)")
    norm = lp_norm(g, f, p, support=C.idx[0])
    grad = weighted_gradient_norm(g, f, p)
    return VerificationRecord(
        "poincare_support_on_S0",
        lhs=norm,
        rhs=c.delta_hat / (c.a_hat - 1) * grad,
        constants=c.to_dict(),
        details={"norm": norm, "gradient_norm": grad},
    )


@dataclass
class ShellRecord:
    """Per-shell diagnostics for shell ``m >= 1``."""

    m: int
    phi: float
    norm: float
    step_bound: float
    cumulative_bound: float

    @property
    def passed(self) -> bool:
        return passes(self.norm, self.step_bound) and passes(self.norm, self.cumulative_bound)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "phi": self.phi,
            "norm": self.norm,
            "step_bound": self.step_bound,
            "cumulative_bound": self.cumulative_bound,
            "passed": self.passed,
        }


def shell_estimate_check(g: WeightedGraph, P: Partition, f, p: float = 2.0) -> list[ShellRecord]:
    """Shell-by-shell propagation of ``||f_m||`` from ``||f_0||``.

    ``phi_m = (K_{m-1}^{-1} sum_{u in S_m, v in S_{m-1}} |f(u)-f(v)|^p w(u,v))^(1/p)``;
    the step bound is ``(D_{m-1}/K_{m-1})^(1/p) ||f_{m-1}|| + phi_m`` and the
    cumulative bound unrolls it back to ``S_0``.
    """
    f = as_signal(g, f)
    c = _admissible_constants(g, P, p)
    p = c.p
    label = np.empty(g.n_vertices, dtype=np.intp)
    for m, a in enumerate(P.idx):
        label[a] = m
    li, lj = label[g.edge_i], label[g.edge_j]
    diff = np.abs(f[g.edge_i] - f[g.edge_j]) ** p * g.edge_w
    norms = [lp_norm(g, f, p, support=a) for a in P.idx]
    r = [d / k for d, k in zip(c.D, c.K)]
    out = []
    phis = [0.0]
    for m in range(1, P.n + 1):
        between = ((li == m) & (lj == m - 1)) | ((li == m - 1) & (lj == m))
        phi = float((diff[between].sum() / c.K[m - 1]) ** (1 / p))
        phis.append(phi)
        step = r[m - 1] ** (1 / p) * norms[m - 1] + phi
        cum = math.prod(r[:m]) ** (1 / p) * norms[0]
        for j in range(1, m + 1):
            cum += phis[j] * math.prod(r[j:m]) ** (1 / p)
        out.append(ShellRecord(m, phi, norms[m], step, cum))
    return out


# -- file format --------------------------------------------------------------------


def load_shells(stream: TextIO, *, source: str | None = None) -> list[list[str]]:
    """One shell per line, vertices separated by whitespace; ``#`` lines ignored."""
    shells = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        shells.append(line.split())
    if not shells:
        raise GraphParseError("no shells found", None, source)
    return shells


def format_shells(C: SubsetChain) -> str:
    return "".join(" ".join(s) + "\n" for s in C.shells)
