"""Weighted combinatorial graphs: storage, norms, gradient and Laplacian.

Vertices are opaque string identifiers mapped to dense indices in declaration
order. Signals are plain 1-d float arrays indexed in that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np
import scipy.sparse as sp


class GraphParseError(ValueError):
    """Malformed graph, vertex-weight, signal or partition input."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Finite graph with symmetric edge weights ``w`` and vertex weights ``nu``.

    Edges are stored once, keyed by the canonical index pair ``(i, j)`` with
    ``i < j``. ``adjacency`` is the symmetric sparse weight matrix.
    """

    vertices: tuple[str, ...]
    edge_i: np.ndarray
    edge_j: np.ndarray
    edge_w: np.ndarray
    nu: np.ndarray
    index: Mapping[str, int] = field(repr=False)
    adjacency: sp.csr_matrix = field(repr=False)

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[str, str, float]],
        nu: Mapping[str, float] | None = None,
        vertices: Sequence[str] | None = None,
    ) -> "WeightedGraph":
        """Build a graph from ``(u, v, w)`` triples.

        Vertex order is ``vertices`` (if given) followed by first occurrence in
        ``edges``. Duplicate undirected edges, self-loops, negative or
        non-finite weights raise ``ValueError``.
        """
        order: list[str] = []
        index: dict[str, int] = {}

        def add(v: str) -> int:
            if v not in index:
                index[v] = len(order)
                order.append(v)
            return index[v]

        for v in vertices or ():
            add(str(v))
        pairs: dict[tuple[int, int], float] = {}
        for u, v, w in edges:
            u, v, w = str(u), str(v), float(w)
            if u == v:
                raise ValueError(f"self-loop at vertex {u!r}")
            if not math.isfinite(w) or w < 0:
                raise ValueError(f"negative or non-finite weight {w} on edge ({u}, {v})")
            i, j = add(u), add(v)
            key = (min(i, j), max(i, j))
            if key in pairs:
                raise ValueError(f"duplicate edge ({u}, {v})")
            pairs[key] = w

        nu_arr = np.ones(len(order))
        for v, x in (nu or {}).items():
            if v not in index:
                raise ValueError(f"vertex weight for unknown vertex {v!r}")
            x = float(x)
            if not (math.isfinite(x) and x > 0):
                raise ValueError(f"non-positive vertex weight {x} at {v!r}")
            nu_arr[index[v]] = x
        return cls._assemble(tuple(order), index, pairs, nu_arr)

    @classmethod
    def from_dense(
        cls, weights: np.ndarray, nu: np.ndarray | None = None, names: Sequence[str] | None = None
    ) -> "WeightedGraph":
        """Build a graph from a symmetric non-negative weight matrix."""
        W = np.asarray(weights, dtype=float)
        n = W.shape[0]
        if W.shape != (n, n) or not np.allclose(W, W.T, rtol=0, atol=0):
            raise ValueError("weight matrix must be square and exactly symmetric")
        if np.any(np.diag(W) != 0):
            raise ValueError("weight matrix must have a zero diagonal")
        if np.any(W < 0) or not np.all(np.isfinite(W)):
            raise ValueError("weights must be finite and non-negative")
        names = [str(i) for i in range(n)] if names is None else [str(s) for s in names]
        iu, ju = np.nonzero(np.triu(W, 1))
        pairs = {(int(i), int(j)): float(W[i, j]) for i, j in zip(iu, ju)}
        nu_arr = np.ones(n) if nu is None else np.asarray(nu, dtype=float).copy()
        if nu_arr.shape != (n,) or np.any(~(nu_arr > 0)) or not np.all(np.isfinite(nu_arr)):
            raise ValueError("non-positive vertex weight")
        return cls._assemble(tuple(names), {v: k for k, v in enumerate(names)}, pairs, nu_arr)

    @classmethod
    def _assemble(cls, order, index, pairs, nu_arr) -> "WeightedGraph":
        n = len(order)
        keys = sorted(pairs)
        ei = np.array([k[0] for k in keys], dtype=np.intp)
        ej = np.array([k[1] for k in keys], dtype=np.intp)
        ew = np.array([pairs[k] for k in keys], dtype=float)
        adj = sp.coo_matrix(
            (np.concatenate([ew, ew]), (np.concatenate([ei, ej]), np.concatenate([ej, ei]))),
            shape=(n, n),
        ).tocsr()
        return cls(
            vertices=order,
            edge_i=_readonly(ei),
            edge_j=_readonly(ej),
            edge_w=_readonly(ew),
            nu=_readonly(nu_arr),
            index=dict(index),
            adjacency=adj,
        )

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def __len__(self) -> int:
        return len(self.vertices)

    def weight(self, u: str, v: str) -> float:
        return float(self.adjacency[self.index[u], self.index[v]])

    def degrees(self) -> np.ndarray:
        """``d(u) = sum_v w(u, v)`` for every vertex."""
        return np.asarray(self.adjacency.sum(axis=1)).ravel()

    def indices(self, vertex_set: Iterable[str]) -> np.ndarray:
        """Sorted index array for a set of vertex names."""
        out = []
        for v in vertex_set:
            try:
                out.append(self.index[v])
            except KeyError:
                raise KeyError(f"unknown vertex {v!r}") from None
        return np.array(sorted(set(out)), dtype=np.intp)

    def mask(self, vertex_set: Iterable[str]) -> np.ndarray:
        m = np.zeros(self.n_vertices, dtype=bool)
        m[self.indices(vertex_set)] = True
        return m

    def neighbors(self, v: str) -> list[str]:
        row = self.adjacency.getrow(self.index[v])
        return [self.vertices[j] for j, w in zip(row.indices, row.data) if w > 0]

    def has_unit_vertex_weights(self) -> bool:
        return bool(np.all(self.nu == 1.0))

    def laplacian(self) -> sp.csr_matrix:
        """Sparse matrix of ``(L f)(v) = sum_u (f(v) - f(u)) w(v, u)``."""
        return (sp.diags(self.degrees()) - self.adjacency).tocsr()

    def dense_laplacian(self) -> np.ndarray:
        return self.laplacian().toarray()

    def signal(self, values: Mapping[str, float] | None = None) -> np.ndarray:
        """Signal from a name -> value map; unlisted vertices get 0."""
        f = np.zeros(self.n_vertices)
        for v, x in (values or {}).items():
            f[self.index[v]] = float(x)
        return as_signal(self, f)


def as_signal(g: WeightedGraph, f) -> np.ndarray:
    """Validate ``f`` as a real finite signal on ``g`` and return it as float array."""
    arr = np.asarray(f, dtype=float)
    if arr.shape != (g.n_vertices,):
        raise ValueError(f"signal has shape {arr.shape}, graph has {g.n_vertices} vertices")
    if not np.all(np.isfinite(arr)):
        raise ValueError("signal contains non-finite values")
    return arr


def _check_p(p: float) -> float:
    p = float(p)
    if not p >= 1:
        raise ValueError(f"exponent p must satisfy p >= 1 or p = inf, got {p}")
    return p


def subset_weight(g: WeightedGraph, A: Iterable[str], v: str) -> float:
    """``w_A(v) = sum_{u in A} w(u, v)``."""
    idx = g.indices(A)
    if v not in g.index:
        raise KeyError(f"unknown vertex {v!r}")
    if idx.size == 0:
        return 0.0
    row = g.adjacency.getrow(g.index[v]).toarray().ravel()
    return float(row[idx].sum())


def subset_weights(g: WeightedGraph, A_mask: np.ndarray) -> np.ndarray:
    """Vectorised ``w_A(v)`` for every vertex ``v``, ``A`` given as a boolean mask."""
    return g.adjacency @ A_mask.astype(float)


def lp_norm(g: WeightedGraph, f, p: float = 2.0, support: np.ndarray | None = None) -> float:
    """Weighted norm ``(sum |f(v)|^p nu(v))^(1/p)``; max ``|f|`` for ``p = inf``.

    ``support`` optionally restricts the sum to an index array or mask.
    """
    p = _check_p(p)
    f = as_signal(g, f)
    nu = g.nu
    if support is not None:
        f, nu = f[support], nu[support]
    if f.size == 0:
        return 0.0
    if math.isinf(p):
        return float(np.max(np.abs(f)))
    a = np.abs(f)
    scale = a.max()
    if scale == 0:
        return 0.0
    return float(scale * np.sum((a / scale) ** p * nu) ** (1.0 / p))


def weighted_gradient_norm(g: WeightedGraph, f, p: float = 2.0) -> float:
    """``(sum_{u,v} |f(u) - f(v)|^p w(u, v))^(1/p)`` over ordered pairs.

    Each undirected edge contributes twice. For ``p = inf`` the weights are
    ignored and the largest difference across an edge is returned.
    """
    p = _check_p(p)
    f = as_signal(g, f)
    diff = np.abs(f[g.edge_i] - f[g.edge_j])
    if math.isinf(p):
        diff = diff[g.edge_w > 0]
        return float(diff.max()) if diff.size else 0.0
    scale = diff.max() if diff.size else 0.0
    if scale == 0:
        return 0.0
    return float(scale * (2.0 * np.sum((diff / scale) ** p * g.edge_w)) ** (1.0 / p))


def apply_laplacian(g: WeightedGraph, f) -> np.ndarray:
    f = as_signal(g, f)
    return g.degrees() * f - g.adjacency @ f


def laplacian_quadratic_form(g: WeightedGraph, f) -> float:
    """``<f, L f>``, evaluated as half the squared gradient 2-norm."""
    f = as_signal(g, f)
    diff = f[g.edge_i] - f[g.edge_j]
    return float(np.sum(diff * diff * g.edge_w))


# -- text formats -------------------------------------------------------------


def _data_lines(stream: TextIO):
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line


def _parse_float(text: str, lineno: int, source: str | None) -> float:
    try:
        x = float(text)
    except ValueError:
        raise GraphParseError(f"not a number: {text!r}", lineno, source) from None
    if not math.isfinite(x):
        raise GraphParseError(f"non-finite value {text!r}", lineno, source)
    return x


def _fields(line: str, n: int, lineno: int, source: str | None) -> list[str]:
    parts = line.split("\t")
    if len(parts) != n:
        parts = line.split()
    if len(parts) != n:
        raise GraphParseError(f"expected {n} tab-separated fields, got {len(parts)}", lineno, source)
    return [s.strip() for s in parts]


def load_graph(
    edges: TextIO,
    vertex_weights: TextIO | None = None,
    *,
    edge_source: str | None = None,
    weight_source: str | None = None,
) -> WeightedGraph:
    """Parse a ``u<TAB>v<TAB>w`` edge list and optional ``v<TAB>nu`` file."""
    order: list[str] = []
    seen: set[str] = set()
    triples = []
    keys: dict[frozenset, int] = {}
    for lineno, line in _data_lines(edges):
        u, v, ws = _fields(line, 3, lineno, edge_source)
        w = _parse_float(ws, lineno, edge_source)
        if w < 0:
            raise GraphParseError(f"negative weight {w}", lineno, edge_source)
        if u == v:
            raise GraphParseError(f"self-loop at vertex {u!r}", lineno, edge_source)
        key = frozenset((u, v))
        if key in keys:
            raise GraphParseError(
                f"duplicate edge ({u}, {v}); first given on line {keys[key]}", lineno, edge_source
            )
        keys[key] = lineno
        for x in (u, v):
            if x not in seen:
                seen.add(x)
                order.append(x)
        triples.append((u, v, w))

    nu: dict[str, float] = {}
    if vertex_weights is not None:
        for lineno, line in _data_lines(vertex_weights):
            v, xs = _fields(line, 2, lineno, weight_source)
            x = _parse_float(xs, lineno, weight_source)
            if v not in seen:
                raise GraphParseError(f"unknown vertex {v!r} in vertex-weight file", lineno, weight_source)
            if x <= 0:
                raise GraphParseError(f"non-positive vertex weight {x} for {v!r}", lineno, weight_source)
            nu[v] = x
    return WeightedGraph.from_edges(triples, nu=nu, vertices=order)


def load_vertex_values(
    g: WeightedGraph, stream: TextIO, *, source: str | None = None
) -> dict[str, float]:
    """Parse ``v<TAB>value`` lines into a name -> value map (order preserved)."""
    values: dict[str, float] = {}
    for lineno, line in _data_lines(stream):
        v, xs = _fields(line, 2, lineno, source)
        if v not in g.index:
            raise GraphParseError(f"unknown vertex {v!r}", lineno, source)
        if v in values:
            raise GraphParseError(f"vertex {v!r} listed twice", lineno, source)
        values[v] = _parse_float(xs, lineno, source)
    return values


def load_signal(g: WeightedGraph, stream: TextIO, *, source: str | None = None) -> np.ndarray:
    """Signal file; unlisted vertices default to 0."""
    return g.signal(load_vertex_values(g, stream, source=source))


def format_signal(g: WeightedGraph, f) -> str:
    f = as_signal(g, f)
    return "".join(f"{v}\t{x!r}\n" for v, x in zip(g.vertices, f.tolist()))


# -- standard graphs ----------------------------------------------------------


def path_graph(n: int) -> WeightedGraph:
    return WeightedGraph.from_edges(
        [(str(i), str(i + 1), 1.0) for i in range(n - 1)], vertices=[str(i) for i in range(n)]
    )


def cycle_graph(n: int) -> WeightedGraph:
    """Unit-weight cycle on vertices ``"0" .. str(n-1)``."""
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return WeightedGraph.from_edges([(str(i), str((i + 1) % n), 1.0) for i in range(n)])


def star_graph(n_leaves: int) -> WeightedGraph:
    """Star with center ``v0`` and leaves ``v1 .. vN``."""
    return WeightedGraph.from_edges([("v0", f"v{i}", 1.0) for i in range(1, n_leaves + 1)])


def wheel_graph(n_rim: int) -> WeightedGraph:
    """Cycle ``v1 .. vN`` plus hub ``v0`` joined to every rim vertex.

    Rim vertices come first in vertex order, the hub last.
    """
    rim = [f"v{i}" for i in range(1, n_rim + 1)]
    edges = [(rim[i], rim[(i + 1) % n_rim], 1.0) for i in range(n_rim)]
    edges += [("v0", r, 1.0) for r in rim]
    return WeightedGraph.from_edges(edges, vertices=rim + ["v0"])


def random_connected_graph(
    rng: np.random.Generator,
    n: int,
    edge_prob: float = 0.2,
    weight_range: tuple[float, float] = (0.1, 2.0),
    random_nu: bool = False,
) -> WeightedGraph:
    """Connected Erdos-Renyi-style graph: random spanning tree plus extra edges."""
    lo, hi = weight_range
    W = np.zeros((n, n))
    perm = rng.permutation(n)
    for k in range(1, n):
        a, b = perm[k], perm[rng.integers(0, k)]
        W[a, b] = W[b, a] = rng.uniform(lo, hi)
    extra = np.triu(rng.random((n, n)) < edge_prob, 1) & (W == 0)
    iu, ju = np.nonzero(extra)
    wv = rng.uniform(lo, hi, size=iu.size)
    W[iu, ju] = wv
    W[ju, iu] = wv
    nu = rng.uniform(0.5, 2.0, size=n) if random_nu else None
    return WeightedGraph.from_dense(W, nu=nu)
