"""Reproductions of the star, wheel and integer-line examples."""

from __future__ import annotations

import math

import numpy as np

from .graph import apply_laplacian, lp_norm, star_graph, weighted_gradient_norm, wheel_graph
from .partition import build_closure_partition, partition_constants, poincare_forward_check, two_set_partition
from .shannon import cycle_model, integer_constants, line_constants_generic, shannon_demo
from .spectral import decompose


def star_example(n_leaves: int = 10) -> dict:
    g = star_graph(n_leaves)
    P = build_closure_partition(g, ["v0"])
    c = partition_constants(g, P, 2.0)
    dec = decompose(g)
    expected = np.array([0.0] + [1.0] * (n_leaves - 1) + [n_leaves + 1.0])
    spec_err = float(np.abs(dec.eigenvalues - expected).max())
    f = np.ones(g.n_vertices)
    rec = poincare_forward_check(g, P, f, 2.0)
    lam1 = float(dec.eigenvalues[1])
    return {
        "N": n_leaves,
        "K0": c.K[0],
        "D0": c.D[0],
        "a": c.a,
        "delta": c.delta,
        "constants_exact": c.K == [1.0] and c.D == [float(n_leaves)] and c.delta == 1.0
        and c.a == math.sqrt(n_leaves + 1),
        "spectrum_error": spec_err,
        "constant_signal": rec.to_dict(),
        "lambda_1": lam1,
        "lambda_1_bound": c.K[0] / 2,
        "passed": bool(spec_err <= 1e-8 and rec.passed and abs(rec.slack) <= 1e-12 and lam1 >= c.K[0] / 2),
    }


def wheel_rhs(n_rim: int, lam: float) -> float:
    """``sqrt(1 + 1/N) + sqrt(2) sqrt((lam + 1)/N)``."""
    return math.sqrt(1 + 1 / n_rim) + math.sqrt(2) * math.sqrt((lam + 1) / n_rim)


def wheel_example(n_rim: int) -> dict:
    """Lift every non-constant cycle eigenfunction to the wheel and check the
    eigen-relation and the two-set Poincare bound for it."""
    g = wheel_graph(n_rim)
    rim = [f"v{i}" for i in range(1, n_rim + 1)]
    P = two_set_partition(g, rim)
    c = partition_constants(g, P, 2.0)
    model = cycle_model(n_rim)
    worst_resid = 0.0
    worst_slack = math.inf
    for j in range(1, n_rim):
        u = np.zeros(g.n_vertices)
        u[:n_rim] = model.eigenvectors[:, j]
        lam = float(model.eigenvalues[j])
        Lu = apply_laplacian(g, u)
        worst_resid = max(worst_resid, float(np.linalg.norm(Lu - (lam + 1) * u)))
        rhs = c.a * lp_norm(g, u, 2, support=P.idx[0]) + c.delta * weighted_gradient_norm(g, u, 2)
        worst_slack = min(worst_slack, rhs - 1.0, wheel_rhs(n_rim, lam) - 1.0)
    return {
        "N": n_rim,
        "K0": c.K[0],
        "D0": c.D[0],
        "a": c.a,
        "delta": c.delta,
        "eigen_residual": worst_resid,
        "min_slack": worst_slack,
        "passed": bool(worst_resid <= 1e-8 and worst_slack >= -1e-9),
    }


def wheel_monotone(sizes=(10, 50, 200), freqs=(1, 2, 3)) -> dict:
    """Right side of the wheel bound for the DFT index ``m`` as ``N`` grows."""
    table = {}
    ok = True
    for m in freqs:
        vals = [wheel_rhs(N, 2 - 2 * math.cos(2 * math.pi * m / N)) for N in sizes]
        table[str(m)] = vals
        ok = ok and all(b < a for a, b in zip(vals, vals[1:])) and all(v > 1 for v in vals)
    return {"sizes": list(sizes), "rhs": table, "decreasing": ok}


def line_example(k: int = 5, omega: float = 0.1, periods: int = 45, seed: int = 0) -> dict:
    closed = integer_constants(k)
    generic = line_constants_generic(k, periods)
    demo = shannon_demo(k, omega, periods, seed=seed)
    same = all(getattr(closed, a) == getattr(generic, a) for a in ("delta", "a", "delta_hat", "a_hat"))
    return {
        "closed_form": closed.to_dict(),
        "generic_match": same,
        "demo": demo.to_dict(),
        "passed": bool(same and demo.passed),
    }


def all_examples() -> dict:
    star = star_example(10)
    wheels = [wheel_example(N) for N in (10, 50, 200)]
    mono = wheel_monotone()
    line = line_example()
    return {
        "star": star,
        "wheel": {"instances": wheels, "monotone": mono},
        "line": line,
        "passed": bool(star["passed"] and all(w["passed"] for w in wheels) and mono["decreasing"] and line["passed"]),
    }
