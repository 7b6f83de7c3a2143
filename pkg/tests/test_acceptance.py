"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see only these lines,
or as part of the full suite.
"""

import math
import time

import numpy as np
import pytest

from pwsampling import worked
from pwsampling.graph import apply_laplacian, cycle_graph, random_connected_graph, weighted_gradient_norm
from pwsampling.partition import (
    build_closure_partition,
    chain_constants,
    poincare_forward_check,
    pruned_chain,
    reverse_check,
    shell_estimate_check,
)
from pwsampling.sampling import exact_frame_bounds, frame_reconstruct, sampling_bounds
from pwsampling.shannon import integer_constants, line_constants_generic, shannon_demo
from pwsampling.spectral import PWProjector, decompose, spectral_geometry_report

SEED = 20240601
P_VALUES = (1.0, 1.5, 2.0, 3.0)
INSTANCES_PER_P = 60


def _report(capsys, number, ok, elapsed, limit, detail):
    verdict = "PASS" if ok and elapsed < limit else "FAIL"
    with capsys.disabled():
        print(f"\n[criterion {number}] {verdict} ({elapsed:.2f}s < {limit:g}s) {detail}")
    assert ok, detail
    assert elapsed < limit, f"runtime {elapsed:.2f}s exceeds {limit}s"


def _random_instances():
    """Graphs with closure partitions and pruned chains, four p values, random signals.

    Instances with p = 2 use unit vertex weights so the spectral criterion can
    reuse them; the rest draw random vertex weights.
    """
    rng = np.random.default_rng(SEED)
    out = []
    for p in P_VALUES:
        for _ in range(INSTANCES_PER_P):
            n = int(rng.integers(4, 49))
            g = random_connected_graph(
                rng, n, edge_prob=float(rng.uniform(0.03, 0.4)), random_nu=p != 2.0
            )
            S0 = [str(v) for v in rng.choice(n, size=int(rng.integers(1, max(2, n // 3))), replace=False)]
            P = build_closure_partition(g, S0)
            C = pruned_chain(g, P.shells)
            f = rng.normal(size=n) * rng.uniform(0.1, 10.0)
            out.append((p, g, P, C, f))
    return out


_INSTANCES = None


def instances():
    global _INSTANCES
    if _INSTANCES is None:
        _INSTANCES = _random_instances()
    return _INSTANCES


def test_criterion_1_star(capsys):
    t = time.perf_counter()
    r = worked.star_example(10)
    elapsed = time.perf_counter() - t
    ok = (
        r["K0"] == 1.0
        and r["D0"] == 10.0
        and r["a"] == math.sqrt(11)
        and r["delta"] == 1.0
        and r["spectrum_error"] <= 1e-8
        and r["constant_signal"]["passed"]
        and abs(r["constant_signal"]["slack"]) <= 1e-12
        and r["lambda_1"] == pytest.approx(1.0, abs=1e-8)
        and r["lambda_1"] >= r["lambda_1_bound"] == 0.5
    )
    _report(capsys, 1, ok, elapsed, 1.0, f"spectrum error {r['spectrum_error']:.1e}, lambda_1 = {r['lambda_1']:.12f}")


def test_criterion_2_wheel(capsys):
    t = time.perf_counter()
    wheels = [worked.wheel_example(N) for N in (10, 50, 200)]
    mono = worked.wheel_monotone((10, 50, 200), (1, 2, 3))
    elapsed = time.perf_counter() - t
    resid = max(w["eigen_residual"] for w in wheels)
    slack = min(w["min_slack"] for w in wheels)
    ok = resid <= 1e-8 and slack >= 0 and mono["decreasing"] and all(w["passed"] for w in wheels)
    _report(capsys, 2, ok, elapsed, 10.0, f"eigen residual {resid:.1e}, min slack {slack:.3e}, monotone {mono['decreasing']}")


def test_criterion_3_laplacian_identity(capsys):
    t = time.perf_counter()
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    count = 250
    for _ in range(count):
        n = int(rng.integers(2, 65))
        g = random_connected_graph(rng, n, edge_prob=float(rng.uniform(0.02, 0.6)), random_nu=True)
        f = rng.normal(size=n) * rng.uniform(0.01, 100.0)
        err = abs(2 * float(f @ apply_laplacian(g, f)) - weighted_gradient_norm(g, f, 2) ** 2)
        worst = max(worst, err / max(1.0, float(f @ f)))
    elapsed = time.perf_counter() - t
    _report(capsys, 3, worst <= 1e-10, elapsed, 10.0, f"{count} graphs, worst scaled error {worst:.1e}")


def test_criterion_4_poincare_suite(capsys):
    t = time.perf_counter()
    insts = instances()
    failures = []
    worst = math.inf
    n_shells = 0
    for i, (p, g, P, C, f) in enumerate(insts):
        recs = [poincare_forward_check(g, P, f, p), reverse_check(g, C, f, p)]
        for r in recs:
            worst = min(worst, r.slack / max(1.0, abs(r.rhs)))
            if not r.passed:
                failures.append((i, r.name))
        assert chain_constants(g, C, p).well_defined
        for s in shell_estimate_check(g, P, f, p):
            n_shells += 1
            if not s.passed:
                failures.append((i, f"shell {s.m}"))
    elapsed = time.perf_counter() - t
    _report(
        capsys, 4, not failures, elapsed, 30.0,
        f"{len(insts)} instances, {n_shells} shell checks, min relative slack {worst:.3e}, failures {failures[:5]}",
    )


def test_criterion_5_spectral_counts(capsys):
    t = time.perf_counter()
    insts = [x for x in instances() if x[0] == 2.0]
    failures = []
    for i, (_, g, P, _, _) in enumerate(insts):
        rep = spectral_geometry_report(g, decompose(g), P)
        if not rep.passed:
            failures.append(i)
    elapsed = time.perf_counter() - t
    _report(capsys, 5, not failures and len(insts) > 0, elapsed, 30.0, f"{len(insts)} instances, failures {failures[:5]}")


def test_criterion_6_frame_reconstruction(capsys):
    t = time.perf_counter()
    g = cycle_graph(15)
    dec = decompose(g)
    omega = 0.4
    S0 = [str(i) for i in range(0, 15, 3)]
    fb = sampling_bounds(g, S0, omega)
    lo, hi = exact_frame_bounds(dec, omega, S0)
    ok = fb.K0 / 2 == 0.5 and fb.A <= lo <= hi <= fb.B
    proj = PWProjector(dec, omega)
    rng = np.random.default_rng(SEED + 6)
    worst_rel = 0.0
    max_iter = 0
    for _ in range(50):
        f = proj.random_element(rng)
        nf = float(np.linalg.norm(f))
        tr = frame_reconstruct(dec, omega, S0, {v: f[g.index[v]] for v in S0}, truth=f, bounds=fb)
        ok = ok and all(e <= fb.eta**n * nf * (1 + 1e-9) + 1e-15 for n, e in enumerate(tr.errors))
        worst_rel = max(worst_rel, tr.errors[-1] / nf)
        max_iter = max(max_iter, tr.iterations)
    ok = ok and worst_rel <= 1e-8
    elapsed = time.perf_counter() - t
    _report(
        capsys, 6, ok, elapsed, 10.0,
        f"A={fb.A:.6f} <= [{lo:.6f}, {hi:.6f}] <= B={fb.B:.6f}, eta={fb.eta:.6f}, "
        f"worst relative error {worst_rel:.1e} after <= {max_iter} iterations",
    )


def test_criterion_7_shannon(capsys):
    t = time.perf_counter()
    closed = integer_constants(5)
    generic = line_constants_generic(5, periods=45)
    constants_ok = (
        closed.delta == math.sqrt(3)
        and closed.a == math.sqrt(5)
        and closed.a_hat == math.sqrt(5)
        and all(getattr(closed, a) == getattr(generic, a) for a in ("delta", "a", "delta_hat", "a_hat"))
    )
    demo = shannon_demo(5, 0.1, 45, seed=SEED).to_dict()
    gb = demo["graph_bounds"]
    identity_ok = demo["alias_free"] and demo["shannon_identity"]["error"] <= 1e-8
    sandwich_ok = gb["closed_form_applicable"] and gb["closed_form_passed"] and gb["passed"]
    x = 3 * math.sqrt(2 - 2 * math.cos(0.1))
    tight = demo["tightness"]
    tight_ok = tight["ratio"] <= 1 + 2 * 6 * math.sqrt(2 - 2 * math.cos(0.1)) and tight["spread"] == pytest.approx(x)
    limit = shannon_demo(5, math.pi / 5, 45, seed=SEED).to_dict()
    factor = limit["oversampling"]["oversampling_factor"]
    gap_ok = (
        limit["graph_bounds"]["applicable"] is False
        and limit["graph_bounds"]["closed_form_applicable"] is False
        and factor > math.pi / 2
        and limit["oversampling"]["asymptotic_factor"] == math.pi / 2
    )
    elapsed = time.perf_counter() - t
    ok = constants_ok and identity_ok and sandwich_ok and tight_ok and gap_ok
    _report(
        capsys, 7, ok, elapsed, 10.0,
        f"constants {constants_ok}, identity error {demo['shannon_identity']['error']:.1e}, "
        f"sandwich {sandwich_ok}, tightness {tight['ratio']:.4f} <= {tight['cap']:.4f}, "
        f"oversampling factor {factor:.4f} (limit pi/2)",
    )
