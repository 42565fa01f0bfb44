"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line (also repeated in
the pytest terminal summary). Run with ``pytest tests/test_acceptance.py -s``.
"""

import json
import time
from fractions import Fraction

import numpy as np
import pytest
from conftest import record
from oracles import grid_intrinsic, random_rational_distribution, table_2x2xE

from secretdist.cli import Report, cmd_intrinsic
from secretdist.dist_core import marginal, paper_distribution
from secretdist.fileio import dump_distribution
from secretdist.info import conditional_mutual_information, entropy, mutual_information
from secretdist.intrinsic import (
    Channel,
    OptimizerConfig,
    apply_channel,
    certify_zero_cmi,
    intrinsic_information_upper_bound,
)
from secretdist.protocol import WARN_INITIAL_CMI, WITNESS_MID, is_perfect_sbit, run_paper_protocol, untrusted_courier_demo
from secretdist.quantum import (
    apply_cnot,
    build_paper_state,
    computational_distribution,
    fidelity_with_phi_plus,
    measure_computational,
    partial_transpose_min_eigenvalue,
)

EVE = ("e0", "e01", "e10", "f0", "f1")
MERGE_E = Channel.deterministic(EVE, EVE, {"e01": "e0", "e10": "e0"})
THIRD = 1 / 3


def test_criterion_1_pipeline_exactness():
    t0 = time.perf_counter()
    trace = run_paper_protocol(OptimizerConfig(restarts=0))
    elapsed = time.perf_counter() - t0
    ok = (trace.initial == paper_distribution("initial")
          and trace.entries[0].distribution == paper_distribution("after_alice_cnot")
          and trace.entries[2].distribution == paper_distribution("final")
          and trace.success_probability == Fraction(1, 3)
          and is_perfect_sbit(trace.final, "A", "B", {"E"}).is_sbit
          and elapsed < 1.0)
    record(1, ok, f"p_success={trace.success_probability} runtime={elapsed:.3f}s")
    assert ok


def test_criterion_2_intrinsic_claims():
    t0 = time.perf_counter()
    trace = run_paper_protocol()  # default budget: 64 restarts
    checks = {c.name: c for c in trace.checks}
    t8, t9 = paper_distribution("initial"), paper_distribution("after_alice_cnot")
    res8 = intrinsic_information_upper_bound(t8, {"A", "C"}, {"B"}, "E")
    elapsed = time.perf_counter() - t0
    cmi8 = conditional_mutual_information(t8, {"A", "C"}, {"B"}, {"E"})
    cmi9 = conditional_mutual_information(t9, {"A", "B"}, {"C"}, {"E"})
    a = (certify_zero_cmi(apply_channel(t9, "E", WITNESS_MID), {"A", "B"}, {"C"}, {"E"})
         and checks["mid_witness_certified_zero"].value == 0.0)
    b = res8.certified_zero and res8.value == 0.0 and res8.channel == MERGE_E
    c = abs(cmi8 - THIRD) <= 1e-9 and abs(cmi9 - THIRD) <= 1e-9 and WARN_INITIAL_CMI in trace.warnings
    ok = a and b and c and elapsed < 60
    record(2, ok, f"(a) witness zero={a} (b) merge channel certified={b} (c) cmi={cmi8:.12f},{cmi9:.12f} "
                  f"flagged={WARN_INITIAL_CMI in trace.warnings} runtime={elapsed:.1f}s")
    assert ok


def _bound_chain_ok(d, x, y, config):
    res = intrinsic_information_upper_bound(d, x, y, "E", config)
    cmi = conditional_mutual_information(d, x, y, {"E"})
    mi = mutual_information(d, x, y)
    measures = [res.value, cmi, mi, entropy(d, x), entropy(d, y), entropy(d, {"E"})]
    return res.value <= cmi + 1e-9 and res.value <= mi + 1e-9 and min(measures) >= -1e-12


def test_criterion_3_bound_chain():
    staged = [("initial", {"A", "C"}, {"B"}), ("after_alice_cnot", {"A", "B"}, {"C"}), ("final", {"A"}, {"B", "C"})]
    failures = [s for s, x, y in staged if not _bound_chain_ok(paper_distribution(s), x, y, OptimizerConfig())]
    reduced = OptimizerConfig(restarts=4, max_sweeps=150)
    for i in range(200):
        rng = np.random.default_rng([3, i])
        sizes = {"A": 2, "B": 2, "C": int(rng.integers(1, 3)), "E": int(rng.integers(1, 5))}
        d = random_rational_distribution(rng, sizes)
        if not _bound_chain_ok(d, {"A"}, {"B", "C"}, reduced):
            failures.append(i)
    ok = not failures
    record(3, ok, f"3 tables + 200 random cases, failures={failures[:10]}")
    assert ok


def test_criterion_4_key_rate_sandwich():
    final = paper_distribution("final")
    res = intrinsic_information_upper_bound(final, {"A"}, {"B", "C"}, "E")
    trace = run_paper_protocol(OptimizerConfig(restarts=0))
    lower = float(trace.success_probability) * 1  # one sbit per accepted run
    ok = (abs(res.value - THIRD) <= 1e-6 and lower <= res.value + 1e-6
          and is_perfect_sbit(trace.final, "A", "B", {"E"}).is_sbit)
    record(4, ok, f"{lower:.6f} <= S <= {res.value:.9f}")
    assert ok


def test_criterion_5_quantum_chain():
    t0 = time.perf_counter()
    rho, sigma, tau = (build_paper_state(s) for s in ("rho_initial", "sigma_mid", "tau_final"))
    r1 = np.max(np.abs(apply_cnot(rho, "A", "C").matrix - sigma.matrix))
    r2 = np.max(np.abs(apply_cnot(sigma, "B", "C").matrix - tau.matrix))
    ppt = [partial_transpose_min_eigenvalue(rho, [q]) for q in "ABC"] + [partial_transpose_min_eigenvalue(sigma, ["C"])]
    outcome, p, post = measure_computational(tau, "C")[0]
    fid = fidelity_with_phi_plus(post)
    elapsed = time.perf_counter() - t0
    ok = (r1 <= 1e-12 and r2 <= 1e-12 and min(ppt) >= -1e-12 and outcome == 0
          and abs(p - THIRD) <= 1e-12 and abs(fid - 1) <= 1e-12 and elapsed < 1.0)
    record(5, ok, f"residuals={r1:.1e},{r2:.1e} min_pt={min(ppt):.1e} p0={p:.15f} F={fid:.15f} runtime={elapsed:.3f}s")
    assert ok


def test_criterion_6_cross_formalism():
    d = computational_distribution(build_paper_state("rho_initial"))
    ok = d.same_table(marginal(paper_distribution("initial"), {"A", "B", "C"}))
    record(6, ok, "rho diagonal == table marginal on A,B,C (exact)")
    assert ok


def test_criterion_7_courier_demo():
    demo = untrusted_courier_demo()
    ok = (demo.key_uniform and demo.eve_cmi == 0.0 and demo.charlie_cmi == 0.0
          and demo.eve_independent_exact and demo.charlie_independent_exact
          and abs(demo.collusion_mi - 1.0) <= 1e-12)
    record(7, ok, f"I(key:Eve)={demo.eve_cmi} I(key:Charlie)={demo.charlie_cmi} I(key:both)={demo.collusion_mi}")
    assert ok


@pytest.fixture(scope="module")
def oracle_cases():
    """(optimizer - grid) on 100 seeded cases, binary A and B, |E| cycling through 1, 2, 3."""
    diffs = []
    for i in range(100):
        d = random_rational_distribution(np.random.default_rng([8, i]), {"A": 2, "B": 2, "E": 1 + i % 3})
        res = intrinsic_information_upper_bound(d, {"A"}, {"B"}, "E")
        diffs.append(res.value - grid_intrinsic(table_2x2xE(d, "A", "B", "E")))
    return np.array(diffs)


def test_criterion_8_oracle_equivalence(oracle_cases):
    # The grid only sees channels on the 1/64 lattice, so it is an upper bound on
    # the true minimum: the optimizer must not exceed it and must come within 1e-3.
    worst_above = float(oracle_cases.max())
    ok = worst_above <= 1e-9 and float(-oracle_cases.min()) <= 1e-3
    record("8", ok, f"optimizer <= grid + 1e-9 and grid - optimizer <= 1e-3 on 100 cases "
                    f"(max excess {worst_above:.1e}, max gap {-oracle_cases.min():.1e})")
    assert ok


@pytest.mark.xfail(strict=True, reason="off-lattice minima sit below the 1/64 grid; see README")
def test_criterion_8_literal_never_below_grid(oracle_cases):
    below = oracle_cases < -1e-9
    ok = not below.any()
    record("8-literal", ok, f"optimizer >= grid - 1e-9: {int(below.sum())}/100 cases below the grid, "
                            f"deepest {oracle_cases.min():.2e}")
    assert ok


def test_criterion_9_determinism(tmp_path):
    path = tmp_path / "final.json"
    dump_distribution(paper_distribution("final"), path)
    payloads = []
    for _ in range(2):
        report = Report("intrinsic", [])
        cmd_intrinsic(report, str(path), "A", "B", "E", restarts=16, seed=7)
        payloads.append(json.dumps(report.results, sort_keys=True).encode())
    ok = payloads[0] == payloads[1]
    record(9, ok, f"{len(payloads[0])} result bytes identical across runs")
    assert ok
