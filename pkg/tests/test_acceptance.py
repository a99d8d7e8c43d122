"""Acceptance suite: one test per criterion, each printing a single verdict line.

Run with ``pytest tests/test_acceptance.py -v`` (verdicts appear in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""
import math
import time

import pytest

from twohciz import (
    BoundaryData,
    ChainConfig,
    andreief_consistency_check,
    closed_form_moments,
    exact_linear_statistic,
    flow_and_duality_check,
    hciz_confluent_log,
    hciz_log,
    hciz_mc_estimate,
    hirota_toda_check,
    km_normalization_log,
    km_normalization_quadrature,
    make_rng,
    parse_config,
    sample_km_mcmc,
    sample_two_hciz_matrix,
    spectral_moment_estimate,
    ward_dilation_check,
    ward_l_minus1_check,
)
from twohciz.cli import default_config_text, execute_suite, run_suite
from twohciz.identities import PASS, REPORT_ONLY

VERDICTS = []
SAMPLES = 100_000
CHAIN = ChainConfig(burn_in=2000, thin=5, length=SAMPLES)


def verdict(k, ok, detail):
    line = f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    VERDICTS.append(line)
    print(line)
    assert ok, line


D = BoundaryData.distinct
C = BoundaryData.from_clusters

# (start, end) pairs used across criteria
DATA = {
    "n2_distinct": (D([0.0, 1.0]), D([-0.5, 0.8])),
    "n2_confluent": (C([(0.4, 2)]), D([-1.0, 0.6])),
    "n3_distinct": (D([-0.6, 0.3, 1.0]), D([-1.0, 0.2, 0.9])),
    "n3_confluent": (C([(0.0, 2), (1.0, 1)]), C([(-1.0, 1), (0.5, 2)])),
    "n4_distinct": (D([-1.0, -0.2, 0.5, 1.1]), D([-0.8, 0.0, 0.4, 1.3])),
    "n4_confluent": (C([(-0.5, 2), (0.7, 2)]), C([(-0.3, 1), (0.2, 2), (1.0, 1)])),
}


def test_criterion_01_hciz_oracle():
    start = time.perf_counter()
    worst = 0.0
    ok = True
    for i, (A, B) in enumerate(DATA.values()):
        exact = float(hciz_confluent_log(A, B))
        mean, se = hciz_mc_estimate(A, B, SAMPLES, make_rng(101, i))
        if se == 0:
            # scalar A at n = 2: the exponent is constant and the estimate exact
            z = 0.0 if abs(mean - exact) <= 1e-12 * exact else math.inf
        else:
            z = abs(mean - exact) / se
        worst = max(worst, z)
        ok &= z <= 3
    elapsed = time.perf_counter() - start
    verdict(1, ok and elapsed < 60, f"6 pairs, max |z| = {worst:.2f} (<= 3), runtime {elapsed:.1f} s (< 60 s)")


def test_criterion_02_confluence_continuity():
    worst = 0.0
    for rest, b in (([], [-0.7, 1.2]), ([1.0], [-1.0, 0.5, 2.0]), ([1.0, -1.5], [-1.0, 0.2, 0.5, 2.0])):
        A = C(sorted([(0.0, 2)] + [(r, 1) for r in rest]))
        exact = float(hciz_confluent_log(A, D(sorted(b))))
        f = lambda d: float(hciz_log(sorted([0.0, d] + rest), sorted(b)))
        f1, f2, f3 = f(1e-2), f(5e-3), f(2.5e-3)
        # cancel the O(delta) and O(delta^2) terms
        r_a, r_b = 2 * f2 - f1, 2 * f3 - f2
        extrap = (4 * r_b - r_a) / 3
        worst = max(worst, abs(extrap - exact) / abs(exact))
    verdict(2, worst <= 1e-6, f"Richardson-extrapolated relative error {worst:.2e} (<= 1e-6), n = 2, 3, 4")


def test_criterion_03_andreief():
    quad_err = 0.0
    for A, B, t in (
        (D([0.0, 1.0]), D([-0.5, 0.8]), 0.3),
        (C([(0.4, 2)]), D([-1.0, 0.6]), 0.5),
        (C([(0.0, 2)]), C([(0.0, 2)]), 0.7),
    ):
        q, e = km_normalization_quadrature(A, B, t, nodes=60), km_normalization_log(A, B, t)
        quad_err = max(quad_err, abs(math.expm1(q.log_magnitude - e.log_magnitude)))
    reports = [andreief_consistency_check(A, B, t) for A, B in DATA.values() for t in (0.3, 0.6)]
    reports += [andreief_consistency_check(D([0.4]), D([-1.2]), 0.5)]
    single = max(abs(r.measured - r.expected) / max(1.0, abs(r.expected)) for r in reports)
    ok = quad_err <= 1e-10 and all(r.status == PASS for r in reports)
    verdict(3, ok, f"n=2 quadrature rel err {quad_err:.1e} (<= 1e-10); single-HCIZ identity n<=4 rel err {single:.1e} (<= 1e-10)")


def test_criterion_04_flow_duality():
    cases = [DATA["n2_distinct"], DATA["n3_confluent"], DATA["n4_confluent"]]
    flows, duals = [], []
    for A, B in cases:
        for t in (0.25, 0.5, 0.75):
            f, d = flow_and_duality_check(A, B, t, h=1e-4, flow_rtol=1e-6, duality_tol=1e-12)
            flows.append(f)
            duals.append(d)
    ok = all(r.status == PASS for r in flows + duals)
    fr = max(abs(r.measured - r.expected) / max(1.0, abs(r.expected)) for r in flows)
    dr = max(abs(r.measured - r.expected) for r in duals)
    verdict(4, ok, f"3x3 grid: duality residual {dr:.1e} (<= 1e-12), flow residual {fr:.1e} (<= 1e-6, h = 1e-4)")


_DRAWS = {}


def two_hciz_draws(name, t):
    key = (name, t)
    if key not in _DRAWS:
        A, B = DATA[name]
        _DRAWS[key] = sample_two_hciz_matrix(A, B, t, CHAIN, make_rng(505, len(_DRAWS)))
    return _DRAWS[key]


SPECTRAL_CASES = (("n2_distinct", 0.5), ("n3_confluent", 0.4))


def test_criterion_05_spectral_equivalence():
    worst_exact = worst_km = 0.0
    for i, (name, t) in enumerate(SPECTRAL_CASES):
        A, B = DATA[name]
        draws = two_hciz_draws(name, t)
        km = sample_km_mcmc(A, B, t, CHAIN, make_rng(606, i))
        for k in (1, 2, 3):
            m, se = spectral_moment_estimate(draws, k)
            worst_exact = max(worst_exact, abs(m - exact_linear_statistic(k, A, B, t)) / se)
            m2, se2 = spectral_moment_estimate(km, k)
            worst_km = max(worst_km, abs(m - m2) / math.hypot(se, se2))
    ok = worst_exact <= 3 and worst_km <= 3
    verdict(5, ok, f"k=1..3, n=2 and n=3 (confluent): max |z| vs exact {worst_exact:.2f}, vs KM MCMC {worst_km:.2f} (<= 3)")


def test_criterion_06_first_moment():
    exact_err = 0.0
    for A, B in DATA.values():
        for t in (0.25, 0.4, 0.5, 0.75):
            cf = closed_form_moments(A, B, t).e_tr_m
            exact_err = max(exact_err, abs(exact_linear_statistic(1, A, B, t) - cf) / max(1.0, abs(cf)))
    worst_z = 0.0
    for name, t in SPECTRAL_CASES:
        A, B = DATA[name]
        m, se = spectral_moment_estimate(two_hciz_draws(name, t), 1)
        worst_z = max(worst_z, abs(m - closed_form_moments(A, B, t).e_tr_m) / se)
    verdict(6, exact_err <= 1e-12 and worst_z <= 3, f"exact route rel err {exact_err:.1e} (<= 1e-12); sampled max |z| {worst_z:.2f} (<= 3)")


def test_criterion_07_dilation():
    extra = [(D([0.3]), D([-0.9]))]
    reports = [ward_dilation_check(A, B, t)[0] for A, B in list(DATA.values()) + extra for t in (0.3, 0.6)]
    worst = max(abs(r.measured) / (r.uncertainty_or_tolerance / 1e-8) for r in reports)
    verdict(7, all(r.status == PASS for r in reports), f"n <= 4, relative residual {worst:.1e} (<= 1e-8)")


def test_criterion_08_l_minus1():
    reports = []
    for name in ("n2_distinct", "n3_distinct", "n4_distinct"):
        A, B = DATA[name]
        for t in (0.3, 0.6):
            reports += ward_l_minus1_check(A, B, t, rtol=1e-6)
    reports += ward_l_minus1_check(D([0.3]), D([-0.9]), 0.4, rtol=1e-6)
    worst = max(abs(r.measured - r.expected) / max(1.0, abs(r.expected)) for r in reports)
    verdict(8, all(r.status == PASS for r in reports), f"analytic and FD, n <= 4: relative residual {worst:.1e} (<= 1e-6)")


def test_criterion_09_second_moment_adjudication():
    exact_cases = [
        (BoundaryData.scalar(0.5, 2), BoundaryData.scalar(-1.0, 2), 0.3),
        (BoundaryData.scalar(1.2, 3), BoundaryData.scalar(0.4, 3), 0.6),
        (D([0.7]), D([-0.2]), 0.4),
    ]
    closed = [ward_dilation_check(A, B, t, moment_rtol=1e-10)[2] for A, B, t in exact_cases]
    A, B = D([0.0, 1.0]), D([-1.0, 1.5])
    exact, _, gap = ward_dilation_check(A, B, 0.4, rtol=1e-8)
    ok = all(r.status == PASS for r in closed) and exact.status == PASS and gap.status == REPORT_ONLY
    verdict(
        9,
        ok,
        f"(1,1) and n=1 closed form exact to 1e-10; generic n=2 gap {gap.measured - gap.expected:+.6f} "
        f"(closed {gap.measured:.6f} vs exact {gap.expected:.6f}, report_only); exact routes agree to "
        f"{abs(exact.measured) / (exact.uncertainty_or_tolerance / 1e-8):.1e}",
    )


def test_criterion_10_reductions():
    cfg = parse_config(default_config_text())
    reports, _ = run_suite(cfg, "verify-reductions")
    by = {r.check_name: r for r in reports}
    graded = [r for r in reports if r.status != REPORT_ONLY]
    ext_z = by["reduction21_external_overlap_max_z"].measured
    ok = all(r.status == PASS for r in graded) and ext_z > 3
    verdict(
        10,
        ok,
        f"{len(graded)} graded checks within 3 stderr; two-HCIZ overlap max |z| "
        f"{by['reduction21_two_hciz_overlap_max_z'].measured:.2f}; external-field overlap max |z| {ext_z:.1f} "
        f"(dev {by['reduction21_external_overlap_max_dev'].measured:.3f}, non-uniform)",
    )


def test_criterion_11_hirota():
    points = [(x, y) for x in (-0.6, 0.2, 0.9) for y in (-0.4, 0.3, 1.1)]
    reports = [hirota_toda_check(n, x, y, tol=1e-6) for n in range(1, 6) for x, y in points]
    worst = max(abs(r.measured - r.expected) for r in reports)
    verdict(11, all(r.status == PASS for r in reports), f"n = 1..5 at 9 points: max residual {worst:.1e} (<= 1e-6)")


def test_criterion_12_mop():
    cfg = parse_config(default_config_text())
    reports, _ = run_suite(cfg, "verify-mop")
    kinds = {r.check_name.split("_n")[0] for r in reports}
    needed = {"mop_orthogonality_p1_q1", "mop_orthogonality_p2_q1", "mop_orthogonality_p2_q2"}
    worst = max(r.measured for r in reports)
    ok = needed <= kinds and all(r.status == PASS for r in reports)
    verdict(12, ok, f"{len(reports)} cases over (p,q) in (1,1),(2,1),(2,2), n <= 4: max residual {worst:.1e} (<= 1e-10)")


def test_criterion_13_reproducibility(tmp_path):
    import io

    cfg = parse_config(default_config_text())
    codes = [execute_suite(cfg, "verify-all", tmp_path / f"run{i}", stream=io.StringIO()) for i in range(2)]
    first, second = ((tmp_path / f"run{i}" / "verify-all.jsonl").read_bytes() for i in range(2))
    statuses = {line.split('"status": ')[1] for line in first.decode().splitlines()}
    ok = first == second and codes == [0, 0] and '"report_only"}' in statuses and '"fail"}' not in statuses
    verdict(13, ok, f"verify-all twice, seed {cfg.seed}: byte-identical = {first == second}, exit codes {codes}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
