"""Command-line runner for evaluation, sampling and verification suites.

    twohciz <suite> [--config PATH] [--out DIR] [--seed N] [--samples N] [--csv]

Reports are written as line-delimited JSON, one record per check, in a fixed
order. Exit status: 0 when every check passes or is report-only, 1 when a
check fails, 2 on invalid input. ``TWOHCIZ_THREADS`` sets how many suites
``verify-all`` runs concurrently.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from .boundary import BoundaryData
from .config import ConfigError, RunConfig, load_config, parse_config
from .ensemble import (
    closed_form_moments,
    eigenvector_overlap_stats,
    sample_external_field_matrix,
    sample_two_hciz_matrix,
    spectral_moment_estimate,
    batch_means,
)
from .hciz import hciz_confluent_log, hciz_exponent, hciz_mc_estimate, sample_weighted_unitary
from .identities import (
    FAIL,
    VerificationReport,
    andreief_consistency_check,
    cross_term_exact,
    flow_and_duality_check,
    hirota_toda_check,
    log_partition_collapsed,
    miwa_times,
    mop_construct_and_verify,
    ward_dilation_check,
    ward_l_minus1_check,
)
from .km import (
    exact_linear_statistic,
    km_normalization_log,
    km_normalization_quadrature,
    sample_km_mcmc,
)
from .linalg import make_rng

__all__ = ["SUITES", "VERIFY_ALL", "run_suite", "execute_suite", "main", "format_record", "default_config_text"]

THREADS_ENV = "TWOHCIZ_THREADS"
HIROTA_X = (-0.6, 0.2, 0.9)
HIROTA_Y = (-0.4, 0.3, 1.1)
MOP_GRID = (
    ((0.4,), (1,), (-0.2,), (1,), 0.5),
    ((0.0,), (2,), (0.5,), (2,), 0.3),
    ((0.0, 1.0), (1, 1), (0.0,), (2,), 0.5),
    ((-0.5, 0.8), (2, 1), (0.3,), (3,), 0.4),
    ((-0.5, 0.8), (2, 2), (0.3,), (4,), 0.6),
    ((0.0, 1.0), (1, 1), (-1.0, 0.5), (1, 1), 0.5),
    ((0.0, 1.0), (2, 1), (-1.0, 0.5), (1, 2), 0.4),
    ((-1.0, 1.0), (2, 2), (-0.5, 0.7), (3, 1), 0.35),
)


def _three_sigma(name, est, expected):
    mean, se = est
    return VerificationReport.compare(name, mean, expected, 3.0 * se)


def _two_sample(name, est1, est2):
    return VerificationReport.compare(name, est1[0], est2[0], 3.0 * math.hypot(est1[1], est2[1]))


# -- suites ------------------------------------------------------------------


def suite_eval_hciz(cfg: RunConfig, rng):
    A, B = cfg.starts, cfg.ends
    logh = hciz_confluent_log(A, B)
    samples = max(cfg.samples, 100)
    mean, se = hciz_mc_estimate(A, B, samples, rng)
    return [
        VerificationReport.compare("hciz_log_value", logh.log_magnitude, logh.log_magnitude, 0.0, report_only=True),
        VerificationReport.compare("hciz_mc_oracle", mean, float(logh), 3.0 * se),
    ], None


def suite_eval_z(cfg: RunConfig, rng):
    A, B, t = cfg.starts, cfg.ends, cfg.t
    logz = log_partition_collapsed(A, B, t).log_magnitude
    out = [VerificationReport.compare("logZ_collapsed", logz, logz, 0.0, report_only=True)]
    for name, data in (("plus", A), ("minus", B)):
        for m, v in enumerate(miwa_times(data, 3), start=1):
            out.append(VerificationReport.compare(f"miwa_{name}_{m}", v, data.trace(m) / m, 0.0, report_only=True))
    out.append(andreief_consistency_check(A, B, t, cfg.tol("andreief_single_hciz", 1e-10)))
    return out, None


def _moment_reports(prefix, draws, A, B, t):
    return [
        _three_sigma(f"{prefix}_moment_k{k}", spectral_moment_estimate(draws, k), exact_linear_statistic(k, A, B, t))
        for k in (1, 2, 3)
    ]


def suite_sample_spectrum(cfg: RunConfig, rng):
    A, B, t = cfg.starts, cfg.ends, cfg.t
    lam = sample_km_mcmc(A, B, t, cfg.chain(), rng)
    records = [{"index": i, "lambda": row.tolist()} for i, row in enumerate(lam)]
    return _moment_reports("km_mcmc", lam, A, B, t), records


def suite_sample_matrix(cfg: RunConfig, rng):
    A, B, t = cfg.starts, cfg.ends, cfg.t
    draws = sample_two_hciz_matrix(A, B, t, cfg.chain(), rng)
    ov = draws.overlaps().reshape(len(draws), -1)
    records = [
        {"index": i, "lambda": draws.eigenvalues[i].tolist(), "overlaps": ov[i].tolist()} for i in range(len(draws))
    ]
    return _moment_reports("two_hciz", draws, A, B, t), records


def suite_verify_collapse(cfg: RunConfig, rng):
    A, B, t = cfg.starts, cfg.ends, cfg.t
    out = [andreief_consistency_check(A, B, t, cfg.tol("andreief_single_hciz", 1e-10))]
    if A.n <= 3:
        q = km_normalization_quadrature(A, B, t)
        e = km_normalization_log(A, B, t)
        ratio = math.exp(q.log_magnitude - e.log_magnitude)
        out.append(VerificationReport.compare("andreief_vs_quadrature", ratio, 1.0, cfg.tol("andreief_vs_quadrature", 1e-10)))
    return out, None


def suite_verify_flow(cfg: RunConfig, rng):
    flow, _ = flow_and_duality_check(cfg.starts, cfg.ends, cfg.t, flow_rtol=cfg.tol("flow_dt_logZ", 1e-6))
    return [flow], None


def suite_verify_duality(cfg: RunConfig, rng):
    _, dual = flow_and_duality_check(cfg.starts, cfg.ends, cfg.t, duality_tol=cfg.tol("duality_logZ", 1e-12))
    return [dual], None


def suite_verify_ward(cfg: RunConfig, rng):
    A, B, t = cfg.starts, cfg.ends, cfg.t
    out = ward_l_minus1_check(A, B, t, rtol=cfg.tol("ward_Lminus1", 1e-6))
    out += ward_dilation_check(A, B, t, rtol=cfg.tol("ward_dilation_exact", 1e-8))[:2]
    W = sample_weighted_unitary(A, B, cfg.chain(), rng)
    est = batch_means(hciz_exponent(A.points, B.points, W))
    out.append(_three_sigma("cross_term_mcmc", est, cross_term_exact(A, B)))
    return out, None


def suite_verify_hirota(cfg: RunConfig, rng):
    tol = cfg.tol("hirota_toda", 1e-6)
    out = [hirota_toda_check(n, x, y, tol=tol) for n in range(1, 6) for x in HIROTA_X for y in HIROTA_Y]
    return out, None


def suite_verify_moments(cfg: RunConfig, rng):
    A, B, t = cfg.starts, cfg.ends, cfg.t
    cf = closed_form_moments(A, B, t)
    m1 = exact_linear_statistic(1, A, B, t)
    m2 = exact_linear_statistic(2, A, B, t)
    out = [
        VerificationReport.relative("first_moment_exact", m1, cf.e_tr_m, cfg.tol("first_moment_exact", 1e-12)),
        VerificationReport.relative(
            "second_moment_time_reversal", exact_linear_statistic(2, B, A, 1.0 - t), m2, 1e-10
        ),
    ]
    out.append(ward_dilation_check(A, B, t)[2])
    draws = sample_two_hciz_matrix(A, B, t, cfg.chain(), rng)
    out.append(_three_sigma("first_moment_sampled", spectral_moment_estimate(draws, 1), cf.e_tr_m))
    out.append(_three_sigma("second_moment_sampled_vs_exact", spectral_moment_estimate(draws, 2), m2))
    target = cf.e_m_scalar * np.eye(A.n)
    z = 0.0
    for part, tgt in ((draws.matrices.real, target), (draws.matrices.imag, 0.0 * target)):
        mean, se = batch_means(part)
        z = max(z, float(np.max(np.abs(mean - tgt) / np.maximum(se, 1e-300))))
    out.append(VerificationReport.compare("mean_matrix_scalar_max_z", z, 0.0, 3.0, report_only=True))
    return out, None


def suite_verify_reductions(cfg: RunConfig, rng):
    A, B, t = cfg.starts, cfg.ends, cfg.t
    n = A.n
    s2 = t * (1 - t)
    a, b = A.trace() / n, B.trace() / n
    chain = cfg.chain()
    out = []

    # (1,1): scalar boundary data, centred spectrum is GUE(t(1-t))
    d11 = sample_two_hciz_matrix(BoundaryData.scalar(a, n), BoundaryData.scalar(b, n), t, chain, rng)
    c = (1 - t) * a + t * b
    centred = d11.eigenvalues - c
    out.append(_three_sigma("reduction11_centred_tr", spectral_moment_estimate(centred, 1), 0.0))
    out.append(_three_sigma("reduction11_centred_tr2", spectral_moment_estimate(centred, 2), n * n * s2))

    # (2,1): two-HCIZ with B = bI against the shifted external-field model
    Bs = BoundaryData.scalar(b, n)
    d21 = sample_two_hciz_matrix(A, Bs, t, chain, rng)
    ext = sample_external_field_matrix(A, t, len(d21), rng, shift=t * b)
    for k in (1, 2, 3):
        e1, e2 = spectral_moment_estimate(d21, k), spectral_moment_estimate(ext, k)
        out.append(_two_sample(f"reduction21_spectral_k{k}", e1, e2))
        out.append(_three_sigma(f"reduction21_exact_k{k}", e1, exact_linear_statistic(k, A, Bs, t)))
    mean, se = eigenvector_overlap_stats(d21)
    z = float(np.max(np.abs(mean - 1.0 / n) / se))
    out.append(VerificationReport.compare("reduction21_two_hciz_overlap_max_z", z, 0.0, 3.0))
    mean_e, se_e = eigenvector_overlap_stats(ext)
    dev = float(np.max(np.abs(mean_e - 1.0 / n)))
    z_e = float(np.max(np.abs(mean_e - 1.0 / n) / se_e))
    out.append(VerificationReport.compare("reduction21_external_overlap_max_dev", dev, 0.0, 0.0, report_only=True))
    out.append(VerificationReport.compare("reduction21_external_overlap_max_z", z_e, 0.0, 3.0, report_only=True))
    return out, None


def suite_verify_mop(cfg: RunConfig, rng):
    tol = cfg.tol("mop_orthogonality", 1e-10)
    cases = [(cfg.starts, cfg.ends, cfg.t)]
    cases += [(BoundaryData(av, am), BoundaryData(bv, bm), tt) for av, am, bv, bm, tt in MOP_GRID]
    out = []
    for i, (A, B, t) in enumerate(cases):
        for tag, X, Y in (("fwd", A, B), ("rev", B, A)):
            r = mop_construct_and_verify(X, Y, t, tol=tol)[0]
            out.append(replace(r, check_name=f"{r.check_name}_case{i}_{tag}"))
    return out, None


VERIFY_ALL = (
    "verify-collapse",
    "verify-flow",
    "verify-duality",
    "verify-ward",
    "verify-hirota",
    "verify-moments",
    "verify-reductions",
    "verify-mop",
)

SUITES = {
    "eval-hciz": suite_eval_hciz,
    "eval-z": suite_eval_z,
    "sample-spectrum": suite_sample_spectrum,
    "sample-matrix": suite_sample_matrix,
    "verify-collapse": suite_verify_collapse,
    "verify-flow": suite_verify_flow,
    "verify-duality": suite_verify_duality,
    "verify-ward": suite_verify_ward,
    "verify-hirota": suite_verify_hirota,
    "verify-moments": suite_verify_moments,
    "verify-reductions": suite_verify_reductions,
    "verify-mop": suite_verify_mop,
}
_STREAM = {name: i for i, name in enumerate(SUITES)}


def run_suite(cfg: RunConfig, suite: str):
    """Run one suite (or ``verify-all``); returns ``(reports, archive records)``."""
    if suite == "verify-all":
        threads = max(1, int(os.environ.get(THREADS_ENV, "1")))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda s: run_suite(cfg, s), VERIFY_ALL))
        return [r for reports, _ in parts for r in reports], None
    if suite not in SUITES:
        raise ConfigError(f"unknown suite '{suite}'")
    return SUITES[suite](cfg, make_rng(cfg.seed, _STREAM[suite]))


# -- serialization -----------------------------------------------------------


def _num(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _json_value(v) -> str:
    if isinstance(v, (bool, str)) or v is None:
        return json.dumps(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _num(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_json_value(x)}" for k, x in v.items()) + "}"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def format_record(report: VerificationReport) -> str:
    return _json_value(
        {
            "check": report.check_name,
            "measured": report.measured,
            "expected": report.expected,
            "tol_or_stderr": report.uncertainty_or_tolerance,
            "status": report.status,
        }
    )


def default_config_text() -> str:
    return resources.files("twohciz").joinpath("default_config.json").read_text(encoding="utf-8")


def execute_suite(cfg: RunConfig, suite: str, out_dir=None, write_csv: bool = False, stream=None) -> int:
    """Run a suite, write its report (and archive), print a summary; return the exit code."""
    stream = sys.stdout if stream is None else stream
    reports, records = run_suite(cfg, suite)
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"{suite}.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for r in reports:
            fh.write(format_record(r) + "\n")
    if records is not None:
        with open(out / f"{suite}-samples.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            for rec in records:
                fh.write(_json_value(rec) + "\n")
    if write_csv:
        with open(out / f"{suite}.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["check", "measured", "expected", "status"])
            for r in reports:
                w.writerow([r.check_name, _num(r.measured), _num(r.expected), r.status])
    for r in reports:
        print(
            f"{r.status.upper():<12} {r.check_name:<44} measured={r.measured:.10g} "
            f"expected={r.expected:.10g} tol={r.uncertainty_or_tolerance:.3g}",
            file=stream,
        )
    return 1 if any(r.status == FAIL for r in reports) else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twohciz", description=__doc__.splitlines()[0])
    p.add_argument("suite", choices=sorted(SUITES) + ["verify-all"])
    p.add_argument("--config", help="JSON run configuration (default: bundled example)")
    p.add_argument("--out", help="output directory (overrides config out_dir)")
    p.add_argument("--seed", type=int, help="RNG seed (overrides config)")
    p.add_argument("--samples", type=int, help="number of samples (overrides config)")
    p.add_argument("--csv", action="store_true", help="also write a per-check CSV file")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    overrides = {"seed": args.seed, "samples": args.samples}
    try:
        if args.config:
            cfg = load_config(args.config, overrides)
        else:
            cfg = parse_config(default_config_text(), overrides)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return execute_suite(cfg, args.suite, args.out, args.csv)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
