"""Command-line front end.

Subcommands build coupon families, run the exact/asymptotic/simulation
engines, reproduce the published birthday worked example, and emit
machine-readable run records as JSON or RFC-4180 CSV.

Exit codes: 0 success, 2 invalid arguments, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone

from . import __version__
from .asymptotics import (
    PI_SQUARED_OVER_6,
    equal_case_expectation,
    expectation_asymptotic,
    laplace_Ik_expansion,
    laplace_Ik_quadrature,
    rising_moment_asymptotic,
)
from .exact import (
    ConvergenceFailure,
    QuadratureConfig,
    expectation_exact,
    rising_moment_exact,
    variance_exact,
)
from .families import (
    EQUAL,
    EXPLICIT,
    LOG_ZIPF,
    ZIPF,
    CouponFamily,
    build_distribution,
    equal_family,
    explicit_family,
    load_weights_file,
    log_zipf_family,
    zipf_family,
)
from .gumbel import (
    MAIN_RESULT_IV,
    PAPER_EXAMPLE,
    equal_case_limit_probability,
    equal_normalization,
    gumbel_cdf,
    limit_probability,
    normalization_for,
    printed_example_normalization,
)
from .simulate import SimulationStall, run_simulation, write_samples

_PROVENANCE_FLAGS = {
    "paper-example": PAPER_EXAMPLE,
    "main-result-iv": MAIN_RESULT_IV,
}

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3


@dataclass
class RunRecord:
    command: str
    parameters: dict
    results: dict | list
    library_version: str
    timestamp: str
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "results": self.results,
            "library_version": self.library_version,
            "timestamp": self.timestamp,
            "seed": self.seed,
        }


def _record(command: str, parameters: dict, results, seed: int | None = None) -> RunRecord:
    return RunRecord(
        command=command,
        parameters=parameters,
        results=results,
        library_version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(),
        seed=seed,
    )


def _flatten(prefix: str, value, out: dict) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(value, (list, tuple)):
        out[prefix] = json.dumps(value)
    else:
        out[prefix] = value


def _to_csv(results) -> str:
    buf = io.StringIO()
    if isinstance(results, list):
        rows = results
    else:
        flat: dict = {}
        _flatten("", results, flat)
        rows = [flat]
    if not rows:
        return ""
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\r\n")
    writer.writeheader()
    for row in rows:
        if not isinstance(row, dict):
            row = dict(row)
        flat_row: dict = {}
        _flatten("", row, flat_row)
        writer.writerow(flat_row)
    return buf.getvalue()


def _emit(record: RunRecord, args) -> None:
    if args.out == "csv":
        text = _to_csv(record.results)
    else:
        text = json.dumps(record.to_dict(), indent=2)
    if args.out_file:
        with open(args.out_file, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _build_family(parser: argparse.ArgumentParser, args) -> CouponFamily:
    if args.family == EQUAL:
        return equal_family()
    if args.family == ZIPF:
        if args.p is None:
            parser.error("--p is required for the zipf family")
        return zipf_family(args.p)
    if args.family == LOG_ZIPF:
        if args.p is None:
            parser.error("--p is required for the log-zipf family")
        return log_zipf_family(args.p)
    if args.weights_file:
        return load_weights_file(args.weights_file)
    parser.error("--weights-file is required for the explicit family")


def _workers(args) -> int:
    env = os.environ.get("CCP_WORKERS")
    if env is not None:
        return int(env)
    return args.workers


def _parse_grid(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _quad_config(args) -> QuadratureConfig:
    cfg = QuadratureConfig()
    if getattr(args, "rel_tol", None) is not None:
        cfg = QuadratureConfig(rel_tol=args.rel_tol)
    return cfg


def cmd_moments(parser, args) -> RunRecord:
    family = _build_family(parser, args)
    if args.N < 1:
        parser.error("--N must be a positive integer")
    if args.m < 1:
        parser.error("--m must be a positive integer")
    if args.method in ("asymptotic", "both") and family.kind not in (EQUAL, LOG_ZIPF):
        parser.error(f"asymptotic moments are only available for equal and log-zipf families, not {family.kind}")
    cfg = _quad_config(args)
    results: dict = {"family": family.to_dict(), "N": args.N, "m": args.m, "method": args.method}

    if args.method in ("exact", "both"):
        dist = build_distribution(family, args.N)
        report = variance_exact(dist, args.m, cfg)
        results["exact"] = report.to_dict()

    if args.method in ("asymptotic", "both"):
        if family.kind == EQUAL:
            exp_report = equal_case_expectation(args.m, args.N)
            results["asymptotic"] = {"expectation": exp_report.to_dict()}
        else:
            exp_report = expectation_asymptotic(family.p, args.m, args.N)
            rise_report = rising_moment_asymptotic(family.p, args.m, args.N)
            results["asymptotic"] = {
                "expectation": exp_report.to_dict(),
                "rising_moment": rise_report.to_dict(),
            }

    if args.method == "both":
        exact = results["exact"]
        asym = results["asymptotic"]
        deltas = {
            "expectation_delta": exact["expectation"] - asym["expectation"]["total"],
            "expectation_scaled_error": abs(exact["expectation"] - asym["expectation"]["total"])
            / asym["expectation"]["error_scale"],
        }
        if "rising_moment" in asym:
            deltas["rising_moment_delta"] = exact["rising_moment"] - asym["rising_moment"]["total"]
            deltas["rising_moment_scaled_error"] = abs(
                exact["rising_moment"] - asym["rising_moment"]["total"]
            ) / asym["rising_moment"]["error_scale"]
        results["comparison"] = deltas

    return _record("moments", _params(args, ["family", "p", "N", "m", "method", "rel_tol"]), results)


def cmd_simulate(parser, args) -> RunRecord:
    family = _build_family(parser, args)
    if args.reps < 1:
        parser.error("--reps must be a positive integer")
    dist = build_distribution(family, args.N)
    summary = run_simulation(dist, args.m, args.reps, args.seed, _workers(args))
    if args.emit_cdf:
        with open(args.emit_cdf, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\r\n")
            writer.writerow(["threshold", "fraction"])
            writer.writerows(summary.empirical_cdf)
    if args.dump_samples:
        write_samples(summary, args.dump_samples)
    return _record(
        "simulate",
        _params(args, ["family", "p", "N", "m", "reps", "seed", "workers"]),
        summary.to_dict(),
        seed=args.seed,
    )


def cmd_limit(parser, args) -> RunRecord:
    if args.family not in (EQUAL, LOG_ZIPF):
        parser.error("limit probabilities are available for the equal and log-zipf families")
    if args.n is None:
        parser.error("--n is required")
    if args.family == EQUAL:
        norm = equal_normalization(args.m, args.N)
        prob = equal_case_limit_probability(args.m, args.N, args.n)
    else:
        if args.p is None:
            parser.error("--p is required for the log-zipf family")
        provenance = _PROVENANCE_FLAGS[args.provenance]
        norm = normalization_for(provenance, args.p, args.m, args.N)
        prob = limit_probability(args.p, args.m, args.N, args.n, provenance)
    results = {
        "probability": prob,
        "threshold": args.n,
        "normalization": norm.to_dict(),
    }
    return _record("limit", _params(args, ["family", "p", "N", "m", "n", "provenance"]), results)


def _simulated_cdf_at(summary, thresholds):
    import numpy as np

    ordered = np.sort(summary.samples)
    return {
        int(t): float(np.searchsorted(ordered, t, side="right") / len(ordered))
        for t in thresholds
    }


def cmd_birthday(parser, args) -> RunRecord:
    """Reproduce the birthday worked example (N=365, m=1, thresholds 2190 and 1825).

    The `printed` columns replicate the example's own arithmetic, including
    its intermediate rounding; value quantization mirrors the digits shown
    there so the quoted ratios 4.77 and 1840 re-emerge.  The `main_result_iv`
    columns apply the main limit theorem's centering, and the simulation
    columns give the finite-N Monte Carlo truth that adjudicates between the
    two analytic variants.
    """
    n_types = 365
    m = 1
    p = 1.0
    thresholds = (2190, 1825)

    eq_norm = equal_normalization(m, n_types)
    eq_printed_b = round(n_types * math.log(n_types))  # the example's N ln N = 2153
    eq_hi = gumbel_cdf((thresholds[0] - eq_printed_b) / n_types)
    eq_lo = gumbel_cdf((thresholds[1] - eq_printed_b) / n_types)
    eq_hi_disp = round(eq_hi, 4)
    eq_lo_disp = math.floor(eq_lo * 1000) / 1000

    lz_printed = printed_example_normalization(p, m, n_types)
    lz_iv = normalization_for(MAIN_RESULT_IV, p, m, n_types)
    lz_hi = gumbel_cdf((thresholds[0] - lz_printed.b_N) / lz_printed.k_N)
    lz_lo = gumbel_cdf((thresholds[1] - lz_printed.b_N) / lz_printed.k_N)
    lz_hi_disp = round(lz_hi, 4)
    lz_lo_disp = float(f"{lz_lo:.6g}")
    lz_hi_iv = gumbel_cdf((thresholds[0] - lz_iv.b_N) / lz_iv.k_N)
    lz_lo_iv = gumbel_cdf((thresholds[1] - lz_iv.b_N) / lz_iv.k_N)

    workers = _workers(args)
    eq_sim = run_simulation(build_distribution(equal_family(), n_types), m, args.reps, args.seed, workers)
    lz_sim = run_simulation(build_distribution(log_zipf_family(p), n_types), m, args.reps, args.seed + 1, workers)
    eq_mc = _simulated_cdf_at(eq_sim, thresholds)
    lz_mc = _simulated_cdf_at(lz_sim, thresholds)

    def favored(mc: float, printed: float, consistent: float) -> str:
        return "paper-example" if abs(mc - printed) <= abs(mc - consistent) else "main-result-iv"

    rows = [
        {
            "case": "equal",
            "threshold": thresholds[0],
            "printed": eq_hi,
            "printed_display": eq_hi_disp,
            "consistent": gumbel_cdf((thresholds[0] - eq_norm.b_N) / eq_norm.k_N),
            "simulated": eq_mc[thresholds[0]],
        },
        {
            "case": "equal",
            "threshold": thresholds[1],
            "printed": eq_lo,
            "printed_display": eq_lo_disp,
            "consistent": gumbel_cdf((thresholds[1] - eq_norm.b_N) / eq_norm.k_N),
            "simulated": eq_mc[thresholds[1]],
        },
        {
            "case": "log-zipf",
            "threshold": thresholds[0],
            "printed": lz_hi,
            "printed_display": lz_hi_disp,
            "consistent": lz_hi_iv,
            "simulated": lz_mc[thresholds[0]],
            "favored_variant": favored(lz_mc[thresholds[0]], lz_hi, lz_hi_iv),
        },
        {
            "case": "log-zipf",
            "threshold": thresholds[1],
            "printed": lz_lo,
            "printed_display": lz_lo_disp,
            "consistent": lz_lo_iv,
            "simulated": lz_mc[thresholds[1]],
            "favored_variant": favored(lz_mc[thresholds[1]], lz_lo, lz_lo_iv),
        },
    ]
    results = {
        "rows": rows,
        "ratio_equal": eq_hi_disp / eq_lo_disp,
        "ratio_log_zipf": lz_hi_disp / lz_lo_disp,
        "simulation": {
            "reps": args.reps,
            "equal_mean": eq_sim.mean,
            "log_zipf_mean": lz_sim.mean,
        },
    }
    record = _record("birthday", _params(args, ["reps", "seed", "workers"]), results, seed=args.seed)
    if args.out == "csv":
        record.results = rows
    return record


def cmd_verify_lemma(parser, args) -> RunRecord:
    grid = _parse_grid(args.N_grid)
    if not grid:
        parser.error("--N-grid must contain at least one value")
    cfg = _quad_config(args)
    rows = []
    for n in grid:
        expansion = laplace_Ik_expansion(args.p, args.k, args.s, n)
        quadrature = laplace_Ik_quadrature(args.p, args.k, args.s, n, cfg)
        rel = abs(quadrature - expansion) / abs(quadrature)
        rows.append(
            {
                "N": n,
                "k": args.k,
                "s": args.s,
                "quadrature": quadrature,
                "expansion": expansion,
                "rel_error": rel,
                "scaled_error": rel * math.log(n),
            }
        )
    return _record("verify-lemma", _params(args, ["p", "k", "s", "N_grid", "rel_tol"]), rows)


def cmd_compare(parser, args) -> RunRecord:
    grid = _parse_grid(args.N_grid)
    if not grid:
        parser.error("--N-grid must contain at least one value")
    cfg = _quad_config(args)
    family = log_zipf_family(args.p)
    rows = []
    for n in grid:
        dist = build_distribution(family, n)
        exact = variance_exact(dist, args.m, cfg)
        e_asym = expectation_asymptotic(args.p, args.m, n)
        q_asym = rising_moment_asymptotic(args.p, args.m, n)
        rows.append(
            {
                "N": n,
                "E_exact": exact.expectation,
                "E_asym": e_asym.total,
                "E_scaled_error": (exact.expectation - e_asym.total) / e_asym.error_scale,
                "Q_exact": exact.rising_moment,
                "Q_asym": q_asym.total,
                "Q_scaled_error": (exact.rising_moment - q_asym.total) / q_asym.error_scale,
                "V_over_N2": exact.variance / (float(n) * float(n)),
                "pi2_over_6": PI_SQUARED_OVER_6,
            }
        )
    return _record("compare", _params(args, ["p", "m", "N_grid", "rel_tol"]), rows)


def _params(args, names: list[str]) -> dict:
    out = {}
    for name in names:
        if hasattr(args, name):
            out[name] = getattr(args, name)
    return out


def _add_family_flags(sub: argparse.ArgumentParser, *, required: bool = True) -> None:
    sub.add_argument(
        "--family", choices=[EQUAL, ZIPF, LOG_ZIPF, EXPLICIT], required=required
    )
    sub.add_argument("--p", type=float, default=None, help="exponent for zipf/log-zipf")
    sub.add_argument("--weights-file", default=None, help="explicit weights, one per line")


def _add_output_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out", choices=["json", "csv"], default="json")
    sub.add_argument("--out-file", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dixiecup",
        description="Moments, limit law, and simulation of coupon-collection times.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_mom = sub.add_parser("moments", help="exact and/or asymptotic moments of T")
    _add_family_flags(p_mom)
    p_mom.add_argument("--N", type=int, required=True)
    p_mom.add_argument("--m", type=int, default=1)
    p_mom.add_argument("--method", choices=["exact", "asymptotic", "both"], default="exact")
    p_mom.add_argument("--rel-tol", type=float, default=None)
    _add_output_flags(p_mom)
    p_mom.set_defaults(handler=cmd_moments)

    p_sim = sub.add_parser("simulate", help="Monte Carlo simulation of T")
    _add_family_flags(p_sim)
    p_sim.add_argument("--N", type=int, required=True)
    p_sim.add_argument("--m", type=int, default=1)
    p_sim.add_argument("--reps", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--workers", type=int, default=1)
    p_sim.add_argument("--emit-cdf", default=None, help="write the empirical CDF grid as CSV")
    p_sim.add_argument("--dump-samples", default=None, help="write raw T values, one per line")
    _add_output_flags(p_sim)
    p_sim.set_defaults(handler=cmd_simulate)

    p_lim = sub.add_parser("limit", help="Gumbel limit probability P(T <= n)")
    _add_family_flags(p_lim)
    p_lim.add_argument("--N", type=int, required=True)
    p_lim.add_argument("--m", type=int, default=1)
    p_lim.add_argument("--n", type=float, required=True, help="threshold")
    p_lim.add_argument(
        "--provenance", choices=list(_PROVENANCE_FLAGS), default="main-result-iv"
    )
    _add_output_flags(p_lim)
    p_lim.set_defaults(handler=cmd_limit)

    p_bday = sub.add_parser("birthday", help="reproduce the birthday worked example")
    p_bday.add_argument("--reps", type=int, default=10**6)
    p_bday.add_argument("--seed", type=int, default=20260810)
    p_bday.add_argument("--workers", type=int, default=1)
    _add_output_flags(p_bday)
    p_bday.set_defaults(handler=cmd_birthday)

    p_lem = sub.add_parser("verify-lemma", help="boundary-layer expansion vs quadrature")
    p_lem.add_argument("--p", type=float, required=True)
    p_lem.add_argument("--k", type=int, default=0)
    p_lem.add_argument("--s", type=float, required=True)
    p_lem.add_argument("--N-grid", default="1000,10000,100000")
    p_lem.add_argument("--rel-tol", type=float, default=None)
    _add_output_flags(p_lem)
    p_lem.set_defaults(handler=cmd_verify_lemma)

    p_cmp = sub.add_parser("compare", help="exact vs asymptotic moments over an N grid")
    p_cmp.add_argument("--p", type=float, required=True)
    p_cmp.add_argument("--m", type=int, default=1)
    p_cmp.add_argument("--N-grid", default="1000,3000,10000")
    p_cmp.add_argument("--rel-tol", type=float, default=None)
    _add_output_flags(p_cmp)
    p_cmp.set_defaults(handler=cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        record = args.handler(parser, args)
    except (ConvergenceFailure, SimulationStall) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(record, args)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
