"""Configuration-driven experiment runner.

Subcommands reproduce the library's verification suites and emit plot-ready
CSV tables next to a JSON summary with one pass/fail entry per assertion.
Exit status: 0 when every assertion passes, 1 when any fails (the failing
checks are named on stderr), 2 for an unknown command or invalid config.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import suites
from .exchangeable import (
    conditional_mean_identity_check,
    covariance_gap_sum,
    covariance_gap_sum_exact,
    end_to_end_check,
    harmonic_gap_closed_form,
    martingale_increment_check,
    second_moment_identity_check,
    stein_exact_check,
)
from .resolvent import fd_agreement_check, trace_bound_check
from .sampling import (
    derive_child,
    rng_from,
    spec_from_dict,
    spec_length,
    standardized_multiset,
)
from .spectral import (
    ENSEMBLES,
    semicircle_cdf,
    semicircle_density,
    semicircle_stieltjes,
    thm13_experiment,
)
from .swap import swapping_report

SCHEMA_VERSION = 1
_THREADS_ENV = "LINDEBERG_THREADS"


@dataclass
class ExperimentConfig:
    """Round-trippable run configuration; flags override file values."""

    command: str
    seed: int = 0
    out: str = "."
    threads: int = 1
    replicates: int | None = None
    n_list: list = field(default_factory=list)
    N_list: list = field(default_factory=list)
    multiset: list = field(default_factory=list)
    ensemble: str = "rademacher-perm"
    seeds: int = 20
    z_grid: list = field(default_factory=lambda: ["1j", "2j", "1+1j"])
    x_values: list = field(default_factory=list)
    specs: list = field(default_factory=lambda: list(suites.SWAPPING_SPEC_KINDS))
    functions: list = field(default_factory=lambda: list(suites.SUITE_FUNCTION_KINDS))
    trials: int = 200
    tuples: int = 50
    custom_spec: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        return ExperimentConfig(**d)


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def _write_csv(path: Path, fieldnames, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})


def _stderr(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(values.size))


# ---------------------------------------------------------------------------
# Command implementations; each returns (fieldnames, rows, checks)
# ---------------------------------------------------------------------------


def run_identities(cfg: ExperimentConfig):
    if cfg.multiset:
        n_list = [len(cfg.multiset)]
        if cfg.n_list and [int(n) for n in cfg.n_list] != n_list:
            raise ValueError("--n disagrees with the explicit multiset length")
    else:
        n_list = [int(n) for n in (cfg.n_list or [3, 4, 5, 6, 7])]
    rows = []
    checks = {}
    for n in n_list:
        if cfg.multiset:
            spec = standardized_multiset(cfg.multiset)
        else:
            spec = suites.ramp_multiset(n)
        worst_mean = worst_sq = worst_mart = 0.0
        slack = math.inf
        for i in range(1, n + 1):
            dev_mean = conditional_mean_identity_check(spec, i)
            dev_mart = martingale_increment_check(spec, i)
            sm = second_moment_identity_check(spec, i)
            dev_sq = abs(sm.mean_square_lhs - sm.mean_square_rhs)
            slack = min(slack,
                        sm.variance_rhs - sm.variance_lhs,
                        sm.deviation_rhs - sm.deviation_lhs,
                        sm.third_moment_rhs - sm.third_moment_lhs)
            worst_mean = max(worst_mean, dev_mean)
            worst_sq = max(worst_sq, dev_sq)
            worst_mart = max(worst_mart, dev_mart)
            rows.append({
                "schema_version": SCHEMA_VERSION, "check": "conditional_moments",
                "n": n, "i": i, "lhs": sm.mean_square_lhs, "rhs": sm.mean_square_rhs,
                "deviation": dev_mean, "slack": min(
                    sm.variance_rhs - sm.variance_lhs,
                    sm.deviation_rhs - sm.deviation_lhs,
                    sm.third_moment_rhs - sm.third_moment_lhs),
            })
        gap = covariance_gap_sum(n)
        gap_exact_dev = abs(float(covariance_gap_sum_exact(n) - harmonic_gap_closed_form(n)))
        rows.append({
            "schema_version": SCHEMA_VERSION, "check": "covariance_gap", "n": n,
            "i": 0, "lhs": gap, "rhs": 3.0 * math.sqrt(n), "deviation": gap_exact_dev,
            "slack": 3.0 * math.sqrt(n) - gap,
        })
        checks[f"conditional_mean_identity_n{n}"] = worst_mean <= 1e-12
        checks[f"conditional_mean_square_n{n}"] = worst_sq <= 1e-12
        checks[f"martingale_increment_n{n}"] = worst_mart <= 1e-12
        checks[f"moment_inequalities_n{n}"] = slack >= -1e-12
        checks[f"covariance_gap_n{n}"] = gap_exact_dev == 0.0 and gap <= 3.0 * math.sqrt(n)
    rng = rng_from(derive_child(cfg.seed, 11))
    worst_stein = 0.0
    for t in range(5):
        m = rng.standard_normal((4, 4))
        cov = m @ m.T / 4.0
        worst_stein = max(worst_stein, stein_exact_check(cov))
    rows.append({
        "schema_version": SCHEMA_VERSION, "check": "stein_polynomial", "n": 4,
        "i": 0, "lhs": worst_stein, "rhs": 1e-10, "deviation": worst_stein,
        "slack": 1e-10 - worst_stein,
    })
    checks["stein_polynomial"] = worst_stein <= 1e-10
    fields = ["schema_version", "check", "n", "i", "lhs", "rhs", "deviation", "slack"]
    return fields, rows, checks


def _swapping_cell(args):
    spec_kind, n, f_kind, replicates, seed = args
    if isinstance(spec_kind, dict):
        spec = spec_from_dict(spec_kind)
        n = spec_length(spec)
        label = spec_kind.get("variant", "custom")
    else:
        spec = suites.swapping_spec(spec_kind, n)
        label = spec_kind
    y_spec = suites.gaussian_comparison(n)
    f = suites.suite_function(f_kind, n)
    report = swapping_report(f, spec, y_spec, replicates, seed,
                             ab_replicates=20_000)
    return {
        "schema_version": SCHEMA_VERSION, "spec": label, "n": n,
        "function": f_kind, "bound": report.bound,
        "first_order": report.components["first_order"],
        "second_order": report.components["second_order"],
        "third_moment": report.components["third_moment"],
        "estimate": report.mc_estimate, "stderr": report.mc_stderr,
        "replicates": replicates, "dominated": report.dominates(3.0),
    }


def run_thm11(cfg: ExperimentConfig):
    replicates = cfg.replicates or 100_000
    n_list = [int(n) for n in (cfg.n_list or suites.SWAPPING_N_VALUES)]
    spec_kinds = [cfg.custom_spec] if cfg.custom_spec else list(cfg.specs)
    cells = []
    idx = 0
    for spec_kind in spec_kinds:
        for n in n_list if not cfg.custom_spec else [0]:
            for f_kind in cfg.functions:
                cells.append((spec_kind, n, f_kind, replicates,
                              derive_child(cfg.seed, idx)))
                idx += 1
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            rows = list(pool.map(_swapping_cell, cells))
    else:
        rows = [_swapping_cell(c) for c in cells]
    checks = {f"dominated_{r['spec']}_n{r['n']}_{r['function']}": bool(r["dominated"])
              for r in rows}
    fields = ["schema_version", "spec", "n", "function", "bound", "first_order",
              "second_order", "third_moment", "estimate", "stderr", "replicates",
              "dominated"]
    return fields, rows, checks


def run_thm12(cfg: ExperimentConfig):
    replicates = cfg.replicates or 200_000
    n_list = [int(n) for n in (cfg.n_list or suites.SUMMARIZATION_N_VALUES)]
    rows = []
    checks = {}
    idx = 0
    for n in n_list:
        spec = (standardized_multiset(cfg.multiset) if cfg.multiset and len(cfg.multiset) == n
                else suites.ramp_multiset(n))
        for f_kind in suites.SUMMARIZATION_FUNCTION_KINDS:
            f = suites.summarization_function(f_kind, n)
            report = end_to_end_check(spec, f, replicates, derive_child(cfg.seed, idx))
            idx += 1
            ok = report.dominates(3.0)
            rows.append({
                "schema_version": SCHEMA_VERSION, "n": n, "function": f_kind,
                "bound": report.bound,
                "second_order": report.components["second_order"],
                "third_order": report.components["third_order"],
                "estimate": report.mc_estimate, "stderr": report.mc_stderr,
                "replicates": replicates, "dominated": ok,
            })
            checks[f"dominated_n{n}_{f_kind}"] = bool(ok)
    fields = ["schema_version", "n", "function", "bound", "second_order",
              "third_order", "estimate", "stderr", "replicates", "dominated"]
    return fields, rows, checks


def run_resolvent_check(cfg: ExperimentConfig):
    z = complex(cfg.z_grid[0]) if cfg.z_grid else 1j
    N_list = [int(N) for N in (cfg.N_list or [2, 3, 4, 5, 6, 7, 8])]
    rng = rng_from(derive_child(cfg.seed, 23))
    agreement = fd_agreement_check(N_list, cfg.tuples, z, rng)
    rows = [{
        "schema_version": SCHEMA_VERSION, "N": N, "kind": "finite_difference",
        "order": order, "value": analytic, "reference": fd, "rel_error": rel,
    } for N, order, analytic, fd, rel in agreement.cases]
    worst_ratio = 0.0
    for t in range(cfg.trials):
        N = int(rng.choice(N_list))
        x = rng.uniform(-2.0, 2.0, N * (N + 1) // 2)
        ratios = trace_bound_check(x, N, z, 1, rng)
        worst_ratio = max(worst_ratio, ratios.order1, ratios.order2, ratios.order3)
    rows.append({
        "schema_version": SCHEMA_VERSION, "N": 0, "kind": "trace_ratio",
        "order": 0, "value": worst_ratio, "reference": 1.0, "rel_error": 0.0,
    })
    checks = {
        "finite_difference_order1": agreement.order1 <= 1e-6,
        "finite_difference_order2": agreement.order2 <= 1e-6,
        "finite_difference_order3": agreement.order3 <= 1e-6,
        "trace_bound_ratios": worst_ratio <= 1.0,
    }
    fields = ["schema_version", "N", "kind", "order", "value", "reference",
              "rel_error"]
    return fields, rows, checks


def _sweep_cell(args):
    ensemble, N, seed, z_grid = args
    spec = ENSEMBLES[ensemble](N)
    row = thm13_experiment(spec, z_grid, seed)
    out = {
        "schema_version": SCHEMA_VERSION, "N": N, "seed": seed,
        "ensemble": row.ensemble, "mu_hat": row.mu_hat,
        "sigma_hat": row.sigma_hat, "m4_tilde": row.m4_tilde, "ks": row.ks,
    }
    for k, gap in enumerate(row.stieltjes_gaps):
        out[f"re_gap_{k}"] = float(gap.real)
        out[f"im_gap_{k}"] = float(gap.imag)
    return out


def run_wigner_sweep(cfg: ExperimentConfig):
    if cfg.ensemble not in ENSEMBLES:
        raise ValueError(f"unknown ensemble {cfg.ensemble!r}")
    N_list = [int(N) for N in (cfg.N_list or [50, 100, 200, 400])]
    z_grid = [complex(z) for z in cfg.z_grid]
    cells = [(cfg.ensemble, N, derive_child(cfg.seed, N * 100_003 + s), z_grid)
             for N in N_list for s in range(cfg.seeds)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(c) for c in cells]
    medians = {N: float(np.median([r["ks"] for r in rows if r["N"] == N]))
               for N in N_list}
    checks = {"all_cells_finite": all(math.isfinite(r["ks"]) for r in rows)}
    fields = ["schema_version", "N", "seed", "ensemble", "mu_hat", "sigma_hat",
              "m4_tilde", "ks"]
    fields += [f"{p}_gap_{k}" for k in range(len(z_grid)) for p in ("re", "im")]
    summary_extra = {"median_ks": {str(N): medians[N] for N in N_list},
                     "z_grid": [str(z) for z in z_grid]}
    return fields, rows, checks, summary_extra


def run_semicircle_table(cfg: ExperimentConfig):
    rows = []
    xs = cfg.x_values if cfg.x_values else ([] if cfg.z_grid else [0.0])
    for x in xs:
        rows.append({
            "schema_version": SCHEMA_VERSION, "kind": "x", "arg_re": float(x),
            "arg_im": 0.0, "density": float(semicircle_density(x)),
            "cdf": float(semicircle_cdf(x)), "m_re": "", "m_im": "",
        })
    if not cfg.x_values:
        for z_text in cfg.z_grid:
            z = complex(z_text)
            m = semicircle_stieltjes(z)
            rows.append({
                "schema_version": SCHEMA_VERSION, "kind": "z", "arg_re": z.real,
                "arg_im": z.imag, "density": "", "cdf": "",
                "m_re": m.real, "m_im": m.imag,
            })
    checks = {"table_nonempty": bool(rows)}
    fields = ["schema_version", "kind", "arg_re", "arg_im", "density", "cdf",
              "m_re", "m_im"]
    return fields, rows, checks


_COMMANDS = {
    "identities": run_identities,
    "thm11-check": run_thm11,
    "thm12-check": run_thm12,
    "resolvent-check": run_resolvent_check,
    "wigner-sweep": run_wigner_sweep,
    "semicircle-table": run_semicircle_table,
}


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------


def _split_floats(text: str):
    return [float(v) for v in text.split(",") if v != ""]


def _split_ints(text: str):
    return [int(v) for v in text.split(",") if v != ""]


def _split_strs(text: str):
    return [v for v in text.split(",") if v != ""]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lindeberg",
        description="Verification suites for swapping bounds, exchangeable "
                    "summarization, and semicircle-law experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "identities": "exact enumeration checks for conditional moments, the "
                      "covariance gap, and the Gaussian integration-by-parts identity",
        "thm11-check": "swapping-bound domination suite",
        "thm12-check": "exchangeable summarization bound suite",
        "resolvent-check": "resolvent derivative formulas against finite "
                           "differences plus trace bounds",
        "wigner-sweep": "semicircle convergence sweep over matrix orders and seeds",
        "semicircle-table": "reference law values (density, cdf, transform)",
    }
    for name, desc in descriptions.items():
        p = sub.add_parser(name, help=desc, description=desc)
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--replicates", type=int, default=None)
        p.add_argument("--n", dest="n_list", type=_split_ints, default=None,
                       help="comma-separated vector lengths")
        p.add_argument("--N", dest="N_list", type=_split_ints, default=None,
                       help="comma-separated matrix orders")
        p.add_argument("--multiset", type=_split_floats, default=None,
                       help="comma-separated multiset values")
        p.add_argument("--ensemble", default=None, choices=sorted(ENSEMBLES))
        p.add_argument("--seeds", type=int, default=None,
                       help="replicate seeds per sweep cell")
        p.add_argument("--z", dest="z_grid", type=_split_strs, default=None,
                       help="comma-separated complex evaluation points")
        p.add_argument("--x", dest="x_values", type=_split_floats, default=None,
                       help="comma-separated real evaluation points")
        p.add_argument("--specs", type=_split_strs, default=None)
        p.add_argument("--functions", type=_split_strs, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--tuples", type=int, default=None)
        p.add_argument("--spec-json", dest="spec_json", default=None,
                       help="path to an exchangeable-spec JSON document")
    return parser


_VALUE_FLAGS = ("--multiset", "--x", "--z", "--n", "--N")
_NEGATIVE_START = re.compile(r"^-\d|^-\.\d|^--?\d")


def _merge_negative_values(argv):
    """Join value flags with arguments that begin with a minus sign."""
    out = []
    skip = False
    for k, token in enumerate(argv):
        if skip:
            skip = False
            continue
        if token in _VALUE_FLAGS and k + 1 < len(argv) and _NEGATIVE_START.match(argv[k + 1]):
            out.append(f"{token}={argv[k + 1]}")
            skip = True
        else:
            out.append(token)
    return out


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig(command=args.command)
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        data.setdefault("command", args.command)
        if data["command"] != args.command:
            raise ValueError("config file is for a different command")
        cfg = ExperimentConfig.from_dict(data)
    env_threads = os.environ.get(_THREADS_ENV)
    if env_threads and args.threads is None and not args.config:
        cfg.threads = int(env_threads)
    overrides = {
        "seed": args.seed, "out": args.out, "threads": args.threads,
        "replicates": args.replicates, "n_list": args.n_list,
        "N_list": args.N_list, "multiset": args.multiset,
        "ensemble": args.ensemble, "seeds": args.seeds, "z_grid": args.z_grid,
        "x_values": args.x_values, "specs": args.specs,
        "functions": args.functions, "trials": args.trials,
        "tuples": args.tuples,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    if args.spec_json:
        with open(args.spec_json) as fh:
            cfg.custom_spec = json.load(fh)
        spec_from_dict(cfg.custom_spec)  # validate early
    return cfg


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(_merge_negative_values(argv))
    try:
        cfg = build_config(args)
        result = _COMMANDS[cfg.command](cfg)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    fields, rows, checks = result[:3]
    summary_extra = result[3] if len(result) > 3 else {}

    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = cfg.command.replace("-", "_")
    _write_csv(out_dir / f"{stem}.csv", fields, rows)
    summary = {
        "command": cfg.command,
        "seed": cfg.seed,
        "checks": {k: bool(v) for k, v in sorted(checks.items())},
        "all_passed": all(checks.values()),
        "rows": len(rows),
        **summary_extra,
    }
    with open(out_dir / f"{stem}_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(summary, indent=2, sort_keys=True))
    if not summary["all_passed"]:
        failing = [k for k, v in checks.items() if not v]
        print("FAILED: " + ", ".join(sorted(failing)), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
