"""Command-line frontend.

Subcommands:
  simulate   run a Monte Carlo experiment, write report.json + samples.csv
  theory     print closed-form quantities as JSON
  compare    re-check an existing report's MC-vs-theory z-scores
  table      aligned function | MC variance | theory | z-score table
  dump       write one sampled matrix as a bandmat v1 binary + sidecar

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .experiment import (ExperimentError, PartialRunError, atomic_write_text,
                         config_from_json, heatmap_data, run,
                         write_report, write_samples_csv)
from .les import LesError, TestFunction
from .matgen import SpecError, Topology, dump_bandmat, sample
from .profiles import (PeriodizedProfile, ProfileError, VarianceProfile,
                       profile_from_config)
from .theory import (KernelParams, TheoryError, eulerian, irwin_hall_pdf,
                     kernel, limiting_covariance, monomial_variance,
                     sinc_power_integral, sinc_power_integral_exact)

CONFIG_ERROR = 2
RUNTIME_ERROR = 3

_CONFIG_EXCEPTIONS = (ExperimentError, SpecError, ProfileError, LesError,
                      TheoryError, ValueError, KeyError)


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _profile_config(text: str) -> dict:
    if text == "uniform":
        return {"kind": "uniform"}
    if os.path.exists(text):
        with open(text) as fh:
            return json.load(fh)
    return json.loads(text)


def _load_config(args) -> dict:
    cfg: dict = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
    if args.n is not None:
        cfg["n"] = args.n
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.replicates is not None:
        cfg["replicates"] = args.replicates
    if args.workers is not None:
        cfg["workers"] = args.workers
    if args.topology is not None:
        cfg["topology"] = args.topology
    if args.nu is not None:
        cfg["nu"] = args.nu
    if args.profile is not None:
        cfg["profile"] = _profile_config(args.profile)
    if args.functions is not None:
        cfg["functions"] = [s for s in args.functions.split(",") if s]
    if args.half and args.bandwidth_exponent is not None:
        raise ExperimentError("--half and --bandwidth-exponent are exclusive")
    if args.half:
        cfg["b_n"] = (int(cfg["n"]) - 1) // 2
    elif args.bandwidth_exponent is not None:
        cfg["b_n"] = int(math.floor(int(cfg["n"]) ** args.bandwidth_exponent))
    if args.bandwidth is not None:
        cfg["b_n"] = args.bandwidth
    return cfg


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--bandwidth", type=int, help="b_n directly")
    p.add_argument("--bandwidth-exponent", type=float,
                   help="b_n = floor(n^exponent)")
    p.add_argument("--half", action="store_true",
                   help="b_n = floor((n-1)/2)")
    p.add_argument("--topology",
                   choices=[t.value for t in Topology])
    p.add_argument("--nu", type=float)
    p.add_argument("--profile", help='"uniform", a JSON file, or inline JSON')
    p.add_argument("--functions", help="comma list, e.g. z,z2,z3")
    p.add_argument("--workers", type=int)
    p.add_argument("--json", action="store_true", help="machine output")


def cmd_simulate(args) -> int:
    try:
        config = config_from_json(_load_config(args))
    except FileNotFoundError as exc:
        return _fail(CONFIG_ERROR, str(exc))
    except _CONFIG_EXCEPTIONS as exc:
        return _fail(CONFIG_ERROR, str(exc))
    try:
        os.makedirs(args.out, exist_ok=True)
        report = run(config)
        table, _ = heatmap_data(config)
        report_path = os.path.join(args.out, "report.json")
        samples_path = os.path.join(args.out, "samples.csv")
        write_report(report, report_path)
        write_samples_csv(table, samples_path)
    except (PartialRunError, OSError, RuntimeError) as exc:
        return _fail(RUNTIME_ERROR, str(exc))
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(f"wrote {report_path} and {samples_path}")
    return 0


def _theory_params(args) -> KernelParams:
    base = profile_from_config(_profile_config(args.profile))
    nu = args.nu
    return KernelParams(profile=PeriodizedProfile(base=base, nu=nu), nu=nu)


def cmd_theory(args) -> int:
    try:
        q = args.quantity
        params: dict = {}
        method = "ClosedForm"
        trunc_error = 0.0
        if q == "sinc_integral":
            params = {"l": args.l}
            value = sinc_power_integral(args.l)
            params["exact"] = str(sinc_power_integral_exact(args.l))
        elif q == "irwin_hall":
            params = {"m": args.m, "x": args.x}
            value = irwin_hall_pdf(args.m, args.x)
        elif q == "eulerian":
            params = {"n": args.n, "m": args.m}
            value = eulerian(args.n, args.m)
        elif q == "monomial_variance":
            base = profile_from_config(_profile_config(args.profile))
            tv = monomial_variance(PeriodizedProfile(base=base, nu=args.nu),
                                   args.nu, args.l)
            params = {"nu": args.nu, "l": args.l, "profile": args.profile}
            value = tv.real_value
            method = tv.method
            trunc_error = tv.trunc_error
        elif q == "kernel":
            kp = _theory_params(args)
            z = complex(args.z_re, args.z_im)
            eta = complex(args.eta_re, args.eta_im)
            v = kernel(kp, z, eta)
            params = {"nu": args.nu, "z": [z.real, z.imag],
                      "eta": [eta.real, eta.imag], "profile": args.profile}
            value = [v.real, v.imag]
            method = "ConvolutionSeries"
        elif q == "covariance":
            kp = _theory_params(args)
            tv = limiting_covariance(TestFunction.parse(args.fi),
                                     TestFunction.parse(args.fj), kp)
            params = {"nu": args.nu, "fi": args.fi, "fj": args.fj,
                      "profile": args.profile}
            value = [tv.value.real, tv.value.imag]
            method = tv.method
            trunc_error = tv.trunc_error
        else:
            return _fail(CONFIG_ERROR, f"unknown quantity {q!r}")
    except _CONFIG_EXCEPTIONS as exc:
        return _fail(CONFIG_ERROR, str(exc))
    print(json.dumps({"quantity": q, "params": params, "value": value,
                      "method": method, "trunc_error": trunc_error}))
    return 0


def _read_report(path: str) -> dict:
    with open(path) as fh:
        report = json.load(fh)
    if not report.get("functions"):
        raise ValueError(f"report {path} has no function entries")
    for entry in report["functions"]:
        for key in ("function", "variance", "theory_value", "z_score"):
            if key not in entry:
                raise ValueError(f"report entry missing field {key!r}")
    return report


def _report_rows(report: dict):
    return [(e["function"], e["variance"], e["theory_value"], e["z_score"])
            for e in report["functions"]]


def cmd_table(args) -> int:
    try:
        if args.report:
            report = _read_report(args.report)
        else:
            config = config_from_json(_load_config(args))
            report = run(config).to_dict()
    except FileNotFoundError as exc:
        return _fail(RUNTIME_ERROR if args.report else CONFIG_ERROR, str(exc))
    except (json.JSONDecodeError, ValueError) as exc:
        return _fail(RUNTIME_ERROR if args.report else CONFIG_ERROR, str(exc))
    rows = _report_rows(report)
    if args.json:
        print(json.dumps([{"function": f, "mc_variance": v,
                           "theory_variance": t, "z_score": z}
                          for f, v, t, z in rows]))
        return 0
    width = max(len("function"), *(len(r[0]) for r in rows))
    print(f"{'function':<{width}}  {'MC variance':>12}  {'theory':>12}  {'z-score':>8}")
    for f, v, t, z in rows:
        print(f"{f:<{width}}  {v:>12.6f}  {t:>12.6f}  {z:>8.2f}")
    return 0


def cmd_compare(args) -> int:
    try:
        report = _read_report(args.report)
    except (FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        return _fail(RUNTIME_ERROR, str(exc))
    rows = _report_rows(report)
    results = [{"function": f, "mc_variance": v, "theory_variance": t,
                "z_score": z, "pass": abs(z) < args.z_max}
               for f, v, t, z in rows]
    if args.json:
        print(json.dumps(results))
    else:
        for r in results:
            verdict = "pass" if r["pass"] else "FAIL"
            print(f"{r['function']}: mc={r['mc_variance']:.6f} "
                  f"theory={r['theory_variance']:.6f} "
                  f"z={r['z_score']:.2f} [{verdict}]")
    return 0 if all(r["pass"] for r in results) else RUNTIME_ERROR


def cmd_dump(args) -> int:
    try:
        cfg = config_from_json({**_load_config(args),
                                "functions": ["z"], "replicates": 2})
        m = sample(cfg.spec, cfg.law, cfg.seed, args.replicate)
    except _CONFIG_EXCEPTIONS as exc:
        return _fail(CONFIG_ERROR, str(exc))
    try:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"bandmat-{cfg.seed}-{args.replicate}.bin")
        dump_bandmat(m, path)
        sidecar = {"n": m.n, "b_n": m.b_n,
                   "topology": m.spec.topology.value,
                   "nu": m.spec.nu, "seed": m.seed,
                   "replicate": m.replicate, "format": "bandmat v1"}
        atomic_write_text(path + ".json", json.dumps(sidecar, indent=2) + "\n")
    except OSError as exc:
        return _fail(RUNTIME_ERROR, str(exc))
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bandclt",
        description="Monte Carlo CLT checks for non-Hermitian band matrices")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", help="run an experiment")
    _add_config_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("theory", help="closed-form quantities")
    p.add_argument("quantity",
                   help="kernel | monomial_variance | sinc_integral | "
                        "irwin_hall | eulerian | covariance")
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--profile", default="uniform")
    p.add_argument("--fi", default="z")
    p.add_argument("--fj", default="z")
    p.add_argument("--z-re", type=float, default=1.25)
    p.add_argument("--z-im", type=float, default=0.0)
    p.add_argument("--eta-re", type=float, default=1.25)
    p.add_argument("--eta-im", type=float, default=0.0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("table", help="MC vs theory table")
    _add_config_flags(p)
    p.add_argument("--report", help="existing report.json")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("compare", help="pass/fail z-score check of a report")
    p.add_argument("--report", required=True)
    p.add_argument("--z-max", type=float, default=4.0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("dump", help="write one sampled matrix as binary")
    _add_config_flags(p)
    p.add_argument("--replicate", type=int, default=0)
    p.set_defaults(func=cmd_dump)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
