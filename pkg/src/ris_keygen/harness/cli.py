"""Command-line interface.

Exit codes: 0 success, 1 a verdict failed, 2 configuration error,
3 invalid model, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace

from ..analytic import noise_var_from_snr_db, skr_closed_form
from ..channel import sample_batch
from ..errors import ModelError
from ..stats import mi_knn
from ..weights import SCHEMES
from .config import ConfigError, build_config, build_model, load_toml, merge, parse_range
from .experiment import run_experiment
from .figures import FIGURES, reproduce_figure

EXIT_VERDICT, EXIT_CONFIG, EXIT_MODEL, EXIT_IO = 1, 2, 3, 4


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model (override config file values)")
    g.add_argument("--scheme", choices=SCHEMES, help="phase-shift scheme")
    g.add_argument("--mx", type=int, help="elements along x")
    g.add_argument("--my", type=int, help="elements along y")
    g.add_argument("--q", type=int, help="CGPS group size")
    g.add_argument("--bits", type=int, help="DIPS quantization bits")
    g.add_argument("--allow-remainder", action="store_true", default=None,
                   help="CGPS: put leftover elements in one partial group instead of failing")
    g.add_argument("--spacing", type=float, help="element spacing in wavelengths (both axes)")
    g.add_argument("--angles", metavar="PSI_I,THETA_I,PSI_O,THETA_O",
                   help="incident and reflected azimuth/elevation in degrees")


def _model_overrides(args) -> dict:
    return {
        "scheme": args.scheme,
        "mx": args.mx,
        "my": args.my,
        "q": args.q,
        "bits": args.bits,
        "allow_remainder": args.allow_remainder,
        "spacing": args.spacing,
        "angles": args.angles,
        "direct_gain": getattr(args, "direct_gain", None),
        "noise_var": getattr(args, "noise_var", None),
    }


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=int, help="number of channel realizations (default 100000)")
    p.add_argument("--seed", type=int, help="global seed (default 0)")
    p.add_argument("--direct-gain", metavar="RE,IM", help="direct Alice-Bob path gain")
    p.add_argument("--noise-var", type=float, help="estimation noise variance per real quadrature")
    p.add_argument("--shards", type=int, help="trial shards; results do not depend on it")
    p.add_argument("--workers", type=int, help="threads used across shards")
    p.add_argument("--observations", action="store_true", default=None,
                   help="also write observations.csv with paired noisy estimates")
    p.add_argument("--no-mi", action="store_true", help="skip the kNN mutual-information estimate")
    p.add_argument("--skr-eq29-verbatim", action="store_true", default=None,
                   help="1-bit DIPS: evaluate the per-quadrature rate without the 1/2 factors")
    p.add_argument("--out", metavar="DIR", help="output directory")


def _raw_config(args) -> dict:
    raw = load_toml(args.config) if getattr(args, "config", None) else {}
    flags = {
        "model": _model_overrides(args),
        "trials": args.trials,
        "seed": args.seed,
        "shards": args.shards,
        "workers": args.workers,
        "outputs": {"dir": args.out, "observations_csv": args.observations},
        "estimate_mi": False if args.no_mi else None,
        "skr_eq29_verbatim": args.skr_eq29_verbatim,
    }
    return merge(raw, flags)


def _print_report(report) -> None:
    for v in report.verdicts:
        status = "PASS" if v["passed"] else "FAIL"
        print(f"{status}  {v['name']:<22} value={v['value']:.6g} expected={v['expected']:.6g} "
              f"tol={v['tolerance']:.3g}")
    for r in report.sweep or []:
        status = "PASS" if r["pass"] else "FAIL"
        print(f"{status}  sweep x={r['x']:<8} empirical={r['empirical']:.6g} "
              f"analytic={r['analytic']:.6g} tol={r['tolerance']:.3g}")
    for f in report.files:
        print(f"wrote {f}")


def cmd_run(args) -> int:
    raw = _raw_config(args)
    if args.command == "simulate" and not raw.get("outputs", {}).get("dir"):
        raise ConfigError("simulate needs --out DIR (or [outputs] dir in the config)")
    report = run_experiment(build_config(raw))
    _print_report(report)
    return 0 if report.passed else EXIT_VERDICT


def cmd_skr(args) -> int:
    model = build_model({k: v for k, v in _model_overrides(args).items() if v is not None})
    snrs = parse_range(args.snr_db)
    header = ["snr_db", "noise_var", "analytic", "upper_bound"] + (["estimate"] if args.estimate else [])
    rows = []
    for snr in snrs:
        noise = noise_var_from_snr_db(snr, model.geometry.size)
        res = skr_closed_form(model.scheme, model.geometry, model.legit_angles, noise, args.skr_eq29_verbatim)
        row = [snr, repr(noise), repr(res.rate_bits_per_sample), str(res.is_upper_bound).lower()]
        if args.estimate:
            batch = sample_batch(replace(model, noise_var_per_quadrature=noise), args.trials, args.seed)
            row.append(repr(mi_knn(batch.y_a, batch.y_b, args.k).bits))
        rows.append(row)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if args.out:
            out.close()
    return 0


def cmd_reproduce(args) -> int:
    for path in reproduce_figure(args.figure, args.out, args.trials, args.seed):
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ris-keygen",
        description="RIS-induced channel randomness: simulation, verification and key rates.",
        epilog="Config file values are overridden by flags. Exit codes: 0 ok, 1 verdict failed, "
               "2 config error, 3 model error, 4 I/O error.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw channel samples, summarize and judge them")
    p.add_argument("--config", metavar="FILE", help="TOML config; flags win over it")
    _add_model_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run the verdict suite from a config file")
    p.add_argument("--config", metavar="FILE", required=True, help="TOML config")
    _add_model_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("skr", help="secret key rate against SNR")
    _add_model_flags(p)
    p.add_argument("--snr-db", required=True, metavar="START:STEP:END", help="SNR grid in dB; write --snr-db=-10:5:10 for a negative start")
    p.add_argument("--estimate", action="store_true", help="add a kNN estimate from simulated pairs")
    p.add_argument("--trials", type=int, default=5000, help="pairs per estimate (default 5000)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=5, help="kNN neighbors (default 5)")
    p.add_argument("--skr-eq29-verbatim", action="store_true",
                   help="1-bit DIPS: per-quadrature rate without the 1/2 factors")
    p.add_argument("--out", metavar="FILE", help="CSV output (default stdout)")
    p.set_defaults(func=cmd_skr)

    p = sub.add_parser("reproduce", help="write plot-ready data for one figure")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--out", metavar="DIR", required=True)
    p.add_argument("--trials", type=int, help="override default trial count")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelError as exc:
        print(f"model error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
