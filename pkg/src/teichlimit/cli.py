"""Command-line entry point: synthesize, verify, cross-validate, plot-data."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from filelock import FileLock

from .certificate import ConstructionCertificate
from .config import RunConfig
from .constructor import synthesize
from .contfrac import CFSchedule, digit_from_str
from .curves import curve_from_spec, load_curve
from .errors import CertificateFormatError, CurveSpecError, TeichLimitError
from .flatsurf import slit_threshold
from .trajectory import Timeline, checkpoint_series, checkpoint_table, plot_data
from .verify import (
    VerificationReport,
    check_identities,
    cross_validate,
    random_relaxed_schedules,
    verify_certificate,
    with_tail,
)

EXIT_OK, EXIT_FAIL, EXIT_IO = 0, 1, 2
LOCK_NAME = ".teichlimit.lock"


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args) -> RunConfig:
    overrides = {
        "K": args.k,
        "epsilon_ratio": args.epsilon_ratio,
        "s": args.slit,
        "epsilon0": args.epsilon0,
        "r0": args.r0,
        "R": args.r_constant,
        "digit_cap": args.digit_cap,
        "depth_cap": args.depth_cap,
        "seed": args.seed,
        "grid_density": args.grid_density,
        "mesh": args.mesh,
        "out": args.out,
    }
    if args.slit not in (None, "auto"):
        overrides["s"] = float(args.slit)
    if args.config:
        return RunConfig.from_file(args.config, **overrides)
    return RunConfig(**{k: v for k, v in overrides.items() if v is not None})


def _summary(cert: ConstructionCertificate, config: RunConfig) -> str:
    lines = [
        f"blocks K = {cert.K}",
        f"slit length s = {cert.s} (threshold {slit_threshold(config.epsilon0, config.r0):.6g})",
        f"additive error L = {cert.L}",
        f"plan resolution (l1) = {cert.plan.resolution}",
        f"audit entries = {len(cert.audit)}, all pass = {cert.passed}",
        "smallest margin per inequality:",
    ]
    worst: dict = {}
    for e in cert.audit:
        m = float(e.margin)
        if e.id not in worst or m < worst[e.id][0]:
            worst[e.id] = (m, e)
    for name in sorted(worst):
        m, e = worst[name]
        lines.append(f"  {name:<18} {m:.6g}  (k/j={e.k_or_j}, {e.case})")
    return "\n".join(lines) + "\n"


def cmd_synthesize(args) -> int:
    config = _config(args)
    curve = load_curve(args.curve)
    cert = synthesize(curve, config.K, config)
    out = _out_dir(args.out)
    with FileLock(str(out / LOCK_NAME)):
        cert.save(out / "certificate.json")
        tl = Timeline(cert)
        series = checkpoint_series(tl, config.grid_density)
        (out / "checkpoints.csv").write_text(checkpoint_table(series))
        (out / "plot.json").write_text(_dump(plot_data(cert, series, curve, config.mesh)))
        (out / "summary.txt").write_text(_summary(cert, config))
    print(f"wrote certificate with {len(cert.audit)} passing audit entries to {out}")
    return EXIT_OK


def _write_report(report: VerificationReport, out) -> None:
    text = _dump(report.to_json())
    if out:
        d = _out_dir(out)
        with FileLock(str(d / LOCK_NAME)):
            (d / "report.json").write_text(text)
    else:
        sys.stdout.write(text)


def cmd_verify(args) -> int:
    cert = ConstructionCertificate.load(args.certificate)
    report = verify_certificate(
        cert, grid_density=args.grid_density or 10, mesh=args.mesh or 0.05
    )
    _write_report(report, args.out)
    if not report.overall_pass:
        print("verification FAILED in: " + ", ".join(report.failing_suites()), file=sys.stderr)
        return EXIT_FAIL
    print("verification passed", file=sys.stderr)
    return EXIT_OK


def parse_schedule(text: str) -> CFSchedule:
    """``"2x5,3x4"`` -> blocks (2, 5), (3, 4)."""
    blocks = []
    for part in text.split(","):
        digit, _, count = part.strip().partition("x")
        blocks.append((digit_from_str(digit), int(count or 1)))
    return CFSchedule(tuple(blocks))


def cmd_cross_validate(args) -> int:
    seed = 0 if args.seed is None else args.seed
    depth_cap = args.depth_cap or 10**6
    if args.schedule:
        schedules = [with_tail(parse_schedule(args.schedule))]
    else:
        schedules = random_relaxed_schedules(seed, args.count)
    report = VerificationReport()
    report.add(cross_validate(schedules, depth_cap))
    report.add(check_identities(schedules, depth_cap))
    report.suites["oracle-equivalence"].notes["seed"] = seed
    report.suites["oracle-equivalence"].notes["schedules"] = len(schedules)
    _write_report(report, args.out)
    return EXIT_OK if report.overall_pass else EXIT_FAIL


def cmd_plot_data(args) -> int:
    cert = ConstructionCertificate.load(args.certificate)
    curve = load_curve(args.curve) if args.curve else curve_from_spec(cert.curve)
    series = checkpoint_series(Timeline(cert), args.grid_density or 10)
    out = _out_dir(args.out)
    with FileLock(str(out / LOCK_NAME)):
        (out / "plot.json").write_text(_dump(plot_data(cert, series, curve, args.mesh or 0.05)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teichlimit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with RunConfig fields")
        p.add_argument("--k", type=int)
        p.add_argument("--epsilon-ratio", type=float)
        p.add_argument("--slit", help="'auto' or a slit length in (0, 1)")
        p.add_argument("--epsilon0", type=float)
        p.add_argument("--r0", type=float)
        p.add_argument("--r-constant", type=float)
        p.add_argument("--digit-cap", type=int)
        p.add_argument("--depth-cap", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--grid-density", type=int)
        p.add_argument("--mesh", type=float)

    p = sub.add_parser("synthesize", help="build and audit a certificate for a curve")
    p.add_argument("--curve", required=True)
    common(p)
    p.set_defaults(func=cmd_synthesize, out_required=True)

    p = sub.add_parser("verify", help="re-verify a certificate file")
    p.add_argument("--certificate", required=True)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("cross-validate", help="exact-vs-coarse oracle on random schedules")
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--schedule", help="single schedule, e.g. '2x5,3x4'")
    common(p)
    p.set_defaults(func=cmd_cross_validate)

    p = sub.add_parser("plot-data", help="simplex coordinates of a certificate's trajectory")
    p.add_argument("--certificate", required=True)
    p.add_argument("--curve")
    common(p)
    p.set_defaults(func=cmd_plot_data, out_required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "out_required", False) and not args.out:
        parser.error(f"{args.command} needs --out")
    try:
        return args.func(args)
    except (OSError, CertificateFormatError, CurveSpecError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TeichLimitError, AssertionError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
