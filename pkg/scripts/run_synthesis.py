"""Synthesize and verify certificates for the bundled curves, printing a summary table.

    python3 scripts/run_synthesis.py --k 25 --out runs/
"""

import argparse
import time
from pathlib import Path

from teichlimit import RunConfig, load_curve, synthesize, verify_certificate

CURVES = Path(__file__).resolve().parents[1] / "curves"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--k", type=int, default=25)
    ap.add_argument("--out", default=None)
    ap.add_argument("curves", nargs="*", default=["constant", "segment", "triangle", "circle"])
    args = ap.parse_args()

    print(f"{'curve':<10} {'synth s':>8} {'verify s':>9}  {'tracking slack':>15}  {'hausdorff':>9}  pass")
    for name in args.curves:
        curve = load_curve(CURVES / f"{name}.json")
        t0 = time.perf_counter()
        cert = synthesize(curve, args.k, RunConfig(K=args.k))
        t1 = time.perf_counter()
        report = verify_certificate(cert)
        t2 = time.perf_counter()
        tracking = report.suites["tracking"]
        hd = report.suites["hausdorff"].notes
        print(
            f"{name:<10} {t1 - t0:8.2f} {t2 - t1:9.2f}  {float(tracking.worst_margin):15.4g}"
            f"  {float(hd['worst_curve_to_phi']):9.4f}  {report.overall_pass}"
        )
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            cert.save(out / f"{name}-K{args.k}.json")


if __name__ == "__main__":
    main()
