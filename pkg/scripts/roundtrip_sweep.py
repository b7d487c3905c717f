"""Closed-form round-trip error across the default parameter box.

Draws parameters as the CLI does, reconstructs from closed-form traces, and
reports error quantiles per parameter plus the share of draws that miss a
relative tolerance.  With --oracle-sample N it also reconstructs N of the
draws from traces computed at 50 digits and rounded once, which separates
pipeline rounding from the conditioning of the inverse map itself.
"""

import argparse
import json

import mpmath as mp
import numpy as np

from knds_spectral import TraceSet, forward_traces, reconstruct, validate_regime
from knds_spectral.cli import draw_params
from knds_spectral.traces import EXTERNAL

NAMES = ("mass", "spin", "charge", "cosmological_constant")


def exact_traces(p, dps=50):
    with mp.workdps(dps):
        m, a, q, lam = (mp.mpf(v) for v in (p.mass, p.spin, p.charge, p.cosmological_constant))
        roots = mp.polyroots([-lam / 3, 0, 1 - lam * a**2 / 3, -2 * m, a**2 + q**2], maxsteps=500, extraprec=200)
        real = sorted(mp.re(r) for r in roots if abs(mp.im(r)) < mp.mpf(10) ** -25)
        xi = (lam * a**2 / 3) / (1 + lam * a**2 / 3)
        u = mp.sqrt(xi / (1 - xi))
        g = (mp.atan(u) / u - 1) / xi
        out = []
        for r in real[-2:]:
            eta2 = r**2 + a**2
            b2 = a**2 / eta2
            out += [float(eta2 * (1 - b2 + (xi - b2) * g)), float(eta2 * (1 - xi))]
    return TraceSet(out[0], {1: out[1]}, out[2], {1: out[3]}, provenance=EXTERNAL)


def errors(p, res):
    return np.array([abs(getattr(res, n) - getattr(p, n)) / getattr(p, n) for n in NAMES])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--draws", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=12345)
    ap.add_argument("--rtol", type=float, default=1e-7)
    ap.add_argument("--oracle-sample", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    rows, params, skipped = [], [], 0
    for _ in range(args.draws):
        p = draw_params(rng)
        if not validate_regime(p).physical:
            skipped += 1
            continue
        rows.append(errors(p, reconstruct(forward_traces(p))))
        params.append(p)
    err = np.array(rows)

    report = {"evaluated": len(rows), "skipped": skipped, "rtol": args.rtol, "per_parameter": {}}
    for i, n in enumerate(NAMES):
        col = err[:, i]
        report["per_parameter"][n] = {
            "median": float(np.median(col)),
            "p99": float(np.quantile(col, 0.99)),
            "max": float(col.max()),
            "fraction_above_rtol": float(np.mean(col > args.rtol)),
        }
    worst = err.max(axis=1)
    report["fraction_any_above_rtol"] = float(np.mean(worst > args.rtol))
    bad = [params[i] for i in np.argsort(worst)[::-1][:5]]
    report["worst_draws"] = [
        {"spin": p.spin, "charge": p.charge, "cosmological_constant": p.cosmological_constant, "max_error": float(w)}
        for p, w in zip(bad, np.sort(worst)[::-1][:5])
    ]

    if args.oracle_sample:
        # worst draws first: they show whether the error is in the pipeline or the map
        idx = np.argsort(worst)[::-1][: args.oracle_sample]
        ratios = []
        for i in idx:
            oracle_err = errors(params[i], reconstruct(exact_traces(params[i]))).max()
            ratios.append(float(worst[i] / oracle_err))
        report["pipeline_over_exact_rounding_error"] = {"min": min(ratios), "max": max(ratios)}
        report["max_error_floor_from_exact_traces"] = max(
            float(errors(params[i], reconstruct(exact_traces(params[i]))).max()) for i in idx
        )
    print(json.dumps(report, indent=2))


if __name__ == "__main__":
    main()
