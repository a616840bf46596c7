"""Command-line front end: spectrum, gaps, verify, converge.

Outputs are deterministic: identical inputs and seed produce byte-identical
files.  Exit codes: 0 success, 1 asserted-invariant failure, 2 input
error, 3 numerical-method failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import serialize
from .errors import BracketError, InputError, IntegrationError, InterlacingError
from .gaps import (
    decay_slope,
    default_fit_start,
    residuals,
    rho,
    rho_via_convolution,
    verify_marchenko_ostrovskii,
    verify_membership_consistency,
    weighted_tail_report,
)
from .potential import Potential, hormander_norm, load_potential
from .sequence_spaces import (
    ConvTrials,
    TwoSidedSeq,
    check_or_class,
    check_sandwich,
    conv_lemma_report,
    convolve,
    make_weight,
    power_weight,
    weighted_norm,
)
from .spectrum import (
    BandEdges,
    DiscriminantConfig,
    GalerkinConfig,
    band_edges_discriminant,
    band_edges_galerkin,
)

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _thread_cap() -> int:
    raw = os.environ.get("HILLGAPS_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError as exc:
        raise InputError(f"bad range {text!r}, expected LO:HI") from exc


def _load_weight_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except OSError as exc:
        raise InputError(f"cannot read weight file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _weights_from_args(args) -> list:
    specs = [_load_weight_file(p) for p in (args.weight or [])]
    if not specs:
        specs = [{"kind": "power", "s": 1.0}]
    return [make_weight(s) for s in specs]


def _configs(args) -> tuple[GalerkinConfig, DiscriminantConfig]:
    g = GalerkinConfig(n_trunc=args.trunc)
    d = DiscriminantConfig(steps=args.steps) if args.steps else DiscriminantConfig()
    return g, d


def _edges_for(q: Potential, args, method: str) -> BandEdges:
    gcfg, dcfg = _configs(args)
    if method == "galerkin":
        return band_edges_galerkin(q, args.nmax, gcfg)
    if method == "discriminant":
        return band_edges_discriminant(q, args.nmax, dcfg)
    raise InputError(f"method {method!r} is only available for the spectrum command")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _sibling(out: str | None, suffix: str) -> str | None:
    if out is None:
        return None
    p = Path(out)
    return str(p.with_name(p.stem + suffix))


def cmd_spectrum(args) -> int:
    q = load_potential(args.potential)
    if args.method == "both":
        gcfg, dcfg = _configs(args)
        cap = _thread_cap()
        if cap >= 2:
            with ThreadPoolExecutor(max_workers=2) as pool:
                fg = pool.submit(band_edges_galerkin, q, args.nmax, gcfg)
                fd = pool.submit(band_edges_discriminant, q, args.nmax, dcfg)
                eg, ed = fg.result(), fd.result()
        else:
            eg = band_edges_galerkin(q, args.nmax, gcfg)
            ed = band_edges_discriminant(q, args.nmax, dcfg)
        edges_all = np.concatenate([eg.all_edges()[None, :], ed.all_edges()[None, :]])
        rel = np.abs(edges_all[0] - edges_all[1]) / np.maximum(
            1.0, np.abs(edges_all).max(axis=0)
        )
        max_rel = float(np.max(rel))
        if args.format == "json":
            doc = {
                "max_rel_discrepancy": max_rel,
                "galerkin": serialize.edges_to_doc(eg),
                "discriminant": serialize.edges_to_doc(ed),
            }
            _emit(serialize.dump_json(doc), args.out)
        else:
            if args.out:
                Path(_sibling(args.out, ".galerkin.csv")).write_text(serialize.edges_to_csv(eg), encoding="utf-8")
                Path(_sibling(args.out, ".discriminant.csv")).write_text(serialize.edges_to_csv(ed), encoding="utf-8")
            else:
                sys.stdout.write(serialize.edges_to_csv(eg))
                sys.stdout.write(serialize.edges_to_csv(ed))
        print(f"max relative edge discrepancy: {serialize.fmt(max_rel)}")
        return EXIT_OK
    edges = _edges_for(q, args, args.method)
    if args.format == "json":
        _emit(serialize.dump_json(serialize.edges_to_doc(edges)), args.out)
    else:
        _emit(serialize.edges_to_csv(edges), args.out)
    return EXIT_OK


def cmd_gaps(args) -> int:
    q = load_potential(args.potential)
    weights = _weights_from_args(args)
    edges = _edges_for(q, args, args.method)
    report = residuals(q, edges)
    n_range = _parse_range(args.range) if args.range else (
        min(default_fit_start(q), max(1, args.nmax - 4)),
        args.nmax,
    )
    lo, hi = n_range

    slopes = {}
    for label, col in (("gamma", report.gamma), ("resid_plain", np.abs(report.resid_plain))):
        try:
            fit = decay_slope(col, lo, hi)
            slopes[label] = {
                "slope": fit.slope,
                "rms_residual": fit.rms_residual,
                "used_points": fit.used_points,
                "zero_count": fit.zero_count,
                "n_lo": lo,
                "n_hi": hi,
            }
        except InputError as exc:
            slopes[label] = {"error": str(exc)}

    tails = {}
    for w in weights:
        tails[w.describe()] = weighted_tail_report(np.abs(report.resid_plain), w, n_range)

    rho_summary = {
        "rho_1_re": float(report.rho[0].real),
        "rho_1_im": float(report.rho[0].imag),
    }

    if args.format == "json":
        doc = {
            "gaps": serialize.gap_report_to_doc(report),
            "fit_range": {"lo": lo, "hi": hi},
            "slopes": slopes,
            "rho_summary": rho_summary,
            "tails": {
                name: {
                    "m": [int(m) for m in t.m],
                    "partial_sum": [float(x) for x in t.partial_sum],
                    "increment": [float(x) for x in t.increment],
                }
                for name, t in tails.items()
            },
        }
        _emit(serialize.dump_json(doc), args.out)
    else:
        _emit(serialize.gap_report_to_csv(report), args.out)
        summary = {
            "fit_range": {"lo": lo, "hi": hi},
            "slopes": slopes,
            "rho_summary": rho_summary,
        }
        if args.out:
            Path(_sibling(args.out, ".summary.json")).write_text(
                serialize.dump_json(summary), encoding="utf-8"
            )
            for i, (name, t) in enumerate(tails.items()):
                Path(_sibling(args.out, f".tail{i}.csv")).write_text(
                    serialize.tail_to_csv(t), encoding="utf-8"
                )
        else:
            sys.stdout.write(serialize.dump_json(summary))
    return EXIT_OK


def _verify_battery(q: Potential, weights, args) -> tuple[dict, bool]:
    """Run the asserted invariants and the report-only blocks; returns (doc, ok)."""
    checks = []
    ok = True

    def record(name: str, passed: bool, detail: dict):
        nonlocal ok
        checks.append({"name": name, "passed": bool(passed), **detail})
        ok = ok and bool(passed)

    # weight extension: value 1 at the origin, symmetric, positive
    ks = np.arange(0, 2001)
    ext_ok = True
    for w in weights:
        kmax = int(min(2000, w.max_index))
        vals = np.asarray(w(np.arange(0, kmax + 1)))
        neg = np.asarray(w(-np.arange(0, kmax + 1)))
        ext_ok = ext_ok and vals[0] == 1.0 and np.all(vals > 0) and np.array_equal(vals, neg)
    record("weight_extension", ext_ok, {"k_checked": int(ks[-1])})

    # convolution identity and commutativity on a small deterministic pair
    rng = np.random.default_rng(args.seed)
    a = TwoSidedSeq.from_dict({k: complex(rng.standard_normal(), rng.standard_normal()) for k in range(-6, 7)})
    b = TwoSidedSeq.from_dict({k: complex(rng.standard_normal(), rng.standard_normal()) for k in range(-4, 5)})
    delta0 = TwoSidedSeq.delta(0)
    ident = convolve(delta0, a).entries == a.entries
    comm = convolve(a, b).entries == convolve(b, a).entries
    record("convolution_identity_commutativity", ident and comm, {})

    # two-route equality of the correction
    q0 = q.without_mean()
    kmax_rho = max(1, min(q.cutoff + 2, args.nmax))
    worst = 0.0
    for n in range(1, kmax_rho + 1):
        worst = max(worst, abs(rho(q0, n) - rho_via_convolution(q0, n)))
    record("rho_two_route_equality", worst <= 1e-14, {"max_abs_diff": worst})

    # coefficient-norm consistency
    diff = abs(hormander_norm(q, power_weight(1.0)) - weighted_norm(q.two_sided(), power_weight(1.0)))
    record("coefficient_norm_consistency", diff == 0.0, {"abs_diff": diff})

    # spectrum, residuals, triangle inequality
    edges = _edges_for(q, args, args.method)
    report = residuals(q, edges)
    n_range = _parse_range(args.range) if args.range else (1, args.nmax)
    membership = []
    tri_ok = True
    for w in weights:
        m = verify_membership_consistency(q, w, report, n_range)
        tri_ok = tri_ok and m.triangle_ok
        membership.append(
            {
                "weight": w.describe(),
                "gamma_norm": m.gamma_norm,
                "two_qhat_norm": m.two_qhat_norm,
                "resid_plain_norm": m.resid_plain_norm,
                "ratio": m.ratio if np.isfinite(m.ratio) else None,
                "triangle_ok": m.triangle_ok,
                "triangle_slack": m.triangle_slack,
            }
        )
    record("membership_triangle_inequality", tri_ok, {"blocks": membership})

    # convolution boundedness: failure-regime witness must grow
    fail_rep = conv_lemma_report(0.0, 0.0, 0.0, ConvTrials(sizes=(8, 16, 32), seed=args.seed))
    growth = fail_rep.growth_factor
    record(
        "conv_failure_witness_growth",
        fail_rep.regime == "fails to hold" and growth >= 1.5,
        {"regime": fail_rep.regime, "growth_factor": growth},
    )

    # report-only blocks
    bounded_rep = conv_lemma_report(1.0, 1.0, 1.0, ConvTrials(sizes=(8, 16), pairs_per_size=20, seed=args.seed))
    sandwich = [
        {
            "weight": w.describe(),
            "s": args.sandwich_s,
            "c_low": r.c_low,
            "c_high": r.c_high,
            "lower_slope": r.lower_slope,
            "upper_slope": r.upper_slope,
            "passed": r.passed,
        }
        for w, r in ((w, check_sandwich(w, args.sandwich_s, 2000)) for w in weights)
    ]
    orc = []
    for w in weights:
        r = check_or_class(w, args.or_a, args.or_c, min(args.or_tmax, w.max_index))
        orc.append(
            {
                "weight": w.describe(),
                "a": r.a,
                "c": r.c,
                "passed": r.passed,
                "worst_ratio": r.worst_ratio,
                "worst_t": r.worst_t,
                "worst_lambda": r.worst_lambda,
            }
        )
    mo = verify_marchenko_ostrovskii(q, args.mo_s, report, n_range)
    reports = {
        "conv_bounded_regime": {
            "regime": bounded_rep.regime,
            "samples": [
                {"size": s.size, "max_ratio": s.max_ratio, "mean_ratio": s.mean_ratio}
                for s in bounded_rep.samples
            ],
            "trend_ok": bounded_rep.trend_ok,
        },
        "sandwich": sandwich,
        "or_class": orc,
        "marchenko_ostrovskii": {
            "s": mo.s,
            "m": [int(x) for x in mo.m],
            "gap_partial": [float(x) for x in mo.gap_partial],
            "coeff_partial": [float(x) for x in mo.coeff_partial],
        },
    }
    doc = {"checks": checks, "reports": reports, "all_passed": ok}
    return doc, ok


def cmd_verify(args) -> int:
    q = load_potential(args.potential)
    weights = _weights_from_args(args)
    doc, ok = _verify_battery(q, weights, args)
    _emit(serialize.dump_json(doc), args.out)
    for c in doc["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}")
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_converge(args) -> int:
    q = load_potential(args.potential)
    levels = [int(x) for x in args.sweep.split(",")]
    if len(levels) < 2:
        raise InputError("sweep needs at least two levels")
    rows = []
    if args.target == "trunc":
        per_level = []
        for n_trunc in levels:
            edges = band_edges_galerkin(q, args.nmax, GalerkinConfig(n_trunc=n_trunc))
            per_level.append(edges.all_edges())
        for i, n_trunc in enumerate(levels):
            row = {"level": n_trunc}
            if i > 0:
                row["max_abs_change"] = float(np.max(np.abs(per_level[i] - per_level[i - 1])))
            rows.append(row)
    else:
        from .spectrum import discriminant

        vals = [discriminant(q, args.lam, DiscriminantConfig(steps=s)) for s in levels]
        for i, s in enumerate(levels):
            row = {"level": s, "delta": vals[i]}
            if i > 0:
                row["abs_change"] = abs(vals[i] - vals[i - 1])
            rows.append(row)
        diffs = [r.get("abs_change") for r in rows[1:]]
        orders = []
        for i in range(len(diffs) - 1):
            if diffs[i + 1] > 0:
                orders.append(float(np.log2(diffs[i] / diffs[i + 1])))
        if orders:
            rows.append({"estimated_order": orders})
    doc = {"target": args.target, "rows": rows}
    if args.format == "json":
        _emit(serialize.dump_json(doc), args.out)
    else:
        import csv as _csv
        import io as _io

        buf = _io.StringIO()
        keys = sorted({k for r in rows for k in r})
        wr = _csv.writer(buf, lineterminator="\n")
        wr.writerow(keys)
        for r in rows:
            wr.writerow([serialize.fmt(r.get(k, "")) for k in keys])
        _emit(buf.getvalue(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hillgaps",
        description="Band edges and spectral gap reports for 1-periodic potentials",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, steps_default=None):
        p.add_argument("--potential", required=True, help="potential JSON file")
        p.add_argument("--nmax", type=int, default=8)
        p.add_argument("--method", choices=["galerkin", "discriminant", "both"], default="galerkin")
        p.add_argument("--trunc", type=int, default=None, help="Galerkin truncation override")
        p.add_argument("--steps", type=int, default=steps_default, help="integrator steps per period")
        p.add_argument("--out", default=None, help="output path (stdout when omitted)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("spectrum", help="band edge table")
    common(sp)
    sp.set_defaults(func=cmd_spectrum)

    gp = sub.add_parser("gaps", help="gap lengths, corrections, residual report")
    common(gp)
    gp.add_argument("--weight", action="append", help="weight JSON file (repeatable)")
    gp.add_argument("--range", default=None, help="fit range LO:HI")
    gp.set_defaults(func=cmd_gaps)

    vp = sub.add_parser("verify", help="run invariant checks and asymptotic reports")
    common(vp)
    vp.add_argument("--weight", action="append", help="weight JSON file (repeatable)")
    vp.add_argument("--range", default=None, help="report range LO:HI")
    vp.add_argument("--sandwich-s", type=float, default=1.0)
    vp.add_argument("--or-a", type=float, default=2.0)
    vp.add_argument("--or-c", type=float, default=16.0)
    vp.add_argument("--or-tmax", type=float, default=1000.0)
    vp.add_argument("--mo-s", type=int, default=1)
    vp.set_defaults(func=cmd_verify)
    vp.set_defaults(format="json")

    cp = sub.add_parser("converge", help="truncation or step-count sweep")
    common(cp)
    cp.add_argument("--sweep", required=True, help="comma-separated levels, e.g. 32,64,128")
    cp.add_argument("--target", choices=["trunc", "steps"], default="trunc")
    cp.add_argument("--lam", type=float, default=10.0, help="spectral point for steps sweeps")
    cp.set_defaults(func=cmd_converge)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InterlacingError, IntegrationError, BracketError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
