"""Command-line front end: stats | smooth | convolve | verify | families.

All quantities are reported in nats.  Machine formats (csv, json) carry 17
significant digits; human tables show 6.  Exit codes: 0 success, 1 check
failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from . import bounds as B
from . import convolve as C
from . import families as F
from . import pmf as P
from . import smooth as S
from . import verify as V


def _fmt_machine(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _fmt_human(x) -> str:
    if isinstance(x, float):
        return format(x, ".6g")
    return str(x)


def _print_pairs(pairs, fmt: str, out) -> None:
    if fmt == "json":
        doc = {k: (_fmt_machine(v) if isinstance(v, float) else v) for k, v in pairs}
        out.write(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    elif fmt == "csv":
        out.write(",".join(k for k, _ in pairs) + "\n")
        out.write(",".join(_fmt_machine(v) for _, v in pairs) + "\n")
    else:
        width = max(len(k) for k, _ in pairs)
        for k, v in pairs:
            out.write(f"{k:<{width}}  {_fmt_human(v)}\n")


def _parse_params(text: str) -> dict:
    params = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"parameter {part!r} is not of the form name=value")
        key, val = part.split("=", 1)
        params[key.strip()] = float(val)
    return params


def _parse_grid(text: str) -> tuple:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _build_pmf(args) -> P.IntegerPmf:
    sources = sum(1 for s in (args.family, args.pmf_file) if s)
    if sources != 1:
        raise ValueError("provide exactly one input source: --family or --pmf-file")
    if args.pmf_file:
        return P.load_pmf(args.pmf_file)
    if args.params:
        params = _parse_params(args.params)
    elif args.sigma is not None:
        params = F.params_for_sigma(args.family, args.sigma)
    else:
        raise ValueError("--family needs --params or --sigma")
    return F.from_family(args.family, params, tail_tol=args.tail_tol)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", help="family name (see the families command)")
    p.add_argument("--params", help="family parameters, e.g. p=0.5 or m=10,p=0.3")
    p.add_argument("--pmf-file", help="pmf JSON document to load instead of a family")
    p.add_argument("--sigma", type=float, help="target standard deviation")
    p.add_argument("--sigma-grid", help="comma-separated sigma values")
    p.add_argument("--n", type=int, default=1, help="number of summands / smoothing order")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.add_argument("--out", help="write output to this path instead of stdout")
    p.add_argument("--tail-tol", type=float, default=P.DEFAULT_TAIL_TOL)
    p.add_argument("--quad-tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", help="JSON config file; explicit flags override it")


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if not getattr(args, "config", None):
        return
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    defaults = parser.parse_args([args.command])
    for key, val in cfg.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ValueError(f"unknown config key {key!r}")
        if getattr(args, attr) == getattr(defaults, attr, None):
            if isinstance(val, list):
                val = ",".join(str(x) for x in val)
            elif isinstance(val, dict):
                val = ",".join(f"{k}={v}" for k, v in val.items())
            setattr(args, attr, val)


def cmd_stats(args, out) -> int:
    p = _build_pmf(args)
    st = P.stats(p)
    pairs = [
        ("family", p.provenance.get("family", "custom")),
        ("entropy_nats", st.entropy),
        ("entropy_certified_error", st.certified_error),
        ("mean", st.mean),
        ("variance", st.variance),
        ("sigma", st.sigma),
        ("pmax", st.pmax),
        ("nmax", st.nmax),
        ("q", st.q),
        ("one_minus_q", 1.0 - st.q),
        ("tv_shift", P.tv_shift_distance(p)),
        ("tail_mass_bound", p.tail_mass_bound),
        ("window_lo", p.support[0]),
        ("window_hi", p.support[1]),
    ]
    _print_pairs(pairs, args.format, out)
    return 0


def _smooth_row(family: str, params: dict, n: int, tail_tol: float, quad_tol: float):
    p = F.from_family(family, params, tail_tol=tail_tol)
    base_sigma = P.stats(p).sigma
    rep = C.self_convolve(p, n, tail_tol=tail_tol)
    st = P.stats(rep.result)
    f = S.smoothed_density(rep.result, n)
    hq = S.differential_entropy(f, tol=quad_tol)
    ev = B.smoothing_gap_bound(n, base_sigma)
    return [
        ("sigma", base_sigma),
        ("n", n),
        ("H_discrete", st.entropy),
        ("H_certified_error", st.certified_error),
        ("h_smoothed", hq.value),
        ("h_certified_error", hq.certified_error),
        ("gap", hq.value - st.entropy),
        ("gap_bound", ev.values["value"]),
        ("bound_precondition_met", ev.precondition_met),
    ]


def cmd_smooth(args, out) -> int:
    if args.pmf_file:
        p = P.load_pmf(args.pmf_file)
        rep = C.self_convolve(p, args.n, tail_tol=args.tail_tol)
        st = P.stats(rep.result)
        f = S.smoothed_density(rep.result, args.n)
        hq = S.differential_entropy(f, tol=args.quad_tol)
        sigma = P.stats(p).sigma
        ev = B.smoothing_gap_bound(args.n, sigma) if sigma > 0 else None
        pairs = [
            ("sigma", sigma),
            ("n", args.n),
            ("H_discrete", st.entropy),
            ("H_certified_error", st.certified_error),
            ("h_smoothed", hq.value),
            ("h_certified_error", hq.certified_error),
            ("gap", hq.value - st.entropy),
            ("gap_bound", ev.values["value"] if ev else math.nan),
            ("bound_precondition_met", ev.precondition_met if ev else False),
        ]
        _print_pairs(pairs, args.format, out)
        return 0
    if not args.family:
        raise ValueError("provide --family or --pmf-file")
    if args.sigma_grid:
        rows = []
        for s in _parse_grid(args.sigma_grid):
            params = F.params_for_sigma(args.family, s)
            rows.append(_smooth_row(args.family, params, args.n,
                                    args.tail_tol, args.quad_tol))
        if args.format == "json":
            out.write(json.dumps(
                [{k: _fmt_machine(v) for k, v in row} for row in rows],
                indent=1, sort_keys=True) + "\n")
        else:
            out.write(",".join(k for k, _ in rows[0]) + "\n")
            for row in rows:
                out.write(",".join(_fmt_machine(v) for _, v in row) + "\n")
        return 0
    if args.params:
        params = _parse_params(args.params)
    elif args.sigma is not None:
        params = F.params_for_sigma(args.family, args.sigma)
    else:
        raise ValueError("--family needs --params, --sigma, or --sigma-grid")
    pairs = _smooth_row(args.family, params, args.n, args.tail_tol, args.quad_tol)
    _print_pairs(pairs, args.format, out)
    return 0


def cmd_convolve(args, out) -> int:
    p = _build_pmf(args)
    rep = C.self_convolve(p, args.n, tail_tol=args.tail_tol)
    st = P.stats(rep.result)
    pairs = [
        ("method", rep.method),
        ("n", args.n),
        ("entropy_nats", st.entropy),
        ("mean", st.mean),
        ("variance", st.variance),
        ("q", st.q),
        ("pmax", st.pmax),
        ("nmax", st.nmax),
        ("max_abs_error_bound", rep.max_abs_error_bound),
        ("operand_tail_carry", rep.operand_tail_carry),
        ("log_concave", rep.log_concave),
        ("window_lo", rep.result.support[0]),
        ("window_hi", rep.result.support[1]),
    ]
    _print_pairs(pairs, args.format, out)
    if args.out:
        P.save_pmf(rep.result, args.out)
    return 0


def cmd_verify(args, out) -> int:
    checks = tuple(args.checks.split(",")) if args.checks else V.CHECK_IDS
    spec = V.SweepSpec(
        families=tuple(args.families.split(",")) if args.families else V.DEFAULT_FAMILIES,
        sigma_grid=_parse_grid(args.sigma_grid) if args.sigma_grid else V.DEFAULT_SIGMA_GRID,
        n_values=tuple(int(x) for x in args.n_values.split(",")) if args.n_values else (1, 2),
        checks=checks,
        pmf_files=tuple(args.pmf_file.split(",")) if args.pmf_file else (),
        appendix_samples=args.appendix_samples,
        seed=args.seed,
        workers=args.workers,
        tail_tol=args.tail_tol,
        quad_tol=max(args.quad_tol, 1e-12),
    )
    spec.validate()
    report = V.run_sweep(
        spec,
        out_csv=args.out_csv,
        out_json=args.out_json,
        reproducer_dir=args.reproducer_dir,
        raise_on_fail=False,
        timings=args.timings,
    )
    counts = report.summary["counts"]
    out.write(
        f"checks: {report.summary['n_results']}  pass: {counts['pass']}  "
        f"fail: {counts['fail']}  skip: {counts['precondition-skip']}\n"
    )
    if args.format == "table":
        for r in report.results:
            if r.status == "fail":
                out.write(
                    f"FAIL {r.check_id} {r.family} n={r.n} sigma={_fmt_human(r.sigma)} "
                    f"margin={_fmt_human(r.margin)} note={r.note}\n"
                )
        for cid, w in report.summary["worst_margin"].items():
            out.write(f"worst margin {cid:<16} {_fmt_human(w)}\n")
    return 1 if counts["fail"] else 0


def cmd_families(args, out) -> int:
    rows = []
    for name in F.family_names():
        rows.append((name, ",".join(F.FAMILY_PARAMS[name])))
    if args.format == "json":
        out.write(json.dumps({n: p.split(",") for n, p in rows}, indent=1, sort_keys=True) + "\n")
    else:
        for name, params in rows:
            out.write(f"{name:<22} parameters: {params}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcentropy",
        description="Entropic quantities of integer log-concave distributions "
                    "and systematic checks of their identities and bounds.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_stats = sub.add_parser("stats", help="entropy, variance, pmax, nmax, q, TV-shift")
    _add_common(p_stats)

    p_smooth = sub.add_parser("smooth", help="h(S_n + U^(n)), H(S_n), gap, and the gap bound")
    _add_common(p_smooth)

    p_conv = sub.add_parser("convolve", help="n-fold self-convolution; optionally export pmf JSON")
    _add_common(p_conv)

    p_verify = sub.add_parser("verify", help="run the check suite over a sweep")
    _add_common(p_verify)
    p_verify.add_argument("--families", help="comma-separated family list")
    p_verify.add_argument("--checks", help="comma-separated check ids (default: all)")
    p_verify.add_argument("--n-values", help="comma-separated summand counts (default 1,2)")
    p_verify.add_argument("--out-csv", help="write the CSV report here")
    p_verify.add_argument("--out-json", help="write the JSON report here")
    p_verify.add_argument("--reproducer-dir", help="directory for failure reproducers")
    p_verify.add_argument("--appendix-samples", type=int, default=1_000_000)
    p_verify.add_argument("--timings", action="store_true",
                          help="include per-check runtimes (breaks byte determinism)")

    p_fam = sub.add_parser("families", help="list available distribution families")
    _add_common(p_fam)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors already
        return int(exc.code or 0)
    out = sys.stdout
    handlers = {
        "stats": cmd_stats,
        "smooth": cmd_smooth,
        "convolve": cmd_convolve,
        "verify": cmd_verify,
        "families": cmd_families,
    }
    try:
        _apply_config(args, parser)
        close = None
        if getattr(args, "out", None) and args.command != "convolve":
            out = open(args.out, "w", encoding="utf-8")
            close = out
        try:
            return handlers[args.command](args, out)
        finally:
            if close is not None:
                close.close()
    except (ValueError, OSError, P.WindowCapError, C.DirectCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
