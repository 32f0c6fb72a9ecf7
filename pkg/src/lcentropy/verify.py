"""Named checks for every identity, bound, and rate, over parameter sweeps.

Each check computes an (lhs, rhs) pair through the pmf/convolve/smooth/
bounds layers, never comparing a quantity against itself through a shared
code path.  A check fails only when margin + certified_error < 0, i.e. a
genuine counterexample beyond numeric uncertainty; unmet hypotheses yield
precondition-skip rows.  Sweeps are order-deterministic regardless of the
worker count.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import bounds as B
from . import convolve as C
from . import families as F
from . import pmf as P
from . import smooth as S

CHECK_IDS = (
    "prop1_tv_q",
    "prop3i",
    "prop3ii",
    "q_monotone",
    "lc_closure",
    "bobkov",
    "prop2",
    "lemma2",
    "lemma3",
    "theorem1",
    "theorem1_decay",
    "corollary_mono",
    "epi_smoothed",
    "cheb_interval",
    "tails",
    "maxent",
    "appendixA",
)

_GLOBAL_CHECKS = ("theorem1_decay", "appendixA")

DEFAULT_FAMILIES = (
    "geometric",
    "poisson",
    "binomial",
    "negative_binomial",
    "two_sided_geometric",
)
DEFAULT_SIGMA_GRID = (2.0, 10.0, 50.0, 250.0, 1000.0, 2500.0, 4000.0)


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    family: str
    params: dict
    n: int
    sigma: float
    lhs: float
    rhs: float
    margin: float
    certified_error: float
    status: str  # pass | fail | precondition-skip
    note: str = ""
    runtime: float = 0.0


@dataclass(frozen=True)
class SweepSpec:
    families: tuple = DEFAULT_FAMILIES
    sigma_grid: tuple = DEFAULT_SIGMA_GRID
    n_values: tuple = (1, 2)
    checks: tuple = CHECK_IDS
    pmf_files: tuple = ()
    epsilon: float = 0.2  # ratio-decay epsilon
    delta: float = 0.5  # mode-window delta
    tail_tol: float = P.DEFAULT_TAIL_TOL
    quad_tol: float = 1e-6
    lemma2_orders: tuple = (2, 3, 4, 5, 6)
    decay_family: str = "geometric"
    decay_n: int = 2
    decay_grid: tuple = (50.0, 100.0, 200.0, 400.0, 800.0)
    decay_slope_range: tuple = (-1.35, -0.75)
    appendix_samples: int = 1_000_000
    seed: int = 0
    workers: int = 1

    def validate(self) -> None:
        unknown = [c for c in self.checks if c not in CHECK_IDS]
        if unknown:
            raise ValueError(f"unknown check ids: {', '.join(unknown)}")
        for fam in self.families:
            if fam not in F.FAMILY_PARAMS:
                raise ValueError(f"unknown family {fam!r}")
        if self.workers < 1:
            raise ValueError("worker count must be >= 1")


class SweepFailure(RuntimeError):
    """Raised when a sweep produced a genuine counterexample."""

    def __init__(self, message: str, report: "Report"):
        super().__init__(message)
        self.report = report


# ---------------------------------------------------------------------------
# per-instance context with lazy caches
# ---------------------------------------------------------------------------

class CheckContext:
    """Shared pipeline state for all checks on one (family, params) point."""

    def __init__(self, family: str, params: dict, spec: SweepSpec,
                 pmf: P.IntegerPmf | None = None):
        self.family = family
        self.params = params
        self.spec = spec
        self._pmf = pmf
        self._stats = None
        self._sums: dict[int, P.IntegerPmf] = {}
        self._sum_lc: dict[int, bool] = {}
        self._smoothed: dict[int, S.QuadratureResult] = {}
        self._base_smoothed: dict[int, S.QuadratureResult] = {}

    @property
    def pmf(self) -> P.IntegerPmf:
        if self._pmf is None:
            self._pmf = F.from_family(self.family, self.params, self.spec.tail_tol)
        return self._pmf

    @property
    def stats(self) -> P.DistStats:
        if self._stats is None:
            self._stats = P.stats(self.pmf)
        return self._stats

    @property
    def sigma(self) -> float:
        return self.stats.sigma

    def sum_pmf(self, n: int) -> P.IntegerPmf:
        if n not in self._sums:
            rep = C.self_convolve(self.pmf, n, tail_tol=self.spec.tail_tol)
            self._sums[n] = rep.result
            self._sum_lc[n] = bool(rep.log_concave)
        return self._sums[n]

    def sum_lc(self, n: int) -> bool:
        self.sum_pmf(n)
        return self._sum_lc[n]

    def smoothed_entropy(self, n: int) -> S.QuadratureResult:
        """h(S_n + U^(n)) with certified error."""
        if n not in self._smoothed:
            f = S.smoothed_density(self.sum_pmf(n), n)
            self._smoothed[n] = S.differential_entropy(f, tol=self.spec.quad_tol)
        return self._smoothed[n]

    def base_smoothed_entropy(self, n: int) -> S.QuadratureResult:
        """h(X + U^(n)) for the base pmf."""
        if n not in self._base_smoothed:
            f = S.smoothed_density(self.pmf, n)
            self._base_smoothed[n] = S.differential_entropy(f, tol=self.spec.quad_tol)
        return self._base_smoothed[n]


def _result(ctx, check_id, n, lhs, rhs, cert, note="", status=None) -> CheckResult:
    margin = rhs - lhs
    if status is None:
        status = "pass" if margin + cert >= 0.0 else "fail"
    return CheckResult(
        check_id=check_id,
        family=ctx.family,
        params=ctx.params,
        n=n,
        sigma=ctx.sigma,
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        certified_error=cert,
        status=status,
        note=note,
    )


def _skip(ctx, check_id, n, note) -> CheckResult:
    return CheckResult(
        check_id=check_id,
        family=ctx.family,
        params=ctx.params,
        n=n,
        sigma=ctx.sigma,
        lhs=math.nan,
        rhs=math.nan,
        margin=math.nan,
        certified_error=math.nan,
        status="precondition-skip",
        note=note,
    )


# ---------------------------------------------------------------------------
# the check registry
# ---------------------------------------------------------------------------

def _chk_prop1_tv_q(ctx: CheckContext, n: int) -> CheckResult:
    st = ctx.stats
    dev = abs(P.tv_shift_distance(ctx.pmf) - (1.0 - st.q))
    cert = 1e-12 + ctx.pmf.tail_mass_bound
    return _result(ctx, "prop1_tv_q", n, dev, 0.0, cert)


def _chk_prop3i(ctx: CheckContext, n: int) -> CheckResult:
    st = ctx.stats
    lhs = math.exp(-st.entropy)
    cert = 1e-12 + st.q_error + lhs * st.certified_error
    return _result(ctx, "prop3i", n, lhs, 1.0 - st.q, cert)


def _chk_prop3ii(ctx: CheckContext, n: int) -> CheckResult:
    if not P.is_log_concave(ctx.pmf, rel_tol=1e-9).is_log_concave:
        return _skip(ctx, "prop3ii", n, "pmf is not log-concave")
    st = ctx.stats
    dev = abs((1.0 - st.q) - st.pmax)
    cert = 1e-12 + ctx.pmf.tail_mass_bound
    return _result(ctx, "prop3ii", n, dev, 0.0, cert)


def _chk_q_monotone(ctx: CheckContext, n: int) -> CheckResult:
    st = ctx.stats
    conv = ctx.sum_pmf(2)
    q2 = P.stats(conv).q
    cert = 1e-10 + conv.tail_mass_bound + ctx.pmf.tail_mass_bound
    return _result(ctx, "q_monotone", n, st.q, q2, cert)


def _chk_lc_closure(ctx: CheckContext, n: int) -> CheckResult:
    if not P.is_log_concave(ctx.pmf, rel_tol=1e-9).is_log_concave:
        return _skip(ctx, "lc_closure", n, "operand is not log-concave")
    ok = ctx.sum_lc(2)
    return _result(ctx, "lc_closure", n, 0.0 if ok else 1.0, 0.0, 0.0,
                   note="" if ok else "convolution failed log-concavity re-check")


def _chk_bobkov(ctx: CheckContext, n: int) -> CheckResult:
    st = ctx.stats
    if not P.is_log_concave(ctx.pmf, rel_tol=1e-9).is_log_concave:
        return _skip(ctx, "bobkov", n, "pmf is not log-concave")
    if st.variance < 1.0:
        return _skip(ctx, "bobkov", n, f"variance {st.variance:.6g} below 1")
    ev = B.pmax_bounds(st.sigma)
    lo, hi = ev.values["lower"], ev.values["upper"]
    lhs = max(lo - st.pmax, st.pmax - hi)
    dsigma = st.variance_error / (2.0 * st.sigma) if st.sigma > 0 else 0.0
    cert = 1e-12 + dsigma * (1.0 / (4.0 * st.variance) + 1.0 / st.variance)
    return _result(ctx, "bobkov", n, lhs, 0.0, cert)


def _chk_prop2(ctx: CheckContext, n: int) -> CheckResult:
    st = ctx.stats
    if not P.is_log_concave(ctx.pmf, rel_tol=1e-9).is_log_concave:
        return _skip(ctx, "prop2", n, "pmf is not log-concave")
    ev = B.mode_location_window(st.mean, st.sigma, ctx.spec.delta)
    if not ev.precondition_met:
        return _skip(ctx, "prop2", n,
                     f"sigma {st.sigma:.6g} <= 4^(1/(2*{ctx.spec.delta:g}))")
    lhs = max(ev.values["low"] - st.nmax, st.nmax - ev.values["high"])
    dsigma = st.variance_error / (2.0 * st.sigma)
    half_sens = (1.5 + ctx.spec.delta) * st.sigma ** (0.5 + ctx.spec.delta)
    cert = 1e-9 + st.mean_error + half_sens * dsigma
    return _result(ctx, "prop2", n, lhs, 0.0, cert)


def _chk_lemma2(ctx: CheckContext, n: int) -> CheckResult:
    if n < 2:
        return _skip(ctx, "lemma2", n, "smoothing order below 2")
    rep = S.step_residuals(ctx.pmf, n)
    if not rep.precondition_met:
        return _skip(ctx, "lemma2", n, rep.reason)
    st = ctx.stats
    dsigma = st.variance_error / (2.0 * st.sigma)
    cert = 1e-10 + (2.0**n - 2.0) / st.variance * dsigma
    return _result(ctx, "lemma2", n, rep.total, rep.bound, cert)


def _chk_lemma3(ctx: CheckContext, n: int) -> CheckResult:
    eps = ctx.spec.epsilon
    try:
        right = B.find_ratio_decay_onset(ctx.pmf, eps, "right")
        left = B.find_ratio_decay_onset(ctx.pmf, eps, "left")
    except ValueError as exc:
        return _skip(ctx, "lemma3", n, str(exc))
    found = right.found and left.found
    threshold = B.ratio_decay_sigma_threshold(eps)
    below = ctx.sigma < threshold
    if not found:
        partial = (not right.found and right.partial) or (not left.found and left.partial)
        if partial:
            return _skip(ctx, "lemma3", n, "window extends beyond searchable support")
        if below:
            return _skip(
                ctx, "lemma3", n,
                f"onset not found; sigma {ctx.sigma:.6g} below guarantee threshold "
                f"{threshold:.6g}",
            )
        return _result(ctx, "lemma3", n, 1.0, 0.0, 0.0,
                       note="onset not found although sigma meets the threshold")
    note = f"witnesses right={right.witness} left={left.witness}"
    if below:
        note += f"; pass-beyond-claim (sigma < {threshold:.6g})"
    return _result(ctx, "lemma3", n, 0.0, 0.0, 0.0, note=note)


def _chk_theorem1(ctx: CheckContext, n: int) -> CheckResult:
    ev = B.smoothing_gap_bound(n, ctx.sigma)
    if not ev.precondition_met:
        return _skip(
            ctx, "theorem1", n,
            f"sigma {ctx.sigma:.6g} <= max(2^(n+2), 3^7)/sqrt(n)",
        )
    hq = ctx.smoothed_entropy(n)
    st = P.stats(ctx.sum_pmf(n))
    lhs = abs(hq.value - st.entropy)
    cert = hq.certified_error + st.certified_error
    note = f"gap {hq.value - st.entropy:.6e} vs bound {ev.values['value']:.6e}"
    return _result(ctx, "theorem1", n, lhs, ev.values["value"], cert, note=note)


def _chk_corollary_mono(ctx: CheckContext, n: int) -> CheckResult:
    h1 = P.stats(ctx.sum_pmf(n))
    h2 = P.stats(ctx.sum_pmf(n + 1))
    lhs = 0.5 * math.log((n + 1.0) / n)
    rhs = h2.entropy - h1.entropy
    cert = 1e-3 + h1.certified_error + h2.certified_error
    return _result(ctx, "corollary_mono", n, lhs, rhs, cert,
                   note=f"excess {rhs - lhs:.6e}")


def _chk_epi_smoothed(ctx: CheckContext, n: int) -> CheckResult:
    qa = ctx.smoothed_entropy(n)
    qb = ctx.smoothed_entropy(n + 1)
    lhs = S.scaled_entropy(qa.value, 1.0 / math.sqrt(n))
    rhs = S.scaled_entropy(qb.value, 1.0 / math.sqrt(n + 1))
    cert = 1e-9 + qa.certified_error + qb.certified_error
    return _result(ctx, "epi_smoothed", n, lhs, rhs, cert)


def _chk_cheb_interval(ctx: CheckContext, n: int) -> CheckResult:
    sn = ctx.sum_pmf(n)
    st = P.stats(sn)
    radius = 5.0 * n * ctx.stats.variance
    p_disc = P.interval_probability(sn, st.mean - radius, st.mean + radius)
    f = S.smoothed_density(sn, n)
    p_cont = S.mass_between(f, st.mean + n / 2.0 - radius, st.mean + n / 2.0 + radius)
    lhs = 1.0 - 1.0 / (8.0 * n * ctx.stats.variance)
    rhs = min(p_disc, p_cont)
    cert = 1e-12 + sn.tail_mass_bound
    return _result(ctx, "cheb_interval", n, lhs, rhs, cert,
                   note=f"discrete {p_disc:.12g} continuous {p_cont:.12g}")


def _chk_tails(ctx: CheckContext, n: int) -> CheckResult:
    ev = B.entropy_tail_envelope(n, ctx.sigma)
    if not ev.precondition_met:
        return _skip(ctx, "tails", n, f"sqrt(n)*sigma {math.sqrt(n)*ctx.sigma:.6g} <= 3^7")
    sn = ctx.sum_pmf(n)
    st = P.stats(sn)
    centered = sn.shifted(-round(st.mean))
    radius = ev.values["threshold"]
    disc = P.entropy_tail(centered, radius)
    f = S.smoothed_density(sn, n)
    cont = S.entropy_outside(f, radius, center=st.mean + n / 2.0)
    env = ev.values["value"]
    lhs = max(disc - 2.0 * env, cont - env)
    return _result(ctx, "tails", n, lhs, 0.0, 1e-12,
                   note=f"discrete {disc:.6e} continuous {cont:.6e} envelope {env:.6e}")


def _chk_maxent(ctx: CheckContext, n: int) -> CheckResult:
    st = ctx.stats
    hq = ctx.base_smoothed_entropy(1)
    rhs = 0.5 * math.log(2.0 * math.pi * math.e * (st.variance + 1.0 / 12.0))
    cert = hq.certified_error + st.variance_error / (2.0 * (st.variance + 1.0 / 12.0))
    note = f"|h(X+U) - H(X)| = {abs(hq.value - st.entropy):.3e}"
    return _result(ctx, "maxent", n, hq.value, rhs, cert, note=note)


_POINT_CHECKS = {
    "prop1_tv_q": _chk_prop1_tv_q,
    "prop3i": _chk_prop3i,
    "prop3ii": _chk_prop3ii,
    "q_monotone": _chk_q_monotone,
    "lc_closure": _chk_lc_closure,
    "bobkov": _chk_bobkov,
    "prop2": _chk_prop2,
    "lemma2": _chk_lemma2,
    "lemma3": _chk_lemma3,
    "theorem1": _chk_theorem1,
    "corollary_mono": _chk_corollary_mono,
    "epi_smoothed": _chk_epi_smoothed,
    "cheb_interval": _chk_cheb_interval,
    "tails": _chk_tails,
    "maxent": _chk_maxent,
}

# checks that do not depend on the smoothing order n
_N_INDEPENDENT = {
    "prop1_tv_q", "prop3i", "prop3ii", "q_monotone", "lc_closure",
    "bobkov", "prop2", "lemma3", "maxent",
}


def _chk_theorem1_decay(spec: SweepSpec) -> CheckResult:
    """Slope of log gap vs log sigma for the order-n smoothing of the base
    pmf (the quantity following the sigma^(-1) log sigma envelope)."""
    gaps = []
    sigmas = []
    cert = 0.0
    for s in spec.decay_grid:
        params = F.params_for_sigma(spec.decay_family, s)
        ctx = CheckContext(spec.decay_family, params, spec)
        hq = ctx.base_smoothed_entropy(spec.decay_n)
        gap = abs(hq.value - ctx.stats.entropy)
        gaps.append(gap)
        sigmas.append(ctx.sigma)
        cert += (hq.certified_error + ctx.stats.certified_error) / max(gap, 1e-300)
    slope = float(np.polyfit(np.log(sigmas), np.log(gaps), 1)[0])
    lo, hi = spec.decay_slope_range
    margin = min(slope - lo, hi - slope)
    status = "pass" if margin + cert >= 0.0 else "fail"
    return CheckResult(
        check_id="theorem1_decay",
        family=spec.decay_family,
        params={"n": spec.decay_n, "grid": list(spec.decay_grid)},
        n=spec.decay_n,
        sigma=float(spec.decay_grid[-1]),
        lhs=slope,
        rhs=hi,
        margin=margin,
        certified_error=cert,
        status=status,
        note=f"slope {slope:.6f} expected in [{lo:g}, {hi:g}]",
    )


def _chk_appendixA(spec: SweepSpec) -> CheckResult:
    rng = np.random.default_rng(spec.seed + 0xA11CE)
    m = spec.appendix_samples
    big_d = np.exp(rng.uniform(0.0, math.log(1e3), m))
    big_m = np.exp(rng.uniform(0.0, math.log(1e3), m))
    mu = np.exp(rng.uniform(math.log(1e-6), math.log(1.0 / math.e * 0.999999), m))
    hi = big_d / big_m
    a = rng.uniform(0.0, hi)
    b = rng.uniform(0.0, hi)
    lhs, rhs = B.xlogx_increment_bound_batch(a, b, mu, big_d, big_m)
    worst = float(np.max(lhs - rhs))
    status = "pass" if worst <= 1e-12 else "fail"
    return CheckResult(
        check_id="appendixA",
        family="random",
        params={"samples": m, "seed": spec.seed},
        n=1,
        sigma=math.nan,
        lhs=worst,
        rhs=0.0,
        margin=-worst,
        certified_error=1e-12,
        status=status,
        note=f"worst lhs-rhs over {m} samples",
    )


def run_check(check_id: str, target, n: int = 1,
              spec: SweepSpec | None = None) -> CheckResult:
    """Run one named check against a pmf or a (family, params) pair."""
    spec = spec if spec is not None else SweepSpec()
    if check_id == "theorem1_decay":
        return _chk_theorem1_decay(spec)
    if check_id == "appendixA":
        return _chk_appendixA(spec)
    if check_id not in _POINT_CHECKS:
        raise ValueError(f"unknown check id {check_id!r}")
    if isinstance(target, P.IntegerPmf):
        fam = target.provenance.get("family", "custom")
        params = target.provenance.get("params", {})
        ctx = CheckContext(str(fam), dict(params) if isinstance(params, dict) else {},
                           spec, pmf=target)
    elif isinstance(target, CheckContext):
        ctx = target
    else:
        family, params = target
        ctx = CheckContext(family, dict(params), spec)
    t0 = time.perf_counter()
    res = _POINT_CHECKS[check_id](ctx, n)
    return replace(res, runtime=time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Report:
    spec: SweepSpec
    results: tuple
    summary: dict

    def failures(self):
        return [r for r in self.results if r.status == "fail"]


def _point_worker(args) -> list[CheckResult]:
    spec, family, params, source = args
    if source:
        base = P.load_pmf(source)
        ctx = CheckContext(family, params, spec, pmf=base)
    else:
        ctx = CheckContext(family, params, spec)
    out = []
    point_checks = [c for c in spec.checks if c in _POINT_CHECKS]
    for check_id in point_checks:
        fn = _POINT_CHECKS[check_id]
        if check_id in _N_INDEPENDENT:
            n_list = [1]
        elif check_id == "lemma2":
            n_list = [n for n in spec.lemma2_orders]
        else:
            n_list = list(spec.n_values)
        for n in n_list:
            t0 = time.perf_counter()
            res = fn(ctx, n)
            out.append(replace(res, runtime=time.perf_counter() - t0))
    return out


def _sort_key(r: CheckResult):
    return (
        r.check_id,
        r.family,
        json.dumps(r.params, sort_keys=True, default=str),
        r.n,
        -1.0 if math.isnan(r.sigma) else r.sigma,
    )


def run_sweep(spec: SweepSpec, out_csv: str | None = None,
              out_json: str | None = None, reproducer_dir: str | None = None,
              raise_on_fail: bool = True, timings: bool = False) -> Report:
    """Execute every selected check over the family/sigma grid.

    Results are sorted into a deterministic order independent of the worker
    count; a failure writes reproducer artifacts and raises SweepFailure
    after the report files are produced.
    """
    spec.validate()
    tasks = []
    for family in spec.families:
        for s in spec.sigma_grid:
            tasks.append((spec, family, F.params_for_sigma(family, s), None))
    for path in spec.pmf_files:
        tasks.append((spec, "custom", {"pmf_file": path}, path))

    results: list[CheckResult] = []
    if spec.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as ex:
            for chunk in ex.map(_point_worker, tasks):
                results.extend(chunk)
    else:
        for task in tasks:
            results.extend(_point_worker(task))
    for check_id in _GLOBAL_CHECKS:
        if check_id in spec.checks:
            t0 = time.perf_counter()
            res = run_check(check_id, None, spec=spec)
            results.append(replace(res, runtime=time.perf_counter() - t0))

    results.sort(key=_sort_key)
    counts = {"pass": 0, "fail": 0, "precondition-skip": 0}
    worst: dict[str, float] = {}
    for r in results:
        counts[r.status] += 1
        if r.status != "precondition-skip":
            w = worst.get(r.check_id)
            if w is None or r.margin < w:
                worst[r.check_id] = r.margin
    summary = {
        "counts": counts,
        "worst_margin": {k: worst[k] for k in sorted(worst)},
        "n_results": len(results),
    }
    report = Report(spec=spec, results=tuple(results), summary=summary)

    if out_csv:
        write_csv(report, out_csv, timings=timings)
    if out_json:
        write_json(report, out_json, timings=timings)
    fails = report.failures()
    if fails and reproducer_dir:
        _write_reproducers(report, reproducer_dir)
    if fails and raise_on_fail:
        raise SweepFailure(
            f"{len(fails)} check(s) failed beyond certified error", report
        )
    return report


def _write_reproducers(report: Report, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for i, r in enumerate(report.failures()):
        payload = {
            "check_id": r.check_id,
            "family": r.family,
            "params": r.params,
            "n": r.n,
            "sigma": r.sigma,
            "lhs": r.lhs,
            "rhs": r.rhs,
            "margin": r.margin,
            "certified_error": r.certified_error,
            "note": r.note,
        }
        if r.family in F.FAMILY_PARAMS and isinstance(r.params, dict):
            try:
                pm = F.from_family(r.family, r.params)
                payload["pmf"] = json.loads(P.pmf_to_json(pm))
            except (ValueError, TypeError):
                pass
        path = os.path.join(out_dir, f"repro_{i:03d}_{r.check_id}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)


# ---------------------------------------------------------------------------
# report serialization (deterministic byte output)
# ---------------------------------------------------------------------------

_CSV_FIELDS = ("check_id", "family", "params", "n", "sigma", "lhs", "rhs",
               "margin", "certified_error", "status", "note")


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def csv_lines(report: Report, timings: bool = False) -> list[str]:
    fields = _CSV_FIELDS + (("runtime",) if timings else ())
    lines = [",".join(fields)]
    for r in report.results:
        row = []
        for f in fields:
            v = getattr(r, f)
            if f == "params":
                v = json.dumps(v, sort_keys=True, default=str).replace(",", ";")
            if f == "note":
                v = str(v).replace(",", ";")
            row.append(_fmt(v))
        lines.append(",".join(row))
    return lines


def write_csv(report: Report, path: str, timings: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(csv_lines(report, timings)))
        fh.write("\n")


def report_dict(report: Report, timings: bool = False) -> dict:
    rows = []
    for r in report.results:
        d = {
            "check_id": r.check_id,
            "family": r.family,
            "params": r.params,
            "n": r.n,
            "sigma": _fmt(r.sigma),
            "lhs": _fmt(r.lhs),
            "rhs": _fmt(r.rhs),
            "margin": _fmt(r.margin),
            "certified_error": _fmt(r.certified_error),
            "status": r.status,
            "note": r.note,
        }
        if timings:
            d["runtime"] = _fmt(r.runtime)
        rows.append(d)
    return {
        "summary": {
            "counts": report.summary["counts"],
            "worst_margin": {k: _fmt(v) for k, v in report.summary["worst_margin"].items()},
            "n_results": report.summary["n_results"],
        },
        "results": rows,
    }


def write_json(report: Report, path: str, timings: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_dict(report, timings), fh, sort_keys=True, indent=1)
        fh.write("\n")
