"""Command-line front end.

Examples::

    irsa-flpa --k 4 --t 6 --lambda 2:0.25,3:0.75 --mode exact
    irsa-flpa --t 6 --lambda 1:0.2,2:0.5,4:0.3 --sweep-k 2..6 \\
        --mode exact,simulate --trials 1000 --seed 7 --out sweep.csv

Exit status: 0 on success, 2 for invalid input, 3 when an enumeration
budget is exhausted (rows finished so far are still written, followed by
an ``# aborted`` comment line).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .asymptotic import DeConfig, asymptotic_plr
from .errors import BudgetExceeded, ConfigError
from .model import DEFAULT_MAX_K, DegreeDistribution, SystemConfig, parse_rational
from .montecarlo import SimConfig, simulate
from .occupancy import DEFAULT_NODE_BUDGET
from .plr import DEFAULT_MLV_THRESHOLD, DEFAULT_ORACLE_BUDGET, exact_plr, mlv_plr, oracle_plr, render

SCHEMA_VERSION = 1
HEADER_LINE = f"# irsa-flpa v{SCHEMA_VERSION}"
MODES = ("exact", "mlv", "oracle", "simulate", "asymptotic")
COMPARE_ORDER = ("simulate", "asymptotic", "exact", "mlv", "oracle")

CSV_FIELDS = [
    "k", "t", "G", "mode", "P_L", "throughput", "coverage", "stderr",
    "wall_time_ms", "pmf", "P_L_exact", "coverage_exact", "pmf_exact",
]

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET = 0, 2, 3

log = logging.getLogger("irsa_flpa")


@dataclass
class Scenario:
    t: int
    lam: DegreeDistribution
    ks: list[int]
    modes: tuple[str, ...] = ("exact",)
    mlv_threshold: Fraction = DEFAULT_MLV_THRESHOLD
    trials: int = 1000
    seed: int = 0
    budget: int | None = None
    max_k: int = DEFAULT_MAX_K
    workers: int = 1
    timing: bool = True


@dataclass
class ResultRow:
    k: int
    t: int
    G: float
    mode: str
    P_L: float
    throughput: float
    pmf: dict[int, float] = field(default_factory=dict)
    coverage: float | None = None
    stderr: float | None = None
    wall_time_ms: float = 0.0
    P_L_exact: Fraction | None = None
    coverage_exact: Fraction | None = None
    pmf_exact: dict[int, Fraction] | None = None


# ---------------------------------------------------------------------------
# running


def _row_from_report(rep, mode, elapsed_ms):
    return ResultRow(
        k=rep.k, t=rep.t, G=float(rep.G), mode=mode,
        P_L=float(rep.plr), throughput=rep.throughput,
        pmf=rep.pmf_float(), coverage=float(rep.coverage),
        wall_time_ms=elapsed_ms,
        P_L_exact=rep.plr, coverage_exact=rep.coverage, pmf_exact=dict(rep.pmf),
    )


def run_one(sc: Scenario, k: int, mode: str) -> ResultRow:
    cfg = SystemConfig(k, sc.t)
    sc.lam.check_against(cfg)
    start = time.perf_counter()
    node_budget = sc.budget if sc.budget is not None else DEFAULT_NODE_BUDGET
    if mode == "exact":
        rep = exact_plr(sc.lam, cfg, budget=node_budget, max_k=sc.max_k, workers=sc.workers)
    elif mode == "mlv":
        rep = mlv_plr(sc.lam, cfg, sc.mlv_threshold, budget=node_budget, max_k=sc.max_k, workers=sc.workers)
    elif mode == "oracle":
        rep = oracle_plr(sc.lam, cfg, budget=sc.budget if sc.budget is not None else DEFAULT_ORACLE_BUDGET)
    elif mode == "simulate":
        est = simulate(sc.lam, cfg, SimConfig(sc.trials, sc.seed, sc.workers))
        elapsed = (time.perf_counter() - start) * 1000 if sc.timing else 0.0
        plr = est.plr_hat
        return ResultRow(k, sc.t, float(cfg.G), mode, plr, (1 - plr) * k / sc.t,
                         pmf=est.pmf_hat, stderr=est.stderr, wall_time_ms=elapsed)
    elif mode == "asymptotic":
        plr = asymptotic_plr(sc.lam, DeConfig(float(cfg.G)))
        elapsed = (time.perf_counter() - start) * 1000 if sc.timing else 0.0
        return ResultRow(k, sc.t, float(cfg.G), mode, plr, (1 - plr) * k / sc.t, wall_time_ms=elapsed)
    else:
        raise ConfigError(f"unknown mode {mode!r}")
    elapsed = (time.perf_counter() - start) * 1000 if sc.timing else 0.0
    return _row_from_report(rep, mode, elapsed)


def run(sc: Scenario) -> list[ResultRow]:
    """One row per (k, mode), k-major.

    On budget exhaustion the rows finished so far are attached to the
    exception as ``partial_rows``.
    """
    rows: list[ResultRow] = []
    for k in sc.ks:
        for mode in sc.modes:
            try:
                rows.append(run_one(sc, k, mode))
            except BudgetExceeded as exc:
                exc.partial_rows = rows
                raise
    return rows


def compare(rows: list[ResultRow]) -> list[dict]:
    """Side-by-side P_L per mode for each (k, t), with deltas to a reference mode.

    The reference is ``exact`` when present, otherwise the first mode seen.
    Deltas between two exact-arithmetic modes are computed on fractions.
    """
    modes_seen = []
    grouped: dict[tuple[int, int], dict[str, ResultRow]] = {}
    for r in rows:
        grouped.setdefault((r.k, r.t), {})[r.mode] = r
        if r.mode not in modes_seen:
            modes_seen.append(r.mode)
    ref = "exact" if "exact" in modes_seen else modes_seen[0]
    ordered = [m for m in COMPARE_ORDER if m in modes_seen]
    table = []
    for (k, t), by_mode in grouped.items():
        rec = {"G": float(Fraction(k, t)), "k": k, "t": t}
        for m in ordered:
            rec[m] = by_mode[m].P_L if m in by_mode else None
        if "simulate" in by_mode:
            rec["simulate_stderr"] = by_mode["simulate"].stderr
        base = by_mode.get(ref)
        for m in ordered:
            if m == ref:
                continue
            other = by_mode.get(m)
            if base is None or other is None:
                rec[f"delta_{m}"] = None
            elif base.P_L_exact is not None and other.P_L_exact is not None:
                rec[f"delta_{m}"] = float(other.P_L_exact - base.P_L_exact)
            else:
                rec[f"delta_{m}"] = other.P_L - base.P_L
        table.append(rec)
    return table


# ---------------------------------------------------------------------------
# serialization


def _f(x) -> str:
    return "" if x is None else format(x, ".17g")


def _encode_map(m, fmt) -> str:
    if m is None:
        return ""
    return ";".join(f"{u}:{fmt(p)}" for u, p in sorted(m.items()))


def _decode_map(text, conv):
    if text == "":
        return None
    out = {}
    for item in text.split(";"):
        u, p = item.split(":")
        out[int(u)] = conv(p)
    return out


def row_to_record(r: ResultRow) -> dict[str, str]:
    return {
        "k": str(r.k), "t": str(r.t), "G": _f(r.G), "mode": r.mode,
        "P_L": _f(r.P_L), "throughput": _f(r.throughput),
        "coverage": _f(r.coverage), "stderr": _f(r.stderr),
        "wall_time_ms": _f(r.wall_time_ms),
        "pmf": _encode_map(r.pmf, _f),
        "P_L_exact": "" if r.P_L_exact is None else str(r.P_L_exact),
        "coverage_exact": "" if r.coverage_exact is None else str(r.coverage_exact),
        "pmf_exact": _encode_map(r.pmf_exact, str),
    }


def record_to_row(rec: dict[str, str]) -> ResultRow:
    opt = lambda s, conv: None if s == "" else conv(s)  # noqa: E731
    return ResultRow(
        k=int(rec["k"]), t=int(rec["t"]), G=float(rec["G"]), mode=rec["mode"],
        P_L=float(rec["P_L"]), throughput=float(rec["throughput"]),
        pmf=_decode_map(rec["pmf"], float) or {},
        coverage=opt(rec["coverage"], float), stderr=opt(rec["stderr"], float),
        wall_time_ms=float(rec["wall_time_ms"]),
        P_L_exact=opt(rec["P_L_exact"], Fraction),
        coverage_exact=opt(rec["coverage_exact"], Fraction),
        pmf_exact=_decode_map(rec["pmf_exact"], Fraction),
    )


def rows_to_csv(rows: list[ResultRow], aborted: str | None = None) -> str:
    buf = io.StringIO()
    buf.write(HEADER_LINE + "\n")
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(row_to_record(r))
    if aborted:
        buf.write(f"# aborted: {aborted}\n")
    return buf.getvalue()


def read_csv(text: str) -> list[ResultRow]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return [record_to_row(rec) for rec in csv.DictReader(lines)]


def rows_to_json(rows: list[ResultRow], aborted: str | None = None) -> str:
    out = []
    for r in rows:
        rec = asdict(r)
        rec["pmf"] = {str(u): p for u, p in r.pmf.items()}
        rec["pmf_exact"] = None if r.pmf_exact is None else {str(u): str(p) for u, p in r.pmf_exact.items()}
        rec["P_L_exact"] = None if r.P_L_exact is None else str(r.P_L_exact)
        rec["coverage_exact"] = None if r.coverage_exact is None else str(r.coverage_exact)
        out.append(rec)
    doc = {"schema": f"irsa-flpa v{SCHEMA_VERSION}", "rows": out}
    if aborted:
        doc["aborted"] = aborted
    return json.dumps(doc, indent=2) + "\n"


def read_json(text: str) -> list[ResultRow]:
    rows = []
    for rec in json.loads(text)["rows"]:
        rec = dict(rec)
        rec["pmf"] = {int(u): p for u, p in rec["pmf"].items()}
        if rec["pmf_exact"] is not None:
            rec["pmf_exact"] = {int(u): Fraction(p) for u, p in rec["pmf_exact"].items()}
        for key in ("P_L_exact", "coverage_exact"):
            if rec[key] is not None:
                rec[key] = Fraction(rec[key])
        rows.append(ResultRow(**rec))
    return rows


def compare_to_csv(table: list[dict]) -> str:
    if not table:
        return HEADER_LINE + "\n"
    buf = io.StringIO()
    buf.write(HEADER_LINE + "\n")
    fields = list(table[0].keys())
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for rec in table:
        writer.writerow({key: (str(v) if isinstance(v, int) else _f(v)) for key, v in rec.items()})
    return buf.getvalue()


def format_table(rows: list[ResultRow], decimals: int = 6) -> str:
    def num(exact, approx):
        if exact is not None:
            return render(exact, decimals)
        return "" if approx is None else f"{approx:.{decimals}f}"

    header = ["k", "t", "G", "mode", "P_L", "throughput", "coverage", "stderr", "ms"]
    body = []
    for r in rows:
        body.append([
            str(r.k), str(r.t), f"{r.G:.4f}", r.mode,
            num(r.P_L_exact, r.P_L), f"{r.throughput:.{decimals}f}",
            num(r.coverage_exact, r.coverage), num(None, r.stderr),
            f"{r.wall_time_ms:.1f}",
        ])
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(b, widths)) for b in body]
    return "\n".join(lines)


def format_compare(table: list[dict], decimals: int = 6) -> str:
    if not table:
        return ""
    keys = list(table[0].keys())
    cells = [[("" if rec[key] is None else str(rec[key]) if isinstance(rec[key], int)
               else f"{rec[key]:.{decimals}f}") for key in keys] for rec in table]
    widths = [max(len(key), *(len(c[i]) for c in cells)) for i, key in enumerate(keys)]
    lines = ["  ".join(key.rjust(w) for key, w in zip(keys, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# argument parsing


def parse_k_range(text: str) -> list[int]:
    """``"2..6"`` -> [2, 3, 4, 5, 6]; ``"2,4,6"`` -> [2, 4, 6]."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            ks = list(range(int(lo), int(hi) + 1))
        else:
            ks = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"malformed k sweep {text!r}; use a..b or a comma list") from exc
    if not ks or any(k < 1 for k in ks):
        raise ConfigError(f"k sweep {text!r} must list positive integers")
    return ks


def ks_from_g(text: str, t: int) -> list[int]:
    ks = []
    for item in text.split(","):
        if not item.strip():
            continue
        g = parse_rational(item)
        k = g * t
        if k.denominator != 1 or k < 1:
            raise ConfigError(f"G={item.strip()} with t={t} gives k={k}, not a positive integer")
        ks.append(int(k))
    if not ks:
        raise ConfigError("empty G sweep")
    return ks


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="irsa-flpa",
        description="Finite-length packet-loss analysis of irregular repetition slotted ALOHA.",
    )
    ap.add_argument("--scenario", help="JSON file with any of the options below (flags override it)")
    ap.add_argument("--k", type=int, help="number of users")
    ap.add_argument("--t", type=int, help="slots per frame")
    ap.add_argument("--lambda", dest="lam", help="degree distribution, e.g. 2:0.25,3:0.75 or 1:1/5,2:1/2,4:3/10")
    ap.add_argument("--mode", help=f"comma-separated subset of {','.join(MODES)} (default exact)")
    ap.add_argument("--mlv-threshold", help="MLV degree-vector probability cutoff (default 1/1000)")
    ap.add_argument("--trials", type=int, help="Monte Carlo frames (default 1000)")
    ap.add_argument("--seed", type=int, help="Monte Carlo master seed (default 0)")
    ap.add_argument("--sweep-k", help="k values: a..b or a,b,c")
    ap.add_argument("--sweep-g", help="comma-separated loads G; each G*t must be an integer")
    ap.add_argument("--budget", type=int, help="enumeration node budget (exact/mlv) or matrix budget (oracle)")
    ap.add_argument("--max-k", type=int, help=f"largest k allowed in exact modes (default {DEFAULT_MAX_K})")
    ap.add_argument("--workers", type=int, help="worker processes (default 1)")
    ap.add_argument("--out", help="write rows to a .csv or .json file")
    ap.add_argument("--compare-out", help="write the mode comparison table to a .csv file")
    ap.add_argument("--decimals", type=int, default=None, help="decimals in the printed table (default 6)")
    ap.add_argument("--no-timing", action="store_true", help="record wall_time_ms as 0 for byte-stable output")
    ap.add_argument("--quiet", action="store_true", help="do not print tables to stdout")
    return ap


def scenario_from_args(args) -> tuple[Scenario, dict]:
    opts: dict = {}
    if args.scenario:
        try:
            opts.update(json.loads(Path(args.scenario).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read scenario {args.scenario}: {exc}") from exc
    for key in ("k", "t", "lam", "mode", "mlv_threshold", "trials", "seed", "sweep_k", "sweep_g",
                "budget", "max_k", "workers", "out", "compare_out", "decimals"):
        val = getattr(args, key)
        if val is not None:
            opts[key] = val
    if "lambda" in opts and "lam" not in opts:
        opts["lam"] = opts.pop("lambda")

    if opts.get("t") is None:
        raise ConfigError("--t is required")
    if opts.get("lam") is None:
        raise ConfigError("--lambda is required")
    t = int(opts["t"])
    lam = opts["lam"]
    lam = DegreeDistribution.parse(lam) if isinstance(lam, str) else DegreeDistribution(
        {int(d): parse_rational(p) for d, p in dict(lam).items()})

    sweeps = [s for s in ("k", "sweep_k", "sweep_g") if opts.get(s) is not None]
    if len(sweeps) != 1:
        raise ConfigError("give exactly one of --k, --sweep-k, --sweep-g")
    if opts.get("k") is not None:
        ks = [int(opts["k"])]
    elif opts.get("sweep_k") is not None:
        sk = opts["sweep_k"]
        ks = parse_k_range(sk) if isinstance(sk, str) else [int(x) for x in sk]
    else:
        sg = opts["sweep_g"]
        ks = ks_from_g(sg if isinstance(sg, str) else ",".join(map(str, sg)), t)

    mode = opts.get("mode", "exact")
    modes = tuple(m.strip() for m in (mode.split(",") if isinstance(mode, str) else mode) if m.strip())
    bad = [m for m in modes if m not in MODES]
    if bad or not modes:
        raise ConfigError(f"unknown mode(s) {bad}; choose from {', '.join(MODES)}")
    if len(set(modes)) != len(modes):
        raise ConfigError(f"mode listed twice in {mode!r}")

    sc = Scenario(
        t=t, lam=lam, ks=ks, modes=modes,
        mlv_threshold=parse_rational(opts.get("mlv_threshold", DEFAULT_MLV_THRESHOLD)),
        trials=int(opts.get("trials", 1000)), seed=int(opts.get("seed", 0)),
        budget=None if opts.get("budget") is None else int(opts["budget"]),
        max_k=int(opts.get("max_k", DEFAULT_MAX_K)), workers=int(opts.get("workers", 1)),
        timing=not args.no_timing,
    )
    SystemConfig(ks[0], t)
    for k in ks:
        lam.check_against(SystemConfig(k, t))
    SimConfig(sc.trials, sc.seed, max(sc.workers, 1))
    return sc, opts


def _write(path: str, rows, aborted=None):
    p = Path(path)
    text = rows_to_json(rows, aborted) if p.suffix.lower() == ".json" else rows_to_csv(rows, aborted)
    p.write_text(text, encoding="utf-8")


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        sc, opts = scenario_from_args(args)
    except ConfigError as exc:
        print(f"irsa-flpa: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    decimals = int(opts.get("decimals", 6))
    try:
        rows = run(sc)
    except BudgetExceeded as exc:
        partial = getattr(exc, "partial_rows", [])
        print(f"irsa-flpa: budget exceeded: {exc}", file=sys.stderr)
        if opts.get("out"):
            _write(opts["out"], partial, aborted=str(exc))
        if not args.quiet and partial:
            print(format_table(partial, decimals))
        return EXIT_BUDGET
    except ConfigError as exc:
        print(f"irsa-flpa: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if not args.quiet:
        print(format_table(rows, decimals))
    if len(sc.modes) > 1:
        table = compare(rows)
        if not args.quiet:
            print()
            print(format_compare(table, decimals))
        if opts.get("compare_out"):
            Path(opts["compare_out"]).write_text(compare_to_csv(table), encoding="utf-8")
    if opts.get("out"):
        _write(opts["out"], rows)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
