"""CLI parser, subcommand dispatch, sweeps, and exception handler."""

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from palinsieve import __version__
from palinsieve.format import (
    SCHEMA_VERSION,
    format_csv,
    format_error,
    format_json,
    format_record,
    notice,
    to_jsonable,
    write_output,
)
from palinsieve.numeric import parse_angle
from palinsieve.util import FitError, PalinsieveError

FAILED_CHECK = 1
USAGE_ERROR = 2

DEFAULT_BASE = 10


class PalinsieveArgumentParser(argparse.ArgumentParser):
    """Custom parser that exits with code 2 and an ERR: line on usage errors."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        print(format_error(message), file=sys.stderr)
        sys.exit(USAGE_ERROR)


@dataclass
class RunConfig:
    """Everything one invocation needs: global flags plus subcommand options."""

    command: str
    base: int | None = None
    seed: int = 0
    threads: int = 1
    fmt: str = "json"
    out: str | None = None
    quiet: bool = False
    params: dict[str, Any] = field(default_factory=dict)

    _GLOBAL = ("command", "base", "seed", "threads", "format", "out", "quiet")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        ns = vars(args)
        return cls(
            command=args.command,
            base=ns.get("base"),
            seed=ns.get("seed", 0),
            threads=max(1, ns.get("threads", 1)),
            fmt=ns.get("format", "json"),
            out=ns.get("out"),
            quiet=ns.get("quiet", False),
            params={k: v for k, v in ns.items() if k not in cls._GLOBAL},
        )

    def base_or(self, default: int = DEFAULT_BASE) -> int:
        return default if self.base is None else self.base


def _int_list(text: str) -> list[int]:
    """Parse ``"8,16,32"``; also accepts ``2^13``-style powers."""
    values = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "^" in part:
                base, exp = part.split("^", 1)
                values.append(int(base) ** int(exp))
            else:
                values.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty integer list")
    return values


def _emit(cfg: RunConfig, lines: list[str]) -> None:
    write_output("\n".join(lines), cfg.out)


def _status(reports) -> int:
    """1 when any explicit check failed, else 0.

    Ratio-form reports carry a verdict against an empirical threshold; a
    miss is reported but does not change the exit status.
    """
    failed = any(r.explicit and r.passed is False for r in reports)
    return FAILED_CHECK if failed else 0


def cmd_enumerate(cfg: RunConfig) -> int:
    """Handler for `palinsieve enumerate`."""
    from palinsieve.palindromes import (
        Filter,
        PalConfig,
        class_counts,
        enumerate_palindromes,
    )

    p = cfg.params
    pal_cfg = PalConfig(cfg.base_or(), Filter(p["filter"]))
    if p.get("mod"):
        counts = class_counts(pal_cfg, p["max"], p["mod"])
        if cfg.fmt == "csv":
            _emit(cfg, [format_csv(["class", "count"], enumerate(counts)).rstrip("\n")])
        else:
            rows = ({"class": a, "count": c} for a, c in enumerate(counts))
            _emit(cfg, [format_json(**row) for row in rows])
        return 0
    values = enumerate_palindromes(pal_cfg, p["max"])
    if cfg.fmt == "csv":
        _emit(cfg, [format_csv(["n"], ([n] for n in values)).rstrip("\n")])
    else:
        _emit(cfg, [str(n) for n in values])
    return 0


def cmd_expsum(cfg: RunConfig) -> int:
    """Handler for `palinsieve expsum`."""
    from palinsieve import expsums
    from palinsieve.numeric import angle_add, angle_from

    p = cfg.params
    b = cfg.base_or()
    if p.get("linfty") is not None:
        q = p["linfty"]
        ratios = expsums.linfty_ratios(b, q, p["shift_num"], p["ms"], seed=cfg.seed)
        slope = expsums.fit_linfty_decay(b, q, p["shift_num"], p["ms"], seed=cfg.seed)
        notice(f"L-infinity decay slope {slope:.6g} for q = {q}", cfg.quiet)
        record = {"b": b, "q": q, "k": p["shift_num"], "ms": p["ms"]}
        line = format_json(schema=SCHEMA_VERSION, ratios=ratios, slope=slope, **record)
        _emit(cfg, [line])
        return 0
    a = p["angle"] if p.get("angle") is not None else angle_from(p["num"], p["den"])
    if p["shift_num"]:
        a = angle_add(a, expsums.angle_from_shift(b, p["shift_num"]))
    if p.get("prod") is not None:
        lv = expsums.log_product(expsums.phi_product_spec(b, p["prod"]), a)
        record = {"b": b, "N": p["prod"], "a": a, "logphi": lv.log}
        _emit(cfg, [format_json(schema=SCHEMA_VERSION, **record)])
        return 0
    report = expsums.check_decomposition(b, p["max"], a)
    s = expsums.pal_exp_sum(b, p["max"], a)
    _emit(
        cfg,
        [
            format_json(
                schema=SCHEMA_VERSION,
                b=b,
                x=p["max"],
                a=a,
                re=s.real,
                im=s.imag,
                bound=report.rhs,
                passed=report.passed,
            )
        ],
    )
    return _status([report])


def _farey_calibrated(b: int, N: int, K: int) -> bool:
    return b <= 3 and N <= 4 and K <= 3


def cmd_moments(cfg: RunConfig) -> int:
    """Handler for `palinsieve moments`."""
    from palinsieve import moments
    from palinsieve.expsums import angle_from_shift
    from palinsieve.report import RTOL

    p = cfg.params
    b, N, K = cfg.base_or(), p["N"], p["K"]
    if p.get("average") and p.get("farey") is None:
        raise PalinsieveError("--average needs --farey Q")
    beta = angle_from_shift(b, p["shift_num"])
    moment = moments.moment_exact(b, N, K)
    data: dict[str, Any] = {
        "b": b,
        "N": N,
        "K": K,
        "moment": moment,
        "bound_base": b ** (2 * (K - 1) * N + 2),
        "rho": moments.moment_ratio(b, N, K, moment) if N >= 1 else None,
    }
    status = 0
    if p.get("grid") is not None:
        data["quadrature"] = moments.moment_quadrature(b, N, K, p["grid"])
    if p.get("farey") is not None:
        Q = p["farey"]
        total = moments.farey_moment_sum(b, N, K, Q, beta)
        bound = moments.farey_bound(b, N, K, Q)
        data["farey_sum"] = total
        data["farey_bound"] = bound
        passed = None
        if _farey_calibrated(b, N, K):
            passed = bool(total <= bound * (1 + RTOL))
            status = 0 if passed else FAILED_CHECK
        data["farey_passed"] = passed
    if p.get("average"):
        data["average"] = moments.average_sum(b, N, p["farey"], beta)
    _emit(cfg, [format_json(schema=SCHEMA_VERSION, **data)])
    return status


def cmd_equidist(cfg: RunConfig) -> int:
    """Handler for `palinsieve equidist`."""
    from palinsieve import equidist
    from palinsieve.palindromes import Filter, PalConfig, count_all

    p = cfg.params
    b, x = cfg.base_or(), p["max"]
    Q = equidist.level(x, p["theta"], p["eps"])
    moduli = equidist.admissible_moduli(b, Q)
    notice(f"{len(moduli)} admissible moduli up to Q = {Q}", cfg.quiet)
    table = equidist.error_table(b, x, moduli, workers=cfg.threads, method=p["method"])
    if cfg.fmt == "csv":
        rows = [(row.q, row.error) for row in table.rows]
        _emit(cfg, [format_csv(["q", "err"], rows).rstrip("\n")])
        return 0
    sigma_hat = None
    if p.get("sweep"):
        points = equidist.decay_points(
            b, p["sweep"], p["theta"], p["eps"], cfg.threads, p.get("fixed_level")
        )
        sigma_hat = equidist.fit_decay_points(points)
        notice(f"fitted decay exponent {sigma_hat:.6g}", cfg.quiet)
    summary = {
        "b": b,
        "x": x,
        "Q": Q,
        "moduli": len(moduli),
        "aggregate": table.total(),
        "total_pal": count_all(PalConfig(b, Filter.STAR), x),
        "sigma_hat": sigma_hat,
    }
    _emit(cfg, [format_json(schema=SCHEMA_VERSION, **summary)])
    return 0


def cmd_sieve(cfg: RunConfig) -> int:
    """Handler for `palinsieve sieve`."""
    from palinsieve import sieve

    p = cfg.params
    b, x = cfg.base_or(), p["max"]
    if p.get("csv_rows") or cfg.fmt == "csv":
        rows = sieve.census_rows(b, x, p["r"], p["theta_inv"])
        header = ["n", "omega", "pminus", "qualifies"]
        _emit(cfg, [format_csv(header, rows).rstrip("\n")])
        return 0
    notice(f"census of base-{b} palindromes up to {x}", cfg.quiet)
    report = sieve.census(b, x, p["r"], p["theta_inv"], workers=cfg.threads)
    extra = {}
    if p.get("hypothesis"):
        extra["hypothesis"] = to_jsonable(sieve.hypothesis_check(b, x, p["theta_inv"]))
    _emit(cfg, [format_record(report, **extra)])
    return 0


def _report_rows(reports):
    for r in reports:
        instance = json.dumps(to_jsonable(r.instance), sort_keys=True)
        yield r.lemma_id, r.lhs, r.rhs, r.ratio, r.passed, r.explicit, instance


def cmd_lemmas(cfg: RunConfig) -> int:
    """Handler for `palinsieve lemmas`."""
    from palinsieve.lemmas import run_suite

    p = cfg.params
    only = [i.strip() for part in p.get("only") or [] for i in part.split(",")]
    only = [i for i in only if i]
    reports = run_suite(cfg.seed, p["instances"], only or None, workers=cfg.threads)
    failed = sum(1 for r in reports if r.explicit and r.passed is False)
    missed = sum(1 for r in reports if not r.explicit and r.passed is False)
    notice(
        f"{len(reports)} instances checked, {failed} failed, "
        f"{missed} above empirical thresholds",
        cfg.quiet,
    )
    if cfg.fmt == "csv":
        header = ["lemma_id", "lhs", "rhs", "ratio", "passed", "explicit", "instance"]
        _emit(cfg, [format_csv(header, _report_rows(reports)).rstrip("\n")])
    else:
        _emit(cfg, [format_record(r) for r in reports])
    return _status(reports)


# --- sweeps -------------------------------------------------------------

SWEEP_BASES = (2, 3, 5, 10)
PARSEVAL_LIMIT = 10**5
PARSEVAL_REL_TOL = 1e-6
EQUIDIST_XS = (2**13, 2**17, 2**21, 2**25, 2**29)
CENSUS_XS = (10**7, 10**8, 10**9)
CENSUS_SPREAD = 3.0


def _sweep_count_pi(cfg: RunConfig) -> list[dict]:
    from palinsieve.palindromes import PalConfig, count_pi, enumerate_block

    records = []
    for b in SWEEP_BASES:
        for N in range(cfg.params["max_n"] + 1):
            length = 2 * N + 1
            seen = sum(1 for _ in enumerate_block(PalConfig(b), length, b**length - 1))
            expected = count_pi(b, N)
            records.append(
                {
                    "b": b,
                    "N": N,
                    "count_pi": expected,
                    "enumerated": seen,
                    "passed": seen == expected,
                }
            )
    return records


def _sweep_parseval(cfg: RunConfig) -> list[dict]:
    from palinsieve.moments import moment_exact, moment_quadrature

    records = []
    for b in SWEEP_BASES:
        for K in range(1, cfg.params["max_k"] + 1):
            N = 1
            while K * b ** (2 * N) <= PARSEVAL_LIMIT:
                exact = moment_exact(b, N, K)
                quad = moment_quadrature(b, N, K, 4 * K * b ** (2 * N))
                rel = float(abs(quad - exact) / exact)
                records.append(
                    {
                        "b": b,
                        "N": N,
                        "K": K,
                        "exact": exact,
                        "quadrature": quad,
                        "rel_err": rel,
                        "passed": rel <= PARSEVAL_REL_TOL,
                    }
                )
                N += 1
    return records


def _sweep_decomposition(cfg: RunConfig) -> list[dict]:
    from palinsieve.expsums import check_decomposition
    from palinsieve.numeric import angle_from

    rng = np.random.default_rng(cfg.seed)
    records = []
    for _ in range(cfg.params["instances"] or 200):
        b = int(rng.integers(2, 6))
        x = int(rng.integers(1, 10**6 + 1))
        den = int(rng.integers(1, 10**4 + 1))
        a = angle_from(int(rng.integers(0, den)), den)
        records.append(to_jsonable(check_decomposition(b, x, a)))
    return records


def _sweep_compositions(cfg: RunConfig) -> list[dict]:
    from palinsieve.moments import C_COMP, composition_error

    records = []
    for b in SWEEP_BASES:
        for K in range(4, 129):
            err = composition_error(b, K)
            records.append({"b": b, "K": K, "error": err, "passed": err <= C_COMP})
    return records


def _sweep_equidist(cfg: RunConfig) -> list[dict]:
    from palinsieve.equidist import decay_series, fit_decay_points

    p = cfg.params
    xs = p["xs"] or list(EQUIDIST_XS)
    growing, fixed = decay_series(
        cfg.base_or(2), xs, p["theta"], p["eps"], cfg.threads, p.get("fixed_level")
    )
    sigma_hat = fit_decay_points(fixed)
    try:
        growing_sigma_hat = fit_decay_points(growing)
    except FitError:
        growing_sigma_hat = None
    notice(
        f"fitted decay exponent {sigma_hat:.6g} at level {fixed[0].Q}",
        cfg.quiet,
    )
    records = [{"level": "growing", **to_jsonable(pt)} for pt in growing]
    records += [{"level": "fixed", **to_jsonable(pt)} for pt in fixed]
    decays = fixed[-1].normalized < fixed[0].normalized
    records.append(
        {
            "sigma_hat": sigma_hat,
            "decreasing": decays,
            "growing_sigma_hat": growing_sigma_hat,
            "growing_decreasing": growing[-1].normalized < growing[0].normalized,
            "passed": sigma_hat > 0 and decays,
        }
    )
    return records


def _sweep_census(cfg: RunConfig) -> list[dict]:
    from palinsieve.sieve import census

    xs = cfg.params["xs"] or list(CENSUS_XS)
    reports = []
    for x in xs:
        notice(f"census up to {x}", cfg.quiet)
        reports.append(census(cfg.base_or(10), x, workers=cfg.threads))
    records = [to_jsonable(r) for r in reports]
    ratios = [r.ratio for r in reports]
    positive = all(r.qualifying > 0 for r in reports)
    spread = max(ratios) / min(ratios) if positive else math.inf
    records.append({"spread": spread, "passed": positive and spread < CENSUS_SPREAD})
    return records


def _sweep_farey(cfg: RunConfig) -> list[dict]:
    from palinsieve.moments import farey_bound, farey_moment_sum
    from palinsieve.report import make_report

    rng = np.random.default_rng(cfg.seed)
    records = []
    for _ in range(cfg.params["instances"] or 50):
        b = int(rng.integers(2, 4))
        N = int(rng.integers(1, 5))
        K = int(rng.integers(1, 4))
        Q = int(rng.integers(1, 33))
        report = make_report(
            "farey_moment",
            {"b": b, "N": N, "K": K, "Q": Q},
            farey_moment_sum(b, N, K, Q),
            farey_bound(b, N, K, Q),
        )
        records.append(to_jsonable(report))
    return records


SWEEPS = {
    "count-pi": _sweep_count_pi,
    "parseval": _sweep_parseval,
    "decomposition": _sweep_decomposition,
    "compositions": _sweep_compositions,
    "equidist": _sweep_equidist,
    "census": _sweep_census,
    "farey": _sweep_farey,
}


def cmd_sweep(cfg: RunConfig) -> int:
    """Handler for `palinsieve sweep`."""
    kind = cfg.params["kind"]
    records = SWEEPS[kind](cfg)
    failed = sum(1 for r in records if r.get("passed") is False)
    notice(f"sweep {kind}: {len(records)} records, {failed} failed", cfg.quiet)
    lines = [format_json(schema=SCHEMA_VERSION, sweep=kind, **r) for r in records]
    lines.append(
        format_json(
            schema=SCHEMA_VERSION,
            sweep=kind,
            summary=True,
            records=len(records),
            failed=failed,
        )
    )
    _emit(cfg, lines)
    return FAILED_CHECK if failed else 0


COMMANDS = {
    "enumerate": cmd_enumerate,
    "expsum": cmd_expsum,
    "moments": cmd_moments,
    "equidist": cmd_equidist,
    "sieve": cmd_sieve,
    "lemmas": cmd_lemmas,
    "sweep": cmd_sweep,
}


def run(cfg: RunConfig) -> int:
    """Dispatch to the owning handler and return its exit status."""
    return COMMANDS[cfg.command](cfg)


def _add_global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--base", type=int, default=default(None), help="Base b >= 2")
    parser.add_argument(
        "--seed", type=int, default=default(0), help="Seed for randomized instances"
    )
    parser.add_argument(
        "--threads", type=int, default=default(1), help="Worker processes"
    )
    parser.add_argument("--out", default=default(None), help="Write the report here")
    parser.add_argument(
        "--format",
        choices=["json", "csv"],
        default=default("json"),
        help="Report format",
    )
    parser.add_argument(
        "--quiet",
        action="store_true",
        default=default(False),
        help="No progress banners on stderr",
    )


def build_parser() -> PalinsieveArgumentParser:
    """Build the CLI argument parser with all subcommands."""
    parser = PalinsieveArgumentParser(
        prog="palinsieve",
        description="Exact and numerical laboratory for palindromic almost-primes",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--version", action="version", version=f"palinsieve {__version__}",
    )

    # Global flags via a parent parser so they work both before and after
    # the subcommand name; SUPPRESS keeps the subparser from clobbering
    # values given before it.
    global_parent = argparse.ArgumentParser(add_help=False)
    _add_global_flags(global_parent, suppress=True)
    _add_global_flags(parser, suppress=False)

    sub = parser.add_subparsers(dest="command", parser_class=PalinsieveArgumentParser)

    # enumerate
    enum_p = sub.add_parser(
        "enumerate", parents=[global_parent],
        help="List palindromes up to X (counting lemma #Pi_b(2N) = (b-1) b^N)",
    )
    enum_p.add_argument("--max", type=int, required=True, help="Upper bound X")
    enum_p.add_argument(
        "--filter", choices=["all", "odd", "star"], default="all",
        help="all palindromes, odd digit counts, or coprime to b^3 - b",
    )
    enum_p.add_argument("--mod", type=int, help="Print class counts modulo Q instead")

    # expsum
    exp_p = sub.add_parser(
        "expsum", parents=[global_parent],
        help="Palindromic exponential sums (decomposition bound via Phi_M, "
        "L-infinity decay of P_M at rationals)",
    )
    exp_p.add_argument("--num", type=int, default=0, help="Numerator H of H/Q")
    exp_p.add_argument("--den", type=int, default=1, help="Denominator Q of H/Q")
    exp_p.add_argument(
        "--angle", type=parse_angle, help="The angle as p/q (instead of --num/--den)"
    )
    exp_p.add_argument(
        "--shift-num", type=int, default=0, help="Add the shift K/(b^3 - b)"
    )
    mode = exp_p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--max", type=int, help="Sum over odd-length palindromes <= X")
    mode.add_argument("--prod", type=int, help="log Phi_N at the angle")
    mode.add_argument("--linfty", type=int, help="Decay of max_h P_M(h/q)/b^M")
    exp_p.add_argument(
        "--ms", type=_int_list, default=[8, 16, 32], help="M values for --linfty"
    )

    # moments
    mom_p = sub.add_parser(
        "moments", parents=[global_parent],
        help="2K-th moments of Phi_N (Parseval identity, Farey moment bound)",
    )
    mom_p.add_argument("--N", dest="N", type=int, required=True, help="Half length N")
    mom_p.add_argument("--K", dest="K", type=int, required=True, help="Moment order K")
    mom_p.add_argument("--farey", type=int, help="Sum over Farey fractions of order Q")
    mom_p.add_argument(
        "--shift-num", type=int, default=0, help="Shift K/(b^3 - b) for Farey sums"
    )
    mom_p.add_argument("--grid", type=int, help="Also integrate on this grid")
    mom_p.add_argument(
        "--average", action="store_true",
        help="Average of Phi_N over fractions with denominator coprime to b",
    )

    # equidist
    eq_p = sub.add_parser(
        "equidist", parents=[global_parent],
        help="Star palindromes in progressions (level of distribution theorem)",
    )
    eq_p.add_argument("--max", type=int, required=True, help="Upper bound X")
    eq_p.add_argument("--theta", type=float, default=0.2, help="Level exponent")
    eq_p.add_argument("--eps", type=float, default=0.01, help="Level loss")
    eq_p.add_argument("--sweep", type=_int_list, help="x values for the decay fit")
    eq_p.add_argument(
        "--fixed-level", type=int,
        help="Fit the decay over q <= this level at every sweep x",
    )
    eq_p.add_argument(
        "--method", choices=["auto", "scan", "histogram"], default="auto",
        help="Class-count tracker",
    )

    # sieve
    sieve_p = sub.add_parser(
        "sieve", parents=[global_parent],
        help="Almost-prime census (Omega(n) <= r palindromes, Richert weights)",
    )
    sieve_p.add_argument("--max", type=int, required=True, help="Upper bound X")
    sieve_p.add_argument("--r", type=int, default=6, help="Omega bound r")
    sieve_p.add_argument(
        "--theta-inv", type=int, default=21, help="Sifting limit z = X^(1/theta_inv)"
    )
    sieve_p.add_argument(
        "--hypothesis", action="store_true",
        help="Also check the remainder sum and Mertens-type hypotheses",
    )
    sieve_p.add_argument(
        "--csv-rows", action="store_true", help="Emit n,omega,pminus,qualifies"
    )

    # lemmas
    lem_p = sub.add_parser(
        "lemmas", parents=[global_parent],
        help="Random instances of the auxiliary inequalities (large sieve, "
        "Koksma-Hlawka, Erdos-Turan, ...)",
    )
    lem_p.add_argument(
        "--only", action="append", help="Lemma ids, comma-separated or repeated"
    )
    lem_p.add_argument("--instances", type=int, default=100, help="Instances per lemma")

    # sweep
    sw_p = sub.add_parser(
        "sweep", parents=[global_parent],
        help="Acceptance sweeps over grids of parameters",
    )
    sw_p.add_argument("--kind", choices=sorted(SWEEPS), required=True)
    sw_p.add_argument("--instances", type=int, help="Random instances (seeded)")
    sw_p.add_argument("--xs", type=_int_list, help="x values for equidist or census")
    sw_p.add_argument("--theta", type=float, default=0.2)
    sw_p.add_argument("--eps", type=float, default=0.01)
    sw_p.add_argument(
        "--fixed-level", type=int,
        help="Moduli bound of the fixed-level equidist series",
    )
    sw_p.add_argument("--max-n", type=int, default=6, help="Largest N for count-pi")
    sw_p.add_argument("--max-k", type=int, default=4, help="Largest K for parseval")

    return parser


def main() -> int:
    """Entry point for the palinsieve CLI."""
    parser = build_parser()
    args = parser.parse_args()

    if args.command is None:
        parser.print_help(sys.stderr)
        return USAGE_ERROR

    try:
        return run(RunConfig.from_args(args))
    except PalinsieveError as e:
        print(format_error(str(e)), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        print(format_error(f"unexpected error: {e}"), file=sys.stderr)
        return 1
