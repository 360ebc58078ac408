"""Command-line interface: ``pairmct analyze`` and ``pairmct simulate``.

``analyze`` writes a JSON report for one data set; ``simulate`` writes a
long-format CSV with one row per design cell. Both embed the resolved
configuration and a ``format_version`` field. The exit code is 0 whenever the
command completes, whatever the test decisions.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from typing import Optional

from . import __version__
from .data import InvalidSampleError, PairedSample, build_sample
from .mct import Hypothesis, LayoutError, run_mct, split_alpha
from .permutation import PermutationPlan
from .simulation import ERROR_LAWS, TESTS, GenSpec, MissingSpec, estimate_size
from .statistics import Sidedness

FORMAT_VERSION = 1
DEFAULT_B = 1000
DESK_NSIM, DESK_B = 2000, 500
FULL_NSIM, FULL_B = 10000, 1000
DEFAULT_RHO = (-0.9, -0.5, 0.0, 0.5, 0.9)

_MISSING = {"", "NA"}
_HYPOTHESES = {"mu-asym": "mu_asymptotic", "mu-perm": "mu_permutation", "shift": "shift_W",
               "dist": "distribution_F", "bf-p": "bf_p"}
_SPLITS = {"sqrt": "equal_sqrt", "prop-n": "prop_n", "prop-N": "prop_N"}
SIM_COLUMNS = ("test", "error_law", "sigma", "rho", "n", "r", "n_sim", "B", "rejections", "rate",
               "mc_stderr", "redraws", "skipped", "seed", "status", "alpha", "format_version")


class CliError(Exception):
    """A user-facing failure, reported as a JSON error object."""

    def __init__(self, kind, message, **details):
        super().__init__(message)
        self.kind = kind
        self.details = details


# -- input ---------------------------------------------------------------------

def parse_pairs_text(text: str) -> PairedSample:
    """Parse CSV text with header ``x1,x2``; empty cells and ``NA`` are missing."""
    rows = csv.reader(io.StringIO(text))
    try:
        header = next(rows)
    except StopIteration:
        raise CliError("parse_error", "empty input", line=1) from None
    if [h.strip() for h in header] != ["x1", "x2"]:
        raise CliError("parse_error", f"expected header 'x1,x2', got {','.join(header)!r}", line=1)
    records = []
    for line_no, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise CliError("parse_error", f"expected 2 fields, got {len(row)}", line=line_no)
        values = []
        for token in (t.strip() for t in row):
            if token in _MISSING:
                values.append(None)
                continue
            try:
                v = float(token)
            except ValueError:
                raise CliError("parse_error", f"non-numeric value {token!r}", line=line_no) from None
            if not math.isfinite(v):
                raise CliError("parse_error", f"non-finite value {token!r}", line=line_no)
            values.append(v)
        records.append(values)
    try:
        return build_sample(records)
    except InvalidSampleError as exc:
        raise CliError("parse_error", str(exc)) from None


def parse_pairs_csv(path) -> PairedSample:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError("io_error", str(exc), path=str(path)) from None
    return parse_pairs_text(text)


# -- helpers -------------------------------------------------------------------

def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise CliError("config_error", f"{name} must be an integer, got {raw!r}") from None
    if value < 1:
        raise CliError("config_error", f"{name} must be >= 1")
    return value


def _split_arg(text):
    if text in _SPLITS:
        return _SPLITS[text], None
    if text.startswith("gamma="):
        try:
            return "explicit", float(text[len("gamma="):])
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(f"invalid split {text!r}; use sqrt, prop-n, prop-N or gamma=G")


def _list(kind):
    def parse(text):
        try:
            return [kind(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid list {text!r}") from None
    return parse


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _sides(pv):
    return {s.value: _num(p) for s, p in pv.items()}


def _component(part):
    s = part.statistic
    return {
        "method": part.method,
        "statistic": _num(s.value),
        "df": _num(s.df),
        "effect": _num(s.effect),
        "p_value": _num(part.p_value),
        "p_values": _sides(part.p_values),
        "level": part.level,
        "reject": bool(part.reject),
        "calibration": part.calibration,
        "reference": part.reference,
        "B": part.B,
        "seed": part.seed,
    }


def _write(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise CliError("io_error", str(exc), path=str(out)) from None


# -- commands ------------------------------------------------------------------

def cmd_analyze(args) -> dict:
    if not 0 < args.alpha < 1:
        raise CliError("config_error", f"alpha must lie in (0, 1), got {args.alpha}")
    B = args.B if args.B is not None else _env_int("PAIRMCT_B", DEFAULT_B)
    if B < 1:
        raise CliError("config_error", "B must be >= 1")
    if not 0 <= args.seed < 2**64:
        raise CliError("config_error", "seed must be an unsigned 64-bit integer")
    sample = parse_pairs_csv(args.input)
    strategy, gamma = args.split
    hypothesis = Hypothesis.parse(_HYPOTHESES[args.hypothesis])
    side = Sidedness.parse(args.side)
    try:
        split = split_alpha(strategy, args.alpha, sample.n_c, sample.n_1, sample.n_2, gamma)
        out = run_mct(hypothesis, sample, side, split, PermutationPlan(B=B, seed=args.seed),
                      alpha=args.alpha)
    except LayoutError as exc:
        raise CliError("layout_error", str(exc),
                       violations=[{"count": v.count, "observed": v.observed, "required": v.required}
                                   for v in exc.violations]) from None
    except ValueError as exc:
        raise CliError("config_error", str(exc)) from None
    n_c, n_1, n_2 = sample.n_c, sample.n_1, sample.n_2
    return {
        "format_version": FORMAT_VERSION,
        "version": __version__,
        "config": {"input": str(args.input), "hypothesis": hypothesis.value, "side": side.value,
                   "alpha": args.alpha, "split": strategy, "gamma": split.gamma, "B": B,
                   "seed": args.seed},
        "counts": {"n_c": n_c, "n_1": n_1, "n_2": n_2, "n": sample.n, "N": sample.N,
                   "dropped": sample.dropped},
        "split": {"strategy": split.strategy, "alpha": split.alpha, "alpha1": split.alpha1,
                  "alpha2": split.alpha2, "gamma": split.gamma},
        "complete_part": _component(out.complete_part),
        "incomplete_part": _component(out.incomplete_part),
        "reject": bool(out.reject),
        "diagnostics": list(out.diagnostics),
    }


def simulate_rows(args):
    full = args.full_scale
    n_sim = args.nsim if args.nsim is not None else _env_int("PAIRMCT_NSIM", FULL_NSIM if full else DESK_NSIM)
    B = args.B if args.B is not None else _env_int("PAIRMCT_B", FULL_B if full else DESK_B)
    for test in args.tests:
        if test not in TESTS:
            raise CliError("config_error", f"unknown test {test!r}; expected one of {TESTS}")
    for law in args.laws:
        if law not in ERROR_LAWS:
            raise CliError("config_error", f"unknown error law {law!r}; expected one of {ERROR_LAWS}")
    for r in args.r:
        if not 0 <= r < 1:
            raise CliError("config_error", f"r must lie in [0, 1), got {r}")
    rows = []
    grid = itertools.product(args.tests, args.laws, args.sigma, args.rho, args.n, args.r)
    for test, law, sigma, rho, n, r in grid:
        try:
            gen = GenSpec.from_rho(n, law, sigma, rho)
            miss = MissingSpec(r)
        except ValueError as exc:
            raise CliError("config_error", str(exc)) from None
        est = estimate_size(test, gen, miss, n_sim, B, args.seed, alpha=args.alpha,
                            workers=args.workers)
        rows.append({
            "test": test, "error_law": law, "sigma": sigma, "rho": rho, "n": n, "r": r,
            "n_sim": n_sim, "B": B, "rejections": est.rejections,
            "rate": "" if est.status != "ok" else repr(est.rate),
            "mc_stderr": "" if est.status != "ok" else repr(est.mc_stderr),
            "redraws": est.redraw_count, "skipped": est.skipped, "seed": args.seed,
            "status": est.status, "alpha": args.alpha, "format_version": FORMAT_VERSION,
        })
    return rows


def cmd_simulate(args) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SIM_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(simulate_rows(args))
    return buf.getvalue()


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pairmct", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="test one data set (JSON report)")
    a.add_argument("--input", required=True, help="CSV with header x1,x2; empty or NA = missing")
    a.add_argument("--hypothesis", required=True, choices=sorted(_HYPOTHESES))
    a.add_argument("--side", default="two", choices=["greater", "less", "two"])
    a.add_argument("--alpha", type=float, default=0.05)
    a.add_argument("--split", type=_split_arg, default=("equal_sqrt", None),
                   help="sqrt, prop-n, prop-N or gamma=G")
    a.add_argument("--B", type=int, default=None, help=f"resamples (env PAIRMCT_B, default {DEFAULT_B})")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", default=None, help="output file (default stdout)")

    s = sub.add_parser("simulate", help="type-I error sweep (CSV)")
    s.add_argument("--tests", type=_list(str), default=["bf_p"], help=f"comma list of {','.join(TESTS)}")
    s.add_argument("--laws", type=_list(str), default=["normal"], help=f"comma list of {','.join(ERROR_LAWS)}")
    s.add_argument("--sigma", type=_list(str), default=["s1"], help="comma list of s1,s2")
    s.add_argument("--rho", type=_list(float), default=list(DEFAULT_RHO))
    s.add_argument("--n", type=_list(int), default=[20])
    s.add_argument("--r", type=_list(float), default=[0.1])
    s.add_argument("--nsim", type=int, default=None, help="replications (env PAIRMCT_NSIM)")
    s.add_argument("--B", type=int, default=None, help="resamples (env PAIRMCT_B)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--full-scale", action="store_true",
                   help=f"default to {FULL_NSIM} replications and B={FULL_B}")
    s.add_argument("--out", default=None)
    return parser


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            report = cmd_analyze(args)
            _write(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
        else:
            if args.sigma and any(v not in ("s1", "s2") for v in args.sigma):
                raise CliError("config_error", f"sigma must be s1 or s2, got {args.sigma}")
            _write(cmd_simulate(args), args.out)
    except CliError as exc:
        err = {"format_version": FORMAT_VERSION,
               "error": {"kind": exc.kind, "message": str(exc), **exc.details}}
        sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
