"""Command line: run verification suites, emit tables, inspect the shift grid.

Exit status: 0 all checks pass, 1 some check fails, 2 bad configuration or
invalid family, 3 factorization breakdown (the vanishing tau index is printed).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from mpmath import mp, mpf

from . import lattice, suites, weights
from .mops import recursion_coeffs
from .numkernel import BreakdownError, ConvergenceError, value_of
from .tau import tau_table
from .weights import FamilyError, rational

DEFAULTS = {
    "family": "FX-C",
    "precision": 512,
    "nmax": 8,
    "suite": "all",
    "jobs": 1,
    "out": "hypmop-out",
    "tol": None,
}
PARAM_KEYS = ("eta", "eta1", "eta2", "b1", "b2", "c")
CONFIG_KEYS = set(DEFAULTS) | set(PARAM_KEYS)

# parameters each named family accepts; anything else is a configuration error
FAMILY_PARAMS = {
    "charlier": {"eta1", "eta2"},
    "meixner2": {"eta", "b1", "b2"},
    "gen-charlier": {"eta1", "eta2", "c"},
    "gen-meixner2": {"eta", "b1", "b2", "c"},
    "custom": set(PARAM_KEYS),
}
FAMILY_NAMES = tuple(FAMILY_PARAMS) + tuple(weights.FIXTURES)
QUANTITIES = ("tau", "coeffs", "fields")


class ConfigError(ValueError):
    pass


def _rational_list(text):
    if isinstance(text, (list, tuple)):
        return tuple(rational(x) for x in text)
    text = str(text).strip()
    if not text:
        return ()
    return tuple(rational(x) for x in text.split(","))


def build_family(cfg):
    """WeightFamily from a merged configuration dict."""
    name = cfg["family"]
    given = {k: cfg[k] for k in PARAM_KEYS if cfg.get(k) is not None}
    if name in weights.FIXTURES:
        if given:
            raise ConfigError(f"fixture {name} takes no parameters (got {', '.join(sorted(given))})")
        return weights.FIXTURES[name]
    if name not in FAMILY_PARAMS:
        raise ConfigError(f"unknown family {name!r}; choose from {', '.join(FAMILY_NAMES)}")
    extra = set(given) - FAMILY_PARAMS[name]
    if extra:
        raise ConfigError(f"family {name} does not use {', '.join(sorted(extra))}")
    if name == "custom":
        if "eta" in given and ({"eta1", "eta2"} & set(given)):
            raise ConfigError("give either --eta or --eta1/--eta2, not both")
        eta1 = given.get("eta", given.get("eta1", "1/2"))
        eta2 = given.get("eta", given.get("eta2", "1/3"))
        return weights.WeightFamily(_rational_list(given.get("c", "")), _rational_list(given.get("b1", "")),
                                    _rational_list(given.get("b2", "")), rational(eta1), rational(eta2))
    ctor = {"charlier": weights.charlier, "meixner2": weights.meixner2,
            "gen-charlier": weights.gen_charlier, "gen-meixner2": weights.gen_meixner2}[name]
    return ctor(**{k: rational(v) for k, v in given.items()})


def parse_tolerances(items):
    """``--tol 1e-30`` sets every class; ``--tol lattice=1e-25`` sets one."""
    tols = dict(suites.TOLERANCES)
    if items is None:
        return tols
    if isinstance(items, dict):
        items = [f"{k}={v}" for k, v in items.items()]
    elif isinstance(items, (str, int, float)):
        items = [str(items)]
    for item in items:
        cls, sep, val = str(item).rpartition("=")
        try:
            x = mpf(val)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad tolerance {item!r}") from exc
        if not x > 0:
            raise ConfigError(f"tolerance must be positive: {item!r}")
        if not sep:
            tols = {k: x for k in tols}
        elif cls in tols:
            tols[cls] = x
        else:
            raise ConfigError(f"unknown tolerance class {cls!r}; classes: {', '.join(tols)}")
    return tols


def parse_suites(text):
    names = [s.strip() for s in str(text).split(",") if s.strip()]
    if "all" in names:
        return list(suites.SUITES)
    bad = [s for s in names if s not in suites.SUITES]
    if bad or not names:
        raise ConfigError(f"unknown suite {', '.join(bad) or '(none)'}; choose from {', '.join(suites.SUITES)}, all")
    return [s for s in suites.SUITES if s in names]


def merge_config(args):
    """Defaults, then the --config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(data)
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    for key in ("precision", "nmax", "jobs"):
        try:
            cfg[key] = int(cfg[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key} must be an integer") from exc
    if cfg["precision"] < 64:
        raise ConfigError("precision must be at least 64 bits")
    if cfg["nmax"] < 1:
        raise ConfigError("nmax must be at least 1")
    if cfg["jobs"] < 1:
        raise ConfigError("jobs must be at least 1")
    return cfg


def digits_for(precision):
    return max(1, math.floor(0.3 * precision))


def fmt(x, digits):
    return mp.nstr(mpf(value_of(x)), digits, strip_zeros=False)


# verify

def _suite_job(name, family, n_max, precision):
    with mp.workprec(precision):
        return suites.run_suite(name, family, n_max)


def run_verify(cfg):
    family = build_family(cfg)
    names = parse_suites(cfg["suite"])
    tols = parse_tolerances(cfg["tol"])
    prec, n_max = cfg["precision"], cfg["nmax"]
    if cfg["jobs"] > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg["jobs"], len(names))) as pool:
            futures = [pool.submit(_suite_job, s, family, n_max, prec) for s in names]
            batches = [f.result() for f in futures]
    else:
        batches = [_suite_job(s, family, n_max, prec) for s in names]
    records = [r for batch in batches for r in batch]
    with mp.workprec(prec):
        for r in records:
            r.tolerance = tols[r.tol_class]
            r.passed = bool(r.residual < r.tolerance)
    return family, records


def write_reports(cfg, family, records):
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    digits = digits_for(cfg["precision"])
    rows = []
    with mp.workprec(cfg["precision"]):
        for r in records:
            rows.append({
                "suite": r.suite, "check": r.check, "anchor": r.anchor, "site": r.site,
                "residual": fmt(r.residual, digits), "tolerance": mp.nstr(r.tolerance, 6),
                "tolerance_class": r.tol_class, "passed": r.passed,
            })
    report = {
        "family": family.describe(),
        "precision": cfg["precision"],
        "nmax": cfg["nmax"],
        "suites": parse_suites(cfg["suite"]),
        "passed": all(r.passed for r in records),
        "records": [dict(row, seconds=round(r.seconds, 6)) for row, r in zip(rows, records)],
    }
    with open(os.path.join(out, "report.json"), "w") as fh:
        json.dump(report, fh, indent=1)
    _write_csv(os.path.join(out, "report.csv"), list(rows[0]) if rows else ["suite"], rows)


def _write_csv(path, columns, rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def cmd_verify(cfg):
    t0 = time.perf_counter()
    family, records = run_verify(cfg)
    write_reports(cfg, family, records)
    failed = [r for r in records if not r.passed]
    digits = 8
    for r in failed:
        print(f"FAIL {r.suite}/{r.check} [{r.site}] {r.anchor}: residual {mp.nstr(r.residual, digits)} "
              f">= {mp.nstr(r.tolerance, 3)}")
    print(f"{family.describe()}: {len(records) - len(failed)}/{len(records)} checks pass "
          f"({time.perf_counter() - t0:.1f} s), reports in {cfg['out']}")
    return 1 if failed else 0


# tables

def emit_table(family, quantity, n_max, precision):
    """Rows (header first) of the requested table, formatted for CSV."""
    digits = digits_for(precision)
    with mp.workprec(precision):
        suites.clear_caches()
        try:
            if quantity == "tau":
                jets = tau_table(family, n_max)
                rows = [["n", "tau", "theta_tau", "theta2_tau"]]
                rows += [[n, fmt(t.value, digits), fmt(t.theta(1), digits), fmt(t.theta(2), digits)]
                         for n, t in enumerate(jets)]
            elif quantity == "coeffs":
                rec = recursion_coeffs(family, n_max)
                rows = [["n", "alpha", "beta", "gamma"]]
                rows += [[n, fmt(rec.alpha[n], digits), fmt(rec.beta[n], digits), fmt(rec.gamma[n], digits)]
                         for n in range(n_max + 1)]
            elif quantity == "fields":
                lf = lattice.lattice_fields(family, n_max)
                names = ("u", "v", "f", "g", "F", "G")
                rows = [["n", *names]]
                rows += [[n, *(fmt(lf.get(x, n), digits) for x in names)] for n in range(n_max + 1)]
            else:
                raise ConfigError(f"unknown quantity {quantity!r}; choose from {', '.join(QUANTITIES)}")
        finally:
            suites.clear_caches()
    return rows


def cmd_table(cfg, quantity):
    family = build_family(cfg)
    rows = emit_table(family, quantity, cfg["nmax"], cfg["precision"])
    os.makedirs(cfg["out"], exist_ok=True)
    path = os.path.join(cfg["out"], f"{quantity}.csv")
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())
    sys.stdout.write(buf.getvalue())
    return 0


# shift grid

def shift_report(family, precision=64):
    """Families reachable by one or two unit shifts, their d data and whether
    the two orders of each pair of shifts agree."""
    spec = lattice.ShiftSpec()
    lines = []
    with mp.workprec(precision):
        data = spec.data(family)
        lines.append(f"{'base':<12}{family.describe()}")
        lines.append(f"{'d':<12}" + (" ".join(f"{lattice.LETTERS[k]}={mp.nstr(v, 10)}" for k, v in sorted(data.items()))
                                     or "(no shifts available)"))
        letters = [x for x in "hct" if x in data]
        for x in letters:
            lines.append(f"{lattice.LETTERS[x]:<12}{lattice.apply_shifts(family, x, spec).describe()}")
        for i, x in enumerate(letters):
            for y in letters[i + 1:]:
                one = lattice.shift_params(lattice.shift_params(family, lattice._KINDS[x]), lattice._KINDS[y])
                two = lattice.shift_params(lattice.shift_params(family, lattice._KINDS[y]), lattice._KINDS[x])
                same = one.key() == two.key()
                pair = f"{lattice.LETTERS[x]}-{lattice.LETTERS[y]}"
                lines.append(f"{pair:<12}{one.describe()}  "
                             f"[{'commute' if same else 'DO NOT COMMUTE'}]")
    return lines


def cmd_shifts(cfg):
    lines = shift_report(build_family(cfg))
    os.makedirs(cfg["out"], exist_ok=True)
    text = "\n".join(lines) + "\n"
    with open(os.path.join(cfg["out"], "shifts.txt"), "w") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return 0


# argument parsing

def _common(p):
    p.add_argument("--config", help="JSON file with the same keys as the flags; flags override it")
    p.add_argument("--family", help=f"{', '.join(FAMILY_NAMES)} (default {DEFAULTS['family']})")
    p.add_argument("--eta", help="shared eta (meixner2, gen-meixner2, custom)")
    p.add_argument("--eta1", help="eta of weight 1, as p/q or decimal")
    p.add_argument("--eta2", help="eta of weight 2, as p/q or decimal")
    p.add_argument("--b1", help="numerator parameter(s) of weight 1; comma list for custom")
    p.add_argument("--b2", help="numerator parameter(s) of weight 2; comma list for custom")
    p.add_argument("--c", help="denominator parameter; for custom the comma list of Pearson roots c_j, "
                               "for gen-* the c in theta(z) = z(z + c)")
    p.add_argument("--precision", type=int, help=f"working precision in bits (default {DEFAULTS['precision']})")
    p.add_argument("--nmax", type=int, help=f"largest index checked (default {DEFAULTS['nmax']})")
    p.add_argument("--out", help=f"output directory (default {DEFAULTS['out']})")


def build_parser():
    parser = argparse.ArgumentParser(prog="hypmop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run verification suites and write report.json / report.csv")
    _common(v)
    v.add_argument("--suite", help=f"comma list of {', '.join(suites.SUITES)} or all (default all)")
    v.add_argument("--tol", action="append",
                   help="tolerance override, VALUE for every class or CLASS=VALUE; classes and defaults: "
                        + ", ".join(f"{k}={mp.nstr(x, 1)}" for k, x in suites.TOLERANCES.items()))
    v.add_argument("--jobs", type=int, help="worker processes, one suite per job (default 1)")
    t = sub.add_parser("table", help="write <out>/<quantity>.csv")
    t.add_argument("quantity", choices=QUANTITIES)
    _common(t)
    s = sub.add_parser("shifts", help="show the shift grid, d data and commutation")
    _common(s)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = merge_config(args)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "table":
            return cmd_table(cfg, args.quantity)
        return cmd_shifts(cfg)
    except (ConfigError, FamilyError, ConvergenceError) as exc:
        print(f"hypmop: error: {exc}", file=sys.stderr)
        return 2
    except BreakdownError as exc:
        print(f"hypmop: factorization breakdown at index {exc.index}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
