"""Command-line interface: ``rszeta <command> ...``.

Exit codes: 0 success, 1 I/O failure, 2 validation failure. Every command
writes a run manifest (command, parameters, table checksum, version, wall
time) to ``<out>.manifest.json`` next to its output, or to stderr when the
result goes to stdout. Result files themselves carry no timing data, so
identical invocations produce byte-identical results.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
import warnings
from pathlib import Path

from . import __version__
from .coeffs import (
    DISCRIMINANT_WEIGHT,
    EXTERNAL,
    CoefficientError,
    _table_from_a,
    build_table,
    export_csv,
    ingest_coefficients,
    load_table,
    save_table,
)
from .evaluate import (
    AfeConfig,
    Calibration,
    EvaluationRangeError,
    MuExponent,
    TableLengthError,
    calibrate_constants,
    hardy_point,
    z_afe,
    z_afe_smoothed,
    z_direct,
)
from .experiments import (
    ZeroScanWarning,
    default_x_grid,
    delta_scan,
    fmt,
    mean_value_scan,
    zero_scan,
)
from .special import DomainError, SmoothWeight, tau_of_t

logger = logging.getLogger("rszeta")

EXIT_OK, EXIT_IO, EXIT_VALIDATION = 0, 1, 2
TABLE_ENV = "RSZETA_TABLE"


class ValidationFailure(Exception):
    pass


def _round15(v: float) -> float:
    return float(fmt(v))


def _complex_json(z: complex) -> list:
    return [_round15(z.real), _round15(z.imag)]


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _manifest(args, table_checksum, started: float) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    return {
        "command": args.command,
        "parameters": params,
        "table_checksum": table_checksum,
        "library_version": __version__,
        "wall_time_s": round(time.perf_counter() - started, 6),
    }


def _write_manifest(manifest: dict, out: str | None):
    text = json.dumps(manifest, sort_keys=True, default=str)
    if out:
        Path(str(out) + ".manifest.json").write_text(text + "\n")
    else:
        sys.stderr.write(text + "\n")


def _table_path(args) -> Path:
    path = os.environ.get(TABLE_ENV) or args.table
    if not path:
        raise ValidationFailure(f"no coefficient table given (--table or ${TABLE_ENV})")
    return Path(path)


def _load(args):
    path = _table_path(args)
    return path, load_table(path)


def _calibration(table_path: Path, table) -> Calibration:
    """Read ``<table>.calib.json`` or compute and cache it."""
    side = Path(str(table_path) + ".calib.json")
    if side.exists():
        return Calibration.from_dict(json.loads(side.read_text()))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cal = calibrate_constants(table)
    try:
        side.write_text(_dump_json(cal.to_dict()))
    except OSError as exc:
        logger.warning("could not cache calibration at %s: %s", side, exc)
    return cal


# ---------------------------------------------------------------------------
# Commands


def cmd_coeffs(args) -> tuple[str | None, int | None]:
    if args.max_n is not None and args.max_n < 1:
        raise ValidationFailure("--max-n must be at least 1")
    if args.coeff_file:
        table = ingest_coefficients(args.coeff_file, args.weight)
        if args.max_n is not None:
            if args.max_n > table.n_max:
                raise ValidationFailure(
                    f"--max-n {args.max_n} exceeds the {table.n_max} coefficients in the file"
                )
            table = _table_from_a(table.a[: args.max_n + 1], args.weight, EXTERNAL)
    else:
        if args.max_n is None:
            raise ValidationFailure("--max-n is required without --coeff-file")
        if args.weight != DISCRIMINANT_WEIGHT:
            raise ValidationFailure("weights other than 12 need --coeff-file")
        table = build_table(args.max_n)
    save_table(table, args.out)
    if args.csv:
        export_csv(table, args.csv)
    print(f"N={table.n_max} kappa={table.weight} checksum={table.checksum}")
    return args.out, table.checksum


def _eval_payload(args, table, table_path) -> dict:
    kappa = table.weight
    t, sigma = args.t, args.sigma
    s = complex(sigma, t)
    mu = MuExponent(args.mu_half)
    cal = _calibration(table_path, table)
    out = {"method": args.method, "sigma": _round15(sigma), "t": _round15(t), "kappa": kappa}

    if args.method == "direct":
        if sigma < 0.7:
            raise ValidationFailure(
                f"--method direct needs sigma >= 0.7 (the series tail bound fails below), got {sigma}"
            )
        dv = z_direct(s, table, cal.c_hat, cal.k_hat)
        out.update(value=_complex_json(dv.value), error_budget=_round15(dv.error_bound), n_terms=dv.n_terms)
        return out

    if t < 3.0:
        raise ValidationFailure(f"--method {args.method} needs t >= 3, got {t}")
    tau = tau_of_t(t, kappa)
    if args.x is not None:
        x = args.x
        y = tau / x
    else:
        y = math.sqrt(tau / args.split_ratio)
        x = tau / y
    out.update(x=_round15(x), y=_round15(y))

    if args.method == "smoothed":
        if sigma != 0.5:
            raise ValidationFailure("--method smoothed is defined on the critical line (sigma = 0.5) only")
        value = z_afe_smoothed(t, table, x=x, y=y, weight=SmoothWeight(args.b))
        sharp = z_afe(s, AfeConfig(x=x, y=y, c1=cal.c1, c2=cal.c2, extra_budget=cal.budget_inflation), table, mu)
        out.update(value=_complex_json(value), error_budget=_round15(sharp.error_budget))
        return out

    if not 0.0 <= sigma <= 1.0:
        raise ValidationFailure(f"--method sharp needs 0 <= sigma <= 1, got {sigma}")
    cfg = AfeConfig(x=x, y=y, c1=cal.c1, c2=cal.c2, extra_budget=cal.budget_inflation)
    br = z_afe(s, cfg, table, mu)
    out.update(
        sum_x=_complex_json(br.sum_x),
        sum_y=_complex_json(br.sum_y),
        corr_x=_complex_json(br.corr_x),
        corr_y=_complex_json(br.corr_y),
        value=_complex_json(br.value),
        error_budget=_round15(br.error_budget),
    )
    return out


def cmd_eval(args):
    path, table = _load(args)
    payload = _eval_payload(args, table, path)
    if args.json:
        text = _dump_json(payload)
    else:
        lines = []
        for k, v in payload.items():
            if isinstance(v, list):
                v = f"{fmt(v[0])} {'+' if v[1] >= 0 else '-'} {fmt(abs(v[1]))}i"
            elif isinstance(v, float):
                v = fmt(v)
            lines.append(f"{k}: {v}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return args.out, table.checksum


def cmd_hardy(args):
    if args.t_min < 3.0:
        raise ValidationFailure(f"--t-min must be at least 3, got {args.t_min}")
    if args.t_max <= args.t_min or args.step <= 0:
        raise ValidationFailure("need t_max > t_min and a positive step")
    path, table = _load(args)
    n = int(math.floor((args.t_max - args.t_min) / args.step + 1e-9))
    lines = [
        f"# rszeta-hardy t_min={fmt(args.t_min)} t_max={fmt(args.t_max)} step={fmt(args.step)} "
        f"constant={fmt(args.constant)} kappa={table.weight} N={table.n_max}",
        "t,value,imag_residue,error_budget",
    ]
    for k in range(n + 1):
        t = args.t_min + k * args.step
        pt = hardy_point(t, table, args.constant)
        lines.append(f"{fmt(t)},{fmt(pt.value)},{fmt(pt.imag_residue)},{fmt(pt.error_budget)}")
    if args.scan_zeros:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ZeroScanWarning)
            brackets = zero_scan(table, args.t_min, args.t_max, args.step, constant=args.constant)
        for w in caught:
            logger.warning("%s", w.message)
        lines.append("# zero brackets")
        lines.append("lo,hi")
        lines.extend(f"{fmt(lo)},{fmt(hi)}" for lo, hi in brackets)
    _emit("\n".join(lines) + "\n", args.out)
    return args.out, table.checksum


def cmd_experiment(args):
    path, table = _load(args)
    if args.kind == "delta":
        x_max = args.x_max or table.n_max
        if x_max > table.n_max:
            raise ValidationFailure(f"--x-max {x_max} exceeds table length {table.n_max}")
        cal = _calibration(path, table)
        report = delta_scan(table, default_x_grid(x_max, args.per_decade), cal.c_hat)
    else:
        if args.dt > 0.05:
            raise ValidationFailure(f"--dt {args.dt} exceeds 0.05")
        needed = int(math.floor((max(args.X) / (2 * math.pi)) ** 2 + 1))
        if needed > table.n_max:
            raise ValidationFailure(f"X={max(args.X)} needs a table of length {needed}")
        report = mean_value_scan(table, args.X, args.dt, args.t_cap, args.constant)
    _emit(report.to_csv(), args.out)
    return args.out, table.checksum


def cmd_calibrate(args):
    path, table = _load(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cal = calibrate_constants(table, args.t_grid, args.sigma, tied=not args.free_constants)
    for w in caught:
        logger.warning("%s", w.message)
    data = cal.to_dict()
    renamed = {"c_hat": "C_hat", "k_hat": "K_hat", "c1": "C1", "c2": "C2"}
    payload = {}
    for k, v in data.items():
        if isinstance(v, list):
            v = [_round15(x) for x in v]
        elif isinstance(v, float):
            v = _round15(v)
        payload[renamed.get(k, k)] = v
    _emit(_dump_json(payload), args.out)
    return args.out, table.checksum


# ---------------------------------------------------------------------------
# Parser


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rszeta", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"rszeta {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("coeffs", help="build or ingest a coefficient table")
    c.add_argument("--max-n", type=_positive_int)
    c.add_argument("--weight", type=int, default=DISCRIMINANT_WEIGHT)
    c.add_argument("--coeff-file")
    c.add_argument("--out", required=True)
    c.add_argument("--csv", help="also write a CSV export")
    c.set_defaults(func=cmd_coeffs)

    def with_table(sp):
        sp.add_argument("--table", help=f"coefficient table (overridden by ${TABLE_ENV})")
        sp.add_argument("--out")

    e = sub.add_parser("eval", help="evaluate Z(s)")
    e.add_argument("--t", type=float, required=True)
    e.add_argument("--sigma", type=float, default=0.5)
    e.add_argument("--method", choices=("sharp", "smoothed", "direct"), default="sharp")
    e.add_argument("--x", type=float)
    e.add_argument("--split-ratio", type=float, default=1.0)
    e.add_argument("--b", type=float, default=2.0, help="smooth cutoff edge")
    e.add_argument("--mu-half", type=float, default=32 / 205)
    e.add_argument("--json", action="store_true")
    with_table(e)
    e.set_defaults(func=cmd_eval)

    h = sub.add_parser("hardy", help="tabulate the Hardy-type function")
    h.add_argument("--t-min", type=float, required=True)
    h.add_argument("--t-max", type=float, required=True)
    h.add_argument("--step", type=float, default=0.05)
    h.add_argument("--constant", type=float, default=0.0, help="C1 = C2 used in the sums")
    h.add_argument("--scan-zeros", action="store_true")
    with_table(h)
    h.set_defaults(func=cmd_hardy)

    x = sub.add_parser("experiment", help="run a numerical experiment")
    x.add_argument("kind", choices=("delta", "meanvalue"))
    x.add_argument("--x-max", type=_positive_int)
    x.add_argument("--per-decade", type=_positive_int, default=10)
    x.add_argument("--X", type=float, nargs="+", default=[100.0, 200.0, 400.0])
    x.add_argument("--dt", type=float, default=0.05)
    x.add_argument("--t-cap", type=float, default=500.0)
    x.add_argument("--constant", type=float, default=0.0)
    with_table(x)
    x.set_defaults(func=cmd_experiment)

    k = sub.add_parser("calibrate", help="estimate C, K, C1, C2")
    k.add_argument("--sigma", type=float, default=0.9)
    k.add_argument("--t-grid", type=float, nargs="+", default=[10.0, 15.0, 20.0, 25.0, 30.0])
    k.add_argument("--free-constants", action="store_true")
    with_table(k)
    k.set_defaults(func=cmd_calibrate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    started = time.perf_counter()
    try:
        out, checksum = args.func(args)
    except (ValidationFailure, CoefficientError, EvaluationRangeError, TableLengthError, DomainError, ValueError) as exc:
        print(f"rszeta {args.command}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"rszeta {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    _write_manifest(_manifest(args, checksum, started), out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
