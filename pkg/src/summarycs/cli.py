"""Command-line entry point: ``summarycs <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys

from . import bounds as bnd
from .basis_pursuit import solve_bp
from .codebook import complete_codebook, random_codebook
from .errors import CapacityError, InfeasibleError, InvalidArgument, IterationLimitError
from .harness import (
    ALGORITHMS,
    DEFAULT_THRESHOLD,
    DEFAULT_TRIALS,
    Runner,
    ingest_summaries,
    oversampling_curve,
    success_prob_curve,
    write_rows,
)
from .io import (
    codebook_to_json,
    load_codebook,
    load_signal,
    read_measurements,
    read_stacked,
    save_codebook,
    signal_to_json,
    write_measurements,
)
from .measurements import encode
from .mixmatch import StackedCodebook, decode_mm, encode_stacked
from .signal import EXACT, SparseSignal, ValueMode
from .ssii import DecodeLimits, decode_ssii


def _int_list(text: str) -> list[int]:
    """``"10,12,20-25"`` -> [10, 12, 20, 21, ..., 25]."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def _float_list(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="")


def _emit_json(obj, path=None):
    fh = _open_out(path)
    try:
        json.dump(obj, fh, indent=None)
        fh.write("\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


def cmd_gen_codebook(args):
    if args.kind == "complete":
        cb = complete_codebook(args.n, args.d)
    else:
        if args.m is None:
            raise InvalidArgument("--m is required for random codebooks")
        cb = random_codebook(args.n, args.d, args.m, args.seed, args.distinct)
    if args.out:
        save_codebook(cb, args.out)
    else:
        _emit_json(codebook_to_json(cb))
    return 0


def cmd_encode(args):
    sig = load_signal(args.signal)
    fh = _open_out(args.out)
    try:
        if args.stacked:
            stacked = StackedCodebook(load_codebook(args.codebook), complete_codebook(sig.n, 1))
            y = encode_stacked(sig, stacked)
            write_measurements(fh, [(1, y.y1), (2, y.y2)])
        else:
            write_measurements(fh, [(None, encode(sig, load_codebook(args.codebook)))])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_decode(args):
    cb = load_codebook(args.codebook) if args.codebook else None
    with open(args.measurements, newline="") as fh:
        if args.alg == "mm":
            y = read_stacked(fh, args.n, cb)
        else:
            y = read_measurements(fh, args.n, cb, args.allow_partial, args.tol)
    if args.alg == "ssii":
        result = decode_ssii(y, DecodeLimits(args.max_iterations))
        recovered, status = result.recovered, result.status_line()
    elif args.alg == "mm":
        result = decode_mm(y)
        recovered, status = result.recovered, result.status_line()
    else:
        if y.codebook.n > 12:
            raise CapacityError(
                f"basis pursuit builds the dense 2^n-column matrix; n={y.codebook.n} is too large "
                "(limit 12). Use --alg ssii or --alg mm instead."
            )
        recovered = solve_bp(y)
        status = "status=success iterations=1"
    _emit_json(signal_to_json(recovered), args.out)
    print(status, file=sys.stderr)
    return 0 if status.startswith("status=success") else 3


def _load_config(args, defaults: dict) -> dict:
    """Merge the optional JSON config file under explicit flags."""
    cfg = dict(defaults)
    if args.config:
        with open(args.config) as fh:
            cfg.update(json.load(fh))
    for key in defaults:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _runner(cfg) -> Runner:
    mode = EXACT if cfg["mode"] == "int" else ValueMode("real", cfg["tol"])
    return Runner(cfg["seed"], cfg["alg"], cfg["trials"], mode, cfg["workers"])


_EXPERIMENT_DEFAULTS = {
    "alg": "ssii",
    "trials": DEFAULT_TRIALS,
    "threshold": DEFAULT_THRESHOLD,
    "mode": "int",
    "tol": 1e-9,
    "workers": 1,
    "d": None,
    "k": None,
    "n": None,
    "M": None,
    "seed": None,
}


def _as_list(v, parse=_int_list):
    if v is None or isinstance(v, list):
        return v
    if isinstance(v, int):
        return [v]
    return parse(str(v))


def cmd_experiment(args):
    cfg = _load_config(args, _EXPERIMENT_DEFAULTS)
    if cfg["seed"] is None:
        raise InvalidArgument("--seed is mandatory for experiments (flag or config file)")
    for key in ("n", "k", "d", "M"):
        cfg[key] = _as_list(cfg[key])
    if not cfg["n"] or not cfg["k"]:
        raise InvalidArgument("--n and --k are required")
    runner = _runner(cfg)
    try:
        if args.kind == "oversampling":
            rows = oversampling_curve(runner, cfg["n"], cfg["k"], cfg["threshold"], cfg["d"])
        else:
            if not cfg["M"]:
                raise InvalidArgument("--M is required for success-prob")
            rows = []
            for n in cfg["n"]:
                rows.extend(success_prob_curve(runner, n, cfg["M"], cfg["k"], cfg["d"]))
    finally:
        runner.close()
    fh = _open_out(args.out)
    try:
        write_rows(fh, rows, timing=args.timing)
    finally:
        if fh is not sys.stdout:
            fh.close()
    bad = runner.unsound_total()
    if bad:
        print(f"error: {bad} successful decodes failed re-encoding", file=sys.stderr)
        return 4
    return 0


def cmd_bounds(args):
    if args.action == "grid":
        import csv

        fh = _open_out(args.out)
        writer = csv.writer(fh, lineterminator="\n")
        fields = None
        try:
            for n in _int_list(args.n):
                for d in _int_list(args.d):
                    if d > n:
                        continue
                    for m in _int_list(args.m):
                        for k in _int_list(args.k):
                            for a in _float_list(args.alpha):
                                for lam in _float_list(args.lam):
                                    rep = bnd.report(bnd.BoundParams(n, d, m, k, a, lam)).as_dict()
                                    if fields is None:
                                        fields = list(rep)
                                        writer.writerow(fields)
                                    writer.writerow(["" if rep[f] is None else repr(rep[f]) if isinstance(rep[f], float) else rep[f] for f in fields])
        finally:
            if fh is not sys.stdout:
                fh.close()
        return 0
    params = bnd.BoundParams(
        int(args.n), int(args.d), int(args.m), int(args.k), float(args.alpha), float(args.lam)
    )
    _emit_json(bnd.report(params).as_dict(), args.out)
    return 0


def cmd_ingest(args):
    with open(args.file, newline="") as fh:
        cb, y = ingest_summaries(fh, args.n, args.allow_partial, args.tol)
    if args.codebook_out:
        save_codebook(cb, args.codebook_out)
    missing = 0 if y.missing is None else int(y.missing.sum())
    summary = {"n": cb.n, "d": cb.d, "m": cb.m, "M": cb.rows, "mode": y.mode.kind, "missing_rows": missing}
    if args.decode:
        result = decode_ssii(y)
        summary["status"] = result.status
        summary["signal"] = signal_to_json(result.recovered)
    _emit_json(summary, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="summarycs",
        description="Summary-codebook compressed sensing: codebooks, encoders, decoders, bounds, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-codebook", help="write a complete or random codebook as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--kind", choices=["complete", "random"], default="random")
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--distinct", action="store_true", help="draw until m distinct subsets")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_codebook)

    p = sub.add_parser("encode", help="measure a signal JSON with a codebook JSON")
    p.add_argument("--signal", required=True)
    p.add_argument("--codebook", required=True)
    p.add_argument("--stacked", action="store_true",
                   help="append the complete width-1 block (for --alg mm), tagged with a part column")
    p.add_argument("--out")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="recover a signal from a measurement CSV")
    p.add_argument("--alg", choices=list(ALGORITHMS), default="ssii")
    p.add_argument("--measurements", required=True)
    p.add_argument("--codebook", help="codebook JSON (part 1 for mm); inferred from the CSV if omitted")
    p.add_argument("--n", type=int, help="label width when no codebook is given")
    p.add_argument("--allow-partial", action="store_true")
    p.add_argument("--tol", type=float, help="relative tolerance; forces real mode")
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("experiment", help="Monte-Carlo curves as CSV")
    p.add_argument("kind", choices=["oversampling", "success-prob"])
    p.add_argument("--config", help="JSON file with any of the flag names as keys")
    p.add_argument("--seed", type=int)
    p.add_argument("--alg", choices=list(ALGORITHMS))
    p.add_argument("--n", help="bit counts, e.g. 10,15-25")
    p.add_argument("--k", help="sparsity levels")
    p.add_argument("--d", help="summary widths (default: automatic range)")
    p.add_argument("--M", help="measurement budgets (success-prob)")
    p.add_argument("--trials", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--mode", choices=["int", "real"])
    p.add_argument("--tol", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--timing", action="store_true", help="fill the seconds column")
    p.add_argument("--out")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bounds", help="guarantee formulas as JSON, or a CSV grid")
    p.add_argument("action", nargs="?", choices=["report", "grid"], default="report")
    p.add_argument("--n", required=True)
    p.add_argument("--d", required=True)
    p.add_argument("--m", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--alpha", default=str(bnd.DEFAULT_ALPHA))
    p.add_argument("--lambda", dest="lam", default=str(bnd.DEFAULT_LAMBDA))
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("ingest", help="load externally supplied summaries")
    p.add_argument("file")
    p.add_argument("--n", type=int)
    p.add_argument("--allow-partial", action="store_true")
    p.add_argument("--tol", type=float)
    p.add_argument("--codebook-out")
    p.add_argument("--decode", action="store_true", help="also run SSII on the ingested vector")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidArgument, CapacityError, InfeasibleError, IterationLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
