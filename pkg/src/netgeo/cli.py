"""Command-line interface.

    netgeo entropy GRAPH        volume and entropy of one network
    netgeo table --n N          k-simplex table for k = 0..N-1
    netgeo kappa --n N          calibrate (or look up) the normalization constant
    netgeo verify               run the numerical verification suites
    netgeo iso-check A B        isomorphism search plus entropy comparison

Exit codes: 0 ok, 1 verification failure, 2 parse error, 3 numerical
failure, 4 size bound exceeded.
"""
import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import replace

from . import checks, fisher, graph, linalg, lowdim, volume

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_NUMERIC, EXIT_BOUND = 0, 1, 2, 3, 4

DEFAULT_SAMPLES = 20_000_000
DEFAULT_VERIFY_SAMPLES = 1_000_000
DEFAULT_SEED = 42

RESULT_FIELDS = (
    "network", "n", "kappa", "volume", "volume_stderr", "entropy",
    "entropy_stderr", "log_base", "samples", "accepted_fraction", "seed",
)

log = logging.getLogger("netgeo")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output formatting


def _json_value(v):
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            return json.dumps(str(v))
        return format(v, ".17g")
    if isinstance(v, int):
        return str(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    return json.dumps(str(v))


def format_json(obj):
    """JSON with floats at 17 significant digits; lists of records one per line."""
    if isinstance(obj, list):
        return "[\n" + ",\n".join("  " + _json_value(r) for r in obj) + "\n]\n"
    return _json_value(obj) + "\n"


def _csv_value(v):
    if isinstance(v, float):
        return format(v, ".6g")
    return str(v)


def format_csv(records, fields):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in records:
        w.writerow([_csv_value(r[f]) for f in fields])
    return buf.getvalue()


def format_plain(records, fields):
    out = []
    for r in records:
        out.extend(f"{f}: {_csv_value(r[f])}" for f in fields)
        out.append("")
    return "\n".join(out)


def _record(name, n, est, ent, cfg):
    return {
        "network": name,
        "n": n,
        "kappa": float(est.kappa_used),
        "volume": float(est.value),
        "volume_stderr": float(est.stderr),
        "entropy": float(ent.entropy) if ent else math.nan,
        "entropy_stderr": float(ent.entropy_stderr) if ent else math.nan,
        "log_base": volume.LogBase(ent.log_base).value if ent else "",
        "samples": int(est.samples_total),
        "accepted_fraction": float(est.accepted_fraction),
        "seed": int(cfg.seed),
    }


def _emit(records, fields, fmt, single=False):
    if fmt == "json":
        sys.stdout.write(format_json(records[0] if single else records))
    elif fmt == "csv":
        sys.stdout.write(format_csv(records, fields))
    else:
        sys.stdout.write(format_plain(records, fields))


# ---------------------------------------------------------------------------
# configuration


def kappa_cache_path(flag):
    """--kappa-cache wins over NETGEO_KAPPA_CACHE, which wins over the default."""
    if flag:
        return flag
    env = os.environ.get("NETGEO_KAPPA_CACHE")
    if env:
        return env
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return os.path.join(base, "netgeo", "kappa.txt")


def _mc_config(args, default_samples):
    samples = args.samples if args.samples is not None else default_samples
    if samples < 2:
        raise UsageError("--samples must be at least 2")
    return volume.McConfig(samples=samples, seed=args.seed, sampler=args.sampler)


def _log_base(args):
    return volume.LogBase(args.log_base)


def _read_network(path, fmt):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise graph.NetworkParseError(f"{path}: {exc.strerror}") from None
    try:
        return graph.parse_network(text, fmt)
    except graph.NetworkParseError as exc:
        raise graph.NetworkParseError(f"{path}: {exc}") from None


def _kappa(n, cfg, args):
    cache = volume.KappaCache(kappa_cache_path(args.kappa_cache))
    if cache.rejected:
        log.warning("rejected corrupt kappa cache %s; recalibrating", cache.path)
    return volume.get_kappa(n, cfg, cache=cache, recalibrate=args.recalibrate, threads=args.threads)


# ---------------------------------------------------------------------------
# commands


def run_entropy(args):
    net = _read_network(args.graph, args.graph_format)
    cfg = _mc_config(args, DEFAULT_SAMPLES)
    rec = _kappa(net.n, cfg, args)
    # a seed distinct from the calibration stream
    est = volume.estimate_volume(net, rec.kappa, replace(cfg, seed=volume.row_seed(cfg.seed, -1)), threads=args.threads)
    ent = volume.entropy(est, _log_base(args))
    record = _record(args.graph, net.n, est, ent, cfg)
    _emit([record], RESULT_FIELDS, args.format, single=True)
    return EXIT_OK


def run_table(args):
    if args.n is None or args.n < 1:
        raise UsageError("table needs --n >= 1")
    cfg = _mc_config(args, DEFAULT_SAMPLES)
    rec = _kappa(args.n, cfg, args)
    rows = volume.simplex_table(args.n, cfg, base=_log_base(args), kappa=rec, threads=args.threads)
    records = []
    for r in rows:
        d = {"k": r.k}
        d.update(_record(f"{r.k}-simplex", args.n, r.volume, r.entropy, cfg))
        records.append(d)
    if args.format != "plain":
        _emit(records, ("k",) + RESULT_FIELDS, args.format)
        return EXIT_OK
    print(f"# n={args.n} kappa={rec.kappa:.6g} samples={cfg.samples} seed={cfg.seed} log_base={_log_base(args).value}")
    print(f"# {'k':>2} {'volume':>10} {'stderr':>10} {'entropy':>10} {'stderr':>10}")
    for r in rows:
        print(f"  {r.k:>2} {r.volume.value:10.6f} {r.volume.stderr:10.2e} "
              f"{r.entropy.entropy:10.6f} {r.entropy.entropy_stderr:10.2e}")
    # two-column block for plotting
    print("\n# k entropy")
    for r in rows:
        print(f"{r.k} {r.entropy.entropy:.6g}")
    return EXIT_OK


def run_kappa(args):
    if args.n is None or args.n < 1:
        raise UsageError("kappa needs --n >= 1")
    cfg = _mc_config(args, DEFAULT_SAMPLES)
    rec = _kappa(args.n, cfg, args)
    d = {"n": rec.n, "kappa": rec.kappa, "kappa_stderr": rec.kappa_stderr, "samples": rec.samples, "seed": rec.seed}
    _emit([d], tuple(d), args.format, single=True)
    return EXIT_OK


def run_verify(args):
    cfg = _mc_config(args, DEFAULT_VERIFY_SAMPLES)
    cache = volume.KappaCache(kappa_cache_path(args.kappa_cache))
    if cache.rejected:
        print(f"note: kappa cache {cache.path} rejected as corrupt; recalibrating", file=sys.stderr)
    failed = False
    for check in checks.run_all(cfg, cache=cache, recalibrate=args.recalibrate, threads=args.threads):
        print(check.line(), flush=True)
        failed |= check.status == checks.FAIL
    return EXIT_VERIFY if failed else EXIT_OK


def run_iso_check(args):
    a = _read_network(args.graph_a, args.graph_format)
    b = _read_network(args.graph_b, args.graph_format)
    p = graph.find_isomorphism_bruteforce(a, b) if a.n == b.n else None
    if p is None:
        result = {"isomorphic": False}
        if args.format == "json":
            sys.stdout.write(format_json(result))
        else:
            print("not isomorphic")
        return EXIT_OK
    cfg = _mc_config(args, DEFAULT_VERIFY_SAMPLES)
    rec = _kappa(a.n, cfg, args)
    base = _log_base(args)
    ests = [
        volume.estimate_volume(net, rec.kappa, replace(cfg, seed=volume.row_seed(cfg.seed, 100 + i)), threads=args.threads)
        for i, net in enumerate((a, b))
    ]
    ents = [volume.entropy(e, base) for e in ests]
    sig = math.hypot(ents[0].entropy_stderr, ents[1].entropy_stderr)
    z = abs(ents[0].entropy - ents[1].entropy) / sig if sig > 0 else 0.0
    result = {
        "isomorphic": True,
        "permutation": list(p.mapping),
        "entropy_a": ents[0].entropy,
        "entropy_a_stderr": ents[0].entropy_stderr,
        "entropy_b": ents[1].entropy,
        "entropy_b_stderr": ents[1].entropy_stderr,
        "sigmas": z,
        "log_base": base.value,
    }
    if args.format == "json":
        sys.stdout.write(format_json(result))
    else:
        print(f"isomorphic via {' '.join(map(str, p.mapping))}")
        print(f"entropy A {ents[0].entropy:.6g} +- {ents[0].entropy_stderr:.2g}")
        print(f"entropy B {ents[1].entropy:.6g} +- {ents[1].entropy_stderr:.2g}")
        print(f"agreement {z:.2f} sigma")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--samples", type=int, default=None,
                        help=f"Monte Carlo proposals (default {DEFAULT_SAMPLES}, verify/iso-check {DEFAULT_VERIFY_SAMPLES})")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--sampler", choices=["mc", "qmc"], default="mc")
    common.add_argument("--log-base", choices=["2", "e"], default="2")
    common.add_argument("--format", choices=["json", "csv", "plain"], default="json")
    common.add_argument("--kappa-cache", metavar="PATH", default=None)
    common.add_argument("--recalibrate", action="store_true")
    common.add_argument("--threads", type=int, default=1, metavar="K")
    common.add_argument("--graph-format", choices=["edge-list", "adjacency-matrix"], default="edge-list")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="netgeo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("entropy", parents=[common], help="entropy of one network")
    p.add_argument("graph")
    p.set_defaults(func=run_entropy)
    p = sub.add_parser("table", parents=[common], help="k-simplex volume/entropy table")
    p.add_argument("--n", type=int)
    p.set_defaults(func=run_table)
    p = sub.add_parser("kappa", parents=[common], help="normalization constant for n vertices")
    p.add_argument("--n", type=int)
    p.set_defaults(func=run_kappa)
    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.set_defaults(func=run_verify)
    p = sub.add_parser("iso-check", parents=[common], help="isomorphism search and entropy comparison")
    p.add_argument("graph_a")
    p.add_argument("graph_b")
    p.set_defaults(func=run_iso_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        args.threads = 1
    try:
        return args.func(args)
    except graph.NetworkParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except graph.SearchBoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (volume.VolumeError, linalg.NotPositiveDefiniteError, linalg.SingularMatrixError,
            fisher.AdjugateSignError, lowdim.QuadratureError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
