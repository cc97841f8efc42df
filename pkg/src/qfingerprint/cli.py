"""Command-line entry point.

Exit codes: 0 success, 2 input error, 3 consistency failure (a lower bound
above an upper bound), 4 no valid protocol found after re-seeding.

Every run writes a manifest (argv, parameters, seed, version, timestamps).
``qfingerprint replay MANIFEST`` re-executes the recorded argv; outputs never
contain timestamps, so a replay is byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import linalg as la
from .errors import (
    ConsistencyError,
    DegenerateWidth,
    DecompositionMismatch,
    DimensionMismatch,
    IndexOutOfRange,
    InvalidConfig,
    MatrixFormatError,
    NotSquare,
    ValidationExhausted,
)
from .fingerprint import alice_fingerprint_basic, bob_fingerprint_basic
from .referee import RefereeConfig, count_errors, cost_report, fingerprints
from .smp import (
    ClassicalSMP,
    CorrectnessThresholds,
    TargetFunction,
    accepting_coins,
    format_protocol,
    load_protocol,
    pad_to_square,
    validate,
)
from .width import (
    Decomposition,
    balance_decomposition,
    convw_to_rcw,
    cyclic_diagonal_decomposition,
    ip_lower_bound_check,
    svd_decomposition,
    trivial_decomposition,
    width_report,
)
from .zoo import (
    EqualityParams,
    build_equality_protocol,
    first_column_ones,
    ip_matrix,
    ip_signed_matrix,
    random_boolean_matrix,
    random_protocol,
)

EXIT_OK, EXIT_INPUT, EXIT_CONSISTENCY, EXIT_EXHAUSTED = 0, 2, 3, 4
INPUT_ERRORS = (
    MatrixFormatError,
    InvalidConfig,
    DimensionMismatch,
    IndexOutOfRange,
    NotSquare,
    DecompositionMismatch,
    DegenerateWidth,
    OSError,
)


class UsageError(Exception):
    pass


# -- helpers -----------------------------------------------------------------


def _eq_spec(text: str) -> tuple[int, int, int]:
    try:
        n, L, t = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("--eq expects n,L,t") from None
    return n, L, t


def _thresholds(args) -> CorrectnessThresholds:
    try:
        return CorrectnessThresholds(args.alpha0, args.alpha1)
    except ValueError as exc:
        raise InvalidConfig(str(exc)) from exc


def _load_protocol(args) -> tuple[ClassicalSMP, TargetFunction | None]:
    if args.protocol and args.eq:
        raise UsageError("give either --protocol or --eq, not both")
    if args.eq:
        n, L, t = args.eq
        p = build_equality_protocol(EqualityParams(n, L, t, args.seed), _thresholds(args))
        default = TargetFunction.equality(n)
    elif args.protocol:
        p = load_protocol(args.protocol)
        default = None
    else:
        raise UsageError("one of --protocol or --eq is required")
    fn = getattr(args, "function", None) or ("eq" if args.eq else "infer")
    if fn == "eq":
        return p, TargetFunction.equality(p.n)
    if fn == "ip":
        return p, TargetFunction(p.n, ip_matrix(p.n))
    if fn == "infer":
        return p, default
    return p, TargetFunction(p.n, la.load_matrix(fn, boolean=True))


def _resolve_mode(p: ClassicalSMP, mode: str):
    if mode == "basic":
        return "basic"
    kind, _, method = mode.partition(":")
    if kind != "decomp" or not method:
        raise InvalidConfig(f"--mode must be basic or decomp:METHOD, got {mode!r}")
    family = pad_to_square(p).referee
    if method == "trivial":
        return trivial_decomposition(family)
    if method == "svd":
        return svd_decomposition(family)
    if method == "balanced":
        return balance_decomposition(svd_decomposition(family))
    if method == "cyclic":
        if not (family == family[0]).all():
            raise InvalidConfig("decomp:cyclic needs all referee matrices to be equal")
        one = convw_to_rcw(family[0], cyclic_diagonal_decomposition(family[0]))
        tile = (p.L, 1, 1)
        return Decomposition(family, np.tile(one.E, tile), np.tile(one.F, tile), method="cyclic")
    if method == "best":
        rep = width_report(family)
        return rep.certificates[rep.best_method]
    raise InvalidConfig(f"unknown decomposition method {method!r}")


def _config(p, decomposition, args) -> RefereeConfig:
    th = _thresholds(args)
    if decomposition == "basic":
        return RefereeConfig.basic(p, th, args.delta, args.copies)
    return RefereeConfig.decomposition(decomposition, th, args.delta, args.copies)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


# -- commands ----------------------------------------------------------------


def cmd_analyze(args) -> str:
    D = la.load_matrix(args.matrix)
    la.require_square(D)
    report = width_report(D, balance_iters=args.balance_iters)
    refs = report.save_certificates(args.certificates) if args.certificates else None
    if args.json:
        return report.to_json(refs) + "\n"
    lines = [f"M = {report.M}", f"rank = {report.rank}"]
    lines += [f"  {name:<18} rcw <= {val:.10g}" for name, val in report.bounds.items()]
    lines += [
        f"sqrt(M)          = {report.sqrt_M_bound:.10g}",
        f"max column norm  = {report.column_norm_bound:.10g}",
        f"operator norm    = {report.operator_norm_bound:.10g}",
        f"trace-norm lower = {report.lower_bound_trace:.10g}",
        f"best upper       = {report.best_rcw_upper:.10g} ({report.best_method})",
    ]
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> str:
    p, f = _load_protocol(args)
    mode = _resolve_mode(p, args.mode)
    cfg = _config(p, mode, args)
    th = _thresholds(args)
    cost = cost_report(p, mode, cfg)
    counts = accepting_coins(p)
    if args.all_pairs:
        pairs = [(x, y) for x in range(p.num_inputs) for y in range(p.num_inputs)]
    else:
        if args.x is None or args.y is None:
            raise UsageError("give --x and --y, or --all-pairs")
        pairs = [(args.x, args.y)]

    rows = []
    for x, y in pairs:
        if not (0 <= x < p.num_inputs and 0 <= y < p.num_inputs):
            raise IndexOutOfRange(f"input pair ({x}, {y}) out of range")
        p_acc = int(counts[x, y]) / p.L
        if f is not None:
            fx = f(x, y)
        elif p_acc >= th.alpha1:
            fx = 1
        elif p_acc <= th.alpha0:
            fx = 0
        else:
            fx = None
        err = None
        if fx is not None:
            rng = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(x, y, 0)))
            err = count_errors(p, mode, x, y, fx, cfg, args.trials, rng) / args.trials
        rows.append(
            {
                "x": x,
                "y": y,
                "f": fx,
                "p_acc": p_acc,
                "copies": cost.copies,
                "empirical_error": err,
                "total_qubits": cost.total_qubits,
            }
        )
    if args.json:
        return json.dumps({"cost": cost.to_dict(), "rows": rows}, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    fields = ["x", "y", "f", "p_acc", "copies", "empirical_error", "total_qubits"]
    w.writerow(fields)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in fields])
    return buf.getvalue()


def cmd_fact1(args) -> str:
    rep = ip_lower_bound_check(args.n)
    width = width_report(ip_matrix(args.n))
    lower = rep.rcw_lower_bound
    ok = lower <= width.best_rcw_upper + 1e-6 and lower >= rep.sqrt_bound - 1e-6
    if not ok:
        raise ConsistencyError(f"lower {lower} vs upper {width.best_rcw_upper}")
    if args.json:
        out = rep.to_dict()
        out.update(best_rcw_upper=width.best_rcw_upper, best_method=width.best_method, status="PASS")
        return json.dumps(out, indent=2, sort_keys=True) + "\n"
    M = rep.M
    return "\n".join(
        [
            f"n = {rep.n}, M = {M}",
            f"(2D - J)^2 = M I          : {rep.signed_square_is_scaled_identity}",
            f"trace norm of 2D - J      = {rep.trace_norm_signed:.10g} (M^1.5 = {M**1.5:.10g})",
            f"trace norm of D           = {rep.trace_norm_ip:.10g} (>= {rep.trace_norm_ip_floor:.10g})",
            f"rcw lower bound trace/M   = {lower:.10g}",
            f"(sqrt(M) - 1) / 2         = {rep.sqrt_bound:.10g}",
            f"best rcw upper bound      = {width.best_rcw_upper:.10g} ({width.best_method})",
            "PASS",
        ]
    ) + "\n"


def cmd_validate(args) -> str:
    p, f = _load_protocol(args)
    if f is None:
        raise UsageError("validate needs a target: --eq, or --function eq|ip|FILE")
    return validate(p, f, _thresholds(args)).to_json() + "\n"


def cmd_make_matrix(args) -> str:
    kind = args.kind
    if kind in ("ip", "ip-signed"):
        if args.n is None:
            raise UsageError(f"{kind} needs --n")
        A = ip_matrix(args.n) if kind == "ip" else ip_signed_matrix(args.n)
    else:
        if args.size is None:
            raise UsageError(f"{kind} needs --size")
        if args.size < 1:
            raise InvalidConfig("--size must be positive")
        if kind == "identity":
            A = np.eye(args.size, dtype=int)
        elif kind == "ones":
            A = np.ones((args.size, args.size), dtype=int)
        elif kind == "first-column-ones":
            A = first_column_ones(args.size)
        else:
            A = random_boolean_matrix(args.size, args.density, args.seed)
    return la.format_matrix(A, comment=f"{kind} matrix")


def cmd_make_protocol(args) -> str:
    if args.eq:
        n, L, t = args.eq
        p = build_equality_protocol(EqualityParams(n, L, t, args.seed), _thresholds(args))
    elif args.random:
        n, L, cA, cB = args.random
        p = random_protocol(n, L, cA, cB, args.density, args.seed)
    else:
        raise UsageError("give --eq n,L,t or --random n,L,cA,cB")
    return format_protocol(p)


def cmd_fingerprint(args) -> str:
    p, _ = _load_protocol(args)
    mode = _resolve_mode(p, args.mode)
    if (args.x is None) == (args.y is None):
        raise UsageError("give exactly one of --x (Alice) or --y (Bob)")
    x = args.x if args.x is not None else 0
    y = args.y if args.y is not None else 0
    if mode == "basic":
        state = alice_fingerprint_basic(p, x) if args.x is not None else bob_fingerprint_basic(p, y)
    else:
        u, v = fingerprints(p, mode, x, y)
        state = u if args.x is not None else v
    who = f"alice x={x}" if args.x is not None else f"bob y={y}"
    lay = state.layout
    return state.to_text(
        comment=f"{who} mode={args.mode} layout flag={lay.flag_dim} coin={lay.coin_dim} "
        f"payload={lay.payload_dim}"
    )


# -- parser ------------------------------------------------------------------


def _add_output(sp, json_flag=True):
    if json_flag:
        sp.add_argument("--json", action="store_true", help="machine-readable JSON output")
    sp.add_argument("--out", help="write output to FILE instead of stdout")
    sp.add_argument("--manifest", help="manifest path (default: OUT.manifest.json, else stderr)")


def _add_protocol_source(sp):
    sp.add_argument("--protocol", help="protocol text file")
    sp.add_argument("--eq", type=_eq_spec, help="build the equality protocol n,L,t")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--alpha0", type=float, default=1 / 3)
    sp.add_argument("--alpha1", type=float, default=2 / 3)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfingerprint", description="Quantum fingerprints of SMP protocols and row-column width bounds.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("analyze", help="row-column width bounds for a matrix file")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--certificates", help="directory for certificate factor files")
    sp.add_argument("--balance-iters", type=int, default=50)
    _add_output(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("simulate", help="Monte-Carlo error rates of the quantum protocol")
    _add_protocol_source(sp)
    sp.add_argument("--function", help="target: eq, ip, infer, or a boolean matrix FILE")
    sp.add_argument("--mode", default="basic", help="basic | decomp:trivial|svd|balanced|cyclic|best")
    sp.add_argument("--x", type=int)
    sp.add_argument("--y", type=int)
    sp.add_argument("--all-pairs", action="store_true")
    sp.add_argument("--delta", type=float, default=0.25)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--copies", type=int, help="override the Hoeffding copy count")
    _add_output(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fact1", help="trace-norm lower bound for the inner-product matrix")
    sp.add_argument("--n", type=int, required=True)
    _add_output(sp)
    sp.set_defaults(func=cmd_fact1)

    sp = sub.add_parser("validate", help="check a protocol against its target function")
    _add_protocol_source(sp)
    sp.add_argument("--function", help="target: eq, ip, or a boolean matrix FILE")
    _add_output(sp, json_flag=False)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("make-matrix", help="write a zoo matrix in matrix text format")
    sp.add_argument(
        "kind", choices=["ip", "ip-signed", "identity", "ones", "first-column-ones", "random"]
    )
    sp.add_argument("--n", type=int)
    sp.add_argument("--size", type=int)
    sp.add_argument("--density", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=0)
    _add_output(sp, json_flag=False)
    sp.set_defaults(func=cmd_make_matrix)

    sp = sub.add_parser("make-protocol", help="write a zoo protocol in protocol text format")
    sp.add_argument("--eq", type=_eq_spec)
    sp.add_argument(
        "--random", type=lambda s: tuple(int(v) for v in s.split(",")), help="n,L,cA,cB"
    )
    sp.add_argument("--density", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--alpha0", type=float, default=1 / 3)
    sp.add_argument("--alpha1", type=float, default=2 / 3)
    _add_output(sp, json_flag=False)
    sp.set_defaults(func=cmd_make_protocol)

    sp = sub.add_parser("fingerprint", help="dump one fingerprint state as a dim x 1 matrix")
    _add_protocol_source(sp)
    sp.add_argument("--mode", default="basic")
    sp.add_argument("--x", type=int)
    sp.add_argument("--y", type=int)
    _add_output(sp, json_flag=False)
    sp.set_defaults(func=cmd_fingerprint)

    sp = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    sp.add_argument("manifest_file")
    sp.add_argument("--out", help="override the recorded output path")
    sp.set_defaults(func=None)
    return parser


def _drop_flag(argv: list[str], flag: str) -> list[str]:
    """Remove ``flag VALUE`` and ``flag=VALUE`` occurrences from an argv list."""
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == flag:
            skip = True
        elif not a.startswith(flag + "="):
            out.append(a)
    return out


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_manifest(args, argv, started):
    params = {k: v for k, v in vars(args).items() if k not in ("func", "manifest")}
    manifest = {
        "command": args.command,
        "argv": _drop_flag(argv, "--manifest"),
        "parameters": params,
        "seed": params.get("seed"),
        "tool_version": __version__,
        "started": started,
        "finished": _now(),
    }
    text = json.dumps(manifest, indent=2, sort_keys=True, default=list) + "\n"
    if args.manifest:
        Path(args.manifest).write_text(text)
    elif args.out:
        Path(args.out + ".manifest.json").write_text(text)
    else:
        sys.stderr.write(text)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "replay":
        try:
            manifest = json.loads(Path(args.manifest_file).read_text())
            recorded = list(manifest["argv"])
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: cannot read manifest: {exc}", file=sys.stderr)
            return EXIT_INPUT
        if args.out:
            recorded = _drop_flag(recorded, "--out") + ["--out", args.out]
        recorded += ["--manifest", str(Path(args.manifest_file).with_suffix(".replay.json"))]
        return main(recorded)

    started = _now()
    try:
        text = args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except ConsistencyError as exc:
        print(f"error: consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except ValidationExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    _write_manifest(args, argv, started)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
