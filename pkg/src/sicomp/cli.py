"""Command-line front end: ``sicomp <subcommand> ...``.

Failures print one line ``ERR_<CODE>: message`` to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import gel_codec, hash_side_info, rates

EXIT_CODES = {
    "USAGE": 2,
    "DOMAIN": 3,
    "DESIGN": 4,
    "IO": 5,
    "LENGTH": 6,
    "PAYLOAD": 7,
    "DECODE": 8,
}


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("USAGE", message)


def _fraction(text: str) -> Fraction:
    try:
        return gel_codec.parse_fraction(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError("IO", f"cannot read {path}: {exc.strerror}") from exc


def _write(path: str | None, data: bytes | str) -> None:
    if path is None or path == "-":
        if isinstance(data, bytes):
            sys.stdout.buffer.write(data)
        else:
            sys.stdout.write(data)
        return
    try:
        Path(path).write_bytes(data if isinstance(data, bytes) else data.encode())
    except OSError as exc:
        raise CliError("IO", f"cannot write {path}: {exc.strerror}") from exc


def bytes_to_bits(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def bits_to_bytes(bits: np.ndarray) -> bytes:
    return np.packbits(bits).tobytes()


def _design(n: int, args) -> gel_codec.DesignedScheme:
    try:
        params = gel_codec.SchemeParams(n, args.k, args.m, args.p, args.variant)
    except gel_codec.DesignError as exc:
        raise CliError("DOMAIN", str(exc)) from exc
    try:
        return gel_codec.design(params)
    except gel_codec.DesignError as exc:
        raise CliError("DESIGN", str(exc)) from exc


def _format_report(s: dict) -> str:
    lines = [
        f"variant {s['variant']}  n={s['n']} (padded {s['padded_n']})  k={s['k']}  t={s['t']}  m={s['m']}  p={s['p']}  E={s['budget']}",
        f"target distances d_i : {', '.join(f'{d:.4f}' for d in s['target_distances']) or '-'}",
        f"realized distances    : {', '.join('inf' if d is None else str(d) for d in s['distances'])}",
        f"r_i                   : {', '.join(map(str, s['r']))}",
        f"r~_i                  : {', '.join(map(str, s['r_tilde']))}",
        f"delta_i (i>=2)        : {', '.join(map(str, s['delta'])) or '-'}",
        f"rho_i (i>=2)          : {', '.join(map(str, s['rho'])) or '-'}",
        f"outer fields          : {', '.join(s['fields']) or '-'}",
        f"payload body          : {s['body_bits']} bits ({-(-s['body_bits'] // 8)} bytes + {gel_codec.HEADER_SIZE}-byte header)",
        f"realized rate         : {s['rate']:.6f}",
    ]
    return "\n".join(lines) + "\n"


def cmd_design(args) -> int:
    scheme = _design(args.n, args)
    summary = scheme.summary()
    if args.m == 1 and args.variant != "baseline":
        print("warning: m=1 sends the full block syndrome, rate 1.0", file=sys.stderr)
    sys.stdout.write(_format_report(summary))
    if args.out:
        _write(args.out, json.dumps(summary, indent=2) + "\n")
    return 0


def cmd_compress(args) -> int:
    data = _read(args.input)
    if not data:
        raise CliError("LENGTH", "input file is empty")
    y = bytes_to_bits(data)
    scheme = _design(len(y), args)
    payload = gel_codec.gel_encode(y, scheme)
    _write(args.out, gel_codec.payload_serialize(payload, scheme))
    return 0


def cmd_decompress(args) -> int:
    blob = _read(args.payload)
    try:
        params = gel_codec.parse_header(blob)
        scheme = gel_codec.design(params)
        payload = gel_codec.payload_parse(blob, scheme)
    except gel_codec.PayloadFormatError as exc:
        raise CliError("PAYLOAD", str(exc)) from exc
    except gel_codec.DesignError as exc:
        raise CliError("PAYLOAD", f"header describes an infeasible scheme: {exc}") from exc
    ref = _read(args.reference)
    if 8 * len(ref) != params.n:
        raise CliError("LENGTH", f"reference has {8 * len(ref)} bits, payload encodes {params.n}")
    try:
        y = gel_codec.gel_decode(payload, bytes_to_bits(ref), scheme)
    except gel_codec.DecodingError as exc:
        raise CliError("DECODE", str(exc)) from exc
    _write(args.out, bits_to_bytes(y))
    return 0


def cmd_rate(args) -> int:
    try:
        grid = rates.parse_grid(args.grid)
        variants = ("gel4", "gel5") if args.variant == "both" else (args.variant,)
        curves = [rates.emit_curve(v, args.m, grid) for v in variants]
    except ValueError as exc:
        raise CliError("DOMAIN", str(exc)) from exc
    if args.out in (None, "-"):
        rates.write_curves_csv(curves, sys.stdout)
    else:
        try:
            with open(args.out, "w", newline="") as fh:
                rates.write_curves_csv(curves, fh)
        except OSError as exc:
            raise CliError("IO", f"cannot write {args.out}: {exc.strerror}") from exc
    return 0


def cmd_pspread(args) -> int:
    try:
        Z = hash_side_info.ReferenceSet.from_file(args.zfile)
    except OSError as exc:
        raise CliError("IO", f"cannot read {args.zfile}: {exc.strerror}") from exc
    except ValueError as exc:
        raise CliError("DOMAIN", str(exc)) from exc
    D = hash_side_info.d_p(Z, args.p)
    pp = hash_side_info.p_spread(Z, args.p)
    print(f"n={Z.n} M={len(Z)} p={args.p} D_p={D} p'={pp} ({float(pp):.6g})")
    return 0


def cmd_simulate_hash(args) -> int:
    if args.n is None:
        raise CliError("USAGE", "simulate-hash requires --n")
    seeds = range(args.seed, args.seed + args.trials)
    try:
        rows = hash_side_info.simulate_hash(
            args.construction, args.n, args.p, seeds,
            clusters=args.clusters, per_cluster=args.per_cluster, epsilon=args.epsilon,
        )
    except ValueError as exc:
        raise CliError("DOMAIN", str(exc)) from exc
    if args.out in (None, "-"):
        hash_side_info.write_simulation_csv(rows, sys.stdout)
    else:
        try:
            with open(args.out, "w", newline="") as fh:
                hash_side_info.write_simulation_csv(rows, fh)
        except OSError as exc:
            raise CliError("IO", f"cannot write {args.out}: {exc.strerror}") from exc
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sicomp", description="Compression with a Hamming-close reference at the decoder.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def scheme_flags(sp, need_n: bool = False):
        sp.add_argument("--k", type=int, default=15, help="inner block length (7, 15, 31 or 63)")
        sp.add_argument("--m", type=int, default=2, help="number of levels")
        sp.add_argument("--p", type=_fraction, required=True, help="distance fraction as NUM/DEN")
        sp.add_argument("--variant", choices=gel_codec.VARIANTS, default="gel5")
        if need_n:
            sp.add_argument("--n", type=int, required=True, help="input length in bits")

    sp = sub.add_parser("design", help="report the code parameters for a configuration")
    scheme_flags(sp, need_n=True)
    sp.add_argument("--out", help="also write the report as JSON here")
    sp.set_defaults(func=cmd_design)

    sp = sub.add_parser("compress", help="compress a file (its bits are read MSB first)")
    sp.add_argument("input")
    scheme_flags(sp)
    sp.add_argument("--out", help="payload path (default stdout)")
    sp.set_defaults(func=cmd_compress)

    sp = sub.add_parser("decompress", help="rebuild a file from its payload and a reference file")
    sp.add_argument("payload")
    sp.add_argument("reference")
    sp.add_argument("--out", help="output path (default stdout)")
    sp.set_defaults(func=cmd_decompress)

    sp = sub.add_parser("rate", help="asymptotic rate curves as CSV")
    sp.add_argument("--variant", choices=("gel4", "gel5", "both"), default="both")
    sp.add_argument("--m", type=int, default=20000)
    sp.add_argument("--grid", default="0:0.0025:101", help="START:STOP:COUNT")
    sp.add_argument("--out", help="CSV path (default stdout)")
    sp.set_defaults(func=cmd_rate)

    sp = sub.add_parser("pspread", help="spread parameter of a reference-set file")
    sp.add_argument("zfile")
    sp.add_argument("--p", type=_fraction, required=True)
    sp.set_defaults(func=cmd_pspread)

    sp = sub.add_parser("simulate-hash", help="seeded runs of the hashing schemes as CSV")
    sp.add_argument("--construction", type=int, choices=(1, 2), default=1)
    sp.add_argument("--n", type=int)
    sp.add_argument("--p", type=_fraction, required=True)
    sp.add_argument("--seed", type=int, default=0, help="first seed; runs use seed, seed+1, ...")
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--epsilon", type=float, default=hash_side_info.DEFAULT_EPSILON)
    sp.add_argument("--clusters", type=int, default=2)
    sp.add_argument("--per-cluster", type=int, default=4)
    sp.add_argument("--out", help="CSV path (default stdout)")
    sp.set_defaults(func=cmd_simulate_hash)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        msg = " ".join(str(exc).split())
        print(f"ERR_{exc.code}: {msg}", file=sys.stderr)
        return EXIT_CODES[exc.code]


if __name__ == "__main__":
    sys.exit(main())
