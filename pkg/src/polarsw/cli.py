"""Command-line front end: ``polarsw {construct,compress,decompress,simulate}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import NAME as BACKEND
from .polar_core import (DEFAULT_FIDELITY, SpecParseError, SpecValidationError,
                         construct_code, load_spec, save_spec, dumps_spec)
from .sim import (RNG_ALGORITHM, ThresholdAboveGrid, ThresholdBelowGrid, TrialConfig,
                  default_jobs, entropy_inverse, run_sweep, threshold_from_records)
from .systematic import SystematicSpec
from .sw import (LIST_SIZE, FrameError, RateSplit, asym_decode, compress_single,
                 decompress_single, nonasym_decode, nonasym_encode_x,
                 nonasym_encode_y, pack_stream, unpack_stream, EncodedX, EncodedY,
                 systematic_length)

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_CRC = 0, 1, 2, 3

CSV_COLUMNS = ["mode", "N", "K", "K1", "p", "h_cond", "blocks", "bit_errors_x",
               "bit_errors_y", "ber_avg", "block_errors", "crc_fails"]


class CliError(Exception):
    """Runtime failure reported with exit code 1."""


def _float_list(text):
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _build_parser():
    ap = argparse.ArgumentParser(prog="polarsw", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="construct a polar code for BSC(p)")
    c.add_argument("--n", type=int, required=True, help="log2 of the block length")
    size = c.add_mutually_exclusive_group(required=True)
    size.add_argument("--rate", type=float, help="code rate K/N")
    size.add_argument("--compression-rate", type=float,
                      help="syndrome rate (N-K)/N, i.e. 1 - code rate")
    size.add_argument("--K", type=int, help="code dimension")
    c.add_argument("--design-p", type=float, required=True)
    c.add_argument("--crc", choices=["none", "xmodem16"], default="none")
    c.add_argument("--fidelity", type=int, default=DEFAULT_FIDELITY)
    c.add_argument("--out", default="-", help="spec file (default: stdout)")

    m = sub.add_parser("compress", help="compress a bit file block by block")
    m.add_argument("--mode", required=True,
                   choices=["single", "asym", "nonasym-x", "nonasym-y"])
    m.add_argument("--spec", required=True)
    m.add_argument("--k1", type=int)
    m.add_argument("--in", dest="inp", required=True)
    m.add_argument("--out", required=True)

    d = sub.add_parser("decompress", help="reconstruct source file(s)")
    d.add_argument("--mode", required=True, choices=["single", "asym", "nonasym"])
    d.add_argument("--spec", required=True)
    d.add_argument("--p", type=float, required=True, help="BSC correlation parameter")
    d.add_argument("--in", dest="inp", help="compressed stream (single, asym)")
    d.add_argument("--side-info", help="side-information file (asym)")
    d.add_argument("--x", help="compressed X stream (nonasym)")
    d.add_argument("--y", help="compressed Y stream (nonasym)")
    d.add_argument("--out", help="reconstruction (single, asym)")
    d.add_argument("--out-x", help="X reconstruction (nonasym)")
    d.add_argument("--out-y", help="Y reconstruction (nonasym)")
    d.add_argument("--list-size", type=int, default=LIST_SIZE)

    s = sub.add_parser("simulate", help="Monte-Carlo BER sweep, CSV output")
    s.add_argument("--mode", required=True, choices=["single", "asym", "nonasym"])
    s.add_argument("--spec", required=True)
    s.add_argument("--k1", type=int)
    grid = s.add_mutually_exclusive_group(required=True)
    grid.add_argument("--p-list", type=_float_list)
    grid.add_argument("--h-list", type=_float_list, help="conditional entropies")
    s.add_argument("--target-errors", type=int, default=100)
    s.add_argument("--max-blocks", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threshold-ber", type=float)
    s.add_argument("--list-size", type=int, default=LIST_SIZE)
    s.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default: all CPUs)")
    s.add_argument("--out", default="-", help="CSV file (default: stdout)")
    return ap


# --- helpers ----------------------------------------------------------------

def _load_spec(path):
    try:
        return load_spec(path)
    except OSError as exc:
        raise CliError(f"cannot read spec {path}: {exc.strerror or exc}")
    except (SpecParseError, SpecValidationError) as exc:
        raise CliError(f"invalid spec {path}: {exc}")


def _read_bytes(path):
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}")


def _write_bytes(path, data):
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}")


def _read_blocks(path, spec):
    bits = np.unpackbits(np.frombuffer(_read_bytes(path), dtype=np.uint8))
    n = spec.payload_length
    if bits.size % n:
        raise CliError(f"{path}: {bits.size} bits is not a whole number of "
                       f"{n}-bit blocks (N - l_crc = {n})")
    return bits.reshape(-1, n)


def _pack_blocks(blocks, n):
    flat = np.concatenate(blocks) if blocks else np.zeros(0, dtype=np.uint8)
    # whole input files hold a multiple of 8 bits, so no padding appears here
    return np.packbits(flat).tobytes()


def _need(args, parser, mode, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        parser.error(f"mode {mode} requires {', '.join(missing)}")


# --- subcommands --------------------------------------------------------------

def cmd_construct(args, parser):
    N = 1 << args.n if 1 <= args.n <= 24 else None
    if N is None:
        parser.error("--n must lie in [1, 24]")
    if args.rate is not None:
        if not 0 < args.rate < 1:
            parser.error("--rate must lie in (0, 1)")
        K = round(args.rate * N)
    elif args.compression_rate is not None:
        if not 0 < args.compression_rate < 1:
            parser.error("--compression-rate must lie in (0, 1)")
        K = N - round(args.compression_rate * N)
    else:
        K = args.K
    if not 0 < K < N:
        parser.error(f"K={K} must satisfy 0 < K < N={N}")
    if not 0 < args.design_p < 0.5:
        parser.error("--design-p must lie in (0, 0.5)")
    if args.fidelity < 2:
        parser.error("--fidelity must be >= 2")
    l_crc = 16 if args.crc == "xmodem16" else 0
    spec = construct_code(args.n, K, args.design_p, args.fidelity, l_crc=l_crc)
    summary = (f"N={spec.N} K={spec.K} code_rate={spec.K / spec.N:g} "
               f"syndrome_rate={(spec.N - spec.K) / spec.N:g} "
               f"design_p={spec.design_p:g} l_crc={spec.l_crc}")
    if args.out == "-":
        sys.stdout.write(dumps_spec(spec))
        print(summary, file=sys.stderr)
    else:
        try:
            save_spec(spec, args.out)
        except OSError as exc:
            raise CliError(f"cannot write {args.out}: {exc.strerror or exc}")
        print(summary)
    return EXIT_OK


def _split(args, parser, spec):
    if args.k1 is None:
        parser.error(f"mode {args.mode} requires --k1")
    if not 0 <= args.k1 <= spec.K:
        parser.error(f"--k1 must lie in [0, K={spec.K}]")
    return RateSplit.from_k1(args.k1, spec)


def cmd_compress(args, parser):
    spec = _load_spec(args.spec)
    K1 = 0
    if args.mode.startswith("nonasym"):
        split = _split(args, parser, spec)
        K1 = split.K1
        sspec = SystematicSpec(spec)
    rows = _read_blocks(args.inp, spec)
    blocks = []
    for row in rows:
        if args.mode == "nonasym-x":
            e = nonasym_encode_x(row, split, sspec)
            blocks.append((e.xa1, e.s_x))
        elif args.mode == "nonasym-y":
            e = nonasym_encode_y(row, split, sspec)
            blocks.append((e.ya2, e.s_y))
        else:
            blocks.append((np.zeros(0, dtype=np.uint8), compress_single(row, spec)))
    data = pack_stream(args.mode, spec, K1, blocks)
    _write_bytes(args.out, data)
    sent = systematic_length(args.mode, K1, spec) + spec.N - spec.K
    print(f"blocks={len(blocks)} rate={sent / spec.N:g} bits per N "
          f"({sent / spec.payload_length:g} per payload bit), wrote {len(data)} bytes")
    return EXIT_OK


def _unpack(path, spec, mode):
    try:
        return unpack_stream(_read_bytes(path), spec, mode)
    except FrameError as exc:
        raise CliError(f"{path}: {exc}")


def cmd_decompress(args, parser):
    if not 0 < args.p < 0.5:
        parser.error("--p must lie in (0, 0.5)")
    if args.list_size < 1:
        parser.error("--list-size must be >= 1")
    if args.mode == "single":
        _need(args, parser, "single", "inp", "out")
    elif args.mode == "asym":
        _need(args, parser, "asym", "inp", "side_info", "out")
    else:
        _need(args, parser, "nonasym", "x", "y", "out_x", "out_y")
    spec = _load_spec(args.spec)
    L = args.list_size
    failed = 0
    if args.mode in ("single", "asym"):
        _, _, blocks = _unpack(args.inp, spec, args.mode)
        side = _read_blocks(args.side_info, spec) if args.mode == "asym" else None
        if side is not None and len(side) != len(blocks):
            raise CliError(f"side information has {len(side)} blocks, stream has {len(blocks)}")
        out = []
        for i, (_, syn) in enumerate(blocks):
            if side is None:
                xh, ok = decompress_single(syn, args.p, spec, L)
            else:
                xh, ok = asym_decode(syn, side[i], args.p, spec, L)
            failed += not ok
            out.append(xh)
        _write_bytes(args.out, _pack_blocks(out, spec.payload_length))
    else:
        _, k1x, bx = _unpack(args.x, spec, "nonasym-x")
        _, k1y, by = _unpack(args.y, spec, "nonasym-y")
        if k1x != k1y:
            raise CliError(f"streams disagree on K1 ({k1x} vs {k1y})")
        if len(bx) != len(by):
            raise CliError(f"streams hold {len(bx)} and {len(by)} blocks")
        split = RateSplit.from_k1(k1x, spec)
        sspec = SystematicSpec(spec)
        xs, ys = [], []
        for (xa1, sx), (ya2, sy) in zip(bx, by):
            est = nonasym_decode(EncodedX(xa1, sx), EncodedY(ya2, sy), split,
                                 args.p, sspec, L)
            failed += not est.crc_pass
            xs.append(est.x_hat)
            ys.append(est.y_hat)
        _write_bytes(args.out_x, _pack_blocks(xs, spec.payload_length))
        _write_bytes(args.out_y, _pack_blocks(ys, spec.payload_length))
    if failed:
        print(f"warning: {failed} block(s) failed the CRC check", file=sys.stderr)
        return EXIT_CRC
    return EXIT_OK


def _format_rows(records, spec, K1):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([r.mode, spec.N, spec.K, K1, f"{r.p:.10g}", f"{r.h_cond:.6f}",
                    r.blocks, r.bit_errors_x, r.bit_errors_y, f"{r.ber_avg:.6e}",
                    r.block_errors, r.crc_fail_count])
    return buf.getvalue()


def cmd_simulate(args, parser):
    spec = _load_spec(args.spec)
    split = None
    K1 = 0
    if args.mode == "nonasym":
        split = _split(args, parser, spec)
        K1 = split.K1
    elif args.k1 is not None:
        parser.error("--k1 applies to nonasym mode only")
    if args.h_list is not None:
        if any(not 0 < h < 1 for h in args.h_list):
            parser.error("--h-list values must lie in (0, 1)")
        p_list = [entropy_inverse(h) for h in args.h_list]
    else:
        p_list = args.p_list
    if any(not 0 < p < 0.5 for p in p_list):
        parser.error("p values must lie in (0, 0.5)")
    if p_list != sorted(p_list):
        parser.error("the sweep grid must be ascending")
    if args.max_blocks < 1 or args.target_errors < 1:
        parser.error("--max-blocks and --target-errors must be >= 1")
    jobs = args.jobs if args.jobs is not None else default_jobs()
    if jobs < 1:
        parser.error("--jobs must be >= 1")
    cfg = TrialConfig(mode=args.mode, spec=spec, p_list=tuple(p_list), split=split,
                      max_blocks=args.max_blocks, target_errors=args.target_errors,
                      seed=args.seed, list_size=args.list_size, jobs=jobs)
    print(f"rng: {RNG_ALGORITHM}, seed {args.seed}; kernels: {BACKEND}", file=sys.stderr)
    records = run_sweep(cfg)
    text = _format_rows(records, spec, K1)
    threshold = None
    if args.threshold_ber is not None:
        try:
            threshold = threshold_from_records(records, args.threshold_ber)
            text += f"threshold_ber={args.threshold_ber:g},threshold_h={threshold:.6f}\n"
        except ThresholdBelowGrid:
            text += f"threshold_ber={args.threshold_ber:g},threshold_h=below-grid\n"
        except ThresholdAboveGrid:
            text += f"threshold_ber={args.threshold_ber:g},threshold_h=above-grid\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        _write_bytes(args.out, text.encode())
        meta = {"rng": RNG_ALGORITHM, "seed": args.seed, "kernels": BACKEND,
                "version": __version__, "spec_digest": spec.digest().hex(),
                "target_errors": args.target_errors, "max_blocks": args.max_blocks,
                "list_size": args.list_size}
        _write_bytes(args.out + ".meta.json",
                     (json.dumps(meta, indent=2, sort_keys=True) + "\n").encode())
    return EXIT_OK


COMMANDS = {"construct": cmd_construct, "compress": cmd_compress,
            "decompress": cmd_decompress, "simulate": cmd_simulate}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    try:
        return COMMANDS[args.command](args, sub)
    except CliError as exc:
        print(f"polarsw {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
