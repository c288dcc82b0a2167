"""Command-line front end.

    ltcn analyze     TARGET --g ENV --f ENV -l L --Kmax K [--out report.json]
    ltcn approximate TARGET -l L -K K -M M [--out-net net.json] [--out-point point.json]
    ltcn verify      TARGET --mode jackson|bernstein --g ENV --f ENV -l L --grid 1..4x2..6
    ltcn eval        NET.json INPUT.json [-t T ...]
    ltcn spectrum    TARGET -l L -K K [--out-csv spectrum.csv]

TARGET is a spec string (``shift:3``, ``exp:0.5:256``, ``pow:1.0:512``,
``lowrank:2:3:2[:seed]``, ``file:kernel.json``) or a path to a kernel or
target-spec JSON file.  ENV is ``exp:<beta>``, ``pow:<alpha>``,
``table:<path.json>`` or ``fit``.

Exit status: 0 success / bounds hold, 1 a bound is violated, 2 usage or
input error (including infinite complexity constants).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings
from pathlib import Path

from . import __version__
from .bounds import (
    SWEEP_HEADER,
    InfiniteComplexityError,
    jackson_approximate,
    verify_bernstein,
    verify_jackson,
)
from .complexity import complexity_report, fit_f, fit_g, parse_envelope
from .hosvd import hosvd, spectrum
from .network import ConvNetParams, forward
from .sequence import FunctionalKernel, VectorSeq
from .targets import generate, load_kernel, parse_target
from .tensor import tensorize

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    """Malformed or inconsistent command-line input."""


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def write_atomic(path, text: str) -> str:
    """Write ``text`` to ``path`` via a temp file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return str(path)


def write_all(outputs) -> list:
    """Write ``(path, text)`` pairs whose text is already fully rendered."""
    return [write_atomic(path, text) for path, text in outputs if path]


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def parse_grid(text: str):
    """``"1..4x2..6"`` -> every ``(M, K)`` with ``M`` in 1..4 and ``K`` in 2..6."""
    try:
        m_part, k_part = text.lower().split("x")
        ranges = []
        for part in (m_part, k_part):
            lo, _, hi = part.partition("..")
            lo, hi = int(lo), int(hi or lo)
            if lo < 1 or hi < lo:
                raise ValueError
            ranges.append(range(lo, hi + 1))
    except ValueError:
        raise InputError(f"bad grid {text!r}; expected Mlo..MhixKlo..Khi, e.g. 1..4x2..6") from None
    return [(M, K) for K in ranges[1] for M in ranges[0]]


def load_target(text: str, d: int, seed: int) -> FunctionalKernel:
    if text.endswith(".json") and ":" not in text:
        return load_kernel(text)
    return generate(parse_target(text, d=d, seed=seed))


def resolve_envelopes(args, rho, K_max):
    if args.g == "fit":
        g = fit_g(rho, args.l, K_max)
    else:
        g = parse_envelope(args.g)
    if args.f == "fit":
        f = fit_f(rho, max(rho.horizon, args.l ** K_max))
    else:
        f = parse_envelope(args.f)
    return g, f


def _say(args, *parts, **kw):
    if not args.quiet:
        print(*parts, **kw)


def _report_written(args, paths):
    for p in paths:
        _say(args, f"wrote {p}")


def cmd_analyze(args) -> int:
    rho = load_target(args.target, args.dims, args.seed)
    g, f = resolve_envelopes(args, rho, args.Kmax)
    rep = complexity_report(rho, g, f, args.l, args.Kmax)
    written = write_all([
        (args.out, dump_json(rep.to_json())),
        (args.save_g, dump_json(g.to_json())),
        (args.save_f, dump_json(f.to_json())),
    ])
    s, K = rep.C1_witness
    _say(args, f"C1 = {fmt(rep.C1)}  (witness s={s}, K={K})")
    _say(args, f"C2 = {fmt(rep.C2)}  (witness s={rep.C2_witness})")
    _say(args, f"converged over K<= {rep.K_max}: {rep.converged}; "
               f"support stabilizes at K={rep.stabilization_K}")
    _report_written(args, written)
    return EXIT_OK


def cmd_approximate(args) -> int:
    if args.M > args.l ** args.K:
        raise InputError(f"M={args.M} exceeds the l**K={args.l ** args.K} available terms")
    rho = load_target(args.target, args.dims, args.seed)
    net, point = jackson_approximate(rho, args.l, args.K, args.M)
    written = write_all([
        (args.out_net, dump_json(net.to_json())),
        (args.out_point, dump_json(point.to_json())),
    ])
    _say(args, f"error_sq = {fmt(point.error_sq)}")
    _say(args, f"spectral_tail + memory_tail = {fmt(point.spectral_tail_val)} + "
               f"{fmt(point.memory_tail_val)}")
    _say(args, f"channels = {point.channels}")
    _report_written(args, written)
    return EXIT_OK


def cmd_verify(args) -> int:
    grid = parse_grid(args.grid)
    rho = load_target(args.target, args.dims, args.seed)
    K_max = max(K for _, K in grid)
    g, f = resolve_envelopes(args, rho, K_max)
    fitted = args.g == "fit" and args.f == "fit"
    if args.mode == "jackson":
        sweep = verify_jackson(rho, g, f, args.l, grid, threads=args.threads)
        rows, passed, report = sweep.rows(), sweep.passed, sweep.report
        extra = None
    else:
        verdict = verify_bernstein(rho, g, f, args.l, grid, threads=args.threads)
        for p in verdict.points:
            p.bound = verdict.report.C1 * g(p.M) + verdict.report.C2 * f(args.l ** p.K)
        rows, passed, report = [p.csv_row() for p in verdict.points], verdict.passed, verdict.report
        extra = verdict
    outputs = [(args.out_csv, csv_text(SWEEP_HEADER, rows))]
    if extra is not None:
        outputs.append((args.out_json, dump_json(extra.to_json())))
    written = write_all(outputs)
    if extra is not None:
        e = extra.estimate
        _say(args, f"A_est = {fmt(e.A_est)} (M={e.A_witness}), B_est = {fmt(e.B_est)} "
                   f"(K={e.B_witness}), floor = {fmt(e.floor)}")
        _say(args, f"C1 on grid = {fmt(extra.C1_grid)}, C2 on grid = {fmt(extra.C2_grid)}")
    _say(args, f"C1 = {fmt(report.C1)}, C2 = {fmt(report.C2)}, {len(rows)} grid points")
    _report_written(args, written)
    word = "verified" if fitted else "consistent with"
    _say(args, f"{args.mode}: " + (f"PASS ({word} the bound on this grid)" if passed else "FAIL"))
    return EXIT_OK if passed else EXIT_VIOLATION


def _load_input(path) -> VectorSeq:
    with open(path) as fh:
        obj = json.load(fh)
    if isinstance(obj, list):
        return VectorSeq(0, obj)
    return VectorSeq.from_json(obj)


def cmd_eval(args) -> int:
    with open(args.net) as fh:
        net = ConvNetParams.from_json(json.load(fh))
    x = _load_input(args.input)
    y = forward(net, x)
    times = args.t if args.t else range(y.start, y.end)
    lines = [f"{t},{fmt(y.at(t)[0])}" for t in times]
    print("\n".join(lines))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    rho = load_target(args.target, args.dims, args.seed)
    n = args.l ** args.K
    out = Path(args.out_csv) if args.out_csv else None
    header = ("rank", "magnitude", "signed_value", "multi_index")
    outputs, footers = [], []
    for j, row in enumerate(rho.padded(n)):
        sp = spectrum(hosvd(tensorize(row, args.l, args.K)))
        text = csv_text(header, sp.rows())
        if out is None:
            _say(args, text, end="")
        else:
            path = out if rho.d == 1 else out.with_name(f"{out.stem}.dim{j}{out.suffix}")
            outputs.append((path, text))
        footers.append(f"parseval dim={j}: sum magnitude^2 = {fmt(sp.tails()[0])}, "
                       f"restricted norm^2 = {fmt(row @ row)}")
    written = write_all(outputs)
    for line in footers:
        _say(args, line)
    _report_written(args, written)
    return EXIT_OK


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # Sub-commands repeat the global flags with SUPPRESS defaults so that a
    # value given before the sub-command is not reset by the sub-parser.
    def default(v):
        return argparse.SUPPRESS if suppress else v

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=default(0), help="seed for random targets")
    common.add_argument("--threads", type=int, default=default(1),
                        help="worker threads for sweeps")
    common.add_argument("--quiet", action="store_true", default=default(False),
                        help="suppress summaries and warnings")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)
    p = argparse.ArgumentParser(prog="ltcn", description=__doc__.split("\n\n")[0],
                                parents=[_global_flags(suppress=False)])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def target_cmd(name, help):
        sp = sub.add_parser(name, help=help, parents=[common])
        sp.add_argument("target")
        sp.add_argument("--dims", type=int, default=1, help="input dimension d of generated targets")
        sp.add_argument("-l", type=int, default=2, help="filter length")
        return sp

    a = target_cmd("analyze", "complexity constants C1, C2 of a target")
    a.add_argument("--g", required=True)
    a.add_argument("--f", required=True)
    a.add_argument("--Kmax", type=int, default=6)
    a.add_argument("--out")
    a.add_argument("--save-g", help="write the g envelope as JSON (usable as table:<path>)")
    a.add_argument("--save-f", help="write the f envelope as JSON (usable as table:<path>)")
    a.set_defaults(func=cmd_analyze)

    b = target_cmd("approximate", "build the optimal M-term, K-layer network")
    b.add_argument("-K", type=int, required=True)
    b.add_argument("-M", type=int, required=True)
    b.add_argument("--out-net")
    b.add_argument("--out-point")
    b.set_defaults(func=cmd_approximate)

    v = target_cmd("verify", "sweep a grid and check the forward or inverse bound")
    v.add_argument("--mode", choices=("jackson", "bernstein"), default="jackson")
    v.add_argument("--g", required=True)
    v.add_argument("--f", required=True)
    v.add_argument("--grid", required=True, help="e.g. 1..4x2..6 (M range x K range)")
    v.add_argument("--out-csv")
    v.add_argument("--out-json", help="bernstein mode: write the estimates as JSON")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("eval", help="run a saved network on an input sequence", parents=[common])
    e.add_argument("net")
    e.add_argument("input")
    e.add_argument("-t", type=int, nargs="+", help="times to report (default: whole output)")
    e.set_defaults(func=cmd_eval)

    s = target_cmd("spectrum", "HOSVD spectrum of the tensorized target")
    s.add_argument("-K", type=int, required=True)
    s.add_argument("--out-csv")
    s.set_defaults(func=cmd_spectrum)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "l", 2) < 2:
        parser.error("-l must be >= 2")
    with warnings.catch_warnings():
        if args.quiet:
            warnings.simplefilter("ignore")
        try:
            return args.func(args)
        except InfiniteComplexityError as exc:
            print(f"ltcn: {exc}", file=sys.stderr)
            return EXIT_INPUT
        except (InputError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
            print(f"ltcn: {exc}", file=sys.stderr)
            return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
