"""Command-line entry point ``msnr-bss``.

Exit codes: 0 success, 1 usage error, 2 data or algorithm error.
"""

import argparse
import csv
import sys

from . import siggen
from .csvio import SignalFileError, format_float, load_signals, store_signals
from .evaluation import align
from .harness import StageError, SweepSpec, run_demo, run_sweep
from .linalg import NotPositiveDefiniteError
from .msnr import apply_demixing, solve_demixing

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _cmd_gen(args):
    if args.bits is not None:
        bits = siggen.as_bits(args.bits)
    else:
        bits = siggen.random_bits(args.random, args.seed)
    spec = siggen.ModulationSpec(args.modulation, args.sps, args.cycles, args.amp)
    store_signals(siggen.modulate(bits, spec), args.out)


def _cmd_demo(args):
    snr = None if args.no_noise else args.snr_db
    res = run_demo(args.seed, snr, args.ma_len, args.out_dir)
    print(f"mean_corr={res.report.mean_corr:.6f} "
          f"per_source={[round(float(c), 6) for c in res.report.per_source_corr]}")


def _cmd_separate(args):
    x = load_signals(args.input)
    sol = solve_demixing(x, args.ma_len)
    y = apply_demixing(sol.W, x)
    store_signals(y, args.output)
    rep = None
    if args.sources:
        s = load_signals(args.sources)
        rep = align(s, y)
    if args.report:
        # one row per output; match columns only when sources were given
        matched = {}
        if rep is not None:
            matched = {j: (i, rep.per_source_corr[i]) for i, j in enumerate(rep.assignment)}
        with open(args.report, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["output", "eigenvalue", "objective_db", "source", "abs_corr"])
            for j, (lam, obj) in enumerate(zip(sol.eigenvalues, sol.objective_db)):
                src, c = matched.get(j, ("", None))
                w.writerow([j, format_float(lam), format_float(obj), src,
                            "" if c is None else format_float(c)])
    if rep is not None:
        print(f"mean_corr={rep.mean_corr:.6f}")


def _cmd_sweep(args):
    spec = SweepSpec.from_json(args.config)
    if args.workers is not None:
        spec.workers = args.workers
    records = run_sweep(spec, args.out)
    bad = sum(r.status != "ok" for r in records)
    print(f"{len(records)} records written to {args.out} ({bad} failed cells)")


def build_parser():
    p = _Parser(prog="msnr-bss", description="Maximum-SNR blind source separation toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="modulate a bit stream into a signal CSV")
    g.add_argument("--modulation", choices=["qpsk", "ook"], required=True)
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--bits", help="bit string such as 0110")
    src.add_argument("--random", type=int, metavar="COUNT", help="draw COUNT random bits")
    g.add_argument("--sps", type=int, default=100, help="samples per symbol")
    g.add_argument("--cycles", type=int, default=4, help="carrier cycles per QPSK symbol")
    g.add_argument("--amp", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    d = sub.add_parser("demo", help="QPSK + OOK mixing and separation demo")
    d.add_argument("--seed", type=int, default=0)
    noise = d.add_mutually_exclusive_group()
    noise.add_argument("--snr-db", type=float, default=30.0)
    noise.add_argument("--no-noise", action="store_true")
    d.add_argument("--ma-len", type=int, default=7)
    d.add_argument("--out-dir", required=True)
    d.set_defaults(func=_cmd_demo)

    s = sub.add_parser("separate", help="separate mixtures stored in a CSV")
    s.add_argument("--input", required=True)
    s.add_argument("--ma-len", type=int, default=7)
    s.add_argument("--output", required=True)
    s.add_argument("--report")
    s.add_argument("--sources", help="true sources, for correlation scoring")
    s.set_defaults(func=_cmd_separate)

    w = sub.add_parser("sweep", help="run an (L, SNR) sweep from a JSON config")
    w.add_argument("--config", required=True)
    w.add_argument("--out", required=True)
    w.add_argument("--workers", type=int)
    w.set_defaults(func=_cmd_sweep)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (TypeError, KeyError) as exc:
        print(f"msnr-bss: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StageError, SignalFileError, NotPositiveDefiniteError, ValueError, OSError) as exc:
        print(f"msnr-bss: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
