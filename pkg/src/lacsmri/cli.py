"""Command-line front end.

Exit status: 0 on success, 2 for configuration errors, 3 for runtime errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import bench
from .errors import ConfigError, LacsError
from .model import ExperimentConfig, LinePdf, load_config, validate_config
from .phantom import PhantomSpec, Tumor, brain_like, default_tumor, shepp_logan
from .sampling import pdf_a, pdf_r, pdf_vd, pdf_vds
from .transforms import fft2_centered

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _floats(text):
    """``a,b,c`` or an inclusive ``start:stop:step`` range."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            return bench.eta_grid(start, stop, step)
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _tumor(text):
    try:
        row, col, radius, delta = text.split(",")
        return Tumor(int(row), int(col), float(radius), float(delta))
    except ValueError:
        raise argparse.ArgumentTypeError("tumor is row,col,radius,delta") from None


def _common(p):
    p.add_argument("--config", help="key=value experiment file")
    p.add_argument("--seed", type=int, help="base seed (trial t uses seed + t)")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--ref", help="reference image, binary PGM")
    p.add_argument("--follow", help="follow-up image, binary PGM")
    p.add_argument("--trials", type=int, help="trials per data point")
    p.add_argument("--image", choices=("phantom", "brain"), default="phantom",
                   help="built-in test image when --ref/--follow are absent")
    p.add_argument("--n", type=int, default=None, help="built-in image size")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lacsmri", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run-case", help="run one case and write the per-round trace")
    _common(p)
    p.add_argument("--case", type=int, dest="case_id")
    p.add_argument("--eta", type=float)

    p = sub.add_parser("sweep-eta", help="mean RSNR per case and compression level")
    _common(p)
    p.add_argument("--cases", type=_ints, default=[1])
    p.add_argument("--etas", type=_floats, default=bench.eta_grid(0.03, 0.21, 0.03))

    p = sub.add_parser("sweep-p-c", help="variable-density exponent/cap sweep")
    _common(p)
    p.add_argument("--p-range", type=_floats, default=bench.eta_grid(0.1, 1.5, 0.1))
    p.add_argument("--c-list", type=_floats, default=[1.0, 0.1, 0.01, 0.001])
    p.add_argument("--case", type=int, dest="case_id", default=4)
    p.add_argument("--eta", type=float, default=0.06)

    p = sub.add_parser("sweep-grayscale", help="scale-corrected vs uncorrected")
    _common(p)
    p.add_argument("--c-list", type=_floats, default=bench.eta_grid(0.25, 2.5, 0.25))
    p.add_argument("--etas", type=_floats, default=[0.15])

    p = sub.add_parser("gen-phantom", help="write reference/follow-up PGM pair")
    p.add_argument("--ref", required=True, help="output path for the reference")
    p.add_argument("--follow", required=True, help="output path for the follow-up")
    p.add_argument("--image", choices=("phantom", "brain"), default="phantom")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--tumor", type=_tumor, help="row,col,radius,delta")
    p.add_argument("--no-tumor", action="store_true")
    p.add_argument("--seed", type=int, default=0, help="texture seed for --image brain")
    p.add_argument("--bits", type=int, choices=(8, 16), default=16)
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("pdf-dump", help="write a line density as ky,prob CSV")
    p.add_argument("density", choices=("vd", "vds", "r", "a", "uniform"))
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--ref", help="reference PGM (default: built-in phantom)")
    p.add_argument("--sparsifier", choices=("wavelet", "gradient"), default="wavelet")
    p.add_argument("--out")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    for name in ("seed", "trials", "case_id", "eta"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    cfg = cfg.replace(**overrides)
    validate_config(cfg)
    return cfg


def _images(args):
    if bool(args.ref) != bool(args.follow):
        raise ConfigError("--ref and --follow must be given together", field="ref")
    if args.ref:
        return bench.load_image(args.ref), bench.load_image(args.follow)
    if args.image == "brain":
        return brain_like(args.n or 64)
    n = args.n or 32
    return shepp_logan(PhantomSpec(n, default_tumor(n)))


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_case(args):
    cfg = _config(args)
    images = _images(args)
    res = bench.run_case(cfg.case_id, images, cfg)
    _emit(res.trace_csv(), args.out)
    logging.info("case %d eta %.3f: mean %.2f dB over %d trials", res.case_id, res.eta,
                 res.mean_rsnr_db, res.trials)


def _sweep_eta(args):
    cfg = _config(args)
    results = bench.sweep_eta(args.cases, args.etas, _images(args), cfg)
    _emit(bench.write_csv(bench.ETA_HEADER, bench.eta_table(results)), args.out)


def _sweep_p_c(args):
    cfg = _config(args)
    rows = bench.sweep_p_c(args.p_range, args.c_list, _images(args), cfg, args.case_id)
    _emit(bench.write_csv(bench.PC_HEADER, rows), args.out)


def _sweep_grayscale(args):
    cfg = _config(args)
    rows = bench.sweep_grayscale(args.c_list, args.etas, _images(args), cfg)
    _emit(bench.write_csv(bench.GRAY_HEADER, rows), args.out)


def _gen_phantom(args):
    if args.image == "brain":
        ref, follow = brain_like(args.n or 64, args.seed)
    else:
        n = args.n or 32
        tumor = None if args.no_tumor else (args.tumor or default_tumor(n))
        ref, follow = shepp_logan(PhantomSpec(n, tumor))
    bench.save_image(ref, args.ref, args.bits)
    bench.save_image(follow, args.follow, args.bits)


def _pdf_dump(args):
    n = args.n
    if args.density == "uniform":
        pdf = LinePdf.uniform(n)
    elif args.density == "vd":
        pdf = pdf_vd(n, args.p)
    elif args.density == "vds":
        pdf = pdf_vds(n, args.p, args.C)
    else:
        ref = bench.load_image(args.ref) if args.ref else shepp_logan(PhantomSpec(n))[0]
        if args.density == "r":
            pdf = pdf_r(ref.shape[0], fft2_centered(ref))
        else:
            pdf = pdf_a(ref.shape[0], args.sparsifier, reference=ref)
    _emit(pdf.to_csv(), args.out)


_COMMANDS = {
    "run-case": _run_case,
    "sweep-eta": _sweep_eta,
    "sweep-p-c": _sweep_p_c,
    "sweep-grayscale": _sweep_grayscale,
    "gen-phantom": _gen_phantom,
    "pdf-dump": _pdf_dump,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _COMMANDS[args.command](args)
    except ConfigError as exc:
        where = f" [{exc.field}]" if exc.field else ""
        print(f"config error{where}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LacsError, OSError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
