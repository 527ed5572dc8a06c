"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 non-finite result.
"""

import argparse
import os
import sys

import numpy as np

from .imgio import ImageFormatError, read_image, rescale_for_display, write_image
from .iterreg import (
    IterRecord,
    OuterConfig,
    SolveReport,
    StopRule,
    osher_iterate,
    richardson_both,
    richardson_step1,
    richardson_step2,
)
from .grid_ops import l2_norm
from .metrics_noise import MetricConfig, add_gaussian_noise, noise_level, psnr
from .rof_chambolle import InnerSolveConfig, rof_denoise
from .tvstokes import TvsParams, tv_stokes_denoise

ALGORITHMS = ("rof", "tvstokes", "osher", "tvs1", "tvs2", "tvs12")
EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


class NumericError(Exception):
    pass


def _positive(name):
    def parse(text):
        try:
            val = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"--{name} expects a number, got {text!r}")
        if not (np.isfinite(val) and val > 0):
            raise argparse.ArgumentTypeError(f"--{name} must be positive, got {text}")
        return val

    return parse


def _add_solver_flags(p):
    p.add_argument("--algorithm", choices=ALGORITHMS, default="tvs2")
    p.add_argument("--eta", type=_positive("eta"), default=None,
                   help="fidelity for rof and osher (required there)")
    p.add_argument("--beta1", type=float, default=8.0, help="tangent-field schedule constant")
    p.add_argument("--beta2", type=float, default=2.5, help="image schedule constant")
    p.add_argument("--alpha", type=float, default=0.9, help="orientation weight in [0, 1]")
    p.add_argument("--iters-outer", type=int, default=50)
    p.add_argument("--iters-inner", type=int, default=2000)
    p.add_argument("--tol", type=_positive("tol"), default=1e-5, help="inner dual-change tolerance")
    p.add_argument("--eps", type=_positive("eps"), default=None,
                   help="normal-field floor (default: scaled to the field)")
    p.add_argument("--peak", type=_positive("peak"), default=255.0)
    p.add_argument("--clean", default=None, help="clean image for error curves")
    p.add_argument("--timing", action="store_true", help="record wall time per iteration in the CSV")


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="tvsiter", description="TV-Stokes denoising with iterative regularization.",
                                     formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("add-noise", help="add seeded Gaussian noise", formatter_class=fmt)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--sigma", type=_positive("sigma"), default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clip", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--peak", type=_positive("peak"), default=255.0)

    p = sub.add_parser("denoise", help="denoise an image", formatter_class=fmt)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--csv", default=None, help="report path (default: output stem + .csv)")
    _add_solver_flags(p)

    p = sub.add_parser("metrics", help="PSNR and noise level against a clean image", formatter_class=fmt)
    p.add_argument("--input", required=True)
    p.add_argument("--clean", required=True)
    p.add_argument("--peak", type=_positive("peak"), default=255.0)

    p = sub.add_parser("curves", help="write per-iteration error curves only", formatter_class=fmt)
    p.add_argument("--input", required=True)
    p.add_argument("--csv", required=True)
    _add_solver_flags(p)
    return parser


def _outer_config(args):
    try:
        inner = InnerSolveConfig(max_iters=args.iters_inner, rel_tol=args.tol)
    except ValueError as exc:
        raise UsageError(f"--iters-inner/--tol: {exc}")
    if args.iters_outer < 1:
        raise UsageError("--iters-outer must be a positive integer")
    for flag in ("beta1", "beta2"):
        if not getattr(args, flag) > 1:
            raise UsageError(f"--{flag} must be > 1")
    if not 0 <= args.alpha <= 1:
        raise UsageError("--alpha must lie in [0, 1]")
    return OuterConfig(
        beta1=args.beta1,
        beta2=args.beta2,
        alpha=args.alpha,
        max_outer=args.iters_outer,
        stop=StopRule.fixed_count(args.iters_outer),
        inner=inner,
        eps=args.eps,
    )


def _single_report(u, f, clean, metric, eta=None):
    rec = IterRecord(1, float("nan") if eta is None else eta, l2_norm(u), l2_norm(f - u))
    rec.u_minus_f = l2_norm(u - f)
    if clean is not None:
        rec.u_minus_g = l2_norm(u - clean)
        rec.psnr = psnr(u, clean, metric)
    return SolveReport([rec], stopped_by="single")


def run_algorithm(f, args, clean=None):
    """Dispatch to the selected solver. Returns ``(u, report)``."""
    cfg = _outer_config(args)
    metric = MetricConfig(args.peak)
    algo = args.algorithm
    if algo in ("rof", "osher") and args.eta is None:
        raise UsageError(f"--eta is required for --algorithm {algo}")
    if algo == "rof":
        u, _ = rof_denoise(f, args.eta, cfg.inner)
        return u, _single_report(u, f, clean, metric, args.eta)
    if algo == "tvstokes":
        params = TvsParams(alpha=cfg.alpha, eps=cfg.eps, beta1=cfg.beta1, beta2=cfg.beta2, inner=cfg.inner)
        u, _ = tv_stokes_denoise(f, params)
        return u, _single_report(u, f, clean, metric)
    if algo == "osher":
        return osher_iterate(f, args.eta, cfg, clean=clean, metric=metric)
    if algo == "tvs1":
        u, _, report = richardson_step1(f, cfg, clean=clean, metric=metric)
        return u, report
    if algo == "tvs2":
        return richardson_step2(f, cfg, clean=clean, metric=metric)
    return richardson_both(f, cfg, clean=clean, metric=metric)


def _load(path, what):
    try:
        return read_image(path)
    except ImageFormatError:
        raise
    except OSError as exc:
        raise OSError(f"cannot read {what} {path!r}: {exc.strerror or exc}") from exc


def _load_clean(args, f):
    if args.clean is None:
        return None
    clean = _load(args.clean, "clean image")
    if clean.shape != f.shape:
        raise UsageError(f"--clean has shape {clean.shape}, input has {f.shape}")
    return clean


def _check_finite(u):
    if not np.all(np.isfinite(u)):
        raise NumericError("solver produced non-finite values")
    return u


def cmd_add_noise(args):
    g = _load(args.input, "input")
    out = add_gaussian_noise(g, args.sigma, args.seed, clip=args.clip, peak=args.peak)
    write_image(args.output, out, peak=args.peak)
    return EXIT_OK


def cmd_denoise(args):
    f = _load(args.input, "input")
    clean = _load_clean(args, f)
    u, report = run_algorithm(f, args, clean)
    _check_finite(u)
    stem, ext = os.path.splitext(args.output)
    write_image(args.output, u, peak=args.peak)
    scaled, offset, scale = rescale_for_display(f - u)
    write_image(f"{stem}_residual{ext}", scaled)
    with open(f"{stem}_residual.txt", "w") as fh:
        fh.write(f"offset {offset!r}\nscale {scale!r}\n")
        fh.write("residual = pixel / scale + offset\n")
    report.to_csv(args.csv or f"{stem}.csv", timing=args.timing)
    if clean is not None:
        metric = MetricConfig(args.peak)
        print(f"psnr {psnr(u, clean, metric):.4f} dB")
        print(f"noise_level {noise_level(u, clean):.4f}")
        best = report.best_k()
        if best is not None and len(report) > 1:
            print(f"best_k {best}")
    return EXIT_OK


def cmd_metrics(args):
    u = _load(args.input, "input")
    clean = _load(args.clean, "clean image")
    if u.shape != clean.shape:
        raise UsageError(f"shape mismatch: {u.shape} vs {clean.shape}")
    print(f"psnr {psnr(u, clean, MetricConfig(args.peak)):.4f} dB")
    print(f"noise_level {noise_level(u, clean):.4f}")
    return EXIT_OK


def cmd_curves(args):
    f = _load(args.input, "input")
    clean = _load_clean(args, f)
    u, report = run_algorithm(f, args, clean)
    _check_finite(u)
    report.to_csv(args.csv, timing=args.timing)
    best = report.best_k()
    if best is not None:
        print(f"best_k {best}")
    return EXIT_OK


COMMANDS = {"add-noise": cmd_add_noise, "denoise": cmd_denoise, "metrics": cmd_metrics, "curves": cmd_curves}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ImageFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        if "non-finite" in str(exc):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
