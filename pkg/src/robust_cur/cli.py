"""Command-line interface.

Exit codes: 0 success, 1 usage or I/O error, 2 numerical failure
(AltProj did not converge, or the CUR core stayed rank deficient).
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .bench import bench_compare, emit_table
from .cur import InsufficientSamples, RankDeficientCore, RcurConfig, reconstruct, run_rcur
from .diagnostics import RankError, beta_factor, diagnose, foreground_mask, numeric_rank, relative_error
from .fileio import (MatrixFormatError, frames_to_matrix, load_matrix, matrix_to_frames, save_matrix,
                     write_json)
from .matcore import svd_truncated
from .rpca import RpcaConfig, altproj
from .sampling import GreedySelectionError, SampleConfig, SizeHeuristic, greedy_css
from .synth import SynthConfig, gen_problem, gen_video

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
MATRIX_TOL = 1e-10
# 8-bit rounding leaves a relative residual near 3e-3 on typical frames
FRAME_TOL = 1e-2
COMMANDS = ("synth", "rpca", "rcur", "hybrid", "css", "diagnose", "frames", "bench")


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _size_spec(text: str):
    """``123`` or ``auto:<c>[:<variant>]``."""
    if text.startswith("auto:"):
        parts = text.split(":")
        try:
            c = float(parts[1])
        except (IndexError, ValueError):
            raise argparse.ArgumentTypeError(f"bad sample size {text!r}") from None
        variant = parts[2] if len(parts) > 2 else "log_n"
        if variant not in ("log_n", "log_rn", "paper_video") or c <= 0:
            raise argparse.ArgumentTypeError(f"bad sample size {text!r}")
        return SizeHeuristic(c, variant)
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sample size {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("sample size must be positive")
    return value


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(tok) for tok in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dimensions {text!r}") from None
    if not dims or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"bad dimensions {text!r}")
    return dims


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--rank", type=int, default=None)
    common.add_argument("--alpha", type=float, default=0.01)
    common.add_argument("--kappa", type=float, default=1.0)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--rows", type=_size_spec, default=None, help="count or auto:<c>[:variant]")
    common.add_argument("--cols", type=_size_spec, default=None, help="count or auto:<c>[:variant]")
    common.add_argument("--tol", type=float, default=None,
                        help="AltProj residual tolerance (1e-10, or 1e-2 for 8-bit frame input)")
    common.add_argument("--max-iters", type=int, default=100)
    common.add_argument("--xi", type=float, default=1.0, help="threshold scale")
    common.add_argument("--rho", type=float, default=0.5, help="threshold decay")
    common.add_argument("--out", type=Path, default=Path("rcur_out"))
    common.add_argument("--format", choices=("csv", "bin"), default="bin")
    common.add_argument("--report", type=Path, default=None)
    common.add_argument("--truth", type=Path, default=None, help="ground-truth low-rank matrix")

    parser = _Parser(prog="robust-cur", description="Robust CUR decompositions")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", parents=[common], help="generate a ground-truth instance")
    p.add_argument("--size", type=_dims, default=(200, 200), help="MxN")
    p.add_argument("--video", type=_dims, default=None, help="FRAMESxHEIGHTxWIDTH")
    p.add_argument("--magnitude", type=float, default=10.0)

    for name, help_text in (("rpca", "AltProj on the full matrix"),
                            ("rcur", "uniform robust CUR"),
                            ("hybrid", "robust CUR reduced to exactly r columns and rows")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("input", type=Path)
        if name != "rpca":
            p.add_argument("--fg-frac", type=float, default=0.25)

    p = sub.add_parser("css", parents=[common], help="greedy column subset selection")
    p.add_argument("input", type=Path)
    p.add_argument("--k", type=int, default=None)

    p = sub.add_parser("diagnose", parents=[common], help="incoherence, sparsity and beta report")
    p.add_argument("input", type=Path)
    p.add_argument("--sparse", type=Path, default=None)
    p.add_argument("--estimate", type=Path, default=None, help="approximation to compare")

    p = sub.add_parser("frames", parents=[common], help="convert between PGM frames and a matrix")
    p.add_argument("input", type=Path)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--width", type=int, default=None)

    p = sub.add_parser("bench", parents=[common], help="RCUR vs full AltProj timing")
    p.add_argument("--size", type=_dims, default=(1000, 1000), help="MxN")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--table", choices=("markdown", "csv"), default="markdown")
    return parser


def _rpca_config(args, rank: int, frames: bool = False) -> RpcaConfig:
    if args.tol is None:
        args.tol = FRAME_TOL if frames else MATRIX_TOL
    tol = args.tol
    try:
        return RpcaConfig(rank=rank, max_iters=args.max_iters, tol=tol,
                          threshold_scale=args.xi, threshold_decay=args.rho)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _require_rank(args) -> int:
    if args.rank is None or args.rank < 1:
        raise UsageError("--rank is required and must be positive")
    return args.rank


def _load_input(path: Path):
    """Matrix from a file, or stacked frames from a directory."""
    if path.is_dir():
        D, h, w = frames_to_matrix(path)
        return D, (h, w)
    return load_matrix(path), None


def _ext(args) -> str:
    return ".csv" if args.format == "csv" else ".bin"


def _save(args, A, name: str, outputs: list) -> None:
    path = args.out / f"{name}{_ext(args)}"
    path.parent.mkdir(parents=True, exist_ok=True)
    save_matrix(A, path, args.format)
    outputs.append(str(path))


def _trace_dict(res) -> dict:
    return {"iterations": res.iterations, "converged": res.converged,
            "residual_trace": res.residual_trace, "residual_norm": res.residual_norm,
            "trace_monotone": res.trace_monotone, "mu_used": res.mu_used}


def _cmd_synth(args, report, outputs):
    if args.video is not None:
        if len(args.video) != 3:
            raise UsageError("--video expects FRAMESxHEIGHTxWIDTH")
        frames, h, w = args.video
        gt = gen_video(frames, h, w, r=args.rank or 2, alpha=args.alpha, seed=args.seed)
        matrix_to_frames(gt.D, h, w, args.out / "frames")
        _save(args, gt.foreground_mask.astype(np.float64), "mask", outputs)
        outputs.append(str(args.out / "frames"))
    else:
        if len(args.size) != 2:
            raise UsageError("--size expects MxN")
        try:
            cfg = SynthConfig(args.size[0], args.size[1], args.rank or 5, args.kappa, args.alpha,
                              args.magnitude, args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        gt = gen_problem(cfg)
    for name in ("L", "S", "D"):
        _save(args, getattr(gt, name), name, outputs)
    write_json(gt.meta, args.out / "manifest.json")
    outputs.append(str(args.out / "manifest.json"))


def _truth(args, shape):
    if args.truth is None:
        return None
    L = load_matrix(args.truth)
    if L.shape != shape:
        raise UsageError(f"--truth has shape {L.shape}, input is {shape}")
    return L


def _cmd_rpca(args, report, outputs):
    r = _require_rank(args)
    D, frame_shape = _load_input(args.input)
    L_true = _truth(args, D.shape)
    start = time.perf_counter()
    res = altproj(D, _rpca_config(args, r, frame_shape is not None))
    report["timings"]["solve_seconds"] = time.perf_counter() - start
    report["rpca"] = _trace_dict(res)
    _save(args, res.L_hat, "L_hat", outputs)
    _save(args, res.S_hat, "S_hat", outputs)
    try:
        report["diagnostics"] = diagnose(res.L_hat, r, S=res.S_hat, sparse_tol=1e-12).to_dict()
    except RankError:
        # an unconverged estimate can fall short of rank r; keep what is measurable
        report["diagnostics"] = {"rank_numeric": numeric_rank(res.L_hat)}
    report["diagnostics"]["rel_spectral_error"] = None if L_true is None else relative_error(L_true, res.L_hat)
    if not res.converged:
        raise NumericalFailure(f"AltProj did not converge in {res.iterations} iterations")


def _cur_config(args, r: int, video: bool) -> RcurConfig:
    rows = args.rows or (SizeHeuristic(25.0, "paper_video") if video else SizeHeuristic(5.0))
    cols = args.cols or (SizeHeuristic(15.0, "paper_video") if video else SizeHeuristic(5.0))
    args.rows, args.cols = rows, cols
    return RcurConfig(_rpca_config(args, r, video), SampleConfig(rows, seed=args.seed),
                      SampleConfig(cols, seed=args.seed))


def _cmd_cur(args, report, outputs):
    r = _require_rank(args)
    hybrid = args.command == "hybrid"
    D, frame_shape = _load_input(args.input)
    L_true = _truth(args, D.shape)
    start = time.perf_counter()
    try:
        run = run_rcur(D, r, _cur_config(args, r, frame_shape is not None), hybrid=hybrid)
    except RankDeficientCore as exc:
        raise NumericalFailure(f"rank-deficient core after retry: {exc}") from None
    except GreedySelectionError as exc:
        raise NumericalFailure(f"greedy selection failed: {exc}") from None
    except InsufficientSamples as exc:
        raise UsageError(str(exc)) from None
    report["timings"]["solve_seconds"] = time.perf_counter() - start
    model = run.hybrid if hybrid else run.model
    L_hat = reconstruct(model)
    report["rpca"] = {"columns": _trace_dict(run.rpca_cols), "rows": _trace_dict(run.rpca_rows)}
    report["sampling"] = {"mu_estimate": run.mu_estimate, "attempts": run.attempts,
                          "rows": run.model.row_indices, "cols": run.model.col_indices}
    if hybrid:
        report["selection"] = {"rows": model.row_indices, "cols": model.col_indices}
    diag = {"rel_spectral_error": None if L_true is None else relative_error(L_true, L_hat)}
    if L_true is not None:
        try:
            full = diagnose(L_true, r, row_indices=model.row_indices, col_indices=model.col_indices)
            diag.update({k: v for k, v in full.to_dict().items() if k != "rel_spectral_error"})
        except RankError:
            pass
    report["diagnostics"] = diag
    _save(args, L_hat, "L_hat", outputs)
    if frame_shape is not None:
        h, w = frame_shape
        mask = foreground_mask(D, L_hat, args.fg_frac)
        report["foreground_pixels"] = int(mask.sum())
        if hybrid:
            outputs += [str(p) for p in matrix_to_frames(model.C_hat, h, w, args.out / "canonical", "canonical")]
        else:
            outputs += [str(p) for p in matrix_to_frames(L_hat, h, w, args.out / "background", "background")]
            outputs += [str(p) for p in matrix_to_frames(255.0 * mask, h, w, args.out / "foreground", "mask")]
    if not (run.rpca_cols.converged and run.rpca_rows.converged):
        raise NumericalFailure("AltProj did not converge on the sampled blocks")


def _cmd_css(args, report, outputs):
    r = _require_rank(args)
    X = load_matrix(args.input)
    k = args.k or r
    try:
        Vt = svd_truncated(X, r).right_t
        sel = greedy_css(Vt, k)
    except GreedySelectionError as exc:
        raise NumericalFailure(str(exc)) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    beta = beta_factor(Vt.T, sel, X.shape[1])
    report["selection"] = {"cols": sel, "k": k, "beta": "inf" if np.isinf(beta) else beta}
    write_json({"cols": sel.tolist(), "beta": report["selection"]["beta"]}, args.out / "css.json")
    outputs.append(str(args.out / "css.json"))


def _cmd_diagnose(args, report, outputs):
    r = _require_rank(args)
    L = load_matrix(args.input)
    S = load_matrix(args.sparse) if args.sparse else None
    L_hat = load_matrix(args.estimate) if args.estimate else None
    try:
        report["diagnostics"] = diagnose(L, r, S=S, L_hat=L_hat).to_dict()
    except RankError as exc:
        raise NumericalFailure(str(exc)) from None


def _cmd_frames(args, report, outputs):
    if args.input.is_dir():
        D, h, w = frames_to_matrix(args.input)
        _save(args, D, "frames", outputs)
        report["frames"] = {"height": h, "width": w, "count": D.shape[1]}
    else:
        if args.height is None or args.width is None:
            raise UsageError("--height and --width are required to write frames")
        A = load_matrix(args.input)
        try:
            paths = matrix_to_frames(A, args.height, args.width, args.out / "frames")
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        outputs += [str(p) for p in paths]
        report["frames"] = {"height": args.height, "width": args.width, "count": len(paths)}


def _cmd_bench(args, report, outputs):
    r = args.rank or 5
    if len(args.size) != 2:
        raise UsageError("--size expects MxN")
    try:
        synth = SynthConfig(args.size[0], args.size[1], r, args.kappa, args.alpha, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = args.rows or SizeHeuristic(1.0)
    cols = args.cols or SizeHeuristic(1.0)
    args.rows, args.cols = rows, cols
    cfg = RcurConfig(_rpca_config(args, r), SampleConfig(rows, seed=args.seed), SampleConfig(cols, seed=args.seed))
    rep = bench_compare(synth, cfg, trials=args.trials)
    report["bench"] = rep.to_dict()
    table = emit_table([rep], args.table)
    path = args.out / ("bench.md" if args.table == "markdown" else "bench.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table)
    outputs.append(str(path))
    print(table, end="")


HANDLERS = {"synth": _cmd_synth, "rpca": _cmd_rpca, "rcur": _cmd_cur, "hybrid": _cmd_cur,
            "css": _cmd_css, "diagnose": _cmd_diagnose, "frames": _cmd_frames, "bench": _cmd_bench}


def _config_echo(args) -> dict:
    echo = {}
    for key, value in vars(args).items():
        if isinstance(value, SizeHeuristic):
            value = f"auto:{value.c:g}:{value.variant}"
        elif isinstance(value, Path):
            value = str(value)
        echo[key] = value
    return echo


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    report = {"command": args.command, "version": __version__, "config": _config_echo(args),
              "timings": {}, "outputs": []}
    code = EXIT_OK
    start = time.perf_counter()
    try:
        HANDLERS[args.command](args, report, report["outputs"])
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        report["error"] = str(exc)
        code = EXIT_NUMERIC
    except (UsageError, MatrixFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    report["timings"]["total_seconds"] = time.perf_counter() - start
    report["config"] = _config_echo(args)  # with defaults resolved during the run
    report["exit_code"] = code
    try:
        write_json(report, args.report or args.out / "report.json")
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return code


if __name__ == "__main__":
    sys.exit(main())
