"""Command line interface: ``shm train|predict|hyperplanes|svd-report|verify-appendix``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O or
parse error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys

from . import errors
from .appendix import verify_appendix
from .fileio import load_dataset, load_model, read_table, save_model
from .reduction import consistency_report, reduce
from .train import KernelSpec, TrainConfig, kernel_matrix, projector, train

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3, 4

log = logging.getLogger("shm")


class UsageError(Exception):
    pass


def _float_or_inf(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


def cmd_train(args) -> int:
    try:
        spec = KernelSpec.parse(args.kernel)
        cfg = TrainConfig(ridge=args.ridge, c=args.c, qp_mode=args.qp_mode,
                          sv_truncation=not args.no_truncation)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ts = load_dataset(args.data)
    model = train(ts, spec, cfg)
    save_model(model, args.out)
    log.info("trained %s model on N=%d: %d multipliers > 0, b=%.6g, Q=%.6g",
             model.mode, ts.n, len(model.sv_alpha), model.b, model.meta.objective)
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model)
    x, y, _ = read_table(args.data, require_labels=False)
    h = model.decide(x, y)
    labels = model.classify(x, y)
    fh, close = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["h", "label"])
        for hv, lab in zip(h, labels):
            w.writerow([format(float(hv), ".17g"), int(lab)])
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_hyperplanes(args) -> int:
    model = load_model(args.model)
    planes = model.supporting_hyperplanes()
    fh, close = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index"] + [f"A{t + 1}" for t in range(model.z)] + ["C"])
        for p in planes:
            # 1-based to match the numbering of the training rows
            w.writerow([p.support_index + 1] + [format(float(v), ".17g") for v in p.normal]
                       + [format(p.offset, ".17g")])
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_svd_report(args) -> int:
    try:
        spec = KernelSpec.parse(args.kernel)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ts = load_dataset(args.data)
    gp = projector(ts.x, 0.0)
    k = kernel_matrix(ts.y, spec)
    rp = reduce(gp, ts.d, k)
    report = consistency_report(rp, gp, ts.d, k, args.samples, args.seed)
    sys.stdout.write(report.to_text())
    return EXIT_OK


def cmd_verify_appendix(args) -> int:
    report = verify_appendix(TrainConfig(qp_mode=args.qp_mode))
    sys.stdout.write(report.to_text())
    return EXIT_OK if report.passed else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shm", description="Supporting hyperplane machine")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from a dataset CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--kernel", default="linear", help="linear | poly:D:R | rbf:G")
    p.add_argument("--c", type=_float_or_inf, default=math.inf, help="box bound C or 'inf'")
    p.add_argument("--qp-mode", choices=["script", "kkt"], default="script")
    p.add_argument("--ridge", type=float, default=0.0)
    p.add_argument("--no-truncation", action="store_true",
                   help="use a relative tolerance instead of 4-decimal truncation for support vectors")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="evaluate h and labels for a dataset CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("hyperplanes", help="emit supporting hyperplane coefficients as CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_hyperplanes)

    p = sub.add_parser("svd-report", help="compare reduced and full dual objectives")
    p.add_argument("--data", required=True)
    p.add_argument("--kernel", default="linear")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_svd_report)

    p = sub.add_parser("verify-appendix", help="replicate the embedded worked example")
    p.add_argument("--qp-mode", choices=["script", "kkt"], default="script")
    p.set_defaults(func=cmd_verify_appendix)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"shm: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, errors.ParseError, errors.VersionMismatch, errors.CorruptField) as exc:
        print(f"shm: {exc}", file=sys.stderr)
        return EXIT_IO
    except (errors.ShmError, ArithmeticError, ValueError) as exc:
        print(f"shm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
