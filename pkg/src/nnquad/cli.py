"""Command-line interface: train, integrate, compare, info.

Exit codes: 0 success, 2 usage or config error, 3 training diverged,
4 unsupported model (activation/order/structure).  All delimited outputs are
deterministic for a fixed config and seed.
"""

import argparse
import os
import sys

import numpy as np

from . import experiment, figures
from .closed_form import integrate_one_layer_interval
from .errors import (
    DomainError,
    InvalidPartitionError,
    NetworkValidationError,
    ParseError,
    PieceLimitError,
    ShapeError,
    StructureError,
    TrainingDivergedError,
    UnsupportedActivationError,
    UnsupportedOrderError,
)
from .network import describe, forward_batch, load_network
from .piecewise import LineSegment, Partition, corrected_integral

_CONFIG_ERRORS = (
    ParseError,
    NetworkValidationError,
    InvalidPartitionError,
    ShapeError,
    DomainError,
    OSError,
)
_MODEL_ERRORS = (
    UnsupportedActivationError,
    UnsupportedOrderError,
    StructureError,
    PieceLimitError,
)


def _fail(message, code):
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_network_file(path):
    with open(path, "r", encoding="utf-8") as handle:
        return load_network(handle.read())


def cmd_train(args) -> int:
    try:
        cfg = experiment.load_experiment_config(args.config)
        target = experiment.resolve_target(cfg)
        out_dir = experiment.output_directory(cfg)
        net, log = experiment.train_network(cfg, target, out_dir)
        figures.render_training_figure(out_dir, log)
    except TrainingDivergedError as exc:
        return _fail(str(exc), 3)
    except _MODEL_ERRORS as exc:
        return _fail(str(exc), 4)
    except _CONFIG_ERRORS as exc:
        return _fail(str(exc), 2)
    print(os.path.join(out_dir, "network.json"))
    print(f"final loss: {experiment.format_float(log[-1][1])}")
    return 0


def cmd_integrate(args) -> int:
    try:
        net = _load_network_file(args.network)
        if args.closed_form:
            total = integrate_one_layer_interval(net, args.a, args.b)
            print(experiment.format_float(total))
            return 0
        if args.base is not None:
            base = np.array([float(v) for v in args.base.split(",")])
        else:
            base = np.zeros(net.input_dim)
        seg = LineSegment(base, args.coord, args.a, args.b)
        part = Partition(np.linspace(args.a, args.b, args.partition), args.mode)
        result = corrected_integral(net, seg, part)
        if args.out:
            n_out = result.total.shape[0]
            if n_out == 1:
                header = ("z", "F_hat")
            else:
                header = ("z",) + tuple(f"F_hat_{k}" for k in range(n_out))
            rows = [
                [result.points[i]] + list(result.samples[i])
                for i in range(result.points.shape[0])
            ]
            experiment.write_csv(args.out, header, rows)
        print(",".join(experiment.format_float(v) for v in result.total))
    except _MODEL_ERRORS as exc:
        return _fail(str(exc), 4)
    except _CONFIG_ERRORS as exc:
        return _fail(str(exc), 2)
    except ValueError as exc:
        return _fail(str(exc), 2)
    return 0


def cmd_compare(args) -> int:
    try:
        cfg = experiment.load_experiment_config(args.config)
        out_dir = experiment.output_directory(cfg)
        result = experiment.run_compare(cfg, out_dir)
        net = result["net"]
        figures.render_compare_figures(
            out_dir,
            result,
            lambda xs: np.array([v[0] for v in forward_batch(net, xs[:, None])]),
        )
    except TrainingDivergedError as exc:
        return _fail(str(exc), 3)
    except _MODEL_ERRORS as exc:
        return _fail(str(exc), 4)
    except _CONFIG_ERRORS as exc:
        return _fail(str(exc), 2)
    for name, err in result["endpoint_errors"].items():
        print(f"{name} endpoint abs error: {experiment.format_float(err)}")
    print(out_dir)
    return 0


def cmd_info(args) -> int:
    try:
        net = _load_network_file(args.network)
    except _CONFIG_ERRORS as exc:
        return _fail(str(exc), 2)
    print(describe(net))
    print("valid")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nnquad",
        description="Integrate trained networks in closed or piecewise-closed form.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a network from a JSON config")
    p_train.add_argument("config", help="path to the experiment config (JSON)")
    p_train.set_defaults(func=cmd_train)

    p_int = sub.add_parser("integrate", help="integrate a ReLU network file")
    p_int.add_argument("network", help="path to a weight file")
    p_int.add_argument("--a", type=float, required=True, help="lower bound")
    p_int.add_argument("--b", type=float, required=True, help="upper bound")
    p_int.add_argument("--coord", type=int, default=0, help="integration coordinate")
    p_int.add_argument("--partition", type=int, default=101, help="uniform partition size")
    p_int.add_argument("--mode", choices=("left", "midpoint"), default="midpoint")
    p_int.add_argument("--base", default=None, help="comma-separated base point")
    p_int.add_argument("--out", default=None, help="write the antiderivative curve CSV here")
    p_int.add_argument(
        "--closed-form",
        action="store_true",
        help="use the exact one-hidden-layer interval formula instead",
    )
    p_int.set_defaults(func=cmd_integrate)

    p_cmp = sub.add_parser("compare", help="train/load, integrate, run baselines, report")
    p_cmp.add_argument("config", help="path to the experiment config (JSON)")
    p_cmp.set_defaults(func=cmd_compare)

    p_info = sub.add_parser("info", help="print network shape and validation result")
    p_info.add_argument("network", help="path to a weight file")
    p_info.set_defaults(func=cmd_info)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def entry():  # console-script hook
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
