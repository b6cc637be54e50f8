"""End-to-end experiment pipeline behind the ``train`` and ``compare`` commands.

The pipeline trains (or loads) a network on samples of a target function,
integrates the network with the corrected piecewise scheme, runs the classical
baselines on the same samples, and writes delimited reports.  By default the
baselines consume the piecewise-linear interpolant of the training samples
(everyone sees the same information); a config flag hands them the true
integrand instead.
"""

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .baselines import SampledFunction, euler_integrate, rk45_integrate
from .errors import ParseError, StructureError
from .network import Network, forward, load_network, save_network
from .piecewise import LineSegment, Partition, corrected_integral
from .targets import get_target
from .trainer import Dataset, TrainConfig, train, train_config_from_dict

KNOWN_BASELINES = ("euler", "rk45")


@dataclass
class ExperimentConfig:
    target: object  # builtin id or {"csv": path}
    train: TrainConfig
    interval: tuple = None
    num_samples: int = 51
    partition_size: int = None
    baselines: tuple = ("euler", "rk45")
    baselines_use_true_f: bool = False
    output_dir: str = "out"
    network_file: str = None

    def __post_init__(self):
        self.num_samples = int(self.num_samples)
        if self.num_samples < 2:
            raise StructureError(f"num_samples must be >= 2, got {self.num_samples}")
        if self.partition_size is not None:
            self.partition_size = int(self.partition_size)
            if self.partition_size < 2:
                raise StructureError(
                    f"partition_size must be >= 2, got {self.partition_size}"
                )
        self.baselines = tuple(self.baselines)
        for name in self.baselines:
            if name not in KNOWN_BASELINES:
                raise StructureError(
                    f"unknown baseline '{name}' (available: {', '.join(KNOWN_BASELINES)})"
                )
        if self.interval is not None:
            a, b = float(self.interval[0]), float(self.interval[1])
            if not a < b:
                raise StructureError(f"interval must be nonempty, got [{a}, {b}]")
            self.interval = (a, b)


def load_experiment_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: config must be a JSON object")
    if "train" not in doc or "target" not in doc:
        raise ParseError(f"{path}: config needs 'target' and 'train' sections")
    kwargs = dict(doc)
    kwargs["train"] = train_config_from_dict(doc["train"])
    if "interval" in kwargs and kwargs["interval"] is not None:
        kwargs["interval"] = tuple(kwargs["interval"])
    known = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}
    unknown = set(kwargs) - known
    if unknown:
        raise ParseError(f"{path}: unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**kwargs)


@dataclass
class TargetData:
    """Sample grid plus (when known) the true integrand and antiderivative."""

    xs: np.ndarray
    fs: np.ndarray
    f_true: object = None
    F_true: object = None  # antiderivative with arbitrary constant


def resolve_target(cfg: ExperimentConfig) -> TargetData:
    if isinstance(cfg.target, str):
        f_true, F_true, default_interval = get_target(cfg.target)
        a, b = cfg.interval if cfg.interval is not None else default_interval
        if a <= -1.0 and cfg.target == "paperfn":
            raise StructureError("the 'paperfn' target is only defined for x > -1")
        xs = np.linspace(a, b, cfg.num_samples)
        return TargetData(xs, f_true(xs), f_true, F_true)
    if isinstance(cfg.target, dict) and "csv" in cfg.target:
        rows = np.loadtxt(cfg.target["csv"], delimiter=",", skiprows=1, ndmin=2)
        if rows.shape[1] < 2:
            raise ParseError(f"{cfg.target['csv']}: need columns x,f (optional third column F)")
        xs = rows[:, 0]
        if not np.all(np.diff(xs) > 0):
            raise ParseError(f"{cfg.target['csv']}: x column must be strictly increasing")
        F_true = None
        if rows.shape[1] >= 3:
            F_samples = SampledFunction(xs, rows[:, 2])
            F_true = F_samples
        return TargetData(xs, rows[:, 1], None, F_true)
    raise StructureError(f"target must be a builtin id or {{'csv': path}}, got {cfg.target!r}")


def output_directory(cfg: ExperimentConfig) -> str:
    """Config output dir, overridable through the NNQUAD_OUT variable."""
    return os.environ.get("NNQUAD_OUT", cfg.output_dir)


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def write_csv(path, header, rows):
    """Delimited output: header row, 17-significant-digit floats, LF endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(
                ",".join(v if isinstance(v, str) else format_float(v) for v in row) + "\n"
            )


def train_network(cfg: ExperimentConfig, target: TargetData, out_dir: str):
    """Train on the target samples; writes the weight file and the loss log."""
    data = Dataset(target.xs, target.fs)
    log = []
    net = train(cfg.train, data, on_epoch=lambda epoch, loss: log.append((epoch, loss)))
    os.makedirs(out_dir, exist_ok=True)
    weight_path = os.path.join(out_dir, "network.json")
    with open(weight_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(save_network(net))
    write_csv(os.path.join(out_dir, "training_log.csv"), ("epoch", "loss"), log)
    return net, log


def network_curve(net: Network, xs: np.ndarray) -> np.ndarray:
    """Corrected antiderivative of the network sampled at the partition points."""
    seg = LineSegment(np.zeros(1), 0, float(xs[0]), float(xs[-1]))
    result = corrected_integral(net, seg, Partition(xs, "midpoint"))
    return result.samples[:, 0]


def run_compare(cfg: ExperimentConfig, out_dir: str) -> dict:
    """Full comparison pipeline; returns a summary dict and writes the reports."""
    target = resolve_target(cfg)
    if target.F_true is None:
        raise StructureError(
            "compare needs the true antiderivative: use a builtin target or a"
            " samples CSV with a third F column"
        )
    os.makedirs(out_dir, exist_ok=True)
    if cfg.network_file:
        with open(cfg.network_file, "r", encoding="utf-8") as handle:
            net = load_network(handle.read())
    else:
        net, _ = train_network(cfg, target, out_dir)

    xs = target.xs
    a, b = float(xs[0]), float(xs[-1])
    if cfg.partition_size is None or cfg.partition_size == xs.shape[0]:
        grid = xs.copy()
    else:
        grid = np.linspace(a, b, cfg.partition_size)

    F_vals = np.asarray(target.F_true(grid), dtype=np.float64)
    F_vals = F_vals - F_vals[0]  # antiderivative anchored at the interval start

    curves = {"nn": network_curve(net, grid)}
    interp = SampledFunction(xs, target.fs)
    integrand = target.f_true if (cfg.baselines_use_true_f and target.f_true) else interp
    if "euler" in cfg.baselines:
        euler_curve = euler_integrate(integrand, a, b, xs.shape[0] - 1)
        curves["euler"] = np.asarray(euler_curve(grid), dtype=np.float64)
    if "rk45" in cfg.baselines:
        rk_curve = rk45_integrate(integrand, a, b, rel_tol=1e-8, abs_tol=1e-10)
        curves["rk45"] = np.asarray(rk_curve(grid), dtype=np.float64)

    methods = ["nn"] + [name for name in ("euler", "rk45") if name in curves]
    errors = {name: np.abs(F_vals - curves[name]) for name in methods}

    header = ["x"] + [f"abs_err_{name}" for name in methods]
    rows = [
        [grid[i]] + [errors[name][i] for name in methods]
        for i in range(grid.shape[0])
    ]
    write_csv(os.path.join(out_dir, "error_curve.csv"), header, rows)

    summary_rows = [["true", F_vals[-1], 0.0]]
    for name in methods:
        summary_rows.append([name, curves[name][-1], errors[name][-1]])
    write_csv(
        os.path.join(out_dir, "summary.csv"),
        ("method", "endpoint_estimate", "endpoint_abs_error"),
        summary_rows,
    )

    return {
        "net": net,
        "grid": grid,
        "F_true": F_vals,
        "curves": curves,
        "errors": errors,
        "target": target,
        "endpoint_errors": {name: float(errors[name][-1]) for name in methods},
    }
