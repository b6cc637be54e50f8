"""nnquad: closed-form and piecewise-exact integration of small neural networks."""

from .affine_trace import AffinePiece, local_affine, local_affine_batch
from .baselines import (
    QuadratureResult,
    SampledFunction,
    euler_integrate,
    mc_box_integrate,
    reference_quadrature,
    rk45_integrate,
)
from .closed_form import (
    AntiderivativeSpec,
    Box,
    antiderivative,
    antiderivative_spec,
    integrate_one_layer_box,
    integrate_one_layer_interval,
)
from .network import (
    ConvLayer,
    DenseLayer,
    Network,
    ResidualBlock,
    dense_lowered,
    forward,
    forward_batch,
    load_network,
    save_network,
    validate,
)
from .numerics import conv_to_matrix, matvec
from .piecewise import (
    CorrectedIntegral,
    LineSegment,
    Partition,
    antiderivative_curve,
    breakpoints_1d,
    corrected_integral,
    exact_integral_1d,
    poly_eval,
)
from .trainer import Dataset, TrainConfig, gradient_check, mse_loss, train

__version__ = "0.1.0"

__all__ = [
    "AffinePiece",
    "AntiderivativeSpec",
    "Box",
    "ConvLayer",
    "CorrectedIntegral",
    "Dataset",
    "DenseLayer",
    "LineSegment",
    "Network",
    "Partition",
    "QuadratureResult",
    "ResidualBlock",
    "SampledFunction",
    "TrainConfig",
    "antiderivative",
    "antiderivative_curve",
    "antiderivative_spec",
    "breakpoints_1d",
    "conv_to_matrix",
    "corrected_integral",
    "dense_lowered",
    "euler_integrate",
    "exact_integral_1d",
    "forward",
    "forward_batch",
    "gradient_check",
    "integrate_one_layer_box",
    "integrate_one_layer_interval",
    "load_network",
    "local_affine",
    "local_affine_batch",
    "matvec",
    "mc_box_integrate",
    "mse_loss",
    "poly_eval",
    "reference_quadrature",
    "rk45_integrate",
    "save_network",
    "train",
    "validate",
]
