"""Local affine representation of a ReLU network around a point.

A ReLU network is piecewise linear: around any input x it equals
``alpha @ x + beta`` for some matrix/vector pair determined by which neurons
are active at x.  The trace walks the layers exactly like forward evaluation,
but alongside the running value it carries the affine coefficients, seeding
them with the identity map and zeroing the rows of inactive neurons.

Activity is strict: a neuron whose pre-activation lands exactly on zero is
treated as inactive, so the piece attached to a breakpoint is the one valid on
its right-open side (a measure-zero convention).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, UnsupportedActivationError
from .network import Network, ResidualBlock
from .numerics import as_vector


@dataclass
class AffinePiece:
    """Coefficients of the network's affine piece at the traced point.

    ``alpha`` is (out_dim, in_dim), ``beta`` is (out_dim,), and ``masks``
    holds one 0/1 vector per ReLU layer in evaluation order (residual inner
    layers included).
    """

    alpha: np.ndarray
    beta: np.ndarray
    masks: list


def _trace_layers(layers, alpha, beta, y, masks):
    for layer in layers:
        if isinstance(layer, ResidualBlock):
            a_in, b_in, y_in = alpha, beta, y
            alpha, beta, y = _trace_layers(layer.layers, alpha, beta, y, masks)
            # skip connection: coefficients of x + inner(x) are the sums
            alpha = a_in + alpha
            beta = b_in + beta
            y = y_in + y
            continue
        w, c = layer.affine_params()
        pre = w @ y + c
        if layer.activation == "relu":
            y = np.maximum(pre, 0.0)
            active = y > 0.0
            alpha = np.where(active[:, None], w @ alpha, 0.0)
            beta = np.where(active, w @ beta + c, 0.0)
            masks.append(active.astype(np.uint8))
        elif layer.activation == "identity":
            y = pre
            alpha = w @ alpha
            beta = w @ beta + c
        else:
            raise UnsupportedActivationError(
                f"local affine tracing requires ReLU hidden layers, found '{layer.activation}'"
            )
    return alpha, beta, y


def local_affine(net: Network, x) -> AffinePiece:
    """Trace the affine piece of a (conv/residual) ReLU network at ``x``."""
    x = as_vector(x)
    if x.shape[0] != net.input_dim:
        raise ShapeError(
            f"input has length {x.shape[0]}, network expects {net.input_dim}"
        )
    alpha = np.eye(net.input_dim)
    beta = np.zeros(net.input_dim)
    masks = []
    alpha, beta, _ = _trace_layers(net.layers, alpha, beta, x.copy(), masks)
    return AffinePiece(alpha, beta, masks)


def local_affine_batch(net: Network, xs) -> list:
    """Trace each point in order; elementwise equal to mapping ``local_affine``."""
    out = []
    for i, x in enumerate(xs):
        try:
            out.append(local_affine(net, x))
        except (ShapeError, UnsupportedActivationError) as exc:
            raise type(exc)(f"batch index {i}: {exc}") from exc
    return out
