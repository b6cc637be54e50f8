"""Shared builders and independent oracles for the test suite.

The evaluators here deliberately re-derive everything from raw layer
parameters (no calls into forward/trace/closed-form code paths) so they can
serve as independent cross-checks.
"""

import numpy as np

from nnquad.baselines import reference_quadrature
from nnquad.network import ConvLayer, DenseLayer, Network, ResidualBlock


def hat_network():
    """ReLU(x) - ReLU(x - 1): the unit hat with kinks at 0 and 1."""
    return Network(
        1,
        [
            DenseLayer([[1.0], [1.0]], [0.0, -1.0], "relu"),
            DenseLayer([[1.0, -1.0]], [0.0], "identity"),
        ],
    )


def random_dense_relu_net(rng, input_dim=1, output_dim=1, max_depth=3, max_width=8,
                          weight_scale=1.0, bias_scale=0.5, activation="relu"):
    depth = int(rng.integers(1, max_depth + 1))
    widths = [input_dim] + [int(rng.integers(1, max_width + 1)) for _ in range(depth)] + [output_dim]
    layers = []
    for i in range(1, len(widths)):
        tag = activation if i < len(widths) - 1 else "identity"
        layers.append(
            DenseLayer(
                rng.normal(0.0, weight_scale, (widths[i], widths[i - 1])),
                rng.normal(0.0, bias_scale, widths[i]),
                tag,
            )
        )
    return Network(input_dim, layers)


def one_layer_net(rng, input_dim, width, activation):
    return Network(
        input_dim,
        [
            DenseLayer(rng.normal(0.0, 1.0, (width, input_dim)),
                       rng.normal(0.0, 0.5, width), activation),
            DenseLayer(rng.normal(0.0, 1.0, (1, width)),
                       rng.normal(0.0, 0.5, 1), "identity"),
        ],
    )


def batch_eval(net, xs):
    """Row-batched network evaluation straight from layer parameters."""
    a = np.atleast_2d(np.asarray(xs, dtype=np.float64))

    def act(tag, z):
        if tag == "relu":
            return np.maximum(z, 0.0)
        if tag == "tanh":
            return np.tanh(z)
        if tag == "sigmoid":
            return 1.0 / (1.0 + np.exp(-z))
        return z

    def run(layers, a):
        for layer in layers:
            if isinstance(layer, ResidualBlock):
                a = a + run(layer.layers, a)
            else:
                w, c = layer.affine_params()
                a = act(layer.activation, a @ w.T + c)
        return a

    return run(net.layers, a)


def scalar_eval(net, t):
    """Scalar-input scalar-output evaluation via batch_eval."""
    return float(batch_eval(net, np.array([[t]]))[0, 0])


def min_preact_gap(net, x):
    """Smallest |pre-activation| over all ReLU neurons at x (kink proximity)."""
    gap = np.inf
    v = np.asarray(x, dtype=np.float64)

    def walk(layers, v):
        nonlocal gap
        for layer in layers:
            if isinstance(layer, ResidualBlock):
                v = v + walk(layer.layers, v.copy())
                continue
            w, c = layer.affine_params()
            pre = w @ v + c
            if layer.activation == "relu":
                gap = min(gap, float(np.min(np.abs(pre))))
                v = np.maximum(pre, 0.0)
            elif layer.activation == "tanh":
                v = np.tanh(pre)
            elif layer.activation == "sigmoid":
                v = 1.0 / (1.0 + np.exp(-pre))
            else:
                v = pre
        return v

    walk(net.layers, v)
    return gap


def direct_convolution(kernel, bias, x, input_shape, stride, padding):
    """Sliding-window (cross-correlation) oracle for the dense lowering."""
    kernel = np.asarray(kernel, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if len(input_shape) == 1:
        grid = x.reshape(1, input_shape[0])
        pad_h = 0
    else:
        grid = x.reshape(input_shape)
        pad_h = padding
    padded = np.pad(grid, ((pad_h, pad_h), (padding, padding)))
    kh, kw = kernel.shape
    out_h = (padded.shape[0] - kh) // stride + 1
    out_w = (padded.shape[1] - kw) // stride + 1
    out = np.empty(out_h * out_w)
    b = np.asarray(bias, dtype=np.float64)
    for oi in range(out_h):
        for oj in range(out_w):
            window = padded[oi * stride : oi * stride + kh, oj * stride : oj * stride + kw]
            idx = oi * out_w + oj
            out[idx] = float(np.sum(window * kernel)) + (b[0] if b.shape[0] == 1 else b[idx])
    return out


def _one_layer_params(net):
    hidden, out = net.layers
    return hidden.weight, hidden.bias, out.weight[0], float(out.bias[0])


def exact_line_integral_relu(net, fixed, axis, lo, hi):
    """Exact 1-D slice integral of a one-hidden-layer ReLU net.

    Holds every coordinate except ``axis`` at ``fixed``, finds each neuron's
    kink along the axis, and applies the trapezoid rule between consecutive
    kinks (exact on linear pieces).  Independent of the antiderivative table.
    """
    w1, b1, w2, b2 = _one_layer_params(net)
    rest = b1 + w1 @ fixed - w1[:, axis] * fixed[axis]
    kinks = []
    for i in range(w1.shape[0]):
        if w1[i, axis] != 0.0:
            root = -rest[i] / w1[i, axis]
            if lo < root < hi:
                kinks.append(root)
    knots = np.array(sorted({lo, hi, *kinks}))

    def value(t):
        pre = w1[:, axis] * t + rest
        return float(w2 @ np.maximum(pre, 0.0) + b2)

    total = 0.0
    for left, right in zip(knots[:-1], knots[1:]):
        total += (right - left) * 0.5 * (value(left) + value(right))
    return total


def tensor_grid_box_integral(net, box, tol=1e-7):
    """Iterated tensor-product quadrature of a one-hidden-layer ReLU net.

    The innermost axis is integrated exactly between kinks; the remaining
    axes run through adaptive Simpson.  Total error stays well under ``tol``
    times the number of outer axes.
    """
    bounds = box.bounds
    n = len(bounds)

    def level(fixed, axis):
        if axis == n - 1:
            return exact_line_integral_relu(net, np.array(fixed + [0.0]), axis,
                                            bounds[axis][0], bounds[axis][1])

        def g(t):
            return level(fixed + [t], axis + 1)

        # integrate over the *next* axis value t at position `axis`
        return reference_quadrature(g, bounds[axis][0], bounds[axis][1], tol).estimate

    if n == 1:
        return exact_line_integral_relu(net, np.zeros(1), 0, bounds[0][0], bounds[0][1])
    return level([], 0)
