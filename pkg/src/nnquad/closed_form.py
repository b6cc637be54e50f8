"""Exact integrals of one-hidden-layer networks.

Two routes are covered:

* an interval integral along a scalar input, which reduces per neuron to the
  first antiderivative of the activation, and
* an axis-aligned box integral in n dimensions, done by antidifferentiating
  one coordinate at a time.  Each pass turns a term ``c * s_k(w.x + b)`` with
  ``w_j != 0`` into two boundary terms of order k+1, so the activation needs
  antiderivatives up to order n.  ReLU and identity have them at every order;
  tanh and sigmoid stop at order one (higher ones need polylogarithms), which
  limits those activations to 1-D boxes.

Antiderivative orders are normalized so order 0 is the activation itself and
each order integrates the one below, with the constant fixed by a zero value
at t -> -inf (relu, sigmoid) or t = 0 (tanh, identity).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, StructureError, UnsupportedOrderError
from .network import DenseLayer, Network

# maximum supported antiderivative order per activation; None = unbounded
MAX_ORDER = {"relu": None, "identity": None, "tanh": 1, "sigmoid": 1}

_LN2 = math.log(2.0)


def _relu_antiderivative(order, t):
    if t <= 0.0:
        return 0.0
    return t ** (order + 1) / math.factorial(order + 1)


def _identity_antiderivative(order, t):
    return t ** (order + 1) / math.factorial(order + 1)


def _log_cosh(t):
    # |t| - ln 2 + log1p(e^{-2|t|}) avoids overflow of cosh for large |t|
    a = abs(t)
    return a - _LN2 + math.log1p(math.exp(-2.0 * a))


def _softplus(t):
    return max(t, 0.0) + math.log1p(math.exp(-abs(t)))


def _sigmoid(t):
    if t >= 0.0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


def max_order(activation: str):
    if activation not in MAX_ORDER:
        raise UnsupportedOrderError(f"no antiderivative table for activation '{activation}'")
    return MAX_ORDER[activation]


def antiderivative(activation: str, order: int, t: float) -> float:
    """Evaluate the order-th antiderivative of the activation at ``t``.

    Order 0 is the activation itself; d/dt of order k is order k-1.
    """
    order = int(order)
    if order < 0:
        raise UnsupportedOrderError(f"antiderivative order must be >= 0, got {order}")
    cap = max_order(activation)
    if cap is not None and order > cap:
        raise UnsupportedOrderError(
            f"activation '{activation}' supports antiderivative orders up to {cap}, "
            f"got {order}"
        )
    t = float(t)
    if activation == "relu":
        return _relu_antiderivative(order, t)
    if activation == "identity":
        return _identity_antiderivative(order, t)
    if activation == "tanh":
        return math.tanh(t) if order == 0 else _log_cosh(t)
    # sigmoid
    return _sigmoid(t) if order == 0 else _softplus(t)


@dataclass(frozen=True)
class AntiderivativeSpec:
    """Activation tag plus the antiderivative orders available for it."""

    activation: str
    max_order: object  # int or None for unbounded

    def evaluate(self, order, t):
        return antiderivative(self.activation, order, t)


def antiderivative_spec(activation: str) -> AntiderivativeSpec:
    return AntiderivativeSpec(activation, max_order(activation))


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given as one closed interval [a_i, b_i] per dimension."""

    bounds: tuple

    def __init__(self, bounds):
        pairs = []
        for i, (lo, hi) in enumerate(bounds):
            lo = float(lo)
            hi = float(hi)
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ShapeError(f"box dimension {i}: bounds must be finite")
            if lo > hi:
                raise ShapeError(f"box dimension {i}: lower bound {lo} exceeds upper bound {hi}")
            pairs.append((lo, hi))
        if not pairs:
            raise ShapeError("box needs at least one dimension")
        object.__setattr__(self, "bounds", tuple(pairs))

    @property
    def dim(self):
        return len(self.bounds)

    @property
    def volume(self):
        v = 1.0
        for lo, hi in self.bounds:
            v *= hi - lo
        return v

    def is_degenerate(self):
        return any(lo == hi for lo, hi in self.bounds)


def _one_layer_parts(net: Network, op_name: str):
    if len(net.layers) != 2 or not all(isinstance(l, DenseLayer) for l in net.layers):
        raise StructureError(
            f"{op_name} requires exactly one hidden dense layer plus the affine output layer"
        )
    hidden, out = net.layers
    if out.out_dim != 1:
        raise StructureError(f"{op_name} requires a scalar output, got width {out.out_dim}")
    return hidden, out


def integrate_one_layer_interval(net: Network, a: float, x: float) -> float:
    """Exact integral of a one-hidden-layer scalar network over [a, x].

    Per neuron the contribution is the activation antiderivative evaluated at
    the interval ends divided by the neuron's input weight; a zero weight
    degenerates to the constant integrand sigma(bias).
    """
    hidden, out = _one_layer_parts(net, "integrate_one_layer_interval")
    if net.input_dim != 1:
        raise StructureError(
            f"integrate_one_layer_interval requires a scalar input, got dim {net.input_dim}"
        )
    a = float(a)
    x = float(x)
    act = hidden.activation
    w = hidden.weight[:, 0]
    b = hidden.bias
    z = np.empty(w.shape[0])
    for i in range(w.shape[0]):
        if w[i] != 0.0:
            upper = antiderivative(act, 1, w[i] * x + b[i])
            lower = antiderivative(act, 1, w[i] * a + b[i])
            z[i] = (upper - lower) / w[i]
        else:
            z[i] = antiderivative(act, 0, b[i]) * (x - a)
    return float(out.weight[0] @ z + out.bias[0] * (x - a))


def integrate_one_layer_box(net: Network, box: Box, dim_order=None) -> float:
    """Exact integral of a one-hidden-layer network over an axis-aligned box.

    Antidifferentiates dimension by dimension.  Terms grow by a factor of two
    per dimension, so the input dimension is capped at 12.  ``dim_order``
    optionally fixes the order in which dimensions are processed (the result
    is invariant up to rounding).
    """
    hidden, out = _one_layer_parts(net, "integrate_one_layer_box")
    n = net.input_dim
    if box.dim != n:
        raise ShapeError(f"box has {box.dim} dimensions, network expects {n}")
    if n > 12:
        raise StructureError(f"box integration is capped at 12 dimensions, got {n}")
    act = hidden.activation
    cap = max_order(act)
    if cap is not None and cap < n:
        raise UnsupportedOrderError(
            f"activation '{act}' supports antiderivative orders up to {cap}; "
            f"integrating a {n}-D box needs order {n}"
        )
    if box.is_degenerate():
        return 0.0
    if dim_order is None:
        dim_order = range(n)
    dims = [int(j) for j in dim_order]
    if sorted(dims) != list(range(n)):
        raise ShapeError(f"dim_order must be a permutation of 0..{n - 1}, got {dim_order}")

    # term := (coeff, order, w, b) standing for coeff * s_order(w.x + b)
    w2 = out.weight[0]
    terms = [
        (float(w2[i]), 0, hidden.weight[i].copy(), float(hidden.bias[i]))
        for i in range(hidden.out_dim)
    ]
    for j in dims:
        lo, hi = box.bounds[j]
        folded = []
        for coeff, order, w, b in terms:
            wj = w[j]
            if wj == 0.0:
                folded.append((coeff * (hi - lo), order, w, b))
                continue
            w_rest = w.copy()
            w_rest[j] = 0.0
            folded.append((coeff / wj, order + 1, w_rest, b + wj * hi))
            folded.append((-coeff / wj, order + 1, w_rest, b + wj * lo))
        terms = folded

    total = sum(coeff * antiderivative(act, order, b) for coeff, order, _, b in terms)
    return float(total + out.bias[0] * box.volume)
