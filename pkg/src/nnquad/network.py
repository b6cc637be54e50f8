"""Network data model, forward evaluation, validation, and the JSON weight format.

A network is an ordered list of layers (dense, conv, residual) applied to an
input vector.  The last layer is always a dense affine map (activation
``identity``); hidden layers use ``relu``, ``tanh`` or ``sigmoid``.  Inside a
residual block the final inner layer may also be ``identity`` so the block can
end on an affine map before rejoining the skip path.

Values are treated as immutable after construction; ``forward`` and
``forward_batch`` are pure and thread-safe.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NetworkValidationError, ParseError, ShapeError
from .numerics import as_matrix, as_vector, conv_to_matrix

ACTIVATIONS = ("relu", "tanh", "sigmoid", "identity")
HIDDEN_ACTIVATIONS = ("relu", "tanh", "sigmoid")


def apply_activation(tag: str, y: np.ndarray) -> np.ndarray:
    if tag == "relu":
        return np.maximum(y, 0.0)
    if tag == "tanh":
        return np.tanh(y)
    if tag == "sigmoid":
        out = np.empty_like(y)
        pos = y >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-y[pos]))
        e = np.exp(y[~pos])
        out[~pos] = e / (1.0 + e)
        return out
    if tag == "identity":
        return y
    raise NetworkValidationError(f"unknown activation '{tag}'")


def _check_activation_tag(tag):
    if tag not in ACTIVATIONS:
        raise NetworkValidationError(
            f"unknown activation '{tag}' (expected one of {', '.join(ACTIVATIONS)})"
        )


@dataclass
class DenseLayer:
    weight: np.ndarray
    bias: np.ndarray
    activation: str

    def __post_init__(self):
        self.weight = as_matrix(self.weight)
        self.bias = as_vector(self.bias)
        _check_activation_tag(self.activation)
        if self.bias.shape[0] != self.weight.shape[0]:
            raise NetworkValidationError(
                f"dense layer bias length {self.bias.shape[0]} does not match "
                f"weight rows {self.weight.shape[0]}"
            )

    @property
    def in_dim(self):
        return self.weight.shape[1]

    @property
    def out_dim(self):
        return self.weight.shape[0]

    def affine_params(self):
        return self.weight, self.bias


@dataclass
class ConvLayer:
    kernel: np.ndarray
    bias: np.ndarray
    input_shape: tuple
    stride: int
    padding: int
    activation: str
    # dense lowering, computed once; forward and tracing always go through it
    matrix: np.ndarray = field(init=False, repr=False, compare=False)
    offset: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.kernel = as_matrix(self.kernel)
        self.bias = as_vector(self.bias)
        self.input_shape = tuple(int(s) for s in self.input_shape)
        self.stride = int(self.stride)
        self.padding = int(self.padding)
        _check_activation_tag(self.activation)
        self.matrix, self.offset = conv_to_matrix(
            self.kernel, self.bias, self.input_shape, self.stride, self.padding
        )

    @property
    def in_dim(self):
        return int(np.prod(self.input_shape))

    @property
    def out_dim(self):
        return self.offset.shape[0]

    def affine_params(self):
        return self.matrix, self.offset


@dataclass
class ResidualBlock:
    layers: list

    def __post_init__(self):
        if not self.layers:
            raise NetworkValidationError("residual block must contain at least one layer")
        for k, inner in enumerate(self.layers, start=1):
            if isinstance(inner, ResidualBlock):
                raise NetworkValidationError(
                    f"inner layer {k}: residual blocks cannot nest"
                )
            if not isinstance(inner, (DenseLayer, ConvLayer)):
                raise NetworkValidationError(
                    f"inner layer {k}: residual blocks may only hold dense or conv layers"
                )
            allowed = ACTIVATIONS if k == len(self.layers) else HIDDEN_ACTIVATIONS
            if inner.activation not in allowed:
                raise NetworkValidationError(
                    f"inner layer {k}: activation '{inner.activation}' is only "
                    "permitted on the final inner layer"
                )
        cur = self.layers[0].in_dim
        for k, inner in enumerate(self.layers, start=1):
            if inner.in_dim != cur:
                raise NetworkValidationError(
                    f"inner layer {k}: expects input width {inner.in_dim}, got {cur}"
                )
            cur = inner.out_dim
        if cur != self.layers[0].in_dim:
            raise NetworkValidationError(
                f"residual block output width {cur} does not match its input "
                f"width {self.layers[0].in_dim} (required for x + inner(x))"
            )

    @property
    def in_dim(self):
        return self.layers[0].in_dim

    @property
    def out_dim(self):
        return self.layers[0].in_dim


@dataclass
class Network:
    input_dim: int
    layers: list

    def __post_init__(self):
        self.input_dim = int(self.input_dim)
        validate(self)

    @property
    def output_dim(self):
        return self.layers[-1].out_dim


def validate(net: Network) -> None:
    """Check the full set of structural invariants, naming layers 1-based."""
    if net.input_dim < 1:
        raise NetworkValidationError(f"input_dim must be >= 1, got {net.input_dim}")
    if not net.layers:
        raise NetworkValidationError("network must contain at least one layer")
    cur = net.input_dim
    for i, layer in enumerate(net.layers, start=1):
        if not isinstance(layer, (DenseLayer, ConvLayer, ResidualBlock)):
            raise NetworkValidationError(f"layer {i}: unknown layer kind {type(layer).__name__}")
        if layer.in_dim != cur:
            raise NetworkValidationError(
                f"layer {i}: expects input width {layer.in_dim}, got {cur}"
            )
        cur = layer.out_dim
    last = net.layers[-1]
    n = len(net.layers)
    if not isinstance(last, DenseLayer):
        raise NetworkValidationError(f"layer {n}: final layer must be dense")
    if last.activation != "identity":
        raise NetworkValidationError(
            f"layer {n}: final layer must be affine (activation 'identity'), "
            f"got trailing activation '{last.activation}'"
        )
    for i, layer in enumerate(net.layers[:-1], start=1):
        if isinstance(layer, (DenseLayer, ConvLayer)) and layer.activation not in HIDDEN_ACTIVATIONS:
            raise NetworkValidationError(
                f"layer {i}: hidden activation must be one of "
                f"{', '.join(HIDDEN_ACTIVATIONS)}, got '{layer.activation}'"
            )


def activation_tags(net: Network):
    """All activation tags in evaluation order, residual inners included."""
    tags = []
    for layer in net.layers:
        if isinstance(layer, ResidualBlock):
            tags.extend(inner.activation for inner in layer.layers)
        else:
            tags.append(layer.activation)
    return tags


def is_pure_relu(net: Network) -> bool:
    """True when every nonlinearity in the network is a ReLU."""
    return all(t in ("relu", "identity") for t in activation_tags(net))


def _layers_forward(layers, v):
    for layer in layers:
        if isinstance(layer, ResidualBlock):
            v = v + _layers_forward(layer.layers, v)
        else:
            w, c = layer.affine_params()
            v = apply_activation(layer.activation, w @ v + c)
    return v


def forward(net: Network, x) -> np.ndarray:
    """Evaluate the network at one input vector."""
    x = as_vector(x)
    if x.shape[0] != net.input_dim:
        raise ShapeError(
            f"input has length {x.shape[0]}, network expects {net.input_dim}"
        )
    return _layers_forward(net.layers, x)


def forward_batch(net: Network, xs) -> list:
    """Evaluate the network at each input in order; equals mapping ``forward``."""
    out = []
    for i, x in enumerate(xs):
        try:
            out.append(forward(net, x))
        except ShapeError as exc:
            raise ShapeError(f"batch index {i}: {exc}") from exc
    return out


def dense_lowered(net: Network) -> Network:
    """Copy of the network with every conv layer replaced by its dense lowering."""

    def lower(layer):
        if isinstance(layer, ConvLayer):
            return DenseLayer(layer.matrix.copy(), layer.offset.copy(), layer.activation)
        if isinstance(layer, ResidualBlock):
            return ResidualBlock([lower(inner) for inner in layer.layers])
        return DenseLayer(layer.weight.copy(), layer.bias.copy(), layer.activation)

    return Network(net.input_dim, [lower(layer) for layer in net.layers])


# -- JSON weight format -------------------------------------------------------
#
# Top level: {"format_version": 1, "input_dim": int, "layers": [...]}
# Layer records, canonical key order as written here:
#   {"kind": "dense", "weight": [[...]], "bias": [...], "activation": "relu"}
#   {"kind": "conv", "kernel": [[...]], "bias": [...], "input_shape": [...],
#    "stride": 1, "padding": 0, "activation": "relu"}
#   {"kind": "residual", "layers": [...]}
# Floats use Python's shortest round-trip decimal form.

FORMAT_VERSION = 1


def _layer_record(layer):
    if isinstance(layer, DenseLayer):
        return {
            "kind": "dense",
            "weight": layer.weight.tolist(),
            "bias": layer.bias.tolist(),
            "activation": layer.activation,
        }
    if isinstance(layer, ConvLayer):
        return {
            "kind": "conv",
            "kernel": layer.kernel.tolist(),
            "bias": layer.bias.tolist(),
            "input_shape": list(layer.input_shape),
            "stride": layer.stride,
            "padding": layer.padding,
            "activation": layer.activation,
        }
    return {
        "kind": "residual",
        "layers": [_layer_record(inner) for inner in layer.layers],
    }


def save_network(net: Network) -> str:
    """Serialize to the canonical JSON text; deterministic, byte for byte."""
    doc = {
        "format_version": FORMAT_VERSION,
        "input_dim": net.input_dim,
        "layers": [_layer_record(layer) for layer in net.layers],
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _require_keys(record, keys, where):
    for key in keys:
        if key not in record:
            raise NetworkValidationError(f"{where}: missing key '{key}'")


def _float_grid(value, where):
    try:
        m = as_matrix(value)
    except (ShapeError, ValueError) as exc:
        raise NetworkValidationError(f"{where}: {exc}") from exc
    return m


def _layer_from_record(record, where, allow_residual=True):
    if not isinstance(record, dict):
        raise NetworkValidationError(f"{where}: layer record must be an object")
    kind = record.get("kind")
    try:
        if kind == "dense":
            _require_keys(record, ("weight", "bias", "activation"), where)
            return DenseLayer(
                _float_grid(record["weight"], where),
                record["bias"],
                record["activation"],
            )
        if kind == "conv":
            _require_keys(
                record,
                ("kernel", "bias", "input_shape", "stride", "padding", "activation"),
                where,
            )
            return ConvLayer(
                _float_grid(record["kernel"], where),
                record["bias"],
                record["input_shape"],
                record["stride"],
                record["padding"],
                record["activation"],
            )
        if kind == "residual":
            if not allow_residual:
                raise NetworkValidationError(f"{where}: residual blocks cannot nest")
            _require_keys(record, ("layers",), where)
            inner = [
                _layer_from_record(rec, f"{where}, inner layer {k}", allow_residual=False)
                for k, rec in enumerate(record["layers"], start=1)
            ]
            return ResidualBlock(inner)
    except (ShapeError, ValueError) as exc:
        if isinstance(exc, NetworkValidationError) and str(exc).startswith(where):
            raise
        raise NetworkValidationError(f"{where}: {exc}") from exc
    raise NetworkValidationError(f"{where}: unknown layer kind '{kind}'")


def load_network(text) -> Network:
    """Parse and validate a weight file; inverse of ``save_network``."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise NetworkValidationError("weight file must hold a JSON object")
    if doc.get("format_version") != FORMAT_VERSION:
        raise NetworkValidationError(
            f"unsupported format_version {doc.get('format_version')!r} (expected {FORMAT_VERSION})"
        )
    if "input_dim" not in doc or "layers" not in doc:
        raise NetworkValidationError("weight file needs 'input_dim' and 'layers'")
    if not isinstance(doc["layers"], list) or not doc["layers"]:
        raise NetworkValidationError("'layers' must be a non-empty list")
    layers = [
        _layer_from_record(rec, f"layer {i}")
        for i, rec in enumerate(doc["layers"], start=1)
    ]
    return Network(doc["input_dim"], layers)


def parameter_count(net: Network) -> int:
    def count(layer):
        if isinstance(layer, ResidualBlock):
            return sum(count(inner) for inner in layer.layers)
        if isinstance(layer, ConvLayer):
            return layer.kernel.size + layer.bias.size
        return layer.weight.size + layer.bias.size

    return sum(count(layer) for layer in net.layers)


def describe(net: Network) -> str:
    """Human-readable shape summary used by the CLI ``info`` command."""
    lines = [f"input_dim: {net.input_dim}"]
    for i, layer in enumerate(net.layers, start=1):
        if isinstance(layer, DenseLayer):
            lines.append(
                f"layer {i}: dense {layer.in_dim} -> {layer.out_dim} ({layer.activation})"
            )
        elif isinstance(layer, ConvLayer):
            lines.append(
                f"layer {i}: conv kernel {layer.kernel.shape[0]}x{layer.kernel.shape[1]} "
                f"on {layer.input_shape}, stride {layer.stride}, padding {layer.padding} "
                f"-> {layer.out_dim} ({layer.activation})"
            )
        else:
            inner = ", ".join(
                f"{l.in_dim}->{l.out_dim} ({l.activation})" for l in layer.layers
            )
            lines.append(f"layer {i}: residual [{inner}]")
    lines.append(f"output_dim: {net.output_dim}")
    lines.append(f"parameters: {parameter_count(net)}")
    return "\n".join(lines)
