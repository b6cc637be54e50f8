"""Piecewise integration of multi-layer ReLU networks along a coordinate line.

The network restricted to a line is piecewise linear.  On each partition
subinterval we trace the affine piece at a representative point, take the
quadratic antiderivative of that piece along the coordinate (``poly_eval``),
and stitch the per-piece antiderivatives into one continuous curve by
accumulating the constant jump at every partition point.

The representative point is either the subinterval's left endpoint or its
midpoint.  Left mode matches the corrector recursion verbatim but picks a
one-sided piece whenever a partition point sits exactly on a breakpoint
(strict activity masks), which corrupts that subinterval; midpoint mode is
therefore the default.

``breakpoints_1d`` and ``exact_integral_1d`` form the exact oracle for scalar
inputs: propagate pieces layer by layer, solve each neuron's affine
pre-activation for its zero crossing, and integrate with the breakpoints as
the partition, which makes the midpoint rule exact up to rounding.
"""

from dataclasses import dataclass

import numpy as np

from .affine_trace import AffinePiece, local_affine
from .errors import (
    InvalidPartitionError,
    PieceLimitError,
    ShapeError,
    StructureError,
    UnsupportedActivationError,
)
from .network import Network, ResidualBlock, is_pure_relu
from .numerics import as_vector

_PIECE_LIMIT = 100_000
_BREAKPOINT_DEDUP = 1e-12


@dataclass
class LineSegment:
    """Integration line: base point, varying coordinate, and its bounds."""

    base_point: np.ndarray
    coord: int
    lo: float
    hi: float

    def __post_init__(self):
        self.base_point = as_vector(self.base_point)
        self.coord = int(self.coord)
        self.lo = float(self.lo)
        self.hi = float(self.hi)
        if not 0 <= self.coord < self.base_point.shape[0]:
            raise ShapeError(
                f"coordinate {self.coord} out of range for dimension {self.base_point.shape[0]}"
            )
        if self.lo > self.hi:
            raise InvalidPartitionError(f"segment bounds must satisfy lo <= hi, got [{self.lo}, {self.hi}]")

    def point_at(self, t):
        p = self.base_point.copy()
        p[self.coord] = t
        return p


@dataclass
class Partition:
    """Strictly increasing partition points plus the representative mode."""

    points: np.ndarray
    mode: str = "midpoint"

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 1 or self.points.shape[0] < 2:
            raise InvalidPartitionError("partition needs at least two points")
        if not np.all(np.diff(self.points) > 0):
            raise InvalidPartitionError("partition points must be strictly increasing")
        if self.mode not in ("left", "midpoint"):
            raise InvalidPartitionError(f"mode must be 'left' or 'midpoint', got '{self.mode}'")


@dataclass
class CorrectedIntegral:
    """Continuous accumulation of the per-piece antiderivatives.

    ``total`` holds one value per output component; ``samples[i]`` is the
    corrected antiderivative at partition point i (samples[0] == 0 and
    samples[-1] == total exactly); ``constants[p]`` is the accumulated jump
    constant attached to piece p.
    """

    points: np.ndarray
    total: np.ndarray
    samples: np.ndarray
    constants: np.ndarray
    mode: str


def poly_eval(piece: AffinePiece, coord: int, x) -> np.ndarray:
    """Antiderivative of the affine piece along ``coord``, zero constant term.

    Row r evaluates to alpha[r, j]/2 * x_j^2 + (sum_{k != j} alpha[r, k] x_k
    + beta[r]) * x_j.
    """
    x = as_vector(x)
    alpha = piece.alpha
    beta = piece.beta
    n_out, n_in = alpha.shape
    if x.shape[0] != n_in:
        raise ShapeError(f"point has length {x.shape[0]}, piece expects {n_in}")
    if not 0 <= coord < n_in:
        raise IndexError(f"coordinate {coord} out of range for dimension {n_in}")
    xj = x[coord]
    if n_in == 1:
        lin = np.zeros(n_out)
    else:
        keep = np.arange(n_in) != coord
        lin = alpha[:, keep] @ x[keep]
    return 0.5 * alpha[:, coord] * (xj * xj) + (lin + beta) * xj


def _require_relu(net: Network, op_name: str):
    if not is_pure_relu(net):
        raise UnsupportedActivationError(f"{op_name} requires a pure-ReLU network")


def corrected_integral(net: Network, seg: LineSegment, part: Partition) -> CorrectedIntegral:
    """Integrate the network along the segment using the jump-corrector scheme.

    One affine piece is traced per subinterval (after the appropriate
    representative); the running constant C_p = Poly[p-1](z_p) - Poly[p](z_p)
    + C_{p-1} (zero virtual piece ahead of the first) removes the jump at
    every partition point, and the corrected samples are Poly[p](z_p) + C_p.
    The summation order is fixed, so results are bitwise reproducible.
    """
    _require_relu(net, "corrected_integral")
    if seg.base_point.shape[0] != net.input_dim:
        raise ShapeError(
            f"segment base point has length {seg.base_point.shape[0]}, "
            f"network expects {net.input_dim}"
        )
    z = part.points
    if z[0] != seg.lo or z[-1] != seg.hi:
        raise InvalidPartitionError(
            f"partition must start at {seg.lo} and end at {seg.hi}, "
            f"got [{z[0]}, {z[-1]}]"
        )
    n = z.shape[0]
    if part.mode == "left":
        reps = z
    else:
        reps = 0.5 * (z[:-1] + z[1:])
    pieces = [local_affine(net, seg.point_at(t)) for t in reps]
    m = len(pieces)
    n_out = net.output_dim

    samples = np.zeros((n, n_out))
    constants = np.zeros((m, n_out))
    c_run = np.zeros(n_out)
    for p in range(m):
        cur_at_zp = poly_eval(pieces[p], seg.coord, seg.point_at(z[p]))
        if p == 0:
            prev_at_zp = np.zeros(n_out)
        else:
            prev_at_zp = poly_eval(pieces[p - 1], seg.coord, seg.point_at(z[p]))
        c_run = (prev_at_zp - cur_at_zp) + c_run
        constants[p] = c_run
        samples[p] = cur_at_zp + c_run
    for i in range(m, n):
        samples[i] = poly_eval(pieces[m - 1], seg.coord, seg.point_at(z[i])) + c_run
    total = samples[n - 1].copy()
    return CorrectedIntegral(z.copy(), total, samples, constants, part.mode)


def antiderivative_curve(net: Network, seg: LineSegment, part: Partition) -> list:
    """Corrected antiderivative samples as (z_i, value-vector) pairs."""
    result = corrected_integral(net, seg, part)
    return [(float(zi), result.samples[i]) for i, zi in enumerate(result.points)]


@dataclass
class _Piece:
    lo: float
    hi: float
    slope: np.ndarray
    intercept: np.ndarray
    saved: tuple = None  # representation at residual-block entry


def _split_on_layer(pieces, w, c, activation, cuts):
    out = []
    for piece in pieces:
        pre_s = w @ piece.slope
        pre_t = w @ piece.intercept + c
        if activation == "identity":
            out.append(_Piece(piece.lo, piece.hi, pre_s, pre_t, piece.saved))
            continue
        roots = []
        for r in range(pre_s.shape[0]):
            if pre_s[r] != 0.0:
                root = -pre_t[r] / pre_s[r]
                if piece.lo < root < piece.hi:
                    roots.append(root)
        bounds = [piece.lo] + sorted(set(roots)) + [piece.hi]
        cuts.extend(bounds[1:-1])
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            mid = 0.5 * (lo + hi)
            active = pre_s * mid + pre_t > 0.0
            out.append(
                _Piece(
                    lo,
                    hi,
                    np.where(active, pre_s, 0.0),
                    np.where(active, pre_t, 0.0),
                    piece.saved,
                )
            )
    if len(out) > _PIECE_LIMIT:
        raise PieceLimitError(
            f"piece splitting exceeded {_PIECE_LIMIT} regions; the network is too"
            " kink-dense for the exact oracle"
        )
    return out


def _split_layers(layers, pieces, cuts):
    for layer in layers:
        if isinstance(layer, ResidualBlock):
            for piece in pieces:
                piece.saved = (piece.slope, piece.intercept)
            pieces = _split_layers(layer.layers, pieces, cuts)
            for piece in pieces:
                s0, t0 = piece.saved
                piece.slope = s0 + piece.slope
                piece.intercept = t0 + piece.intercept
                piece.saved = None
            continue
        w, c = layer.affine_params()
        pieces = _split_on_layer(pieces, w, c, layer.activation, cuts)
    return pieces


def breakpoints_1d(net: Network, a: float, b: float) -> np.ndarray:
    """All interior points of (a, b) where some neuron's pre-activation crosses zero.

    Propagates affine pieces layer by layer: inside a piece every
    pre-activation is affine in the scalar input, so each crossing is the root
    of a linear function.  Returned sorted, deduplicated within 1e-12.
    Splitting is capped at 100000 regions and fails loudly beyond.
    """
    if net.input_dim != 1:
        raise StructureError(
            f"breakpoint search requires a scalar input, got dim {net.input_dim}"
        )
    _require_relu(net, "breakpoints_1d")
    a = float(a)
    b = float(b)
    if a >= b:
        raise StructureError(f"need a < b, got [{a}, {b}]")
    cuts = []
    pieces = [_Piece(a, b, np.array([1.0]), np.array([0.0]))]
    _split_layers(net.layers, pieces, cuts)
    if not cuts:
        return np.empty(0)
    cuts.sort()
    dedup = [cuts[0]]
    for value in cuts[1:]:
        if value - dedup[-1] > _BREAKPOINT_DEDUP:
            dedup.append(value)
    return np.array(dedup)


def exact_integral_1d(net: Network, a: float, b: float):
    """Integral of a scalar-input ReLU network over [a, b], exact up to rounding.

    Runs the corrected midpoint scheme on the partition formed by the interval
    endpoints and every breakpoint, so no subinterval contains a kink.
    Returns a float for single-output networks, else the per-output vector.
    """
    bps = breakpoints_1d(net, a, b)
    points = np.concatenate([[a], bps, [b]])
    seg = LineSegment(np.zeros(1), 0, a, b)
    result = corrected_integral(net, seg, Partition(points, "midpoint"))
    if result.total.shape[0] == 1:
        return float(result.total[0])
    return result.total
