import numpy as np
import pytest

from nnquad.affine_trace import AffinePiece, local_affine
from nnquad.baselines import reference_quadrature
from nnquad.errors import (
    InvalidPartitionError,
    StructureError,
    UnsupportedActivationError,
)
from nnquad.network import DenseLayer, Network
from nnquad.piecewise import (
    LineSegment,
    Partition,
    antiderivative_curve,
    breakpoints_1d,
    corrected_integral,
    exact_integral_1d,
    poly_eval,
)

from helpers import batch_eval, hat_network, random_dense_relu_net, scalar_eval


def _segment(a, b):
    return LineSegment(np.zeros(1), 0, a, b)


def _zero_network():
    return Network(
        1,
        [
            DenseLayer([[0.0], [0.0]], [0.0, 0.0], "relu"),
            DenseLayer([[0.0, 0.0]], [0.0], "identity"),
        ],
    )


# -- poly_eval ------------------------------------------------------------


def test_poly_eval_pure_slope():
    piece = AffinePiece(np.array([[1.0]]), np.array([0.0]), [])
    assert np.array_equal(poly_eval(piece, 0, [2.0]), [2.0])


def test_poly_eval_pure_constant():
    piece = AffinePiece(np.array([[0.0]]), np.array([1.0]), [])
    assert np.array_equal(poly_eval(piece, 0, [2.0]), [2.0])


def test_poly_eval_mixed_coordinates():
    piece = AffinePiece(np.array([[1.0, 2.0]]), np.array([3.0]), [])
    assert np.array_equal(poly_eval(piece, 0, [2.0, 0.5]), [10.0])


def test_poly_eval_coordinate_out_of_range():
    piece = AffinePiece(np.array([[1.0]]), np.array([0.0]), [])
    with pytest.raises(IndexError):
        poly_eval(piece, 1, [2.0])


# -- corrected_integral ----------------------------------------------------


def test_hat_midpoint_fine_partition():
    result = corrected_integral(
        hat_network(), _segment(0.0, 2.0), Partition([0.0, 0.5, 1.0, 1.5, 2.0])
    )
    assert result.total[0] == pytest.approx(1.5, abs=1e-15)


def test_hat_midpoint_coarse_partition_shows_kink_error():
    result = corrected_integral(hat_network(), _segment(0.0, 2.0), Partition([0.0, 2.0]))
    assert result.total[0] == pytest.approx(2.0, abs=1e-15)


def test_zero_network_integrates_to_zero():
    result = corrected_integral(
        _zero_network(), _segment(-1.0, 3.0), Partition([-1.0, 0.0, 2.0, 3.0])
    )
    assert np.all(result.total == 0.0)
    assert np.all(result.constants == 0.0)
    assert np.all(result.samples == 0.0)


def test_partition_validation():
    with pytest.raises(InvalidPartitionError):
        Partition([0.0])
    with pytest.raises(InvalidPartitionError):
        Partition([0.0, 0.0, 1.0])
    with pytest.raises(InvalidPartitionError):
        Partition([0.0, 1.0], mode="center")
    with pytest.raises(InvalidPartitionError):
        corrected_integral(hat_network(), _segment(0.0, 2.0), Partition([0.0, 1.0]))


def test_non_relu_network_rejected():
    net = Network(1, [DenseLayer([[1.0]], [0.0], "sigmoid"), DenseLayer([[1.0]], [0.0], "identity")])
    with pytest.raises(UnsupportedActivationError):
        corrected_integral(net, _segment(0.0, 1.0), Partition([0.0, 1.0]))


def test_corrected_samples_form():
    result = corrected_integral(
        hat_network(), _segment(0.0, 2.0), Partition([0.0, 0.5, 1.0, 1.5, 2.0])
    )
    assert result.samples[0, 0] == 0.0
    assert result.samples[-1, 0] == result.total[0]
    assert np.array_equal(result.samples[:, 0], [0.0, 0.125, 0.5, 1.0, 1.5])


def test_left_mode_breaks_on_exact_breakpoints():
    # the strict mask at z=0 selects the all-inactive piece, so the curve is
    # wrong on [0, 1] in left mode while midpoint mode stays exact
    seg = _segment(0.0, 2.0)
    left = corrected_integral(hat_network(), seg, Partition([0.0, 1.0, 2.0], "left"))
    mid = corrected_integral(hat_network(), seg, Partition([0.0, 1.0, 2.0], "midpoint"))
    assert np.array_equal(mid.samples[:, 0], [0.0, 0.5, 1.5])
    assert left.samples[1, 0] == 0.0  # corrupted subinterval


def test_corrector_recursion_transcription_matches_left_mode():
    # direct transcription of the jump-correction recursion, explicit zero
    # initial piece and final subtraction included
    def transcription(net, seg, points):
        n_out = net.output_dim
        zero_piece = AffinePiece(np.zeros((n_out, net.input_dim)), np.zeros(n_out), [])
        c = np.zeros(n_out)
        prev = zero_piece
        last = None
        for z in points:
            cur = local_affine(net, seg.point_at(z))
            c = (
                poly_eval(prev, seg.coord, seg.point_at(z))
                - poly_eval(cur, seg.coord, seg.point_at(z))
            ) + c
            prev = cur
            last = cur
        return (
            poly_eval(last, seg.coord, seg.point_at(points[-1]))
            - poly_eval(zero_piece, seg.coord, seg.point_at(points[0]))
        ) + c

    rng = np.random.default_rng(30)
    for _ in range(100):
        net = random_dense_relu_net(rng, max_depth=3, max_width=8)
        a, b = np.sort(rng.uniform(-3.0, 3.0, 2))
        if b - a < 0.1:
            b = a + 0.5
        interior = rng.uniform(a, b, int(rng.integers(1, 10)))
        points = np.unique(np.concatenate([[a, b], interior]))
        seg = _segment(a, b)
        expected = transcription(net, seg, points)
        got = corrected_integral(net, seg, Partition(points, "left"))
        assert np.array_equal(got.total, expected)


def test_continuity_of_corrected_samples():
    # jump removal at interior points is exact up to final rounding of the
    # accumulated constants
    rng = np.random.default_rng(31)
    for _ in range(50):
        net = random_dense_relu_net(rng, max_depth=3, max_width=8)
        a, b = np.sort(rng.uniform(-2.0, 2.0, 2))
        if b - a < 0.1:
            b = a + 1.0
        points = np.unique(np.concatenate([[a, b], rng.uniform(a, b, 7)]))
        seg = _segment(a, b)
        result = corrected_integral(net, seg, Partition(points, "midpoint"))
        assert np.all(result.samples[0] == 0.0)
        assert np.array_equal(result.samples[-1], result.total)
        pieces = [
            local_affine(net, seg.point_at(0.5 * (points[i] + points[i + 1])))
            for i in range(len(points) - 1)
        ]
        for i in range(len(pieces)):
            left_val = (
                poly_eval(pieces[i], 0, seg.point_at(points[i + 1])) + result.constants[i]
            )
            scale = max(1.0, float(np.max(np.abs(result.samples))))
            assert np.max(np.abs(result.samples[i + 1] - left_val)) <= 4e-16 * scale


def test_vector_output_integrates_componentwise():
    net = Network(
        1,
        [
            DenseLayer([[1.0], [1.0]], [0.0, -1.0], "relu"),
            DenseLayer([[1.0, -1.0], [2.0, -2.0]], [0.0, 0.0], "identity"),
        ],
    )
    result = corrected_integral(
        net, _segment(0.0, 2.0), Partition([0.0, 0.5, 1.0, 1.5, 2.0])
    )
    assert result.total[0] == pytest.approx(1.5, abs=1e-15)
    assert result.total[1] == pytest.approx(3.0, abs=1e-15)


# -- antiderivative_curve ----------------------------------------------------


def test_curve_hat():
    curve = antiderivative_curve(
        hat_network(), _segment(0.0, 2.0), Partition([0.0, 0.5, 1.0, 1.5, 2.0])
    )
    zs = [z for z, _ in curve]
    vals = [v[0] for _, v in curve]
    assert zs == [0.0, 0.5, 1.0, 1.5, 2.0]
    assert vals == [0.0, 0.125, 0.5, 1.0, 1.5]


def test_curve_zero_network():
    curve = antiderivative_curve(
        _zero_network(), _segment(0.0, 1.0), Partition([0.0, 0.5, 1.0])
    )
    assert all(v[0] == 0.0 for _, v in curve)


def test_curve_last_sample_equals_total():
    rng = np.random.default_rng(32)
    net = random_dense_relu_net(rng)
    points = np.linspace(-1.0, 1.0, 9)
    seg = _segment(-1.0, 1.0)
    result = corrected_integral(net, seg, Partition(points))
    curve = antiderivative_curve(net, seg, Partition(points))
    assert np.array_equal(curve[-1][1], result.total)


# -- breakpoints_1d and exact_integral_1d -----------------------------------


def test_hat_breakpoints():
    bps = breakpoints_1d(hat_network(), -1.0, 3.0)
    assert bps == pytest.approx([0.0, 1.0], abs=1e-15)


def test_zero_network_has_no_breakpoints():
    assert breakpoints_1d(_zero_network(), -1.0, 1.0).size == 0


def test_forward_is_affine_between_breakpoints():
    rng = np.random.default_rng(33)
    for _ in range(15):
        widths = [1, 6, 6, 6, 1]
        layers = [
            DenseLayer(
                rng.normal(size=(widths[i], widths[i - 1])),
                rng.normal(0, 0.5, widths[i]),
                "relu" if i < len(widths) - 1 else "identity",
            )
            for i in range(1, len(widths))
        ]
        net = Network(1, layers)
        a, b = -2.0, 2.0
        knots = np.concatenate([[a], breakpoints_1d(net, a, b), [b]])
        for lo, hi in zip(knots[:-1], knots[1:]):
            t = np.array([lo + (hi - lo) * q for q in (0.25, 0.5, 0.75)])
            v = batch_eval(net, t[:, None])[:, 0]
            # three-point collinearity
            assert abs(v[1] - 0.5 * (v[0] + v[2])) <= 1e-9 * max(1.0, np.max(np.abs(v)))


def test_exact_integral_hat():
    assert exact_integral_1d(hat_network(), 0.0, 2.0) == pytest.approx(1.5, abs=1e-15)


def test_exact_integral_odd_function():
    net = Network(
        1,
        [
            DenseLayer([[1.0], [-1.0]], [0.0, 0.0], "relu"),
            DenseLayer([[1.0, -1.0]], [0.0], "identity"),
        ],
    )
    assert exact_integral_1d(net, -1.0, 1.0) == pytest.approx(0.0, abs=1e-15)


def test_exact_integral_vs_dense_trapezoid():
    rng = np.random.default_rng(34)
    for _ in range(8):
        net = random_dense_relu_net(rng, max_depth=3, max_width=6)
        a, b = np.sort(rng.uniform(-2.5, 2.5, 2))
        if b - a < 0.5:
            b = a + 1.0
        exact = exact_integral_1d(net, a, b)
        grid = np.linspace(a, b, 10**6)
        vals = batch_eval(net, grid[:, None])[:, 0]
        trapz = np.trapezoid(vals, grid)
        assert abs(exact - trapz) <= 1e-6


def test_exact_integral_requires_scalar_input():
    net = Network(
        2,
        [
            DenseLayer(np.ones((2, 2)), np.zeros(2), "relu"),
            DenseLayer(np.ones((1, 2)), [0.0], "identity"),
        ],
    )
    with pytest.raises(StructureError):
        breakpoints_1d(net, 0.0, 1.0)
    with pytest.raises(StructureError):
        exact_integral_1d(net, 0.0, 1.0)


def test_midpoint_exact_when_no_interior_kinks():
    rng = np.random.default_rng(35)
    for _ in range(20):
        net = random_dense_relu_net(rng, max_depth=2, max_width=6)
        a, b = -2.0, 2.0
        bps = breakpoints_1d(net, a, b)
        points = np.concatenate([[a], bps, [b]])
        result = corrected_integral(net, _segment(a, b), Partition(points))
        exact = exact_integral_1d(net, a, b)
        assert abs(result.total[0] - exact) <= 1e-10 * max(1.0, abs(exact))


def test_convergence_rate_of_uniform_partitions():
    rng = np.random.default_rng(36)
    nets = []
    while len(nets) < 10:
        net = random_dense_relu_net(rng, max_depth=3, max_width=8)
        exact = exact_integral_1d(net, -2.0, 2.0)
        coarse = corrected_integral(
            net, _segment(-2.0, 2.0), Partition(np.linspace(-2, 2, 16))
        )
        if abs(coarse.total[0] - exact) > 1e-6:  # keep nets with real kink error
            nets.append((net, exact))
    for net, exact in nets:
        err16 = abs(
            corrected_integral(net, _segment(-2.0, 2.0), Partition(np.linspace(-2, 2, 16))).total[0]
            - exact
        )
        err1024 = abs(
            corrected_integral(net, _segment(-2.0, 2.0), Partition(np.linspace(-2, 2, 1024))).total[0]
            - exact
        )
        assert err1024 <= err16 / 100.0


def test_additivity_at_partition_points():
    rng = np.random.default_rng(37)
    for _ in range(10):
        net = random_dense_relu_net(rng, max_depth=2, max_width=6)
        a, b, c = -1.5, 0.25, 2.0
        pts_whole = np.unique(np.concatenate([np.linspace(a, c, 14), [b]]))
        pts_left = pts_whole[pts_whole <= b]
        pts_right = pts_whole[pts_whole >= b]
        whole = corrected_integral(net, _segment(a, c), Partition(pts_whole)).total[0]
        left = corrected_integral(net, _segment(a, b), Partition(pts_left)).total[0]
        right = corrected_integral(net, _segment(b, c), Partition(pts_right)).total[0]
        assert abs(whole - (left + right)) <= 1e-10 * max(1.0, abs(whole))


def test_exact_integral_matches_quadrature():
    rng = np.random.default_rng(38)
    net = random_dense_relu_net(rng, max_depth=3, max_width=8)
    quad = reference_quadrature(lambda t: scalar_eval(net, t), -1.0, 2.0, 1e-9)
    assert abs(exact_integral_1d(net, -1.0, 2.0) - quad.estimate) <= 1e-8
