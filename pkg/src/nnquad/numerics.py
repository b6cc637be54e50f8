"""Minimal dense linear algebra and convolution-to-matrix lowering.

Everything works on plain float64 numpy arrays: matrices are 2-D row-major,
vectors are 1-D.  All functions are pure and thread-safe.
"""

import numpy as np

from .errors import ShapeError


def as_matrix(m) -> np.ndarray:
    """Coerce to a validated 2-D float64 array (rows >= 1, cols >= 1, finite)."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got array of shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeError(f"matrix must be at least 1x1, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ShapeError("matrix entries must all be finite")
    return a


def as_vector(v) -> np.ndarray:
    """Coerce to a validated 1-D float64 array (length >= 1, finite)."""
    a = np.asarray(v, dtype=np.float64)
    if a.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got array of shape {a.shape}")
    if a.shape[0] < 1:
        raise ShapeError("vector must have at least one entry")
    if not np.all(np.isfinite(a)):
        raise ShapeError("vector entries must all be finite")
    return a


def matvec(m, v) -> np.ndarray:
    """Matrix-vector product with explicit shape checking."""
    m = as_matrix(m)
    v = as_vector(v)
    if m.shape[1] != v.shape[0]:
        raise ShapeError(
            f"matvec: matrix is {m.shape[0]}x{m.shape[1]} but vector has length {v.shape[0]}"
        )
    return m @ v


def conv_output_shape(input_shape, kernel_shape, stride, padding):
    """Spatial output shape of a stride/zero-padding convolution.

    ``input_shape`` has one or two entries.  Raises if the kernel does not fit
    inside the padded input.
    """
    grid, (kh, kw) = _normalize_conv_geometry(input_shape, kernel_shape)
    h, w = grid
    pad_h = 0 if len(input_shape) == 1 else padding
    out_h = (h + 2 * pad_h - kh) // stride + 1
    out_w = (w + 2 * padding - kw) // stride + 1
    if out_h < 1 or out_w < 1:
        raise ShapeError(
            f"kernel {kh}x{kw} is larger than the padded input "
            f"(input_shape={tuple(input_shape)}, padding={padding})"
        )
    if len(input_shape) == 1:
        return (out_w,)
    return (out_h, out_w)


def _normalize_conv_geometry(input_shape, kernel_shape):
    if len(input_shape) not in (1, 2) or any(int(s) < 1 for s in input_shape):
        raise ShapeError(f"input_shape must hold one or two positive sizes, got {input_shape}")
    kh, kw = kernel_shape
    if len(input_shape) == 1:
        if kh != 1:
            raise ShapeError(
                f"a 1-D convolution needs a 1x_k kernel, got {kh}x{kw}"
            )
        return (1, int(input_shape[0])), (kh, kw)
    return (int(input_shape[0]), int(input_shape[1])), (kh, kw)


def conv_to_matrix(kernel, bias, input_shape, stride=1, padding=0):
    """Lower a single-channel convolution to a dense ``(M, c)`` pair.

    For every input x: ``flatten(conv(x) + bias) == M @ flatten(x) + c``.
    The convolution is the usual machine-learning one (no kernel flip), with
    zero padding of ``padding`` cells on each side of every spatial dimension
    and a common ``stride``.  ``bias`` has one entry (replicated across output
    positions) or one entry per output position.
    """
    kernel = as_matrix(kernel)
    bias = as_vector(bias)
    stride = int(stride)
    padding = int(padding)
    if stride < 1:
        raise ShapeError(f"stride must be >= 1, got {stride}")
    if padding < 0:
        raise ShapeError(f"padding must be >= 0, got {padding}")

    (h, w), (kh, kw) = _normalize_conv_geometry(input_shape, kernel.shape)
    pad_h = 0 if len(input_shape) == 1 else padding
    out_shape = conv_output_shape(input_shape, kernel.shape, stride, padding)
    out_h = 1 if len(input_shape) == 1 else out_shape[0]
    out_w = out_shape[-1]

    n_in = h * w
    n_out = out_h * out_w
    m = np.zeros((n_out, n_in))
    for oi in range(out_h):
        for oj in range(out_w):
            row = oi * out_w + oj
            for ki in range(kh):
                for kj in range(kw):
                    ii = oi * stride + ki - pad_h
                    jj = oj * stride + kj - padding
                    if 0 <= ii < h and 0 <= jj < w:
                        m[row, ii * w + jj] += kernel[ki, kj]

    if bias.shape[0] == 1:
        c = np.full(n_out, bias[0])
    elif bias.shape[0] == n_out:
        c = bias.copy()
    else:
        raise ShapeError(
            f"conv bias must have 1 or {n_out} entries, got {bias.shape[0]}"
        )
    return m, c
