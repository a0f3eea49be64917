"""Network layers with exact forward/backward passes in float64.

Convolutions are cross-correlations (no kernel flip) with 3-wide kernels,
stride 1, and zero "same" padding.  Internally the convolutional stack runs
channels-last -- images as (B, H, W, C), sequences as (B, L, C) -- which
keeps the im2col patch matrix one cheap reshape away from the GEMM; the
Network converts from the public (B, C, ...) layout once at the input.  The
naive nested-loop oracle these layers must match lives in the test suite.

Every layer caches what its backward pass needs, so forward(train=True)
followed by backward is one matched pair.
"""

from __future__ import annotations

import numpy as np

from ..errors import SpinsightError


def he_normal(fan_in: int, shape, rng: np.random.Generator) -> np.ndarray:
    """He normal initialization: Normal(0, 2/fan_in) samples."""
    if fan_in < 1:
        raise SpinsightError(f"fan_in must be >= 1, got {fan_in}")
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)


class Layer:
    """Base layer: parameter-free unless a subclass says otherwise."""

    params: list[np.ndarray]
    grads: list[np.ndarray]

    def __init__(self):
        self.params = []
        self.grads = []

    def forward(self, x, train=False, rng=None):
        raise NotImplementedError

    def backward(self, dout):
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError


def _cols2d(x):
    """im2col for (B, H, W, C): rows are pixels, columns are (di, dj, c)."""
    b, h, w, c = x.shape
    pad = np.zeros((b, h + 2, w + 2, c))
    pad[:, 1:-1, 1:-1, :] = x
    win = np.lib.stride_tricks.sliding_window_view(pad, (3, 3), axis=(1, 2))
    # (b, h, w, c, 3, 3) -> (b*h*w, 3*3*c)
    return win.transpose(0, 1, 2, 4, 5, 3).reshape(b * h * w, 9 * c)


def _cols1d(x):
    b, n, c = x.shape
    pad = np.zeros((b, n + 2, c))
    pad[:, 1:-1, :] = x
    win = np.lib.stride_tricks.sliding_window_view(pad, 3, axis=1)
    return win.transpose(0, 1, 3, 2).reshape(b * n, 3 * c)


class Conv2d(Layer):
    """3x3 same-padding convolution, stride 1, on (B, H, W, C) activations.

    Weights keep the (out, in, kh, kw) layout; the input gradient is the
    cross-correlation of the upstream gradient with the spatially flipped,
    channel-transposed kernels, so backward reuses the forward machinery.
    """

    def __init__(self, in_channels, out_channels, rng=None, kernel=3):
        super().__init__()
        if kernel != 3:
            raise SpinsightError("only 3x3 kernels are supported")
        self.in_channels = in_channels
        self.out_channels = out_channels
        fan_in = in_channels * kernel * kernel
        w = (
            he_normal(fan_in, (out_channels, in_channels, kernel, kernel), rng)
            if rng is not None
            else np.zeros((out_channels, in_channels, kernel, kernel))
        )
        self.params = [w, np.zeros(out_channels)]
        self.grads = [np.zeros_like(p) for p in self.params]
        self._cols = None
        self._shape = None

    def _wmat(self):
        # (o, c, di, dj) -> (di*dj*c, o), matching the _cols2d column order
        return self.params[0].transpose(2, 3, 1, 0).reshape(-1, self.out_channels)

    def forward(self, x, train=False, rng=None):
        if x.ndim != 4 or x.shape[3] != self.in_channels:
            raise SpinsightError(
                f"conv2d expected (B,H,W,{self.in_channels}), got {x.shape}"
            )
        b, h, w, _ = x.shape
        cols = _cols2d(x)
        out = cols @ self._wmat() + self.params[1]
        if train:
            self._cols, self._shape = cols, x.shape
        return out.reshape(b, h, w, self.out_channels)

    def backward(self, dout):
        b, h, w, c = self._shape
        dmat = dout.reshape(b * h * w, self.out_channels)
        dw = (self._cols.T @ dmat).reshape(3, 3, c, self.out_channels)
        self.grads[0][:] = dw.transpose(3, 2, 0, 1)
        self.grads[1][:] = dmat.sum(axis=0)
        # dx = dout (*) flipped kernels with in/out channels swapped
        wrot = self.params[0][:, :, ::-1, ::-1].transpose(2, 3, 0, 1).reshape(-1, c)
        dx = (_cols2d(dout) @ wrot).reshape(b, h, w, c)
        self._cols = None
        return dx

    def descriptor(self):
        return {
            "kind": "conv2d",
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
        }


class Conv1d(Layer):
    """Width-3 same-padding convolution on (B, L, C) sequences."""

    def __init__(self, in_channels, out_channels, rng=None, kernel=3):
        super().__init__()
        if kernel != 3:
            raise SpinsightError("only width-3 kernels are supported")
        self.in_channels = in_channels
        self.out_channels = out_channels
        fan_in = in_channels * kernel
        w = (
            he_normal(fan_in, (out_channels, in_channels, kernel), rng)
            if rng is not None
            else np.zeros((out_channels, in_channels, kernel))
        )
        self.params = [w, np.zeros(out_channels)]
        self.grads = [np.zeros_like(p) for p in self.params]
        self._cols = None
        self._shape = None

    def forward(self, x, train=False, rng=None):
        if x.ndim != 3 or x.shape[2] != self.in_channels:
            raise SpinsightError(
                f"conv1d expected (B,L,{self.in_channels}), got {x.shape}"
            )
        b, n, _ = x.shape
        cols = _cols1d(x)
        wmat = self.params[0].transpose(2, 1, 0).reshape(-1, self.out_channels)
        out = cols @ wmat + self.params[1]
        if train:
            self._cols, self._shape = cols, x.shape
        return out.reshape(b, n, self.out_channels)

    def backward(self, dout):
        b, n, c = self._shape
        dmat = dout.reshape(b * n, self.out_channels)
        dw = (self._cols.T @ dmat).reshape(3, c, self.out_channels)
        self.grads[0][:] = dw.transpose(2, 1, 0)
        self.grads[1][:] = dmat.sum(axis=0)
        wrot = self.params[0][:, :, ::-1].transpose(2, 0, 1).reshape(-1, c)
        dx = (_cols1d(dout) @ wrot).reshape(b, n, c)
        self._cols = None
        return dx

    def descriptor(self):
        return {
            "kind": "conv1d",
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
        }


class MaxPool2d(Layer):
    """Non-overlapping 2x2 max pooling; ties go to the first cell in
    row-major scan order of the window."""

    def __init__(self):
        super().__init__()
        self._argmax = None
        self._shape = None

    @staticmethod
    def _windows(x):
        b, h, w, c = x.shape
        v = x.reshape(b, h // 2, 2, w // 2, 2, c).transpose(0, 1, 3, 2, 4, 5)
        return v.reshape(b, h // 2, w // 2, 4, c)

    def forward(self, x, train=False, rng=None):
        b, h, w, c = x.shape
        if h % 2 or w % 2:
            raise SpinsightError(f"maxpool2 needs even spatial dims, got {h}x{w}")
        flat = self._windows(x)
        arg = flat.argmax(axis=3)
        out = np.take_along_axis(flat, arg[:, :, :, None, :], axis=3)[:, :, :, 0, :]
        if train:
            self._argmax, self._shape = arg, x.shape
        return out

    def backward(self, dout):
        b, h, w, c = self._shape
        flat = np.zeros((b, h // 2, w // 2, 4, c))
        np.put_along_axis(
            flat, self._argmax[:, :, :, None, :], dout[:, :, :, None, :], axis=3
        )
        v = flat.reshape(b, h // 2, w // 2, 2, 2, c).transpose(0, 1, 3, 2, 4, 5)
        return v.reshape(b, h, w, c)

    def descriptor(self):
        return {"kind": "maxpool2d"}


class MaxPool1d(Layer):
    def __init__(self):
        super().__init__()
        self._argmax = None
        self._shape = None

    def forward(self, x, train=False, rng=None):
        b, n, c = x.shape
        if n % 2:
            raise SpinsightError(f"maxpool1 needs an even length, got {n}")
        blocks = x.reshape(b, n // 2, 2, c)
        arg = blocks.argmax(axis=2)
        out = np.take_along_axis(blocks, arg[:, :, None, :], axis=2)[:, :, 0, :]
        if train:
            self._argmax, self._shape = arg, x.shape
        return out

    def backward(self, dout):
        b, n, c = self._shape
        blocks = np.zeros((b, n // 2, 2, c))
        np.put_along_axis(blocks, self._argmax[:, :, None, :], dout[:, :, None, :], axis=2)
        return blocks.reshape(b, n, c)

    def descriptor(self):
        return {"kind": "maxpool1d"}


class Flatten(Layer):
    def __init__(self):
        super().__init__()
        self._shape = None

    def forward(self, x, train=False, rng=None):
        if train:
            self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._shape)

    def descriptor(self):
        return {"kind": "flatten"}


class Dense(Layer):
    def __init__(self, in_width, out_width, rng=None):
        super().__init__()
        self.in_width = in_width
        self.out_width = out_width
        w = (
            he_normal(in_width, (out_width, in_width), rng)
            if rng is not None
            else np.zeros((out_width, in_width))
        )
        self.params = [w, np.zeros(out_width)]
        self.grads = [np.zeros_like(p) for p in self.params]
        self._x = None

    def forward(self, x, train=False, rng=None):
        if x.ndim != 2 or x.shape[1] != self.in_width:
            raise SpinsightError(
                f"dense expected (B,{self.in_width}), got {x.shape}"
            )
        if train:
            self._x = x
        return x @ self.params[0].T + self.params[1]

    def backward(self, dout):
        self.grads[0][:] = dout.T @ self._x
        self.grads[1][:] = dout.sum(axis=0)
        dx = dout @ self.params[0]
        self._x = None
        return dx

    def descriptor(self):
        return {"kind": "dense", "in_width": self.in_width, "out_width": self.out_width}


class Relu(Layer):
    def __init__(self):
        super().__init__()
        self._mask = None

    def forward(self, x, train=False, rng=None):
        mask = x > 0
        if train:
            self._mask = mask
        return np.where(mask, x, 0.0)

    def backward(self, dout):
        return np.where(self._mask, dout, 0.0)

    def descriptor(self):
        return {"kind": "relu"}


class Dropout(Layer):
    """Inverted dropout: survivors scaled by 1/(1-p) at train time so
    evaluation is the identity."""

    def __init__(self, p):
        super().__init__()
        if not 0.0 <= p < 1.0:
            raise SpinsightError(f"dropout rate must be in [0, 1), got {p}")
        self.p = p
        self._mask = None

    def forward(self, x, train=False, rng=None):
        if not train or self.p == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise SpinsightError("training-mode dropout needs a generator")
        self._mask = (rng.random(x.shape) >= self.p) / (1.0 - self.p)
        return x * self._mask

    def backward(self, dout):
        if self._mask is None:
            return dout
        return dout * self._mask

    def descriptor(self):
        return {"kind": "dropout", "p": self.p}
