"""Minimal training stack: convolution, ReLU, pooling, linear, softmax
cross-entropy and Adam, enough to build the two reference models (a small
LeNet-style CNN and the same network with both convolutions replaced by
wavelet gain layers) and train them.

Parameters are flat lists of real arrays per layer; complex gains appear as
their two real planes, so the optimizer treats everything uniformly.  All
blocks have hand-derived backward passes that are exercised against finite
differences in the test suite.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import ConfigError, DimensionError
from .gainlayer import GainParams, gain_backward, gain_forward, gain_init

# ---------------------------------------------------------------------------
# Blocks.
# ---------------------------------------------------------------------------

def conv2d_forward(x, w, b, pad: int = 0):
    """Stride-1 cross-correlation with zero padding."""
    if x.shape[1] != w.shape[1]:
        raise DimensionError("conv2d: channel mismatch")
    k = w.shape[-1]
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    win = sliding_window_view(xp, (k, k), axis=(2, 3))
    y = np.einsum("nchwkl,fckl->nfhw", win, w,
                  optimize=True) + b[:, None, None]
    return y, (x.shape, xp, w, pad)


def conv2d_backward(dy, cache):
    x_shape, xp, w, pad = cache
    k = w.shape[-1]
    win = sliding_window_view(xp, (k, k), axis=(2, 3))
    dw = np.einsum("nchwkl,nfhw->fckl", win, dy, optimize=True)
    db = dy.sum(axis=(0, 2, 3))
    fp = k - 1 - pad
    dyp = np.pad(dy, ((0, 0), (0, 0), (fp, fp), (fp, fp)))
    dwin = sliding_window_view(dyp, (k, k), axis=(2, 3))
    wf = w[:, :, ::-1, ::-1]
    dx = np.einsum("nfhwkl,fckl->nchw", dwin, wf, optimize=True)
    if dx.shape != x_shape:
        raise DimensionError("conv2d backward produced wrong input shape")
    return dx, dw, db


def relu_forward(x):
    mask = x > 0
    return x * mask, mask


def relu_backward(dy, mask):
    return dy * mask


def maxpool2_forward(x):
    n, c, h, w = x.shape
    if h % 2 or w % 2:
        raise DimensionError("maxpool2 needs even extents")
    xr = (x.reshape(n, c, h // 2, 2, w // 2, 2)
          .transpose(0, 1, 2, 4, 3, 5)
          .reshape(n, c, h // 2, w // 2, 4))
    idx = xr.argmax(axis=-1)
    y = np.take_along_axis(xr, idx[..., None], axis=-1)[..., 0]
    return y, (idx, x.shape)


def maxpool2_backward(dy, cache):
    idx, x_shape = cache
    n, c, h, w = x_shape
    dxr = np.zeros((n, c, h // 2, w // 2, 4), dtype=dy.dtype)
    np.put_along_axis(dxr, idx[..., None], dy[..., None], axis=-1)
    return (dxr.reshape(n, c, h // 2, w // 2, 2, 2)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(n, c, h, w))


def linear_forward(x, w, b):
    return x @ w.T + b, x


def linear_backward(dy, x, w):
    return dy @ w, dy.T @ x, dy.sum(axis=0)


def softmax_cross_entropy(logits, labels):
    """Mean cross-entropy over the batch; returns (loss, dlogits, probs)."""
    z = logits - logits.max(axis=1, keepdims=True)
    ez = np.exp(z)
    probs = ez / ez.sum(axis=1, keepdims=True)
    n = logits.shape[0]
    eps = np.finfo(logits.dtype).tiny
    loss = float(-np.mean(np.log(probs[np.arange(n), labels] + eps)))
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    return loss, dlogits, probs


# ---------------------------------------------------------------------------
# Model configuration.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LayerSpec:
    kind: str
    out_channels: int = 0       # conv2d / wavegain
    kernel: int = 0             # conv2d
    pad: int = 0                # conv2d
    levels: int = 1             # wavegain
    lowpass_size: int = 3       # wavegain
    out_features: int = 0       # linear
    filter_set: str = "near_sym_a"


def conv2d(out_channels, kernel, pad=0):
    return LayerSpec("conv2d", out_channels=out_channels, kernel=kernel,
                     pad=pad)


def wavegain(out_channels, levels=1, lowpass_size=3,
             filter_set="near_sym_a"):
    return LayerSpec("wavegain", out_channels=out_channels, levels=levels,
                     lowpass_size=lowpass_size, filter_set=filter_set)


def relu():
    return LayerSpec("relu")


def maxpool2():
    return LayerSpec("maxpool2")


def flatten():
    return LayerSpec("flatten")


def linear(out_features):
    return LayerSpec("linear", out_features=out_features)


def softmax_ce():
    return LayerSpec("softmax_ce")


@dataclass(frozen=True)
class ModelConfig:
    layers: tuple[LayerSpec, ...]
    num_classes: int
    input_shape: tuple[int, int, int] = (3, 32, 32)
    precision: str = "float64"

    def __post_init__(self):
        kinds = [l.kind for l in self.layers]
        if kinds.count("softmax_ce") != 1 or kinds[-1] != "softmax_ce":
            raise ConfigError("exactly one terminal softmax_ce layer required")


def build_lenet(num_classes: int, precision: str = "float64") -> ModelConfig:
    """Two 5x5 convolutions ('same' padding) with ReLU + 2x2 maxpool after
    each, then 120/84 fully connected layers and the classifier."""
    return ModelConfig(layers=(
        conv2d(6, 5, pad=2), relu(), maxpool2(),
        conv2d(16, 5, pad=2), relu(), maxpool2(),
        flatten(), linear(120), relu(), linear(84), relu(),
        linear(num_classes), softmax_ce(),
    ), num_classes=num_classes, precision=precision)


def build_wavelenet(num_classes: int, precision: str = "float64",
                    filter_set: str = "near_sym_a") -> ModelConfig:
    """The same network with both convolutions swapped for single-scale
    wavelet gain layers (6 complex subband gains + 3x3 real lowpass gain),
    everything else identical."""
    return ModelConfig(layers=(
        wavegain(6, levels=1, lowpass_size=3, filter_set=filter_set), relu(),
        maxpool2(),
        wavegain(16, levels=1, lowpass_size=3, filter_set=filter_set), relu(),
        maxpool2(),
        flatten(), linear(120), relu(), linear(84), relu(),
        linear(num_classes), softmax_ce(),
    ), num_classes=num_classes, precision=precision)


def build_model(name: str, num_classes: int, **kw) -> ModelConfig:
    if name == "lenet":
        return build_lenet(num_classes, **kw)
    if name == "wavelenet":
        return build_wavelenet(num_classes, **kw)
    raise ConfigError(f"unknown model {name!r}; use 'lenet' or 'wavelenet'")


class Model:
    """Shape-checked executable network built from a ModelConfig."""

    def __init__(self, config: ModelConfig):
        self.config = config
        self.dtype = np.dtype(config.precision)
        self._plan_shapes()

    def _plan_shapes(self):
        shape = self.config.input_shape
        self.shapes = [shape]
        self._gain_templates = {}
        for i, spec in enumerate(self.config.layers[:-1]):
            if spec.kind == "conv2d":
                c, h, w = shape
                hh = h + 2 * spec.pad - spec.kernel + 1
                ww = w + 2 * spec.pad - spec.kernel + 1
                if hh < 1 or ww < 1:
                    raise ConfigError("conv2d output collapsed to nothing")
                shape = (spec.out_channels, hh, ww)
            elif spec.kind == "wavegain":
                c, h, w = shape
                shape = (spec.out_channels, h, w)
            elif spec.kind == "maxpool2":
                c, h, w = shape
                if h % 2 or w % 2:
                    raise ConfigError("maxpool2 on odd extent")
                shape = (c, h // 2, w // 2)
            elif spec.kind == "flatten":
                shape = (int(np.prod(shape)),)
            elif spec.kind == "linear":
                if len(shape) != 1:
                    raise ConfigError("linear needs a flattened input")
                shape = (spec.out_features,)
            elif spec.kind in ("relu",):
                pass
            else:
                raise ConfigError(f"unknown layer kind {spec.kind!r}")
            self.shapes.append(shape)
        if self.shapes[-1] != (self.config.num_classes,):
            raise ConfigError(
                f"terminal feature shape {self.shapes[-1]} does not match "
                f"{self.config.num_classes} classes")

    def init_params(self, seed: int = 0) -> list[list[np.ndarray]]:
        """Glorot-normal init for conv/linear, glorot-like for gain layers;
        bit-reproducible from the seed."""
        rng = np.random.default_rng(seed)
        params = []
        for i, spec in enumerate(self.config.layers[:-1]):
            in_shape = self.shapes[i]
            if spec.kind == "conv2d":
                c = in_shape[0]
                fan_in = c * spec.kernel ** 2
                fan_out = spec.out_channels * spec.kernel ** 2
                std = np.sqrt(2.0 / (fan_in + fan_out))
                w = std * rng.standard_normal(
                    (spec.out_channels, c, spec.kernel, spec.kernel))
                b = np.zeros(spec.out_channels)
                params.append([w.astype(self.dtype), b.astype(self.dtype)])
            elif spec.kind == "wavegain":
                g = gain_init(spec.out_channels, in_shape[0], spec.levels,
                              spec.lowpass_size,
                              seed=int(rng.integers(2 ** 31)),
                              scheme="glorot", filter_set=spec.filter_set)
                self._gain_templates[i] = g
                params.append([pl.astype(self.dtype) for pl in g.planes()])
            elif spec.kind == "linear":
                fan_in = in_shape[0]
                std = np.sqrt(2.0 / (fan_in + spec.out_features))
                w = std * rng.standard_normal((spec.out_features, fan_in))
                b = np.zeros(spec.out_features)
                params.append([w.astype(self.dtype), b.astype(self.dtype)])
            else:
                params.append([])
        return params

    def _gains_for(self, i: int, layer_params) -> GainParams:
        spec = self.config.layers[i]
        if i not in self._gain_templates:
            self._gain_templates[i] = gain_init(
                spec.out_channels, self.shapes[i][0], spec.levels,
                spec.lowpass_size, scheme="zeros",
                filter_set=spec.filter_set)
        return self._gain_templates[i].replace_planes(layer_params)

    def forward(self, x, params):
        """Run the feature layers; returns (logits, caches)."""
        x = np.asarray(x, dtype=self.dtype)
        caches = []
        for i, spec in enumerate(self.config.layers[:-1]):
            if spec.kind == "conv2d":
                x, cache = conv2d_forward(x, params[i][0], params[i][1],
                                          spec.pad)
            elif spec.kind == "wavegain":
                gains = self._gains_for(i, params[i])
                x, cache = gain_forward(x, gains)
            elif spec.kind == "relu":
                x, cache = relu_forward(x)
            elif spec.kind == "maxpool2":
                x, cache = maxpool2_forward(x)
            elif spec.kind == "flatten":
                cache = x.shape
                x = x.reshape(x.shape[0], -1)
            elif spec.kind == "linear":
                x, cache = linear_forward(x, params[i][0], params[i][1])
            caches.append(cache)
        return x, caches

    def loss_and_grads(self, x, labels, params):
        """Full forward/backward; returns (loss, grads, logits)."""
        logits, caches = self.forward(x, params)
        loss, dx, _ = softmax_cross_entropy(logits, labels)
        grads = [None] * len(params)
        for i in range(len(self.config.layers) - 2, -1, -1):
            spec = self.config.layers[i]
            if spec.kind == "conv2d":
                dx, dw, db = conv2d_backward(dx, caches[i])
                grads[i] = [dw, db]
            elif spec.kind == "wavegain":
                gains = self._gains_for(i, params[i])
                dx, g = gain_backward(dx, caches[i], gains)
                grads[i] = g.planes()
            elif spec.kind == "relu":
                dx = relu_backward(dx, caches[i])
                grads[i] = []
            elif spec.kind == "maxpool2":
                dx = maxpool2_backward(dx, caches[i])
                grads[i] = []
            elif spec.kind == "flatten":
                dx = dx.reshape(caches[i])
                grads[i] = []
            elif spec.kind == "linear":
                dx, dw, db = linear_backward(dx, caches[i], params[i][0])
                grads[i] = [dw, db]
        return loss, grads, logits

    def param_count(self) -> int:
        return sum(int(p.size) for layer in self.init_params(0) for p in layer)


# ---------------------------------------------------------------------------
# Adam with classic L2 weight decay folded into the gradients.
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    m: list[list[np.ndarray]]
    v: list[list[np.ndarray]]
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0


def adam_init(params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8,
              weight_decay=0.0) -> AdamState:
    zeros = lambda: [[np.zeros_like(p) for p in layer] for layer in params]
    return AdamState(m=zeros(), v=zeros(), step=0, lr=lr, beta1=beta1,
                     beta2=beta2, eps=eps, weight_decay=weight_decay)


def adam_step(params, grads, state: AdamState):
    """One update; returns new params (state moments update in place)."""
    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    out = []
    for li, layer in enumerate(params):
        new_layer = []
        for pi, p in enumerate(layer):
            g = grads[li][pi]
            if state.weight_decay:
                g = g + state.weight_decay * p
            m = state.m[li][pi]
            v = state.v[li][pi]
            m *= state.beta1
            m += (1.0 - state.beta1) * g
            v *= state.beta2
            v += (1.0 - state.beta2) * (g * g)
            update = state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
            new_layer.append(p - update)
        out.append(new_layer)
    return out


# ---------------------------------------------------------------------------
# Training loop.
# ---------------------------------------------------------------------------

@dataclass
class TrainConfig:
    epochs: int = 200
    lr: float = 1e-3
    weight_decay: float = 1e-5
    batch_size: int = 128
    seed: int = 0
    precision: str = "float32"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    deterministic: bool = True
    eval_batch_size: int = 512

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class RunMetrics:
    seed: int
    batch_size: int
    epochs: list[int] = field(default_factory=list)
    train_loss: list[float] = field(default_factory=list)
    train_acc: list[float] = field(default_factory=list)
    val_acc: list[float] = field(default_factory=list)
    wall_clock: float = 0.0

    def rows(self):
        return list(zip(self.epochs, self.train_loss, self.train_acc,
                        self.val_acc))


def evaluate(model: Model, params, ds, batch_size: int = 512) -> float:
    """Top-1 accuracy over a dataset; a pure function of params and data."""
    hits = 0
    n = ds.images.shape[0]
    for start in range(0, n, batch_size):
        xb = ds.images[start:start + batch_size]
        yb = ds.labels[start:start + batch_size]
        logits, _ = model.forward(xb, params)
        hits += int(np.sum(np.argmax(logits, axis=1) == yb))
    return hits / n


def train(model: Model, train_ds, val_ds, cfg: TrainConfig,
          progress=None) -> tuple[RunMetrics, list]:
    """Train with Adam; deterministic for a fixed (seed, config, data)."""
    from .data import batches

    if train_ds.class_count != model.config.num_classes:
        raise ConfigError("dataset class count does not match the model")
    params = model.init_params(cfg.seed)
    state = adam_init(params, lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2,
                      eps=cfg.eps, weight_decay=cfg.weight_decay)
    metrics = RunMetrics(seed=cfg.seed, batch_size=cfg.batch_size)
    t0 = time.perf_counter()
    for epoch in range(cfg.epochs):
        losses = []
        hits = 0
        seen = 0
        for xb, yb in batches(train_ds, cfg.batch_size, cfg.seed, epoch):
            loss, grads, logits = model.loss_and_grads(xb, yb, params)
            params = adam_step(params, grads, state)
            losses.append(loss * len(yb))
            hits += int(np.sum(np.argmax(logits, axis=1) == yb))
            seen += len(yb)
        metrics.epochs.append(epoch)
        metrics.train_loss.append(float(np.sum(losses)) / seen)
        metrics.train_acc.append(hits / seen)
        metrics.val_acc.append(evaluate(model, params, val_ds,
                                        cfg.eval_batch_size))
        if progress is not None:
            progress(epoch, metrics)
    metrics.wall_clock = time.perf_counter() - t0
    return metrics, params
