"""Small fully connected nets with hand-written backprop and Adam.

Everything is batch-first float64 numpy.  forward() returns the output
together with an explicit cache; backward() consumes that cache, so a net
can safely run several forward passes (e.g. target computations) before
the training pass.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError


def relu(x):
    return np.maximum(x, 0.0)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


class MlpNet:
    """Affine layers with ReLU between them; linear output by default.

    sizes = [in, h1, ..., out].  Set relu_output=True when the net feeds
    another net and its last layer should count as hidden.
    """

    def __init__(self, sizes, rng: np.random.Generator, relu_output: bool = False):
        if len(sizes) < 2:
            raise ShapeError("need at least an input and an output size")
        self.sizes = list(sizes)
        self.relu_output = relu_output
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            scale = np.sqrt(2.0 / fan_in)
            self.weights.append(rng.normal(0.0, scale, (fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))
        self.gw = [np.zeros_like(w) for w in self.weights]
        self.gb = [np.zeros_like(b) for b in self.biases]

    @property
    def in_dim(self) -> int:
        return self.sizes[0]

    @property
    def out_dim(self) -> int:
        return self.sizes[-1]

    def forward(self, x: np.ndarray):
        """x: (B, in) -> ((B, out), cache)."""
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeError(f"expected (B, {self.in_dim}) input, got {x.shape}")
        cache = []
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            pre = h @ w + b
            cache.append((h, pre))
            if i < last or self.relu_output:
                h = relu(pre)
            else:
                h = pre
        return h, cache

    def backward(self, cache, grad_out: np.ndarray) -> np.ndarray:
        """Accumulate parameter grads; return grad w.r.t. the net input."""
        g = grad_out
        last = len(self.weights) - 1
        for i in range(last, -1, -1):
            h_in, pre = cache[i]
            if i < last or self.relu_output:
                g = g * (pre > 0)
            self.gw[i] += h_in.T @ g
            self.gb[i] += g.sum(axis=0)
            g = g @ self.weights[i].T
        return g

    def params(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def grads(self):
        out = []
        for w, b in zip(self.gw, self.gb):
            out.append(w)
            out.append(b)
        return out

    def zero_grads(self):
        for g in self.gw:
            g[...] = 0.0
        for g in self.gb:
            g[...] = 0.0

    def adopt_storage(self, params, grads) -> None:
        """Swap parameter/grad arrays for externally provided views."""
        n = len(self.weights)
        self.weights = params[0::2][:n]
        self.biases = params[1::2][:n]
        self.gw = grads[0::2][:n]
        self.gb = grads[1::2][:n]


class EmbeddingTable:
    """Learned row-lookup table (one trainable vector per id)."""

    def __init__(self, n_rows: int, dim: int, rng: np.random.Generator):
        self.table = rng.normal(0.0, 1.0, (n_rows, dim))
        self.grad = np.zeros_like(self.table)

    def forward(self, ids: np.ndarray) -> np.ndarray:
        return self.table[ids]

    def backward(self, ids: np.ndarray, grad_out: np.ndarray) -> None:
        np.add.at(self.grad, ids, grad_out)

    def params(self):
        return [self.table]

    def grads(self):
        return [self.grad]

    def zero_grads(self):
        self.grad[...] = 0.0

    def adopt_storage(self, params, grads) -> None:
        self.table = params[0]
        self.grad = grads[0]


class Adam:
    """Adam with standard bias correction over an ordered parameter list."""

    def __init__(self, params, lr: float = 3e-4, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]
        self.t = 0

    def step(self, grads) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            denom = np.sqrt(v)
            denom /= np.sqrt(b2c)
            denom += self.eps
            denom /= self.lr / b1c
            p -= m / denom

    def state_dict(self) -> dict:
        return {"t": self.t,
                "m": [a.copy() for a in self.m],
                "v": [a.copy() for a in self.v]}

    def load_state_dict(self, state: dict) -> None:
        self.t = state["t"]
        for dst, src in zip(self.m, state["m"]):
            dst[...] = src
        for dst, src in zip(self.v, state["v"]):
            dst[...] = src


def get_flat_params(param_arrays) -> np.ndarray:
    return np.concatenate([p.reshape(-1) for p in param_arrays])


def set_flat_params(param_arrays, flat: np.ndarray) -> None:
    offset = 0
    for p in param_arrays:
        n = p.size
        p[...] = flat[offset:offset + n].reshape(p.shape)
        offset += n
    if offset != flat.size:
        raise ShapeError(f"flat vector has {flat.size} entries, params need {offset}")
