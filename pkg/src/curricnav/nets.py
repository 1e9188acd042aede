"""Feed-forward network engine: exact reverse-mode gradients, Adam updates,
per-layer freeze flags, and a versioned binary weight format.

Networks are plain values (numpy arrays); cloning and cross-thread handoff are
safe. The policy head applies a softmax over the final affine layer; the raw
logits stay reachable because downstream verification reasons on them.
"""

import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, WeightFormatError

TANH = "tanh"
IDENTITY = "identity"
SOFTMAX_POLICY = "softmax_policy"
SCALAR_VALUE = "scalar_value"

_ACT_CODES = {TANH: 0, IDENTITY: 1}
_HEAD_CODES = {SOFTMAX_POLICY: 0, SCALAR_VALUE: 1}
_MAGIC = b"CNMLPW\x00\x00"
_VERSION = 1


@dataclass
class Layer:
    w: np.ndarray  # (fan_out, fan_in)
    b: np.ndarray  # (fan_out,)
    activation: str
    frozen: bool = False


def softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


class MlpNetwork:
    def __init__(self, layers, head):
        if head not in _HEAD_CODES:
            raise ContractError(f"unknown head '{head}'")
        self.layers = list(layers)
        self.head = head
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if nxt.w.shape[1] != prev.w.shape[0]:
                raise ContractError(
                    f"layer dimensions do not chain: {prev.w.shape} -> {nxt.w.shape}"
                )
        if head == SCALAR_VALUE and self.layers[-1].w.shape[0] != 1:
            raise ContractError("scalar head requires a single output unit")

    @property
    def n_inputs(self) -> int:
        return self.layers[0].w.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.layers[-1].w.shape[0]

    @property
    def n_hidden(self) -> int:
        return len(self.layers) - 1

    def clone(self) -> "MlpNetwork":
        return MlpNetwork(
            [Layer(l.w.copy(), l.b.copy(), l.activation, l.frozen) for l in self.layers],
            self.head,
        )

    # ---------------------------------------------------------- forward

    def _affine_chain(self, x: np.ndarray):
        acts = [x]
        a = x
        for layer in self.layers:
            z = a @ layer.w.T + layer.b
            a = np.tanh(z) if layer.activation == TANH else z
            acts.append(a)
        return acts

    def forward(self, x):
        """Head output plus the cache needed by backward().

        Accepts a single input vector or an (N, n_inputs) batch; the output
        matches (probability vector / scalar, or batches thereof).
        """
        x = np.asarray(x, dtype=float)
        if not np.isfinite(x).all():
            raise ContractError("non-finite network input")
        single = x.ndim == 1
        xb = x[None, :] if single else x
        if xb.shape[1] != self.n_inputs:
            raise ContractError(f"input length {xb.shape[1]} != {self.n_inputs}")
        acts = self._affine_chain(xb)
        logits = acts[-1]
        cache = {"acts": acts, "single": single}
        if self.head == SOFTMAX_POLICY:
            probs = softmax(logits)
            cache["probs"] = probs
            out = probs[0] if single else probs
        else:
            out = logits[0, 0] if single else logits[:, 0]
        return out, cache

    def logits(self, x) -> np.ndarray:
        """Pre-head output (verification and greedy action selection)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        xb = x[None, :] if single else x
        a = xb
        for layer in self.layers:
            z = a @ layer.w.T + layer.b
            a = np.tanh(z) if layer.activation == TANH else z
        return a[0] if single else a

    # ---------------------------------------------------------- backward

    def backward_from_logits(self, cache, grad_logits):
        """Exact gradients of sum(grad_logits * logits) w.r.t. parameters.

        Frozen layers get exact-zero gradient blocks; gradient flow through
        them to earlier layers is unaffected.
        """
        acts = cache["acts"]
        g = np.asarray(grad_logits, dtype=float)
        if g.ndim == 1:
            g = g[None, :]
        if g.shape != acts[-1].shape:
            raise ContractError(f"gradient shape {g.shape} != logits shape {acts[-1].shape}")
        grads = [None] * len(self.layers)
        delta = g
        for i in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[i]
            a_prev = acts[i]
            if layer.frozen:
                grads[i] = (np.zeros_like(layer.w), np.zeros_like(layer.b))
            else:
                grads[i] = (delta.T @ a_prev, delta.sum(axis=0))
            if i > 0:
                da = delta @ layer.w
                if self.layers[i - 1].activation == TANH:
                    da = da * (1.0 - acts[i] ** 2)
                delta = da
        return grads

    def backward(self, cache, grad_out):
        """Gradients w.r.t. parameters given d(scalar)/d(head output)."""
        acts = cache["acts"]
        g = np.asarray(grad_out, dtype=float)
        if self.head == SOFTMAX_POLICY:
            p = cache["probs"]
            if g.ndim == 1:
                g = g[None, :]
            if g.shape != p.shape:
                raise ContractError(f"gradient shape {g.shape} != output shape {p.shape}")
            grad_logits = p * (g - (g * p).sum(axis=-1, keepdims=True))
        else:
            g = np.atleast_1d(g).astype(float)
            if g.shape[0] != acts[-1].shape[0]:
                raise ContractError("gradient batch size mismatch")
            grad_logits = g[:, None]
        return self.backward_from_logits(cache, grad_logits)


# -------------------------------------------------------------- factories

def _uniform_layer(rng, fan_in, fan_out, gain, activation):
    limit = gain * math.sqrt(3.0 / fan_in)
    w = rng.uniform(-limit, limit, size=(fan_out, fan_in))
    return Layer(w, np.zeros(fan_out), activation)


def policy_network(n_inputs=53, n_actions=7, hidden=(64, 64, 64), rng=0) -> MlpNetwork:
    """53 -> 64 -> 64 -> 64 -> n_actions tanh trunk with softmax head."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    dims = [n_inputs] + list(hidden)
    layers = [
        _uniform_layer(rng, dims[i], dims[i + 1], math.sqrt(2.0), TANH)
        for i in range(len(hidden))
    ]
    layers.append(_uniform_layer(rng, dims[-1], n_actions, 0.01, IDENTITY))
    return MlpNetwork(layers, SOFTMAX_POLICY)


def value_network(n_inputs=53, hidden=(64, 64, 64), rng=0) -> MlpNetwork:
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    dims = [n_inputs] + list(hidden)
    layers = [
        _uniform_layer(rng, dims[i], dims[i + 1], math.sqrt(2.0), TANH)
        for i in range(len(hidden))
    ]
    layers.append(_uniform_layer(rng, dims[-1], 1, 1.0, IDENTITY))
    return MlpNetwork(layers, SCALAR_VALUE)


def freeze_layers(net: MlpNetwork, k: int) -> MlpNetwork:
    """Mark the first k hidden layers frozen (in place). Heads never freeze."""
    if not 0 <= k <= net.n_hidden:
        raise ContractError(f"freeze count {k} outside 0..{net.n_hidden}")
    for i, layer in enumerate(net.layers[:-1]):
        layer.frozen = i < k
    net.layers[-1].frozen = False
    return net


# -------------------------------------------------------------- optimizer

class AdamState:
    """Bias-corrected Adam; moments mirror parameter shapes."""

    def __init__(self, net: MlpNetwork, lr=3e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [(np.zeros_like(l.w), np.zeros_like(l.b)) for l in net.layers]
        self.v = [(np.zeros_like(l.w), np.zeros_like(l.b)) for l in net.layers]

    def reset_layer(self, i: int):
        for buf in (self.m, self.v):
            buf[i][0].fill(0.0)
            buf[i][1].fill(0.0)


def adam_step(net: MlpNetwork, grads, state: AdamState):
    """One Adam update on the unfrozen layers (frozen layers untouched)."""
    state.t += 1
    c1 = 1.0 - state.beta1**state.t
    c2 = 1.0 - state.beta2**state.t
    for i, layer in enumerate(net.layers):
        if layer.frozen:
            continue
        for param, g, m, v in (
            (layer.w, grads[i][0], state.m[i][0], state.v[i][0]),
            (layer.b, grads[i][1], state.m[i][1], state.v[i][1]),
        ):
            m *= state.beta1
            m += (1.0 - state.beta1) * g
            v *= state.beta2
            v += (1.0 - state.beta2) * (g * g)
            param -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)


# -------------------------------------------------------------- weight files
#
# Little-endian layout, documented in docs/file-formats.md:
#   magic "CNMLPW\0\0" | u32 version | u8 head | 3 pad | u32 n_layers
#   per layer: u32 fan_in | u32 fan_out | u8 activation | u8 frozen | 2 pad
#   per layer payload: float64 W row-major (fan_out x fan_in), float64 b

def save_weights(net: MlpNetwork, path):
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IB3xI", _VERSION, _HEAD_CODES[net.head], len(net.layers)))
        for layer in net.layers:
            fh.write(
                struct.pack(
                    "<IIBB2x",
                    layer.w.shape[1],
                    layer.w.shape[0],
                    _ACT_CODES[layer.activation],
                    1 if layer.frozen else 0,
                )
            )
        for layer in net.layers:
            fh.write(np.ascontiguousarray(layer.w, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(layer.b, dtype="<f8").tobytes())


def load_weights(path) -> MlpNetwork:
    act_names = {v: k for k, v in _ACT_CODES.items()}
    head_names = {v: k for k, v in _HEAD_CODES.items()}
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise WeightFormatError(f"{path}: bad magic {magic!r}")
        version, head_code, n_layers = struct.unpack("<IB3xI", fh.read(12))
        if version != _VERSION:
            raise WeightFormatError(f"{path}: unsupported version {version}")
        if head_code not in head_names:
            raise WeightFormatError(f"{path}: unknown head code {head_code}")
        headers = []
        for _ in range(n_layers):
            fan_in, fan_out, act, frozen = struct.unpack("<IIBB2x", fh.read(12))
            if act not in act_names:
                raise WeightFormatError(f"{path}: unknown activation code {act}")
            headers.append((fan_in, fan_out, act, frozen))
        layers = []
        for fan_in, fan_out, act, frozen in headers:
            wbytes = fh.read(8 * fan_in * fan_out)
            bbytes = fh.read(8 * fan_out)
            if len(wbytes) != 8 * fan_in * fan_out or len(bbytes) != 8 * fan_out:
                raise WeightFormatError(f"{path}: truncated payload")
            w = np.frombuffer(wbytes, dtype="<f8").reshape(fan_out, fan_in).copy()
            b = np.frombuffer(bbytes, dtype="<f8").copy()
            layers.append(Layer(w, b, act_names[act], bool(frozen)))
        if fh.read(1):
            raise WeightFormatError(f"{path}: trailing bytes")
    try:
        return MlpNetwork(layers, head_names[head_code])
    except ContractError as exc:
        raise WeightFormatError(f"{path}: inconsistent shapes: {exc}") from exc
