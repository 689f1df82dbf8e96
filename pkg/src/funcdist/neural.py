"""Small feed-forward production networks in plain numpy.

Networks map the 8 industry-mean-adjusted firm inputs to a scalar outcome.
Hidden layers use ReLU, the output layer is affine. Everything runs in
float64 so that training is reproducible bit for bit for a given seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "NetworkArchitecture",
    "WeightSet",
    "TrainConfig",
    "DivergenceError",
    "init_network",
    "forward",
    "hidden_features",
    "rmse_loss",
    "mse_loss",
    "gradient",
    "train",
    "train_last_layer",
    "weights_to_json",
    "weights_from_json",
]


class DivergenceError(RuntimeError):
    """Raised when the training loss stops being finite."""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss!r})")
        self.epoch = epoch
        self.loss = loss


@dataclass(frozen=True)
class NetworkArchitecture:
    layer_sizes: tuple[int, ...] = (8, 16, 16, 1)
    # "identity" exists for tests that need an exactly affine network
    activation: str = "relu"

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 3:
            raise ValueError("architecture needs at least one hidden layer")
        if any(s < 1 for s in sizes):
            raise ValueError(f"layer sizes must be >= 1, got {sizes}")
        if sizes[-1] != 1:
            raise ValueError("output layer must have a single unit")
        if self.activation not in ("relu", "identity"):
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_layers(self) -> int:
        return len(self.layer_sizes) - 1


@dataclass(frozen=True, eq=False)
class WeightSet:
    """Weights W^(0..L) and biases b^(0..L); W^(l) has shape (out, in)."""

    arch: NetworkArchitecture
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    seed: int | None = None

    def __post_init__(self):
        if len(self.weights) != self.arch.n_layers or len(self.biases) != self.arch.n_layers:
            raise ValueError("number of layers does not match architecture")
        sizes = self.arch.layer_sizes
        for l, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.shape != (sizes[l + 1], sizes[l]) or b.shape != (sizes[l + 1],):
                raise ValueError(f"layer {l} has shapes {W.shape}, {b.shape}")

    def params(self) -> list[np.ndarray]:
        out = []
        for W, b in zip(self.weights, self.biases):
            out += [W, b]
        return out

    @classmethod
    def from_params(cls, arch, params, seed=None) -> "WeightSet":
        return cls(arch, tuple(params[0::2]), tuple(params[1::2]), seed)

    def flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params()])

    def with_flat(self, vec: np.ndarray) -> "WeightSet":
        params, pos = [], 0
        for p in self.params():
            params.append(np.asarray(vec[pos:pos + p.size], dtype=float).reshape(p.shape).copy())
            pos += p.size
        return WeightSet.from_params(self.arch, params, self.seed)

    def equals(self, other: "WeightSet") -> bool:
        """Exact (bitwise) equality of every parameter."""
        return self.arch == other.arch and all(
            np.array_equal(a, b) for a, b in zip(self.params(), other.params())
        )


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    epochs: int = 2000
    batch_size: int = 128
    # datasets smaller than this are trained full-batch
    full_batch_below: int = 256
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    early_stop_patience: int = 200
    freeze_prefix: bool = False
    # candidates must beat the incumbent by this relative margin
    min_rel_improvement: float = 1e-9
    # each new best also offers its exact least-squares output layer as a candidate
    polish_last_layer: bool = True

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def init_network(arch: NetworkArchitecture, seed: int) -> WeightSet:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    sizes = arch.layer_sizes
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return WeightSet(arch, tuple(weights), tuple(biases), seed)


def _act(z, activation):
    return np.maximum(z, 0.0) if activation == "relu" else z


def _forward_all(w: WeightSet, X: np.ndarray):
    """Return the list of layer activations a^(0..L+1), rows = samples."""
    acts = [X]
    a = X
    last = w.arch.n_layers - 1
    for l, (W, b) in enumerate(zip(w.weights, w.biases)):
        z = a @ W.T + b
        a = z if l == last else _act(z, w.arch.activation)
        acts.append(a)
    return acts


def _as_matrix(w: WeightSet, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.ndim != 2 or X.shape[1] != w.arch.n_inputs:
        raise ValueError(f"expected {w.arch.n_inputs} inputs, got shape {x.shape}")
    return X, single


def forward(w: WeightSet, x):
    """Network output for one input vector (returns float) or a matrix of rows."""
    X, single = _as_matrix(w, x)
    out = _forward_all(w, X)[-1][:, 0]
    return float(out[0]) if single else out


def hidden_features(w: WeightSet, X) -> np.ndarray:
    """Activations feeding the output layer, shape (N, width of last hidden)."""
    X, _ = _as_matrix(w, X)
    return _forward_all(w, X)[-2]


def _check_data(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if len(y) == 0:
        raise ValueError("empty dataset")
    if X.shape[0] != len(y):
        raise ValueError(f"X has {X.shape[0]} rows but y has {len(y)} entries")
    return X, y


def mse_loss(w: WeightSet, X, y) -> float:
    X, y = _check_data(X, y)
    r = forward(w, X) - y
    return float(np.mean(r * r))


def rmse_loss(w: WeightSet, X, y) -> float:
    return float(np.sqrt(mse_loss(w, X, y)))


def _backprop(w: WeightSet, X, y, last_only=False):
    acts = _forward_all(w, X)
    n = X.shape[0]
    delta = (2.0 / n) * (acts[-1] - y[:, None])
    grads_W = [None] * w.arch.n_layers
    grads_b = [None] * w.arch.n_layers
    for l in range(w.arch.n_layers - 1, -1, -1):
        grads_W[l] = delta.T @ acts[l]
        grads_b[l] = delta.sum(axis=0)
        if l == 0 or last_only:
            break
        delta = delta @ w.weights[l]
        if w.arch.activation == "relu":
            delta = delta * (acts[l] > 0)
    return grads_W, grads_b


def gradient(w: WeightSet, X, y) -> WeightSet:
    """Exact gradient of the mean squared error, in the shape of ``w``."""
    X, y = _check_data(X, y)
    if X.shape[1] != w.arch.n_inputs:
        raise ValueError(f"expected {w.arch.n_inputs} inputs, got {X.shape[1]}")
    gW, gb = _backprop(w, X, y)
    return WeightSet(w.arch, tuple(gW), tuple(gb), w.seed)


class _Adam:
    """Adam over one flat float64 parameter vector (updated in place)."""

    def __init__(self, size, cfg: TrainConfig):
        self.cfg = cfg
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, p, g):
        c = self.cfg
        self.t += 1
        self.m *= c.beta1
        self.m += (1.0 - c.beta1) * g
        self.v *= c.beta2
        self.v += (1.0 - c.beta2) * (g * g)
        step = self.m / (1.0 - c.beta1 ** self.t)
        step /= np.sqrt(self.v / (1.0 - c.beta2 ** self.t)) + c.eps
        step *= c.learning_rate
        p -= step


def _views(buf, shapes):
    out, pos = [], 0
    for shape in shapes:
        size = int(np.prod(shape))
        out.append(buf[pos:pos + size].reshape(shape))
        pos += size
    return out


def _batch_size(n, cfg):
    return n if n < cfg.full_batch_below else min(cfg.batch_size, n)


def _improves(candidate: float, best: float, cfg: TrainConfig) -> bool:
    return candidate < best * (1.0 - cfg.min_rel_improvement)


def _lean_backprop(params, X, y, relu, last_only):
    """MSE gradients for a flat [W0, b0, W1, b1, ...] list."""
    n_layers = len(params) // 2
    acts = [X]
    a = X
    for l in range(n_layers):
        z = a @ params[2 * l].T + params[2 * l + 1]
        if l < n_layers - 1 and relu:
            z = np.maximum(z, 0.0)
        acts.append(z)
        a = z
    delta = (2.0 / X.shape[0]) * (a - y[:, None])
    grads = [None] * len(params)
    for l in range(n_layers - 1, -1, -1):
        grads[2 * l] = delta.T @ acts[l]
        grads[2 * l + 1] = delta.sum(axis=0)
        if l == 0 or last_only:
            break
        delta = delta @ params[2 * l]
        if relu:
            delta = delta * (acts[l] > 0)
    return grads


def _run(w0: WeightSet, X, y, cfg: TrainConfig, last_only: bool) -> WeightSet:
    X, y = _check_data(X, y)
    arch = w0.arch
    relu = arch.activation == "relu"
    if last_only:
        # prefix is frozen: train an affine map on the fixed last hidden layer
        inputs = hidden_features(w0, X)
        start_params = w0.params()[-2:]
    else:
        inputs = X
        start_params = w0.params()
    shapes = [p.shape for p in start_params]
    flat = np.concatenate([p.ravel() for p in start_params])
    trainable = _views(flat, shapes)
    opt = _Adam(flat.size, cfg)
    rng = np.random.default_rng([cfg.seed, 0x5EED])
    n = len(y)
    bs = _batch_size(n, cfg)

    def snapshot():
        params = w0.params()[:-2] + _views(flat.copy(), shapes) if last_only \
            else _views(flat.copy(), shapes)
        return WeightSet.from_params(arch, params, w0.seed)

    def flat_grad(Xb, yb):
        return np.concatenate([g.ravel() for g in _lean_backprop(trainable, Xb, yb, relu, False)])

    def full_pass():
        """Full-sample RMSE and the activations feeding the output layer."""
        out = inputs
        n_l = len(trainable) // 2
        for l in range(n_l):
            if l == n_l - 1:
                hidden = out
            out = out @ trainable[2 * l].T + trainable[2 * l + 1]
            if l < n_l - 1 and relu:
                out = np.maximum(out, 0.0)
        r = out[:, 0] - y
        with np.errstate(over="ignore", invalid="ignore"):
            return float(np.sqrt(np.mean(r * r))), hidden

    def polished(hidden):
        """Exact least-squares output layer on top of ``hidden``."""
        A = np.hstack([hidden, np.ones((n, 1))])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        r = A @ coef - y
        loss = float(np.sqrt(np.mean(r * r)))
        params = snapshot().params()
        params[-2] = coef[:-1][None, :].copy()
        params[-1] = coef[-1:].copy()
        return loss, WeightSet.from_params(arch, params, w0.seed)

    best = w0
    raw_best, hidden = full_pass()
    if not np.isfinite(raw_best):
        raise DivergenceError(0, raw_best)
    best_loss = raw_best

    def consider_polish(hidden):
        # every new raw best also offers its least-squares polish, so a longer
        # run always sees a superset of a shorter run's candidates
        nonlocal best, best_loss
        if not cfg.polish_last_layer:
            return
        loss, cand = polished(hidden)
        if np.isfinite(loss) and _improves(loss, best_loss, cfg):
            best, best_loss = cand, loss

    consider_polish(hidden)
    since_best = 0
    for epoch in range(1, cfg.epochs + 1):
        if bs == n:
            opt.step(flat, flat_grad(inputs, y))
        else:
            order = rng.permutation(n)
            for start in range(0, n, bs):
                idx = order[start:start + bs]
                opt.step(flat, flat_grad(inputs[idx], y[idx]))
        loss, hidden = full_pass()
        if not np.isfinite(loss):
            raise DivergenceError(epoch, loss)
        if _improves(loss, raw_best, cfg):
            raw_best, since_best = loss, 0
            if _improves(loss, best_loss, cfg):
                best, best_loss = snapshot(), loss
            consider_polish(hidden)
        else:
            since_best += 1
            if since_best >= cfg.early_stop_patience:
                break
    return best


def train(X, y, arch: NetworkArchitecture | None = None, config: TrainConfig | None = None) -> WeightSet:
    """Fit a network by Adam on MSE, returning the lowest full-sample RMSE weights seen."""
    arch = arch or NetworkArchitecture()
    config = config or TrainConfig()
    if config.freeze_prefix:
        raise ValueError("freeze_prefix is only meaningful for train_last_layer")
    w0 = init_network(arch, config.seed)
    return _run(w0, X, y, config, last_only=False)


def train_last_layer(frozen: WeightSet, X, y, config: TrainConfig | None = None) -> WeightSet:
    """Retrain only W^(L), b^(L) starting from ``frozen``'s own output layer.

    The starting point counts as a candidate, so the result never fits
    (X, y) worse than ``frozen`` does.
    """
    config = replace(config or TrainConfig(), freeze_prefix=True)
    out = _run(frozen, X, y, config, last_only=True)
    # prefix arrays are shared by identity with the frozen network
    weights = frozen.weights[:-1] + out.weights[-1:]
    biases = frozen.biases[:-1] + out.biases[-1:]
    return WeightSet(frozen.arch, weights, biases, frozen.seed)


def weights_to_json(w: WeightSet) -> str:
    """Serialize with hex floats so the round trip is bit exact."""
    doc = {
        "layer_sizes": list(w.arch.layer_sizes),
        "activation": w.arch.activation,
        "seed": w.seed,
        "layers": [
            {
                "W": [[float(v).hex() for v in row] for row in W],
                "b": [float(v).hex() for v in b],
            }
            for W, b in zip(w.weights, w.biases)
        ],
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def weights_from_json(text: str) -> WeightSet:
    doc = json.loads(text)
    arch = NetworkArchitecture(tuple(doc["layer_sizes"]), doc.get("activation", "relu"))
    weights = tuple(
        np.array([[float.fromhex(v) for v in row] for row in layer["W"]], dtype=float).reshape(
            arch.layer_sizes[i + 1], arch.layer_sizes[i]
        )
        for i, layer in enumerate(doc["layers"])
    )
    biases = tuple(np.array([float.fromhex(v) for v in layer["b"]], dtype=float) for layer in doc["layers"])
    return WeightSet(arch, weights, biases, doc.get("seed"))
