"""Multi-output MLP surrogate trained from scratch with Adam.

Predicts the scaled (Cp, Cd) pair from scaled control-point offsets. The
hyperparameter search space mirrors the assessed ranges: 1-5 hidden layers,
even widths 2-32, dropout 0-0.8, learning rates {1,2,4,6,8}e-{2,3,4}, six
activations and six initializers; batch size 32 and 512 epochs are fixed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataset import MinMaxScaler, kfold

__all__ = [
    "SurrogateError",
    "ACTIVATIONS",
    "INITIALIZERS",
    "MlpConfig",
    "MlpModel",
    "TrainingHistory",
    "MetricsReport",
    "train",
    "metrics",
    "tune",
    "save_model",
    "load_model",
    "TUNED_SCENARIO_I",
    "TUNED_SCENARIO_II",
]

_MAGIC = "DRAFTTUBE-MLP v1"


class SurrogateError(RuntimeError):
    """Raised on invalid configuration or training divergence."""


# ---------------------------------------------------------------------------
# Activations and initializers
# ---------------------------------------------------------------------------

def _elu(z):
    return np.where(z > 0, z, np.expm1(z))


def _elu_grad(z):
    return np.where(z > 0, 1.0, np.exp(z))


def _leaky_relu(z):
    return np.where(z > 0, z, 0.01 * z)


def _leaky_relu_grad(z):
    return np.where(z > 0, 1.0, 0.01)


def _relu(z):
    return np.maximum(z, 0.0)


def _relu_grad(z):
    return (z > 0).astype(float)


def _softplus(z):
    return np.logaddexp(0.0, z)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _swish(z):
    return z * _sigmoid(z)


def _swish_grad(z):
    s = _sigmoid(z)
    return s * (1.0 + z * (1.0 - s))


def _tanh_grad(z):
    return 1.0 - np.tanh(z) ** 2


ACTIVATIONS = {
    "elu": (_elu, _elu_grad),
    "leaky_relu": (_leaky_relu, _leaky_relu_grad),
    "relu": (_relu, _relu_grad),
    "softplus": (_softplus, _sigmoid),
    "swish": (_swish, _swish_grad),
    "tanh": (np.tanh, _tanh_grad),
}


def _init_scale(name: str, fan_in: int, fan_out: int) -> tuple[str, float]:
    """Return (distribution, scale) for one of the six standard initializers."""
    if "_" not in name:
        raise SurrogateError(f"unknown initializer {name!r}")
    family, dist = name.rsplit("_", 1)
    if family == "glorot":
        var = 2.0 / (fan_in + fan_out)
    elif family == "he":
        var = 2.0 / fan_in
    elif family == "lecun":
        var = 1.0 / fan_in
    else:
        raise SurrogateError(f"unknown initializer {name!r}")
    if dist == "normal":
        return "normal", np.sqrt(var)
    if dist == "uniform":
        return "uniform", np.sqrt(3.0 * var)
    raise SurrogateError(f"unknown initializer {name!r}")


INITIALIZERS = tuple(f"{fam}_{dist}" for fam in ("glorot", "he", "lecun")
                     for dist in ("normal", "uniform"))


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MlpConfig:
    hidden_layers: tuple
    dropout: tuple = None
    learning_rate: float = 0.002
    activation: str = "swish"
    initializer: str = "lecun_normal"
    batch_size: int = 32
    epochs: int = 512
    patience: int = 32

    def __post_init__(self):
        hl = tuple(int(v) for v in self.hidden_layers)
        object.__setattr__(self, "hidden_layers", hl)
        if not 1 <= len(hl) <= 5 or any(not 2 <= v <= 32 or v % 2 for v in hl):
            raise SurrogateError("hidden layers: 1-5 layers of even widths 2-32")
        dr = self.dropout if self.dropout is not None else (0.0,) * len(hl)
        dr = tuple(float(v) for v in dr)
        object.__setattr__(self, "dropout", dr)
        if len(dr) != len(hl) or any(not 0.0 <= v <= 0.8 for v in dr):
            raise SurrogateError("dropout rates must be in [0, 0.8], one per layer")
        if self.activation not in ACTIVATIONS:
            raise SurrogateError(f"unknown activation {self.activation!r}")
        _init_scale(self.initializer, 1, 1)
        if not 1e-4 <= self.learning_rate <= 8e-2:
            raise SurrogateError("learning rate outside the assessed range")


# Tuned topologies reported for the two sampling scenarios.
TUNED_SCENARIO_I = MlpConfig((22, 22, 20, 24, 4), activation="swish")
TUNED_SCENARIO_II = MlpConfig((26, 24, 32, 12, 6), activation="elu")


class MlpModel:
    """Feed-forward regressor with a linear two-unit output layer."""

    def __init__(self, n_inputs: int, config: MlpConfig, seed: int = 0,
                 n_outputs: int = 2):
        self.config = config
        self.n_inputs = n_inputs
        self.n_outputs = n_outputs
        self.x_scaler: MinMaxScaler | None = None
        self.y_scaler: MinMaxScaler | None = None
        self.meta: dict = {}
        rng = np.random.Generator(np.random.PCG64(seed))
        sizes = [n_inputs, *config.hidden_layers, n_outputs]
        self.W, self.b = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            dist, scale = _init_scale(config.initializer, fan_in, fan_out)
            if dist == "normal":
                W = rng.normal(0.0, scale, size=(fan_in, fan_out))
            else:
                W = rng.uniform(-scale, scale, size=(fan_in, fan_out))
            self.W.append(W)
            self.b.append(np.zeros(fan_out))

    def forward(self, X: np.ndarray) -> np.ndarray:
        """Inference pass (dropout inactive); accepts (n, d) or (d,)."""
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        A = np.atleast_2d(X)
        if A.shape[1] != self.n_inputs:
            raise SurrogateError(
                f"input width {A.shape[1]} != model input {self.n_inputs}")
        act = ACTIVATIONS[self.config.activation][0]
        for W, b in zip(self.W[:-1], self.b[:-1]):
            A = act(A @ W + b)
        out = A @ self.W[-1] + self.b[-1]
        return out[0] if single else out

    def predict(self, X_raw: np.ndarray) -> np.ndarray:
        """Predict in original units using the attached scalers."""
        if self.x_scaler is None or self.y_scaler is None:
            raise SurrogateError("model has no attached scaler state")
        return self.y_scaler.invert(self.forward(self.x_scaler.apply(X_raw)))

    def parameters(self):
        return self.W + self.b

    def set_parameters(self, params):
        k = len(self.W)
        self.W = [p.copy() for p in params[:k]]
        self.b = [p.copy() for p in params[k:]]

    # -- training internals -------------------------------------------------

    def _forward_train(self, X, rng):
        """Forward pass keeping pre-activations; inverted dropout on hidden layers."""
        act = ACTIVATIONS[self.config.activation][0]
        A = X
        zs, acts, masks = [], [A], []
        for li, (W, b) in enumerate(zip(self.W[:-1], self.b[:-1])):
            Z = A @ W + b
            A = act(Z)
            p = self.config.dropout[li]
            if p > 0.0:
                mask = (rng.random(A.shape) >= p) / (1.0 - p)
                A = A * mask
            else:
                mask = None
            zs.append(Z)
            acts.append(A)
            masks.append(mask)
        out = A @ self.W[-1] + self.b[-1]
        return out, zs, acts, masks

    def gradients(self, X, Y, rng=None):
        """MSE loss and its gradients w.r.t. all weights and biases."""
        if rng is None:
            rng = np.random.Generator(np.random.PCG64(0))
        dact = ACTIVATIONS[self.config.activation][1]
        out, zs, acts, masks = self._forward_train(X, rng)
        n = len(X)
        loss = float(np.mean((out - Y) ** 2))
        # d(loss)/d(out); MSE averaged over samples and outputs
        delta = 2.0 * (out - Y) / (n * self.n_outputs)
        gW = [None] * len(self.W)
        gb = [None] * len(self.b)
        gW[-1] = acts[-1].T @ delta
        gb[-1] = delta.sum(axis=0)
        for li in range(len(self.W) - 2, -1, -1):
            delta = delta @ self.W[li + 1].T
            if masks[li] is not None:
                delta = delta * masks[li]
            delta = delta * dact(zs[li])
            gW[li] = acts[li].T @ delta
            gb[li] = delta.sum(axis=0)
        return loss, gW + gb


@dataclass
class TrainingHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    stopped_epoch: int = 0
    best_epoch: int = 0
    best_val_loss: float = np.inf


def train(model: MlpModel, X_train, Y_train, X_val, Y_val,
          seed: int = 0) -> TrainingHistory:
    """Adam minibatch training with early stopping on validation MSE.

    Adam uses beta1=0.9, beta2=0.999, eps=1e-8. Stops after ``patience``
    epochs without validation improvement (or at the epoch cap) and restores
    the best weights seen. Raises on divergence.
    """
    cfg = model.config
    X_train = np.asarray(X_train, dtype=float)
    Y_train = np.asarray(Y_train, dtype=float)
    X_val = np.asarray(X_val, dtype=float)
    Y_val = np.asarray(Y_val, dtype=float)
    rng = np.random.Generator(np.random.PCG64(seed))
    params = model.parameters()
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    history = TrainingHistory()
    best_params = [p.copy() for p in params]
    bad_epochs = 0
    n = len(X_train)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, grads = model.gradients(X_train[idx], Y_train[idx], rng)
            if not np.isfinite(loss):
                raise SurrogateError(
                    f"training diverged at epoch {epoch} (loss={loss})")
            epoch_loss += loss * len(idx)
            step += 1
            for p, g, mi, vi in zip(params, grads, m, v):
                mi *= beta1
                mi += (1 - beta1) * g
                vi *= beta2
                vi += (1 - beta2) * g ** 2
                m_hat = mi / (1 - beta1 ** step)
                v_hat = vi / (1 - beta2 ** step)
                p -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        history.train_loss.append(epoch_loss / n)
        val_loss = float(np.mean((model.forward(X_val) - Y_val) ** 2))
        history.val_loss.append(val_loss)
        if val_loss < history.best_val_loss:
            history.best_val_loss = val_loss
            history.best_epoch = epoch
            best_params = [p.copy() for p in params]
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs > cfg.patience:
                break
    history.stopped_epoch = epoch
    model.set_parameters(best_params)
    return history


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricsReport:
    mape: np.ndarray   # percent, per target
    rrmse: np.ndarray  # percent, per target
    r2: np.ndarray     # per target

    @property
    def mean_mape(self) -> float:
        return float(np.mean(self.mape))

    @property
    def mean_rrmse(self) -> float:
        return float(np.mean(self.rrmse))

    @property
    def mean_r2(self) -> float:
        return float(np.mean(self.r2))


def metrics(y: np.ndarray, y_hat: np.ndarray) -> MetricsReport:
    """Per-target MAPE, rRMSE and R^2.

    Rows with a zero observed value are excluded from MAPE (with a warning);
    rRMSE requires a non-constant target column.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float).T).T
    y_hat = np.atleast_2d(np.asarray(y_hat, dtype=float).T).T
    if y.shape != y_hat.shape or len(y) < 2:
        raise SurrogateError("metrics need matching arrays of length >= 2")
    n_t = y.shape[1]
    mape = np.empty(n_t)
    rrmse = np.empty(n_t)
    r2 = np.empty(n_t)
    for j in range(n_t):
        yj, pj = y[:, j], y_hat[:, j]
        nz = yj != 0
        if not np.all(nz):
            import warnings
            warnings.warn(f"target {j}: {np.sum(~nz)} zero rows excluded "
                          "from MAPE", stacklevel=2)
        if not np.any(nz):
            raise SurrogateError("all observed values are zero; MAPE undefined")
        mape[j] = np.mean(np.abs((yj[nz] - pj[nz]) / yj[nz])) * 100.0
        spread = yj.max() - yj.min()
        if spread <= 0:
            raise SurrogateError("constant target column; rRMSE undefined")
        rrmse[j] = np.sqrt(np.mean((yj - pj) ** 2)) / spread * 100.0
        ss_res = np.sum((yj - pj) ** 2)
        ss_tot = np.sum((yj - yj.mean()) ** 2)
        r2[j] = 1.0 - ss_res / ss_tot
    return MetricsReport(mape, rrmse, r2)


# ---------------------------------------------------------------------------
# Hyperparameter search
# ---------------------------------------------------------------------------

_LEARNING_RATES = tuple(x * 10.0 ** -y for y in (2, 3, 4) for x in (1, 2, 4, 6, 8))


def _sample_config(rng: np.random.Generator) -> MlpConfig:
    n_layers = int(rng.integers(1, 6))
    widths = tuple(int(2 * rng.integers(1, 17)) for _ in range(n_layers))
    dropout = tuple(0.1 * int(rng.integers(0, 9)) for _ in range(n_layers))
    lr = float(_LEARNING_RATES[rng.integers(len(_LEARNING_RATES))])
    activation = list(ACTIVATIONS)[rng.integers(len(ACTIVATIONS))]
    initializer = INITIALIZERS[rng.integers(len(INITIALIZERS))]
    return MlpConfig(widths, dropout, lr, activation, initializer)


def tune(X_train, Y_train, trials: int = 500, seed: int = 0, k: int = 5,
         epochs: int = 512, patience: int = 32):
    """Seeded random search over the hyperparameter space.

    Each trial is scored by the mean cross-validated R^2 over both targets.
    Returns (best_config, best_score, trial_log).
    """
    if trials < 1:
        raise SurrogateError("need at least one trial")
    X_train = np.asarray(X_train, dtype=float)
    Y_train = np.asarray(Y_train, dtype=float)
    rng = np.random.Generator(np.random.PCG64(seed))
    folds = kfold(np.arange(len(X_train)), k=k, seed=seed)
    log = []
    best_cfg, best_score = None, -np.inf
    for trial in range(trials):
        cfg = _sample_config(rng)
        cfg = MlpConfig(cfg.hidden_layers, cfg.dropout, cfg.learning_rate,
                        cfg.activation, cfg.initializer,
                        epochs=epochs, patience=patience)
        scores = []
        try:
            for fi, (tr, va) in enumerate(folds):
                model = MlpModel(X_train.shape[1], cfg, seed=seed * 1000 + trial)
                train(model, X_train[tr], Y_train[tr], X_train[va], Y_train[va],
                      seed=seed * 1000 + trial * 10 + fi)
                rep = metrics(Y_train[va], model.forward(X_train[va]))
                scores.append(rep.mean_r2)
            score = float(np.mean(scores))
        except SurrogateError:
            score = -np.inf  # divergent trial
        log.append((cfg, score))
        if score > best_score:
            best_cfg, best_score = cfg, score
    return best_cfg, best_score, log


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def save_model(model: MlpModel, path) -> None:
    """Write the model as a magic header line followed by a JSON document."""
    doc = {
        "n_inputs": model.n_inputs,
        "n_outputs": model.n_outputs,
        "config": {
            "hidden_layers": list(model.config.hidden_layers),
            "dropout": list(model.config.dropout),
            "learning_rate": model.config.learning_rate,
            "activation": model.config.activation,
            "initializer": model.config.initializer,
            "batch_size": model.config.batch_size,
            "epochs": model.config.epochs,
            "patience": model.config.patience,
        },
        "weights": [W.tolist() for W in model.W],
        "biases": [b.tolist() for b in model.b],
        "x_scaler": model.x_scaler.to_dict() if model.x_scaler else None,
        "y_scaler": model.y_scaler.to_dict() if model.y_scaler else None,
        "meta": model.meta,
    }
    with open(path, "w") as fh:
        fh.write(_MAGIC + "\n")
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_model(path) -> MlpModel:
    with open(path) as fh:
        magic = fh.readline().rstrip("\n")
        if magic != _MAGIC:
            raise SurrogateError(f"{path}: bad magic header {magic!r}")
        doc = json.load(fh)
    cfg = MlpConfig(tuple(doc["config"]["hidden_layers"]),
                    tuple(doc["config"]["dropout"]),
                    doc["config"]["learning_rate"],
                    doc["config"]["activation"],
                    doc["config"]["initializer"],
                    doc["config"]["batch_size"],
                    doc["config"]["epochs"],
                    doc["config"]["patience"])
    model = MlpModel(doc["n_inputs"], cfg, n_outputs=doc["n_outputs"])
    model.W = [np.array(W, dtype=float) for W in doc["weights"]]
    model.b = [np.array(b, dtype=float) for b in doc["biases"]]
    if doc["x_scaler"]:
        model.x_scaler = MinMaxScaler.from_dict(doc["x_scaler"])
    if doc["y_scaler"]:
        model.y_scaler = MinMaxScaler.from_dict(doc["y_scaler"])
    model.meta = doc.get("meta", {})
    return model
