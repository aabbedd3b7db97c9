"""Dilated temporal residual CNN for binary drowsiness assessment.

Twelve residual blocks of causal dilated convolutions (dilations cycling
2, 4, 8, 16), each followed by normalization, ReLU and spatial dropout,
then a global-average-pool softmax head. Forward, backward and the Adam
training loop are implemented from scratch on numpy arrays; gradients are
validated against central finite differences in the test suite.

Normalization standardizes each time step across channels (learned
per-channel scale and shift), which keeps every activation at time t a
function of inputs at times <= t, so the stack stays causal end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .filterbank import PatternDataset, PatternSignal
from .signal_gen import INDEX_LABEL, LABEL_INDEX, Label

__all__ = [
    "ArchSpec",
    "BlockWeights",
    "TdcnnModel",
    "TrainParams",
    "Assessment",
    "MlpModel",
    "init_model",
    "forward",
    "block_activations",
    "loss_and_grad",
    "train",
    "assess",
    "assess_window",
    "train_baseline_mlp",
    "predict_wakeful_scores",
    "receptive_field",
    "parameter_count",
    "model_arrays",
    "clone_model",
    "zeros_like_model",
    "split_indices",
]

IN_CHANNELS = 1
_NORM_EPS = 1e-5
_ADAM_EPS = 1e-8
_LOG_FLOOR = 1e-300
_ALLOWED_DILATIONS = (2, 4, 8, 16)
_DEFAULT_SCHEDULE = (2, 4, 8, 16) * 3


@dataclass(frozen=True)
class ArchSpec:
    """Architecture descriptor for the dilated residual stack."""

    n_blocks: int = 12
    kernel_size: int = 3
    channels: int = 16
    dilation_schedule: tuple[int, ...] = _DEFAULT_SCHEDULE
    dropout_rate: float = 0.1
    n_classes: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "dilation_schedule", tuple(self.dilation_schedule))
        if self.n_blocks != len(self.dilation_schedule):
            raise ValueError(
                f"n_blocks ({self.n_blocks}) must equal the dilation schedule "
                f"length ({len(self.dilation_schedule)})"
            )
        bad = [d for d in self.dilation_schedule if d not in _ALLOWED_DILATIONS]
        if bad:
            raise ValueError(f"dilations must be in {_ALLOWED_DILATIONS}, got {bad}")
        if self.kernel_size % 2 != 1 or self.kernel_size < 1:
            raise ValueError(f"kernel_size must be odd and >= 1, got {self.kernel_size}")
        if self.channels < 1:
            raise ValueError(f"channels must be >= 1, got {self.channels}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if self.n_classes < 2:
            raise ValueError(f"n_classes must be >= 2, got {self.n_classes}")


@dataclass
class BlockWeights:
    conv_w: np.ndarray  # (out_ch, in_ch, kernel)
    conv_b: np.ndarray  # (out_ch,)
    gamma: np.ndarray  # (out_ch,)
    beta: np.ndarray  # (out_ch,)
    proj_w: np.ndarray | None = None  # (out_ch, in_ch) when channel counts differ


@dataclass
class TdcnnModel:
    arch: ArchSpec
    blocks: list[BlockWeights]
    head_w: np.ndarray  # (n_classes, channels)
    head_b: np.ndarray  # (n_classes,)


@dataclass(frozen=True)
class TrainParams:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    batch_size: int = 32
    epochs: int = 30
    seed: int = 0
    weight_decay: float = 0.0

    def __post_init__(self) -> None:
        if not self.lr > 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must be in [0, 1)")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")


@dataclass(frozen=True)
class Assessment:
    """Binary decision: scores at or below 0.5 read as Drowsy."""

    score: float
    label: Label

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")
        expected = Label.DROWSY if self.score <= 0.5 else Label.WAKEFUL
        if self.label is not expected:
            raise ValueError(f"label {self.label} inconsistent with score {self.score}")


def _glorot(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int) -> np.ndarray:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


def init_model(arch: ArchSpec, seed: int) -> TdcnnModel:
    """Glorot-uniform weights, zero biases/shifts, unit scales; seeded."""
    rng = np.random.default_rng(seed)
    k = arch.kernel_size
    blocks: list[BlockWeights] = []
    c_in = IN_CHANNELS
    for _ in arch.dilation_schedule:
        c_out = arch.channels
        conv_w = _glorot(rng, (c_out, c_in, k), fan_in=c_in * k, fan_out=c_out * k)
        proj_w = None
        if c_in != c_out:
            proj_w = _glorot(rng, (c_out, c_in), fan_in=c_in, fan_out=c_out)
        blocks.append(
            BlockWeights(
                conv_w=conv_w,
                conv_b=np.zeros(c_out),
                gamma=np.ones(c_out),
                beta=np.zeros(c_out),
                proj_w=proj_w,
            )
        )
        c_in = c_out
    head_w = _glorot(rng, (arch.n_classes, arch.channels), fan_in=arch.channels, fan_out=arch.n_classes)
    head_b = np.zeros(arch.n_classes)
    return TdcnnModel(arch=arch, blocks=blocks, head_w=head_w, head_b=head_b)


def model_arrays(model: TdcnnModel) -> list[np.ndarray]:
    """Parameter arrays in the canonical flat order: for each block conv_w,
    conv_b, gamma, beta, then proj_w where present; finally head_w, head_b.
    This order is shared by the optimizer and the checkpoint format."""
    out: list[np.ndarray] = []
    for blk in model.blocks:
        out.extend([blk.conv_w, blk.conv_b, blk.gamma, blk.beta])
        if blk.proj_w is not None:
            out.append(blk.proj_w)
    out.extend([model.head_w, model.head_b])
    return out


def parameter_count(model: TdcnnModel) -> int:
    return sum(a.size for a in model_arrays(model))


def _map_model(model: TdcnnModel, fn) -> TdcnnModel:
    blocks = [
        BlockWeights(
            conv_w=fn(b.conv_w),
            conv_b=fn(b.conv_b),
            gamma=fn(b.gamma),
            beta=fn(b.beta),
            proj_w=None if b.proj_w is None else fn(b.proj_w),
        )
        for b in model.blocks
    ]
    return TdcnnModel(arch=model.arch, blocks=blocks, head_w=fn(model.head_w), head_b=fn(model.head_b))


def clone_model(model: TdcnnModel) -> TdcnnModel:
    return _map_model(model, np.copy)


def zeros_like_model(model: TdcnnModel) -> TdcnnModel:
    return _map_model(model, np.zeros_like)


def receptive_field(arch: ArchSpec) -> int:
    """Leftward extent (in samples, current included) seen by the last block."""
    return 1 + sum((arch.kernel_size - 1) * d for d in arch.dilation_schedule)


def _causal_conv(x: np.ndarray, w: np.ndarray, b: np.ndarray, dilation: int) -> tuple[np.ndarray, np.ndarray]:
    """Left-padded dilated convolution; returns (output, padded input)."""
    batch, _, t = x.shape
    c_out, _, k = w.shape
    pad = (k - 1) * dilation
    xp = np.pad(x, ((0, 0), (0, 0), (pad, 0)))
    y = np.broadcast_to(b[None, :, None], (batch, c_out, t)).copy()
    for j in range(k):
        y += np.einsum("oi,bit->bot", w[:, :, j], xp[:, :, j * dilation : j * dilation + t])
    return y, xp


def _causal_conv_backward(
    dy: np.ndarray, xp: np.ndarray, w: np.ndarray, dilation: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients (dx, dw, db) of the causal dilated convolution."""
    t = dy.shape[2]
    k = w.shape[2]
    pad = (k - 1) * dilation
    dw = np.zeros_like(w)
    dxp = np.zeros_like(xp)
    for j in range(k):
        sl = slice(j * dilation, j * dilation + t)
        dw[:, :, j] = np.einsum("bot,bit->oi", dy, xp[:, :, sl])
        dxp[:, :, sl] += np.einsum("oi,bot->bit", w[:, :, j], dy)
    db = dy.sum(axis=(0, 2))
    return dxp[:, :, pad:], dw, db


def _norm_forward(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Standardize each time step across channels, then scale/shift per channel."""
    mu = x.mean(axis=1, keepdims=True)
    var = x.var(axis=1, keepdims=True)
    s = np.sqrt(var + _NORM_EPS)
    xhat = (x - mu) / s
    y = gamma[None, :, None] * xhat + beta[None, :, None]
    return y, xhat, s


def _norm_backward(
    dy: np.ndarray, xhat: np.ndarray, s: np.ndarray, gamma: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    dgamma = np.einsum("bct,bct->c", dy, xhat)
    dbeta = dy.sum(axis=(0, 2))
    dxhat = dy * gamma[None, :, None]
    m1 = dxhat.mean(axis=1, keepdims=True)
    m2 = (dxhat * xhat).mean(axis=1, keepdims=True)
    dx = (dxhat - m1 - xhat * m2) / s
    return dx, dgamma, dbeta


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _forward_batch(
    model: TdcnnModel,
    x: np.ndarray,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
    keep_cache: bool = False,
):
    """Run the stack on (batch, 1, time) input; optionally keep per-block caches."""
    arch = model.arch
    p = arch.dropout_rate
    h = x
    caches = []
    for blk, dilation in zip(model.blocks, arch.dilation_schedule):
        inp = h
        conv, xp = _causal_conv(inp, blk.conv_w, blk.conv_b, dilation)
        norm, xhat, s = _norm_forward(conv, blk.gamma, blk.beta)
        act = np.maximum(norm, 0.0)
        mask = None
        if train_mode and p > 0.0:
            assert rng is not None, "train-mode forward needs a seeded generator"
            mask = (rng.random((x.shape[0], arch.channels)) >= p) / (1.0 - p)
            branch = act * mask[:, :, None]
        else:
            branch = act
        if blk.proj_w is None:
            res = inp
        else:
            res = np.einsum("oi,bit->bot", blk.proj_w, inp)
        h = branch + res
        if keep_cache:
            caches.append((inp, xp, norm, xhat, s, mask))
    pooled = h.mean(axis=2)
    logits = pooled @ model.head_w.T + model.head_b[None, :]
    probs = _softmax_rows(logits)
    if keep_cache:
        return probs, pooled, caches, h.shape[2]
    return probs


def forward(
    model: TdcnnModel, pattern: PatternSignal, train_mode: bool = False, seed: int = 0
) -> np.ndarray:
    """Class-probability vector for a single pattern (sums to one).

    With ``train_mode`` on, spatial dropout masks are drawn from ``seed``,
    so repeated calls with the same seed agree bitwise.
    """
    values = np.asarray(pattern.values, dtype=np.float64)
    if values.size < 1:
        raise ValueError("pattern must contain at least one value")
    rng = np.random.default_rng(seed) if train_mode else None
    probs = _forward_batch(model, values[None, None, :], train_mode=train_mode, rng=rng)
    return probs[0]


def block_activations(model: TdcnnModel, pattern: PatternSignal) -> list[np.ndarray]:
    """Pre-pooling output of every block (eval mode), each (channels, time)."""
    values = np.asarray(pattern.values, dtype=np.float64)
    if values.size < 1:
        raise ValueError("pattern must contain at least one value")
    h = values[None, None, :]
    outs = []
    for blk, dilation in zip(model.blocks, model.arch.dilation_schedule):
        conv, _ = _causal_conv(h, blk.conv_w, blk.conv_b, dilation)
        norm, _, _ = _norm_forward(conv, blk.gamma, blk.beta)
        act = np.maximum(norm, 0.0)
        res = h if blk.proj_w is None else np.einsum("oi,bit->bot", blk.proj_w, h)
        h = act + res
        outs.append(h[0].copy())
    return outs


def _loss_and_grad_arrays(
    model: TdcnnModel,
    x: np.ndarray,
    y: np.ndarray,
    train_mode: bool = False,
    seed: int = 0,
) -> tuple[float, TdcnnModel]:
    rng = np.random.default_rng(seed) if train_mode else None
    probs, pooled, caches, t_len = _forward_batch(
        model, x, train_mode=train_mode, rng=rng, keep_cache=True
    )
    batch = x.shape[0]
    picked = np.maximum(probs[np.arange(batch), y], _LOG_FLOOR)
    loss = float(-np.mean(np.log(picked)))

    grads = zeros_like_model(model)
    onehot = np.zeros_like(probs)
    onehot[np.arange(batch), y] = 1.0
    dlogits = (probs - onehot) / batch

    grads.head_w += dlogits.T @ pooled
    grads.head_b += dlogits.sum(axis=0)
    dpooled = dlogits @ model.head_w
    dh = np.repeat(dpooled[:, :, None], t_len, axis=2) / t_len

    for blk, gblk, dilation, cache in zip(
        reversed(model.blocks),
        reversed(grads.blocks),
        reversed(model.arch.dilation_schedule),
        reversed(caches),
    ):
        inp, xp, norm, xhat, s, mask = cache
        d_out = dh
        if blk.proj_w is None:
            d_inp_res = d_out
        else:
            gblk.proj_w += np.einsum("bot,bit->oi", d_out, inp)
            d_inp_res = np.einsum("oi,bot->bit", blk.proj_w, d_out)
        d_branch = d_out if mask is None else d_out * mask[:, :, None]
        d_norm = d_branch * (norm > 0)
        d_conv, dgamma, dbeta = _norm_backward(d_norm, xhat, s, blk.gamma)
        gblk.gamma += dgamma
        gblk.beta += dbeta
        d_inp_conv, dw, db = _causal_conv_backward(d_conv, xp, blk.conv_w, dilation)
        gblk.conv_w += dw
        gblk.conv_b += db
        dh = d_inp_conv + d_inp_res

    return loss, grads


def _batch_to_arrays(batch: list[tuple[PatternSignal, Label]]) -> tuple[np.ndarray, np.ndarray]:
    if not batch:
        raise ValueError("batch must not be empty")
    lengths = {np.asarray(p.values).size for p, _ in batch}
    if len(lengths) != 1:
        raise ValueError("all patterns in a batch must share one length")
    try:
        y = np.array([LABEL_INDEX[label] for _, label in batch], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"unknown class label: {exc.args[0]!r}") from exc
    x = np.stack([np.asarray(p.values, dtype=np.float64) for p, _ in batch])[:, None, :]
    return x, y


def loss_and_grad(
    model: TdcnnModel,
    batch: list[tuple[PatternSignal, Label]],
    train_mode: bool = False,
    seed: int = 0,
) -> tuple[float, TdcnnModel]:
    """Mean cross-entropy over the batch plus gradients for every parameter.

    The returned gradient container mirrors the model structure. Backprop
    runs through the softmax head, pooling, residual adds, dropout masks,
    ReLU, normalization (including its mean/variance dependence) and the
    dilated convolutions.
    """
    x, y = _batch_to_arrays(batch)
    return _loss_and_grad_arrays(model, x, y, train_mode=train_mode, seed=seed)


def split_indices(n: int, seed: int, train_frac: float = 0.8) -> tuple[np.ndarray, np.ndarray]:
    """Seeded shuffle split shared by the CNN and the MLP baseline."""
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(n * train_frac)
    return perm[:n_train], perm[n_train:]


def _adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    m: list[np.ndarray],
    v: list[np.ndarray],
    t: int,
    hp: TrainParams,
) -> None:
    for p, g, mp, vp in zip(params, grads, m, v):
        if hp.weight_decay:
            g = g + hp.weight_decay * p
        mp *= hp.beta1
        mp += (1 - hp.beta1) * g
        vp *= hp.beta2
        vp += (1 - hp.beta2) * g * g
        m_hat = mp / (1 - hp.beta1**t)
        v_hat = vp / (1 - hp.beta2**t)
        p -= hp.lr * m_hat / (np.sqrt(v_hat) + _ADAM_EPS)


def _scores_tdcnn(model: TdcnnModel, values: np.ndarray) -> np.ndarray:
    probs = _forward_batch(model, values[:, None, :])
    return probs[:, LABEL_INDEX[Label.WAKEFUL]]


def _accuracy_from_scores(scores: np.ndarray, labels: np.ndarray) -> float:
    pred = (scores > 0.5).astype(np.int64)
    return float(np.mean(pred == labels))


def train(
    model: TdcnnModel, dataset: PatternDataset, params: TrainParams
) -> tuple[TdcnnModel, list[tuple[int, float, float]]]:
    """Adam-train on an 80/20 seeded split; return the best-validation snapshot.

    History rows are (epoch, mean train loss, validation accuracy). The
    input model is never mutated; with ``epochs=0`` the returned model is an
    identical copy. Fully deterministic given ``params.seed``.
    """
    counts = dataset.class_counts()
    if any(c == 0 for c in counts.values()):
        raise ValueError(f"training needs both classes, got counts {counts}")

    rng = np.random.default_rng([params.seed, 3])
    train_idx, val_idx = split_indices(len(dataset), params.seed)
    work = clone_model(model)
    history: list[tuple[int, float, float]] = []
    if params.epochs == 0:
        return work, history
    if train_idx.size == 0 or val_idx.size == 0:
        raise ValueError(f"dataset of {len(dataset)} rows is too small for an 80/20 split")

    m, v = zeros_like_model(work), zeros_like_model(work)
    work_arrays = model_arrays(work)
    m_arrays, v_arrays = model_arrays(m), model_arrays(v)
    x_val = dataset.values[val_idx]
    y_val = dataset.labels[val_idx]

    best_model = clone_model(work)
    best_acc = -1.0
    t_step = 0
    for epoch in range(params.epochs):
        order = rng.permutation(train_idx.size)
        losses = []
        for start in range(0, train_idx.size, params.batch_size):
            rows = train_idx[order[start : start + params.batch_size]]
            xb = dataset.values[rows][:, None, :]
            yb = dataset.labels[rows]
            dropout_seed = int(rng.integers(0, 2**62))
            loss, grads = _loss_and_grad_arrays(work, xb, yb, train_mode=True, seed=dropout_seed)
            t_step += 1
            _adam_step(work_arrays, model_arrays(grads), m_arrays, v_arrays, t_step, params)
            losses.append(loss)
        val_acc = _accuracy_from_scores(_scores_tdcnn(work, x_val), y_val)
        history.append((epoch, float(np.mean(losses)), val_acc))
        if val_acc > best_acc:
            best_acc = val_acc
            best_model = clone_model(work)
    return best_model, history


def assess(model: TdcnnModel, pattern: PatternSignal) -> Assessment:
    """Map the wakefulness probability onto the binary decision rule."""
    probs = forward(model, pattern)
    score = float(probs[LABEL_INDEX[Label.WAKEFUL]])
    label = Label.DROWSY if score <= 0.5 else Label.WAKEFUL
    return Assessment(score=score, label=label)


def assess_window(model: TdcnnModel, patterns: list[PatternSignal]) -> Assessment:
    """Average the per-pattern scores of a window, then apply the same rule."""
    if not patterns:
        raise ValueError("assess_window needs at least one pattern")
    scores = [float(forward(model, p)[LABEL_INDEX[Label.WAKEFUL]]) for p in patterns]
    score = float(np.mean(scores))
    label = Label.DROWSY if score <= 0.5 else Label.WAKEFUL
    return Assessment(score=score, label=label)


# ---------------------------------------------------------------------------
# MLP baseline (qualitative reference point below the CNN)
# ---------------------------------------------------------------------------

_MLP_HIDDEN = 32


@dataclass
class MlpModel:
    w1: np.ndarray  # (hidden, in_dim)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (n_classes, hidden)
    b2: np.ndarray  # (n_classes,)


def _mlp_probs(model: MlpModel, values: np.ndarray) -> np.ndarray:
    hidden = np.maximum(values @ model.w1.T + model.b1[None, :], 0.0)
    logits = hidden @ model.w2.T + model.b2[None, :]
    return _softmax_rows(logits)


def _mlp_loss_grad(model: MlpModel, x: np.ndarray, y: np.ndarray) -> tuple[float, list[np.ndarray]]:
    pre = x @ model.w1.T + model.b1[None, :]
    hidden = np.maximum(pre, 0.0)
    logits = hidden @ model.w2.T + model.b2[None, :]
    probs = _softmax_rows(logits)
    batch = x.shape[0]
    picked = np.maximum(probs[np.arange(batch), y], _LOG_FLOOR)
    loss = float(-np.mean(np.log(picked)))
    onehot = np.zeros_like(probs)
    onehot[np.arange(batch), y] = 1.0
    dlogits = (probs - onehot) / batch
    dw2 = dlogits.T @ hidden
    db2 = dlogits.sum(axis=0)
    dhidden = (dlogits @ model.w2) * (pre > 0)
    dw1 = dhidden.T @ x
    db1 = dhidden.sum(axis=0)
    return loss, [dw1, db1, dw2, db2]


def train_baseline_mlp(
    dataset: PatternDataset, params: TrainParams
) -> tuple[MlpModel, float]:
    """Single-hidden-layer softmax baseline on the same split and optimizer.

    Returns the best-validation snapshot and its validation accuracy; with
    ``epochs=0`` that is simply the untrained model's accuracy.
    """
    counts = dataset.class_counts()
    if any(c == 0 for c in counts.values()):
        raise ValueError(f"training needs both classes, got counts {counts}")
    train_idx, val_idx = split_indices(len(dataset), params.seed)
    if train_idx.size == 0 or val_idx.size == 0:
        raise ValueError(f"dataset of {len(dataset)} rows is too small for an 80/20 split")

    in_dim = dataset.n_channels
    n_classes = len(INDEX_LABEL)
    init_rng = np.random.default_rng([params.seed, 1])
    model = MlpModel(
        w1=_glorot(init_rng, (_MLP_HIDDEN, in_dim), in_dim, _MLP_HIDDEN),
        b1=np.zeros(_MLP_HIDDEN),
        w2=_glorot(init_rng, (n_classes, _MLP_HIDDEN), _MLP_HIDDEN, n_classes),
        b2=np.zeros(n_classes),
    )
    x_val = dataset.values[val_idx]
    y_val = dataset.labels[val_idx]

    def val_accuracy(mdl: MlpModel) -> float:
        scores = _mlp_probs(mdl, x_val)[:, LABEL_INDEX[Label.WAKEFUL]]
        return _accuracy_from_scores(scores, y_val)

    best_model = MlpModel(*(a.copy() for a in (model.w1, model.b1, model.w2, model.b2)))
    best_acc = val_accuracy(model)

    rng = np.random.default_rng([params.seed, 2])
    arrays = [model.w1, model.b1, model.w2, model.b2]
    m = [np.zeros_like(a) for a in arrays]
    v = [np.zeros_like(a) for a in arrays]
    t_step = 0
    for _ in range(params.epochs):
        order = rng.permutation(train_idx.size)
        for start in range(0, train_idx.size, params.batch_size):
            rows = train_idx[order[start : start + params.batch_size]]
            loss, grads = _mlp_loss_grad(model, dataset.values[rows], dataset.labels[rows])
            t_step += 1
            _adam_step(arrays, grads, m, v, t_step, params)
        acc = val_accuracy(model)
        if acc > best_acc:
            best_acc = acc
            best_model = MlpModel(*(a.copy() for a in arrays))
    return best_model, best_acc


def predict_wakeful_scores(model, values: np.ndarray) -> np.ndarray:
    """Wakefulness probability per row for either classifier kind."""
    values = np.asarray(values, dtype=np.float64)
    if isinstance(model, MlpModel):
        return _mlp_probs(model, values)[:, LABEL_INDEX[Label.WAKEFUL]]
    if isinstance(model, TdcnnModel):
        return _scores_tdcnn(model, values)
    raise TypeError(f"unsupported model type: {type(model).__name__}")
