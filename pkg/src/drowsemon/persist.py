"""File formats for every persistent value type.

All reals are written as shortest round-trip decimal strings (``repr``),
so load(save(x)) reproduces bit-identical doubles. JSON documents are
emitted with sorted keys and a trailing newline, which makes artifact
files byte-stable across runs.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

from .filterbank import ChannelMeta, FilteredStack, HyperFilterConfig, PatternDataset
from .signal_gen import INDEX_LABEL, LABEL_INDEX, Label, PpgSignal
from .tdcnn import ArchSpec, TdcnnModel, init_model, model_arrays
from .vision import BoundingBox

__all__ = [
    "FormatError",
    "dump_json",
    "load_json",
    "save_signal_csv",
    "load_signal_csv",
    "save_signal_json",
    "load_signal_json",
    "save_hyper_config",
    "load_hyper_config",
    "save_stack_csv",
    "load_stack_csv",
    "save_dataset_csv",
    "load_dataset_csv",
    "save_model",
    "load_model",
    "save_boxes",
    "load_boxes",
    "save_mask_pgm",
    "load_mask_pgm",
]


class FormatError(ValueError):
    """Malformed persistent file; the message carries file and position."""


def _fmt(x: float) -> str:
    return repr(float(x))


def _parse_float(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise FormatError(f"{where}: expected a number, got {text!r}") from exc


def _parse_label(text: str, where: str) -> Label | None:
    if text == "":
        return None
    try:
        return Label(text)
    except ValueError as exc:
        raise FormatError(f"{where}: unknown label {text!r}") from exc


def dump_json(path: str | Path, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def load_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise FormatError(f"{where}: missing field {key!r}")
    return obj[key]


# ---------------------------------------------------------------------------
# Signals
# ---------------------------------------------------------------------------


def save_signal_csv(path: str | Path, signal: PpgSignal) -> None:
    """Header comment line '# fs=<hz>,label=<name>' then one sample per row."""
    label = signal.label.value if signal.label is not None else ""
    lines = [f"# fs={_fmt(signal.fs)},label={label}"]
    lines.extend(_fmt(v) for v in signal.samples)
    Path(path).write_text("\n".join(lines) + "\n")


def load_signal_csv(path: str | Path) -> PpgSignal:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise FormatError(f"{path}:1: empty signal file")
    match = re.fullmatch(r"#\s*fs=([^,]+),label=(.*)", lines[0].strip())
    if not match:
        raise FormatError(f"{path}:1: expected header '# fs=<hz>,label=<name>'")
    fs = _parse_float(match.group(1), f"{path}:1")
    label = _parse_label(match.group(2), f"{path}:1")
    samples = []
    for lineno, line in enumerate(lines[1:], start=2):
        text = line.strip()
        if not text:
            continue
        samples.append(_parse_float(text, f"{path}:{lineno}"))
    return PpgSignal(np.array(samples), fs=fs, label=label)


def save_signal_json(path: str | Path, signal: PpgSignal) -> None:
    dump_json(
        path,
        {
            "schema_version": 1,
            "fs": signal.fs,
            "label": signal.label.value if signal.label is not None else None,
            "samples": [float(v) for v in signal.samples],
        },
    )


def load_signal_json(path: str | Path) -> PpgSignal:
    obj = load_json(path)
    where = str(path)
    fs = _require(obj, "fs", where)
    samples = _require(obj, "samples", where)
    raw_label = obj.get("label")
    label = _parse_label(raw_label if raw_label is not None else "", where)
    try:
        return PpgSignal(np.array(samples, dtype=np.float64), fs=float(fs), label=label)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: {exc}") from exc


# ---------------------------------------------------------------------------
# Hyper-filter configuration
# ---------------------------------------------------------------------------


def save_hyper_config(path: str | Path, config: HyperFilterConfig) -> None:
    dump_json(
        path,
        {
            "bands_per_layer": config.bands_per_layer,
            "layers": [{"f_lo": lo, "f_hi": hi} for lo, hi in config.layers],
        },
    )


def hyper_config_from_dict(obj: dict, where: str = "config") -> HyperFilterConfig:
    layers = _require(obj, "layers", where)
    bands = obj.get("bands_per_layer", 11)
    try:
        return HyperFilterConfig(
            tuple(
                (float(_require(lay, "f_lo", where)), float(_require(lay, "f_hi", where)))
                for lay in layers
            ),
            bands_per_layer=int(bands),
        )
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: {exc}") from exc


def load_hyper_config(path: str | Path) -> HyperFilterConfig:
    return hyper_config_from_dict(load_json(path), where=str(path))


# ---------------------------------------------------------------------------
# Filtered stacks
# ---------------------------------------------------------------------------


def save_stack_csv(path: str | Path, stack: FilteredStack) -> None:
    """Comment lines carry fs/label and per-channel band metadata; data rows
    hold one sample per row with one column per channel."""
    label = stack.label.value if stack.label is not None else ""
    lines = [f"# fs={_fmt(stack.fs)},label={label}"]
    for i, m in enumerate(stack.channel_meta):
        lines.append(
            f"# channel={i},layer={m.layer},band={m.band},"
            f"f_lo={_fmt(m.f_lo)},f_hi={_fmt(m.f_hi)},taps={m.taps}"
        )
    for row in stack.channels.T:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_stack_csv(path: str | Path) -> FilteredStack:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise FormatError(f"{path}:1: empty stack file")
    match = re.fullmatch(r"#\s*fs=([^,]+),label=(.*)", lines[0].strip())
    if not match:
        raise FormatError(f"{path}:1: expected header '# fs=<hz>,label=<name>'")
    fs = _parse_float(match.group(1), f"{path}:1")
    label = _parse_label(match.group(2), f"{path}:1")

    meta: list[ChannelMeta] = []
    rows: list[list[float]] = []
    meta_re = re.compile(
        r"#\s*channel=(\d+),layer=(\d+),band=(\d+),f_lo=([^,]+),f_hi=([^,]+),taps=(\d+)"
    )
    for lineno, line in enumerate(lines[1:], start=2):
        text = line.strip()
        if not text:
            continue
        if text.startswith("#"):
            m = meta_re.fullmatch(text)
            if not m:
                raise FormatError(f"{path}:{lineno}: malformed channel metadata line")
            meta.append(
                ChannelMeta(
                    layer=int(m.group(2)),
                    band=int(m.group(3)),
                    f_lo=_parse_float(m.group(4), f"{path}:{lineno}"),
                    f_hi=_parse_float(m.group(5), f"{path}:{lineno}"),
                    taps=int(m.group(6)),
                )
            )
            continue
        values = [_parse_float(v, f"{path}:{lineno}") for v in text.split(",")]
        if len(values) != len(meta):
            raise FormatError(
                f"{path}:{lineno}: row has {len(values)} columns, expected {len(meta)}"
            )
        rows.append(values)
    if not meta or not rows:
        raise FormatError(f"{path}: stack file holds no channels or no samples")
    return FilteredStack(np.array(rows).T, meta, fs=fs, label=label)


# ---------------------------------------------------------------------------
# Pattern datasets
# ---------------------------------------------------------------------------


def save_dataset_csv(path: str | Path, dataset: PatternDataset) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label"] + [f"c{i}" for i in range(dataset.n_channels)])
        for row, label in zip(dataset.values, dataset.labels):
            writer.writerow([INDEX_LABEL[int(label)].value] + [_fmt(v) for v in row])


def load_dataset_csv(path: str | Path) -> PatternDataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}:1: empty dataset file") from None
        if not header or header[0] != "label":
            raise FormatError(f"{path}:1: header must start with 'label'")
        n_channels = len(header) - 1
        values, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n_channels + 1:
                raise FormatError(
                    f"{path}:{lineno}: row has {len(row)} fields, expected {n_channels + 1}"
                )
            label = _parse_label(row[0], f"{path}:{lineno}")
            if label is None:
                raise FormatError(f"{path}:{lineno}: dataset rows need a class label")
            labels.append(LABEL_INDEX[label])
            values.append([_parse_float(v, f"{path}:{lineno}") for v in row[1:]])
    if not values:
        raise FormatError(f"{path}: dataset holds no rows")
    return PatternDataset(np.array(values), np.array(labels))


# ---------------------------------------------------------------------------
# Model checkpoints
# ---------------------------------------------------------------------------


def save_model(path: str | Path, model: TdcnnModel) -> None:
    """Arch descriptor plus flat weights (block-major, then head), every real
    encoded as a round-trip decimal string."""
    flat: list[str] = []
    for arr in model_arrays(model):
        flat.extend(_fmt(v) for v in arr.ravel())
    arch = model.arch
    dump_json(
        path,
        {
            "schema_version": 1,
            "arch": {
                "n_blocks": arch.n_blocks,
                "kernel_size": arch.kernel_size,
                "channels": arch.channels,
                "dilation_schedule": list(arch.dilation_schedule),
                "dropout_rate": arch.dropout_rate,
                "n_classes": arch.n_classes,
            },
            "weights": flat,
        },
    )


def arch_from_dict(obj: dict, where: str = "arch") -> ArchSpec:
    try:
        return ArchSpec(
            n_blocks=int(_require(obj, "n_blocks", where)),
            kernel_size=int(_require(obj, "kernel_size", where)),
            channels=int(_require(obj, "channels", where)),
            dilation_schedule=tuple(int(d) for d in _require(obj, "dilation_schedule", where)),
            dropout_rate=float(_require(obj, "dropout_rate", where)),
            n_classes=int(_require(obj, "n_classes", where)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{where}: {exc}") from exc


def load_model(path: str | Path) -> TdcnnModel:
    obj = load_json(path)
    where = str(path)
    arch = arch_from_dict(_require(obj, "arch", where), where=f"{where}: arch")
    raw = _require(obj, "weights", where)
    flat = np.array([_parse_float(v, f"{where}: weights[{i}]") for i, v in enumerate(raw)])
    model = init_model(arch, seed=0)
    expected = sum(a.size for a in model_arrays(model))
    if flat.size != expected:
        raise FormatError(f"{where}: expected {expected} weights, got {flat.size}")
    pos = 0
    for arr in model_arrays(model):
        arr[...] = flat[pos : pos + arr.size].reshape(arr.shape)
        pos += arr.size
    return model


# ---------------------------------------------------------------------------
# Boxes and masks
# ---------------------------------------------------------------------------


def save_boxes(path: str | Path, boxes: list[BoundingBox]) -> None:
    dump_json(
        path,
        {"boxes": [{"x": b.x, "y": b.y, "w": b.w, "h": b.h} for b in boxes]},
    )


def load_boxes(path: str | Path) -> list[BoundingBox]:
    obj = load_json(path)
    where = str(path)
    out = []
    for i, raw in enumerate(_require(obj, "boxes", where)):
        try:
            out.append(
                BoundingBox(
                    x=float(_require(raw, "x", f"{where}: boxes[{i}]")),
                    y=float(_require(raw, "y", f"{where}: boxes[{i}]")),
                    w=float(_require(raw, "w", f"{where}: boxes[{i}]")),
                    h=float(_require(raw, "h", f"{where}: boxes[{i}]")),
                )
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"{where}: boxes[{i}]: {exc}") from exc
    return out


def save_mask_pgm(path: str | Path, mask: np.ndarray) -> None:
    """Plain (P2) PGM grid of integer class labels."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError("mask must be 2-D")
    h, w = mask.shape
    maxval = max(1, int(mask.max()) if mask.size else 1)
    lines = ["P2", f"{w} {h}", str(maxval)]
    lines.extend(" ".join(str(int(v)) for v in row) for row in mask)
    Path(path).write_text("\n".join(lines) + "\n")


def load_mask_pgm(path: str | Path) -> np.ndarray:
    tokens: list[str] = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if body:
            tokens.extend(body.split())
    if not tokens or tokens[0] != "P2":
        raise FormatError(f"{path}:1: expected a plain PGM ('P2') mask file")
    if len(tokens) < 4:
        raise FormatError(f"{path}: truncated PGM header")
    try:
        w, h, _maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
        values = [int(t) for t in tokens[4:]]
    except ValueError as exc:
        raise FormatError(f"{path}: non-integer PGM token ({exc})") from exc
    if len(values) != w * h:
        raise FormatError(f"{path}: expected {w * h} pixels, got {len(values)}")
    return np.array(values, dtype=np.int64).reshape(h, w)
