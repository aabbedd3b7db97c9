"""End-to-end experiment orchestration with per-stage artifacts.

A run executes generate -> band layout (fixed or searched) -> dataset ->
train -> evaluate, writes every stage's artifacts under the output
directory and finishes with a manifest. All stage seeds derive from the
single config seed, so reruns with the same config produce byte-identical
metrics files.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .band_search import RlParams, SearchSpace, fisher_score, q_learn
from .filterbank import (
    HyperFilterConfig,
    PatternDataset,
    hyper_filter,
    pattern_signals,
)
from .persist import (
    FormatError,
    arch_from_dict,
    dump_json,
    hyper_config_from_dict,
    save_dataset_csv,
    save_hyper_config,
    save_model,
    save_signal_csv,
)
from .plots import svg_line_chart, write_series_csv
from .signal_gen import (
    DROWSY_PRESET,
    WAKEFUL_PRESET,
    AnsState,
    Label,
    NoiseSpec,
    PpgSignal,
    add_noise,
    generate_ppg,
)
from .tdcnn import (
    ArchSpec,
    TrainParams,
    init_model,
    predict_wakeful_scores,
    split_indices,
    train,
    train_baseline_mlp,
)

__all__ = [
    "GenerationConfig",
    "SearchConfig",
    "PipelineConfig",
    "RunManifest",
    "PipelineError",
    "default_config",
    "config_to_dict",
    "config_from_dict",
    "config_hash",
    "derive_seed",
    "eval_report",
    "run_pipeline",
]

CONFIG_SCHEMA_VERSION = 1

DEFAULT_LAYERS = ((1.0, 10.0), (1.0, 5.5), (5.5, 10.0))


class PipelineError(RuntimeError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, cause: Exception | str):
        # args hold plain strings so instances pickle across processes
        super().__init__(stage, str(cause))
        self.stage = stage

    def __str__(self) -> str:
        return f"stage '{self.args[0]}' failed: {self.args[1]}"


@dataclass(frozen=True)
class GenerationConfig:
    duration_s: float = 24.0
    fs: float = 100.0
    n_per_class: int = 16
    drowsy: AnsState = DROWSY_PRESET
    wakeful: AnsState = WAKEFUL_PRESET
    noise: NoiseSpec = NoiseSpec()


@dataclass(frozen=True)
class SearchConfig:
    enabled: bool = False
    grid_hz: float = 0.5
    min_width_hz: float = 1.0
    episodes: int = 40
    steps_per_episode: int = 8
    epsilon: float = 0.2
    alpha: float = 0.5
    gamma: float = 0.9


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 7
    out_dir: str = "runs/default"
    generation: GenerationConfig = GenerationConfig()
    bands: HyperFilterConfig = HyperFilterConfig(DEFAULT_LAYERS)
    search: SearchConfig = SearchConfig()
    pattern_stride: int = 8
    arch: ArchSpec = ArchSpec()
    train: TrainParams = TrainParams(epochs=25)

    def __post_init__(self) -> None:
        if self.pattern_stride < 1:
            raise ValueError(f"pattern_stride must be >= 1, got {self.pattern_stride}")
        if self.generation.n_per_class < 0:
            raise ValueError("n_per_class must be >= 0")


@dataclass
class RunManifest:
    config_hash: str
    status: str
    artifacts: list[str]
    metrics: dict
    timings: dict[str, float]
    failed_stage: str | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "schema_version": CONFIG_SCHEMA_VERSION,
            "config_hash": self.config_hash,
            "status": self.status,
            "artifacts": self.artifacts,
            "metrics": self.metrics,
            "timings": self.timings,
            "failed_stage": self.failed_stage,
            "error": self.error,
        }


def default_config(out_dir: str = "runs/default", seed: int = 7) -> PipelineConfig:
    return PipelineConfig(seed=seed, out_dir=out_dir)


def derive_seed(*parts) -> int:
    """Stable sub-seed derivation from labeled parts (sha256-based)."""
    digest = hashlib.sha256(repr(parts).encode()).digest()
    return int.from_bytes(digest[:8], "little") % (2**62)


def _ans_state_to_dict(state: AnsState) -> dict:
    return {
        "label": state.label.value,
        "mean_hr": state.mean_hr,
        "hr_sdnn": state.hr_sdnn,
        "lf_hf_ratio": state.lf_hf_ratio,
    }


def _ans_state_from_dict(obj: dict, where: str) -> AnsState:
    try:
        return AnsState(
            label=Label(obj["label"]),
            mean_hr=float(obj["mean_hr"]),
            hr_sdnn=float(obj["hr_sdnn"]),
            lf_hf_ratio=float(obj["lf_hf_ratio"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{where}: {exc}") from exc


def config_to_dict(config: PipelineConfig) -> dict:
    gen = config.generation
    return {
        "schema_version": CONFIG_SCHEMA_VERSION,
        "seed": config.seed,
        "out_dir": config.out_dir,
        "generation": {
            "duration_s": gen.duration_s,
            "fs": gen.fs,
            "n_per_class": gen.n_per_class,
            "drowsy": _ans_state_to_dict(gen.drowsy),
            "wakeful": _ans_state_to_dict(gen.wakeful),
            "noise": {
                "baseline_wander_amp": gen.noise.baseline_wander_amp,
                "baseline_wander_freq": gen.noise.baseline_wander_freq,
                "motion_burst_rate": gen.noise.motion_burst_rate,
                "motion_burst_amp": gen.noise.motion_burst_amp,
                "white_noise_snr_db": gen.noise.white_noise_snr_db,
            },
        },
        "bands": {
            "bands_per_layer": config.bands.bands_per_layer,
            "layers": [{"f_lo": lo, "f_hi": hi} for lo, hi in config.bands.layers],
        },
        "search": {
            "enabled": config.search.enabled,
            "grid_hz": config.search.grid_hz,
            "min_width_hz": config.search.min_width_hz,
            "episodes": config.search.episodes,
            "steps_per_episode": config.search.steps_per_episode,
            "epsilon": config.search.epsilon,
            "alpha": config.search.alpha,
            "gamma": config.search.gamma,
        },
        "pattern_stride": config.pattern_stride,
        "arch": {
            "n_blocks": config.arch.n_blocks,
            "kernel_size": config.arch.kernel_size,
            "channels": config.arch.channels,
            "dilation_schedule": list(config.arch.dilation_schedule),
            "dropout_rate": config.arch.dropout_rate,
            "n_classes": config.arch.n_classes,
        },
        "train": {
            "lr": config.train.lr,
            "beta1": config.train.beta1,
            "beta2": config.train.beta2,
            "batch_size": config.train.batch_size,
            "epochs": config.train.epochs,
            "weight_decay": config.train.weight_decay,
        },
    }


def config_from_dict(obj: dict, where: str = "config") -> PipelineConfig:
    version = obj.get("schema_version")
    if version != CONFIG_SCHEMA_VERSION:
        raise FormatError(f"{where}: unsupported schema_version {version!r}")
    base = default_config()
    try:
        gen_obj = obj.get("generation", {})
        noise_obj = gen_obj.get("noise", {})
        gen_base = base.generation
        generation = GenerationConfig(
            duration_s=float(gen_obj.get("duration_s", gen_base.duration_s)),
            fs=float(gen_obj.get("fs", gen_base.fs)),
            n_per_class=int(gen_obj.get("n_per_class", gen_base.n_per_class)),
            drowsy=(
                _ans_state_from_dict(gen_obj["drowsy"], f"{where}: drowsy")
                if "drowsy" in gen_obj
                else gen_base.drowsy
            ),
            wakeful=(
                _ans_state_from_dict(gen_obj["wakeful"], f"{where}: wakeful")
                if "wakeful" in gen_obj
                else gen_base.wakeful
            ),
            noise=NoiseSpec(
                baseline_wander_amp=float(
                    noise_obj.get("baseline_wander_amp", gen_base.noise.baseline_wander_amp)
                ),
                baseline_wander_freq=float(
                    noise_obj.get("baseline_wander_freq", gen_base.noise.baseline_wander_freq)
                ),
                motion_burst_rate=float(
                    noise_obj.get("motion_burst_rate", gen_base.noise.motion_burst_rate)
                ),
                motion_burst_amp=float(
                    noise_obj.get("motion_burst_amp", gen_base.noise.motion_burst_amp)
                ),
                white_noise_snr_db=float(
                    noise_obj.get("white_noise_snr_db", gen_base.noise.white_noise_snr_db)
                ),
            ),
        )
        bands = (
            hyper_config_from_dict(obj["bands"], where=f"{where}: bands")
            if "bands" in obj
            else base.bands
        )
        search_obj = obj.get("search", {})
        sea_base = base.search
        search = SearchConfig(
            enabled=bool(search_obj.get("enabled", sea_base.enabled)),
            grid_hz=float(search_obj.get("grid_hz", sea_base.grid_hz)),
            min_width_hz=float(search_obj.get("min_width_hz", sea_base.min_width_hz)),
            episodes=int(search_obj.get("episodes", sea_base.episodes)),
            steps_per_episode=int(
                search_obj.get("steps_per_episode", sea_base.steps_per_episode)
            ),
            epsilon=float(search_obj.get("epsilon", sea_base.epsilon)),
            alpha=float(search_obj.get("alpha", sea_base.alpha)),
            gamma=float(search_obj.get("gamma", sea_base.gamma)),
        )
        arch = arch_from_dict(obj["arch"], where=f"{where}: arch") if "arch" in obj else base.arch
        train_obj = obj.get("train", {})
        t_base = base.train
        train_params = TrainParams(
            lr=float(train_obj.get("lr", t_base.lr)),
            beta1=float(train_obj.get("beta1", t_base.beta1)),
            beta2=float(train_obj.get("beta2", t_base.beta2)),
            batch_size=int(train_obj.get("batch_size", t_base.batch_size)),
            epochs=int(train_obj.get("epochs", t_base.epochs)),
            weight_decay=float(train_obj.get("weight_decay", t_base.weight_decay)),
        )
        return PipelineConfig(
            seed=int(obj.get("seed", base.seed)),
            out_dir=str(obj.get("out_dir", base.out_dir)),
            generation=generation,
            bands=bands,
            search=search,
            pattern_stride=int(obj.get("pattern_stride", base.pattern_stride)),
            arch=arch,
            train=train_params,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{where}: {exc}") from exc


def config_hash(config: PipelineConfig) -> str:
    """Hash of the canonical config document, output directory excluded."""
    doc = config_to_dict(config)
    doc.pop("out_dir", None)
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def eval_report(model, dataset: PatternDataset) -> dict:
    """Per-class accuracies, overall accuracy and the confusion matrix.

    Confusion rows are ground truth (Drowsy, Wakeful), columns predictions.
    """
    if len(dataset) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    scores = predict_wakeful_scores(model, dataset.values)
    pred = (scores > 0.5).astype(np.int64)
    labels = dataset.labels
    confusion = [
        [int(np.sum((labels == g) & (pred == p))) for p in (0, 1)] for g in (0, 1)
    ]
    per_class = {}
    for idx, lab in ((0, Label.DROWSY), (1, Label.WAKEFUL)):
        total = int(np.sum(labels == idx))
        per_class[lab.value] = (
            float(np.sum((labels == idx) & (pred == idx)) / total) if total else None
        )
    return {
        "per_class_accuracy": per_class,
        "overall_accuracy": float(np.mean(pred == labels)),
        "confusion_matrix": confusion,
        "n_rows": int(len(dataset)),
    }


def generate_signals(config: PipelineConfig) -> list[PpgSignal]:
    """Seeded noisy signals for both presets, drowsy first then wakeful."""
    gen = config.generation
    signals = []
    for class_idx, state in enumerate((gen.drowsy, gen.wakeful)):
        for i in range(gen.n_per_class):
            clean = generate_ppg(
                state, gen.duration_s, gen.fs, derive_seed("synth", config.seed, class_idx, i)
            )
            signals.append(
                add_noise(clean, gen.noise, derive_seed("noise", config.seed, class_idx, i))
            )
    return signals


def build_dataset(
    signals: list[PpgSignal], bands: HyperFilterConfig, stride: int
) -> PatternDataset:
    """Hyper-filter every signal and keep every ``stride``-th pattern."""
    if not signals:
        raise ValueError("no signals to build a dataset from (is n_per_class zero?)")
    patterns = []
    for sig in signals:
        stack = hyper_filter(sig, bands)
        patterns.extend(pattern_signals(stack)[::stride])
    return PatternDataset.from_patterns(patterns)


def run_pipeline(config: PipelineConfig) -> RunManifest:
    """Execute every stage, writing artifacts and a manifest under out_dir.

    A stage failure still writes the manifest (status "failed" with the
    stage name) before raising PipelineError. Reruns with an identical
    config produce byte-identical artifacts apart from the timing section
    of the manifest.
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts: list[str] = []
    timings: dict[str, float] = {}
    metrics: dict = {}
    chash = config_hash(config)

    def finish(status: str, failed_stage: str | None = None, error: str | None = None) -> RunManifest:
        manifest = RunManifest(
            config_hash=chash,
            status=status,
            artifacts=sorted(artifacts),
            metrics=metrics,
            timings=timings,
            failed_stage=failed_stage,
            error=error,
        )
        dump_json(out / "manifest.json", manifest.to_dict())
        return manifest

    def emit(rel: str, writer, *args) -> None:
        writer(out / rel, *args)
        artifacts.append(rel)

    emit("config.json", dump_json, config_to_dict(config))

    stage = "synth"
    try:
        started = time.perf_counter()
        signals = generate_signals(config)
        (out / "signals").mkdir(exist_ok=True)
        names = []
        for i, sig in enumerate(signals):
            rel = f"signals/{sig.label.value.lower()}_{i:03d}.csv"
            emit(rel, save_signal_csv, sig)
            names.append(rel)
        emit("signals/index.json", dump_json, {"n_signals": len(names), "files": names})
        if signals:
            first = signals[0]
            t_axis = [i / first.fs for i in range(first.samples.size)]
            emit(
                "signal_trace.csv",
                write_series_csv,
                ["t_s", "value"],
                [[t, repr(float(v))] for t, v in zip(t_axis, first.samples)],
            )
            emit(
                "signal_trace.svg",
                svg_line_chart,
                t_axis,
                {first.label.value: list(first.samples)},
                "Generated PPG trace",
                "time [s]",
                "amplitude",
            )
        timings[stage] = time.perf_counter() - started

        stage = "bands"
        started = time.perf_counter()
        bands = config.bands
        if config.search.enabled:
            space = SearchSpace(
                grid_hz=config.search.grid_hz,
                min_width_hz=config.search.min_width_hz,
                n_layers=len(config.bands.layers),
                bands_per_layer=config.bands.bands_per_layer,
            )
            rl = RlParams(
                episodes=config.search.episodes,
                steps_per_episode=config.search.steps_per_episode,
                epsilon=config.search.epsilon,
                alpha=config.search.alpha,
                gamma=config.search.gamma,
                seed=derive_seed("search", config.seed),
            )
            bands, history = q_learn(space, signals, rl)
            emit(
                "search.json",
                dump_json,
                {
                    "best_config": {
                        "bands_per_layer": bands.bands_per_layer,
                        "layers": [{"f_lo": lo, "f_hi": hi} for lo, hi in bands.layers],
                    },
                    "best_reward": history[-1][1] if history else None,
                    "history": [[ep, r] for ep, r in history],
                },
            )
            if history:
                emit(
                    "reward_history.csv",
                    write_series_csv,
                    ["episode", "best_reward"],
                    [[ep, repr(float(r))] for ep, r in history],
                )
                emit(
                    "reward_history.svg",
                    svg_line_chart,
                    [ep for ep, _ in history],
                    {"best reward": [r for _, r in history]},
                    "Band-layout search",
                    "episode",
                    "best reward",
                )
            metrics["search_best_reward"] = float(history[-1][1]) if history else None
        emit("bands.json", save_hyper_config, bands)
        timings[stage] = time.perf_counter() - started

        stage = "dataset"
        started = time.perf_counter()
        dataset = build_dataset(signals, bands, config.pattern_stride)
        counts = dataset.class_counts()
        if any(c == 0 for c in counts.values()):
            raise ValueError(f"dataset is missing a class: {counts}")
        emit("dataset.csv", save_dataset_csv, dataset)
        metrics["reward"] = fisher_score(
            dataset.values[dataset.labels == 0], dataset.values[dataset.labels == 1]
        )
        timings[stage] = time.perf_counter() - started

        stage = "train"
        started = time.perf_counter()
        tparams = replace(config.train, seed=derive_seed("train", config.seed))
        model0 = init_model(config.arch, derive_seed("init", config.seed))
        model, history = train(model0, dataset, tparams)
        emit("model.json", save_model, model)
        if history:
            emit(
                "loss_history.csv",
                write_series_csv,
                ["epoch", "train_loss", "val_accuracy"],
                [[ep, repr(float(l)), repr(float(a))] for ep, l, a in history],
            )
            emit(
                "loss_curve.svg",
                svg_line_chart,
                [ep for ep, _, _ in history],
                {
                    "train loss": [l for _, l, _ in history],
                    "val accuracy": [a for _, _, a in history],
                },
                "Training history",
                "epoch",
                "value",
            )
        mlp_model, mlp_acc = train_baseline_mlp(dataset, tparams)
        metrics["best_val_accuracy"] = max((a for _, _, a in history), default=None)
        timings[stage] = time.perf_counter() - started

        stage = "eval"
        started = time.perf_counter()
        _, val_idx = split_indices(len(dataset), tparams.seed)
        val_ds = PatternDataset(dataset.values[val_idx], dataset.labels[val_idx])
        metrics["tdcnn"] = eval_report(model, val_ds)
        metrics["baseline_mlp"] = eval_report(mlp_model, val_ds)
        metrics["baseline_mlp"]["best_val_accuracy"] = float(mlp_acc)
        emit("metrics.json", dump_json, metrics)
        timings[stage] = time.perf_counter() - started
    except Exception as exc:
        finish("failed", failed_stage=stage, error=str(exc))
        raise PipelineError(stage, exc) from exc

    return finish("ok")
