"""Shared domain types, run configuration, and deterministic RNG plumbing."""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

# Special token ids are fixed by convention and shared by every module.
PAD_ID = 0
BOS_ID = 1
EOS_ID = 2
UNK_ID = 3
SPECIAL_TOKENS = ("<pad>", "<bos>", "<eos>", "<unk>")

# Task prefixes, including the trailing space separator.
PREDICT_PREFIX = "[predict] "
EXPLAIN_PREFIX = "[explain] "

MI_VARIANTS = ("max", "mean", "kl", "none")
STOP_TARGETS = ("none", "predict", "explain")
CONFIDENCE_MODES = ("mean", "geomean", "first")


class ConfigError(ValueError):
    """Malformed or contradictory run configuration."""


class TaskKind(Enum):
    """The two training tasks. Task identity enters the model only via the prefix."""

    PREDICT = "predict"
    EXPLAIN = "explain"

    @property
    def prefix(self) -> str:
        return PREDICT_PREFIX if self is TaskKind.PREDICT else EXPLAIN_PREFIX


@dataclass(frozen=True)
class Example:
    """One dataset record: a problem statement, its gold answer, and a gold rationale.

    The rationale may be empty; input and label must be non-empty after trimming.
    """

    id: str
    input: str
    label: str
    rationale: str

    def __post_init__(self) -> None:
        if not self.input.strip():
            raise ValueError(f"example {self.id!r}: input is empty after trimming")
        if not self.label.strip():
            raise ValueError(f"example {self.id!r}: label is empty after trimming")


@dataclass(frozen=True)
class Vocabulary:
    """Ordered token list; index is the token id, ids 0-3 are the special tokens."""

    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.tokens) < len(SPECIAL_TOKENS):
            raise ValueError("vocabulary must contain the four special tokens")
        if tuple(self.tokens[: len(SPECIAL_TOKENS)]) != SPECIAL_TOKENS:
            raise ValueError(f"vocabulary must start with {SPECIAL_TOKENS}")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("vocabulary tokens must be distinct")
        object.__setattr__(self, "_ids", {t: i for i, t in enumerate(self.tokens)})

    @property
    def size(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int:
        """Token id, falling back to UNK for out-of-vocabulary tokens."""
        return self._ids.get(token, UNK_ID)

    def token_of(self, token_id: int) -> str:
        return self.tokens[token_id]

    def __contains__(self, token: str) -> bool:
        return token in self._ids


@dataclass(frozen=True)
class LossWeights:
    """Weights of the three loss terms; all must be non-negative."""

    alpha1: float
    alpha2: float
    alpha3: float

    def __post_init__(self) -> None:
        for name in ("alpha1", "alpha2", "alpha3"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ConfigError(f"{name} must be a non-negative finite real, got {value!r}")


def default_weights() -> LossWeights:
    """Default loss weighting: 0.5 on each task loss, 0.1 on the MI term."""
    return LossWeights(alpha1=0.5, alpha2=0.5, alpha3=0.1)


@dataclass(frozen=True)
class RunConfig:
    """Everything a training or evaluation run needs, serializable to a flat file.

    ``mi_variant`` selects the auxiliary-loss flavour: "max"/"mean" use the
    cross-entropy coupling with the corresponding reduction, "kl" swaps in the
    KL-divergence ablation, "none" disables the term (two-loss baseline).
    """

    seed: int = 0
    embed_dim: int = 16
    hidden_dim: int = 32
    max_src_len: int = 16
    max_tgt_len: int = 16
    batch_size: int = 8
    steps: int = 200
    learning_rate: float = 5e-3
    max_vocab: int = 512
    weights: LossWeights = field(default_factory=default_weights)
    mi_variant: str = "max"
    mi_stop_target: str = "none"
    confidence_mode: str = "mean"

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        for name in ("embed_dim", "hidden_dim", "max_src_len", "max_tgt_len", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer, got {getattr(self, name)}")
        if self.steps < 0:
            raise ConfigError(f"steps must be non-negative, got {self.steps}")
        if not np.isfinite(self.learning_rate) or self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate!r}")
        if self.max_vocab < 6:
            raise ConfigError(f"max_vocab must be at least 6, got {self.max_vocab}")
        if self.mi_variant not in MI_VARIANTS:
            raise ConfigError(f"mi_variant must be one of {MI_VARIANTS}, got {self.mi_variant!r}")
        if self.mi_stop_target not in STOP_TARGETS:
            raise ConfigError(
                f"mi_stop_target must be one of {STOP_TARGETS}, got {self.mi_stop_target!r}"
            )
        if self.confidence_mode not in CONFIDENCE_MODES:
            raise ConfigError(
                f"confidence_mode must be one of {CONFIDENCE_MODES}, got {self.confidence_mode!r}"
            )

    @property
    def effective_alpha3(self) -> float:
        """Weight actually applied to the auxiliary term; zero when disabled."""
        return 0.0 if self.mi_variant == "none" else self.weights.alpha3


_INT_FIELDS = ("seed", "embed_dim", "hidden_dim", "max_src_len", "max_tgt_len",
               "batch_size", "steps", "max_vocab")
_FLOAT_FIELDS = ("learning_rate",)
_STR_FIELDS = ("mi_variant", "mi_stop_target", "confidence_mode")


def config_to_text(config: RunConfig) -> str:
    """Serialize a RunConfig to the flat ``key = value`` file format."""
    lines = []
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        if f.name == "weights":
            rendered = f"{value.alpha1!r},{value.alpha2!r},{value.alpha3!r}"
        elif isinstance(value, float):
            rendered = repr(value)
        else:
            rendered = str(value)
        lines.append(f"{f.name} = {rendered}")
    return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> RunConfig:
    """Parse the flat config format. Unknown keys and malformed lines are hard errors."""
    values: dict[str, object] = {}
    known = {f.name for f in dataclasses.fields(RunConfig)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, rendered = line.partition("=")
        key = key.strip()
        rendered = rendered.strip()
        if key not in known:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"config line {lineno}: duplicate key {key!r}")
        try:
            if key in _INT_FIELDS:
                values[key] = int(rendered)
            elif key in _FLOAT_FIELDS:
                values[key] = float(rendered)
            elif key == "weights":
                parts = [p.strip() for p in rendered.split(",")]
                if len(parts) != 3:
                    raise ValueError("expected three comma-separated weights")
                values[key] = LossWeights(*(float(p) for p in parts))
            else:
                values[key] = rendered
        except ValueError as exc:
            raise ConfigError(f"config line {lineno}: bad value for {key!r}: {exc}") from exc
    return RunConfig(**values)


def load_config(path: str | Path) -> RunConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def save_config(config: RunConfig, path: str | Path) -> None:
    Path(path).write_text(config_to_text(config), encoding="utf-8")


def config_hash(config: RunConfig) -> str:
    """Content hash of the canonical serialized config."""
    return hashlib.sha256(config_to_text(config).encode("utf-8")).hexdigest()


class RngStream:
    """Deterministic random stream with named, independent substreams.

    Splitting hashes the label into the seed path, so ``split("data")`` and
    ``split("init")`` from one seed never interleave and are reproducible
    across platforms and processes.
    """

    def __init__(self, seed: int, _path: tuple[int, ...] = ()):
        self.seed = seed
        self._path = _path
        self.gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *_path])))

    def split(self, label: str) -> "RngStream":
        digest = hashlib.sha256(label.encode("utf-8")).digest()
        return RngStream(self.seed, self._path + (int.from_bytes(digest[:8], "little"),))


def seeded_rng(seed: int) -> RngStream:
    """Root random stream for a run; identical seeds yield identical streams."""
    return RngStream(seed)
