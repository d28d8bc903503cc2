"""Dataset ingestion, vocabulary construction, task-prefixed encoding, and batching."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    BOS_ID,
    EOS_ID,
    PAD_ID,
    SPECIAL_TOKENS,
    Example,
    RngStream,
    RunConfig,
    TaskKind,
    Vocabulary,
)

_REQUIRED_FIELDS = ("input", "label", "rationale")


class DataError(ValueError):
    """Malformed dataset file or record."""


def tokenize(text: str) -> list[str]:
    """Lowercase whitespace tokenization, the only segmentation used anywhere."""
    return text.lower().split()


def load_records(path: str | Path) -> list[Example]:
    """Load a line-delimited dataset file.

    Each non-blank line is a flat JSON object with string fields "input",
    "label", "rationale" and an optional "id" (defaults to the line number).
    Errors name the offending line and field.
    """
    path = Path(path)
    examples: list[Example] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path.name} line {lineno}: not valid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise DataError(f"{path.name} line {lineno}: record must be a flat object")
            for name in _REQUIRED_FIELDS:
                if name not in obj:
                    raise DataError(f"{path.name} line {lineno}: missing field {name!r}")
                if not isinstance(obj[name], str):
                    raise DataError(f"{path.name} line {lineno}: field {name!r} must be a string")
            record_id = obj.get("id", str(lineno))
            if not isinstance(record_id, str):
                record_id = str(record_id)
            try:
                examples.append(
                    Example(
                        id=record_id,
                        input=obj["input"],
                        label=obj["label"],
                        rationale=obj["rationale"],
                    )
                )
            except ValueError as exc:
                raise DataError(f"{path.name} line {lineno}: {exc}") from exc
    return examples


def save_records(examples: list[Example], path: str | Path) -> None:
    """Write examples in the interchange format read by :func:`load_records`."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(
                json.dumps(
                    {"id": ex.id, "input": ex.input, "label": ex.label, "rationale": ex.rationale}
                )
                + "\n"
            )


def build_vocab(examples: list[Example], max_size: int) -> Vocabulary:
    """Frequency-ranked vocabulary over inputs, labels, rationales and prefixes.

    Ties break lexicographically. The two prefix tokens are always kept, and the
    four special tokens occupy ids 0-3, so max_size must be at least 6.
    """
    if not examples:
        raise DataError("cannot build a vocabulary from an empty example list")
    if max_size < len(SPECIAL_TOKENS) + 2:
        raise DataError(f"max_size must be at least {len(SPECIAL_TOKENS) + 2}, got {max_size}")

    prefix_tokens = [tokenize(TaskKind.PREDICT.prefix)[0], tokenize(TaskKind.EXPLAIN.prefix)[0]]
    counts: Counter[str] = Counter()
    for ex in examples:
        counts.update(tokenize(ex.input))
        counts.update(tokenize(ex.label))
        counts.update(tokenize(ex.rationale))
        counts.update(prefix_tokens)  # both task instances exist for every example

    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    cap = max_size - len(SPECIAL_TOKENS)
    chosen = [tok for tok, _ in ranked[:cap]]
    for prefix in prefix_tokens:
        if prefix not in chosen:
            for i in reversed(range(len(chosen))):
                if chosen[i] not in prefix_tokens:
                    del chosen[i]
                    break
            chosen.append(prefix)
    rank = {tok: i for i, (tok, _) in enumerate(ranked)}
    chosen.sort(key=rank.__getitem__)
    return Vocabulary(tokens=SPECIAL_TOKENS + tuple(chosen))


@dataclass(frozen=True)
class TaskInstance:
    """One example encoded for one task: prefixed source ids and BOS/EOS target ids."""

    example_id: str
    task: TaskKind
    src: tuple[int, ...]
    tgt: tuple[int, ...]
    src_truncated: bool = False
    tgt_truncated: bool = False


def encode(example: Example, task: TaskKind, vocab: Vocabulary, config: RunConfig) -> TaskInstance:
    """Encode one example for one task.

    src is the prefixed input without BOS/EOS; tgt is BOS + target + EOS, where
    the target is the label for Predict and the rationale for Explain.
    Truncation to the configured lengths is silent but flagged.
    """
    src_tokens = tokenize(task.prefix + example.input)
    src_ids = [vocab.id_of(t) for t in src_tokens]
    src_truncated = len(src_ids) > config.max_src_len
    src_ids = src_ids[: config.max_src_len]

    target_text = example.label if task is TaskKind.PREDICT else example.rationale
    tgt_ids = [BOS_ID] + [vocab.id_of(t) for t in tokenize(target_text)] + [EOS_ID]
    tgt_truncated = len(tgt_ids) > config.max_tgt_len
    tgt_ids = tgt_ids[: config.max_tgt_len]

    return TaskInstance(
        example_id=example.id,
        task=task,
        src=tuple(src_ids),
        tgt=tuple(tgt_ids),
        src_truncated=src_truncated,
        tgt_truncated=tgt_truncated,
    )


def ids_to_tokens(ids, vocab: Vocabulary) -> list[str]:
    """Map token ids back to token strings (special tokens render literally)."""
    return [vocab.token_of(int(i)) for i in ids]


@dataclass(frozen=True)
class TaskBatch:
    """PAD-padded id matrices for one task across a batch, with non-PAD masks."""

    src: np.ndarray
    src_mask: np.ndarray
    tgt: np.ndarray
    tgt_mask: np.ndarray


@dataclass(frozen=True)
class Batch:
    """Paired Predict/Explain instances for a slice of examples."""

    pairs: tuple[tuple[TaskInstance, TaskInstance], ...]
    predict: TaskBatch
    explain: TaskBatch

    def __len__(self) -> int:
        return len(self.pairs)


def _pack(instances: list[TaskInstance]) -> TaskBatch:
    src_len = max(len(inst.src) for inst in instances)
    tgt_len = max(len(inst.tgt) for inst in instances)
    src = np.full((len(instances), src_len), PAD_ID, dtype=np.int64)
    tgt = np.full((len(instances), tgt_len), PAD_ID, dtype=np.int64)
    src_mask = np.zeros_like(src, dtype=bool)
    tgt_mask = np.zeros_like(tgt, dtype=bool)
    for i, inst in enumerate(instances):
        src[i, : len(inst.src)] = inst.src
        src_mask[i, : len(inst.src)] = True
        tgt[i, : len(inst.tgt)] = inst.tgt
        tgt_mask[i, : len(inst.tgt)] = True
    return TaskBatch(src=src, src_mask=src_mask, tgt=tgt, tgt_mask=tgt_mask)


def make_batches(
    examples: list[Example], vocab: Vocabulary, config: RunConfig, stream: RngStream
) -> list[Batch]:
    """Shuffle examples with the given stream and pair both task encodings per example.

    The last partial batch is kept. Identical streams give identical batch order.
    """
    order = stream.gen.permutation(len(examples))
    batches: list[Batch] = []
    for start in range(0, len(examples), config.batch_size):
        chunk = [examples[i] for i in order[start : start + config.batch_size]]
        pairs = tuple(
            (
                encode(ex, TaskKind.PREDICT, vocab, config),
                encode(ex, TaskKind.EXPLAIN, vocab, config),
            )
            for ex in chunk
        )
        batches.append(
            Batch(
                pairs=pairs,
                predict=_pack([p for p, _ in pairs]),
                explain=_pack([e for _, e in pairs]),
            )
        )
    return batches
