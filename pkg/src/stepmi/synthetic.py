"""Bundled synthetic tasks for desk-scale training and ablation checks."""

from __future__ import annotations

from .core import Example, RngStream

# Fixed "counting chant": an input of count k shows the first k chant words,
# so the mean-pooled context still reveals the count. Two leading topic words
# add input variety without changing the parity of the token count.
CHANT = ("ba", "da", "fa", "ga", "ka", "la", "ma", "na")
TOPICS = ("red", "blue", "green", "gold")
COUNT_WORDS = {
    3: "three", 4: "four", 5: "five", 6: "six",
    7: "seven", 8: "eight", 9: "nine", 10: "ten",
}


def parity_dataset(n: int, stream: RngStream) -> list[Example]:
    """Token-count parity task: label is "even"/"odd", rationale states the count."""
    gen = stream.gen
    examples = []
    for i in range(n):
        k = int(gen.integers(1, len(CHANT) + 1))
        topics = gen.choice(len(TOPICS), size=2)
        words = [TOPICS[int(t)] for t in topics] + list(CHANT[:k])
        count = len(words)
        label = "even" if count % 2 == 0 else "odd"
        rationale = f"count is {COUNT_WORDS[count]} so answer is {label}"
        examples.append(
            Example(id=f"parity-{i}", input=" ".join(words), label=label, rationale=rationale)
        )
    return examples


_COPY_POOL = (
    "ant", "bee", "cat", "dog", "eel", "fox", "gnu", "hen",
    "ibis", "jay", "kit", "lark", "mole", "newt", "owl", "pig",
)


def copy_dataset(n: int, stream: RngStream) -> list[Example]:
    """First-token copy task: label is the first input token."""
    gen = stream.gen
    examples = []
    for i in range(n):
        length = int(gen.integers(2, 7))
        words = [_COPY_POOL[int(w)] for w in gen.choice(len(_COPY_POOL), size=length)]
        label = words[0]
        examples.append(
            Example(
                id=f"copy-{i}",
                input=" ".join(words),
                label=label,
                rationale=f"the first token is {label}",
            )
        )
    return examples
