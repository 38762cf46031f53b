"""Training examples and their JSON-lines file format.

One example per line: {"entities": [tokens...], "nile": "tokens joined
by single spaces"}.  The nile side is stored joined, not as a list,
because it is exactly the detokenized model output and doubles as a
parseable program once placeholder tokens are substituted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable


@dataclass(frozen=True)
class TrainingExample:
    """Anonymized (entity sequence, Nile token sequence) pair."""

    entities: tuple[str, ...]
    nile: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.entities or not self.nile:
            raise ValueError("training example sides must be non-empty")


def write_dataset(path: str | Path, examples: Iterable[TrainingExample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(
                {"entities": list(ex.entities), "nile": " ".join(ex.nile)}
            ))
            fh.write("\n")


def append_example(path: str | Path, example: TrainingExample) -> None:
    """Append one example; the file stays valid after a crash mid-run."""
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(
            {"entities": list(example.entities), "nile": " ".join(example.nile)}
        ))
        fh.write("\n")


def read_dataset(path: str | Path) -> list[TrainingExample]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            examples.append(TrainingExample(
                tuple(obj["entities"]), tuple(obj["nile"].split(" "))
            ))
    return examples
