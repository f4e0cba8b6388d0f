"""Transcript records and their line-delimited JSON encoding."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

USER_TO_SERVER = "U→S"
SERVER_TO_USER = "S→U"


def dumps(obj) -> str:
    """Canonical one-line JSON; stable bytes for equal inputs."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class Record:
    round: int
    direction: str
    kind: str
    payload: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "direction": self.direction,
            "kind": self.kind,
            "payload": list(self.payload),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Record:
        return cls(int(d["round"]), d["direction"], d["kind"], tuple(str(x) for x in d["payload"]))


def transcript_to_jsonl(records: Iterable[Record]) -> str:
    return "".join(dumps(r.to_dict()) + "\n" for r in records)


def transcript_from_jsonl(text: str) -> list[Record]:
    return [Record.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


def user_messages(records: Sequence[Record]) -> list[Record]:
    return [r for r in records if r.direction == USER_TO_SERVER]


def server_messages(records: Sequence[Record]) -> list[Record]:
    return [r for r in records if r.direction == SERVER_TO_USER]
