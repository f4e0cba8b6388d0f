"""Epoch-aware message routing between the user and the servers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence

from ..transcript import dumps

USER = "user"
DURING = "during"
AFTER = "after"
DELIVER = "DELIVER"
BLOCK = "BLOCK"


def server_name(k: int) -> str:
    return f"server{k}"


def is_server(name: str) -> bool:
    return name.startswith("server")


class PolicyViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class CommunicationPolicy:
    """Which server-to-server sends are legal in each epoch.

    User/server traffic is always allowed (classical only).
    """

    name: str
    servers: int
    inter_server_during: bool
    inter_server_after: bool

    @classmethod
    def single(cls) -> CommunicationPolicy:
        return cls("S", 1, False, False)

    @classmethod
    def during(cls, servers: int) -> CommunicationPolicy:
        return cls("M_during", servers, True, True)

    @classmethod
    def after(cls, servers: int) -> CommunicationPolicy:
        return cls("M_after", servers, False, True)


def epoch_guard(sender: str, recipient: str, epoch: str, policy: CommunicationPolicy) -> str:
    if epoch not in (DURING, AFTER):
        raise ValueError(f"unknown epoch {epoch!r}")
    if not (is_server(sender) and is_server(recipient)) or sender == recipient:
        return DELIVER
    allowed = policy.inter_server_during if epoch == DURING else policy.inter_server_after
    return DELIVER if allowed else BLOCK


@dataclass(frozen=True)
class Envelope:
    sender: str
    recipient: str
    round: int
    kind: str
    payload: tuple[str, ...] = ()
    part: int = 0  # 1-based share index; 0 for an unsplit message
    parts: int = 1
    shares: tuple[tuple[str, ...], ...] = ()  # bundled shares, single-server simulation only
    context: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        d = {
            "from": self.sender,
            "to": self.recipient,
            "round": self.round,
            "kind": self.kind,
            "payload": list(self.payload),
        }
        if self.parts != 1 or self.part:
            d["part"] = self.part
            d["parts"] = self.parts
        if self.shares:
            d["shares"] = [list(s) for s in self.shares]
        if self.context:
            d["context"] = list(self.context)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Envelope:
        return cls(
            d["from"],
            d["to"],
            int(d["round"]),
            d["kind"],
            tuple(d["payload"]),
            int(d.get("part", 0)),
            int(d.get("parts", 1)),
            tuple(tuple(s) for s in d.get("shares", ())),
            tuple(d.get("context", ())),
        )


@dataclass
class ServerView:
    """Everything one server received and sent, in order, tagged by epoch."""

    server: str
    events: list[tuple[str, str, Envelope]] = field(default_factory=list)  # (io, epoch, envelope)

    def received(self, epoch: str | None = None) -> list[Envelope]:
        return [e for io, ep, e in self.events if io == "recv" and epoch in (None, ep)]

    def sent(self, epoch: str | None = None) -> list[Envelope]:
        return [e for io, ep, e in self.events if io == "send" and epoch in (None, ep)]

    def serialize(self, epoch: str | None = None) -> str:
        return "".join(
            dumps({"io": io, "epoch": ep, **env.to_dict()}) + "\n"
            for io, ep, env in self.events
            if epoch in (None, ep)
        )


class Actor(Protocol):
    name: str

    def handle(self, env: Envelope) -> Sequence[Envelope]: ...


class Network:
    """Single synchronization point for all actors.

    Messages sent in one step are delivered together in the next. Each actor
    handles its own inbox one message at a time; distinct actors may run on
    ``executor`` concurrently. Outgoing messages are re-sequenced in actor
    order before routing, so scheduling cannot change the result.
    """

    def __init__(self, policy: CommunicationPolicy, actors: Sequence[Actor], *, strict: bool = False, executor=None):
        self.policy = policy
        self.actors = {a.name: a for a in actors}
        self.order = [a.name for a in actors]
        self.strict = strict
        self.executor = executor
        self.epoch = DURING
        self.queue: list[Envelope] = []
        self.violations: list[dict] = []
        self.views = {name: ServerView(name) for name in self.order if is_server(name)}

    def send(self, env: Envelope) -> bool:
        if epoch_guard(env.sender, env.recipient, self.epoch, self.policy) == BLOCK:
            self.violations.append({"epoch": self.epoch, **env.to_dict()})
            if self.strict:
                raise PolicyViolation(
                    f"{env.sender} -> {env.recipient} blocked in epoch {self.epoch!r} under {self.policy.name}"
                )
            return False
        if env.sender in self.views:
            self.views[env.sender].events.append(("send", self.epoch, env))
        self.queue.append(env)
        return True

    def send_all(self, envs: Sequence[Envelope]) -> None:
        for env in envs:
            self.send(env)

    def run(self) -> None:
        while self.queue:
            batch, self.queue = self.queue, []
            inbox: dict[str, list[Envelope]] = {name: [] for name in self.order}
            for env in batch:
                if env.recipient not in inbox:
                    raise KeyError(f"no actor named {env.recipient!r}")
                inbox[env.recipient].append(env)
                if env.recipient in self.views:
                    self.views[env.recipient].events.append(("recv", self.epoch, env))
            busy = [name for name in self.order if inbox[name]]

            def work(name: str) -> list[Envelope]:
                actor = self.actors[name]
                out: list[Envelope] = []
                for env in inbox[name]:
                    out.extend(actor.handle(env))
                return out

            results = list(self.executor.map(work, busy)) if self.executor else [work(n) for n in busy]
            for out in results:
                self.send_all(out)
