"""Protocol configurations S, M_during (and its single-server simulation), M_after.

Every configuration runs the same user-side verifier against server-side
computation routed through a :class:`Network`. User-level messages are the
transcript records of :func:`blindbench.ip.run_ip_session`: an opening
message, then one polynomial per round answered by a challenge, and a
closing verdict message.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from ..field import smallest_session_prime
from ..ip import Arithmetization, Prover, ScriptedChallenges, SeededChallenges, Verifier, check_field_size, honest_prover_round, prover_from_context
from ..qbf import Qbf
from ..transcript import SERVER_TO_USER, USER_TO_SERVER, Record, dumps
from .network import AFTER, USER, CommunicationPolicy, Envelope, Network, ServerView, is_server, server_name
from .oracles import INF_NO, InfCircuit, InfNo, Next, OracleContractError, is_closing, replay_chain

NONE = "NONE"


def split_payload(payload: Sequence[str], parts: int) -> tuple[tuple[str, ...], ...]:
    """Round-robin split: share k holds entries k, k+parts, k+2*parts, ..."""
    return tuple(tuple(payload[k::parts]) for k in range(parts))


def join_shares(shares: Sequence[Sequence[str]]) -> tuple[str, ...]:
    parts = len(shares)
    total = sum(len(s) for s in shares)
    return tuple(shares[i % parts][i // parts] for i in range(total))


def leak_label(outcome) -> str:
    if outcome is None:
        return NONE
    return str(outcome)


@dataclass
class SessionResult:
    config: str
    verdict: str
    transcript: tuple[Record, ...]
    views: dict[str, ServerView]
    violations: list[dict]
    leak: object  # None, INF_NO or InfCircuit
    rounds: int
    seed: object
    servers: int
    p: int
    compute_log: list[dict] = field(default_factory=list)

    @property
    def leak_label(self) -> str:
        return leak_label(self.leak)

    def compute_view(self) -> str:
        """Serialized ordered I/O of the party that runs the prover."""
        return "".join(dumps(e) + "\n" for e in self.compute_log)

    def to_text(self) -> str:
        lines = [
            {
                "section": "header",
                "config": self.config,
                "verdict": self.verdict,
                "rounds": self.rounds,
                "seed": self.seed,
                "servers": self.servers,
                "p": self.p,
                "views": list(self.views),
            }
        ]
        lines += [{"section": "transcript", **r.to_dict()} for r in self.transcript]
        for name, view in self.views.items():
            lines += [{"section": "view", "server": name, "io": io, "epoch": ep, **env.to_dict()} for io, ep, env in view.events]
        lines += [{"section": "compute", **e} for e in self.compute_log]
        lines += [{"section": "violation", **v} for v in self.violations]
        desc = self.leak.description if isinstance(self.leak, InfCircuit) else None
        lines.append({"section": "leak", "outcome": self.leak_label, "description": desc})
        return "".join(dumps(line) + "\n" for line in lines)

    @classmethod
    def from_text(cls, text: str) -> SessionResult:
        header = None
        transcript, compute, violations = [], [], []
        views: dict[str, ServerView] = {}
        leak = None
        for raw in text.splitlines():
            if not raw.strip():
                continue
            d = json.loads(raw)
            section = d.pop("section")
            if section == "header":
                header = d
            elif section == "transcript":
                transcript.append(Record.from_dict(d))
            elif section == "view":
                name, io, ep = d.pop("server"), d.pop("io"), d.pop("epoch")
                views.setdefault(name, ServerView(name)).events.append((io, ep, Envelope.from_dict(d)))
            elif section == "compute":
                compute.append(d)
            elif section == "violation":
                violations.append(d)
            elif section == "leak":
                leak = _parse_leak(d["outcome"], d["description"])
            else:
                raise ValueError(f"unknown section {section!r}")
        if header is None:
            raise ValueError("missing header line")
        views = {name: views.get(name, ServerView(name)) for name in header["views"]}
        return cls(
            header["config"],
            header["verdict"],
            tuple(transcript),
            views,
            violations,
            leak,
            header["rounds"],
            header["seed"],
            header["servers"],
            header["p"],
            compute,
        )


def _parse_leak(label: str, description):
    if label == NONE:
        return None
    if label == "INF_NO":
        return INF_NO
    if label == "INF_CIRCUIT":
        return InfCircuit(description)
    raise ValueError(f"unknown leak outcome {label!r}")


class _ComputeCore:
    """Server-side computation on reassembled user messages.

    Driven either by the honest prover or by a hacking oracle. Logs its own
    ordered I/O as share lists so that a split and an unsplit deployment
    can be compared byte for byte.
    """

    def __init__(self, arith: Arithmetization, oracle=None):
        self.prover = Prover(arith)
        self.oracle = oracle
        self.user_msgs: list[Record] = []
        self.server_msgs: list[Record] = []
        self.leak = None
        self.log: list[dict] = []

    def respond(self, rnd: int, kind: str, shares: Sequence[Sequence[str]]) -> tuple[str, ...] | None:
        self.log.append({"round": rnd, "io": "recv", "kind": kind, "shares": [list(s) for s in shares]})
        payload = join_shares(shares)
        msg = Record(rnd, USER_TO_SERVER, kind, payload)
        self.user_msgs.append(msg)
        if self.oracle is None:
            reply = self.prover.respond(kind, payload)
        else:
            out = self.oracle(self.user_msgs, self.server_msgs)
            if is_closing(msg):
                if isinstance(out, Next):
                    raise OracleContractError("oracle continued past the closing message")
                self.leak = out
                reply = None
            else:
                if not isinstance(out, Next):
                    raise OracleContractError(f"oracle stopped early at round {rnd}")
                reply = out.payload
        if reply is not None:
            self.server_msgs.append(Record(rnd + 1, SERVER_TO_USER, "poly", reply))
            self.log.append({"round": rnd + 1, "io": "send", "kind": "poly", "shares": [list(s) for s in split_payload(reply, len(shares))]})
        return reply


class _User:
    """Verifier plus a transport describing how messages reach the servers."""

    name = USER

    def __init__(self, verifier: Verifier, servers: int, mode: str):
        self.verifier = verifier
        self.servers = servers
        self.mode = mode  # direct | split | bundle | round_robin
        self.records: list[Record] = []
        self._pending: dict[int, dict[int, tuple[str, ...]]] = {}

    def _emit(self, rnd: int, kind: str, payload: tuple[str, ...]) -> list[Envelope]:
        self.records.append(Record(rnd, USER_TO_SERVER, kind, payload))
        n = self.servers
        if self.mode == "direct":
            return [Envelope(USER, server_name(1), rnd, kind, payload)]
        if self.mode == "bundle":
            return [Envelope(USER, server_name(1), rnd, kind, shares=split_payload(payload, n), parts=n)]
        if self.mode == "split":
            return [
                Envelope(USER, server_name(k + 1), rnd, kind, share, part=k + 1, parts=n)
                for k, share in enumerate(split_payload(payload, n))
            ]
        # round robin: the server answering polynomial rnd+1 gets this message
        target = server_name(1 + rnd % n)
        return [Envelope(USER, target, rnd, kind, payload, context=self.verifier.live_context())]

    def start(self) -> list[Envelope]:
        kind, payload = self.verifier.opening()
        return self._emit(0, kind, payload)

    def handle(self, env: Envelope) -> list[Envelope]:
        if env.shares:
            payload = join_shares(env.shares)
        elif env.parts > 1:
            got = self._pending.setdefault(env.round, {})
            got[env.part] = env.payload
            if len(got) < env.parts:
                return []
            payload = join_shares([got[k] for k in range(1, env.parts + 1)])
            del self._pending[env.round]
        else:
            payload = env.payload
        self.records.append(Record(env.round, SERVER_TO_USER, "poly", payload))
        kind, reply = self.verifier.receive(payload)
        return self._emit(env.round, kind, reply)


class _SingleServer:
    """Runs the computing core; answers whole or bundled messages."""

    def __init__(self, name: str, core: _ComputeCore):
        self.name = name
        self.core = core

    def handle(self, env: Envelope) -> list[Envelope]:
        shares = env.shares or (env.payload,)
        reply = self.core.respond(env.round, env.kind, shares)
        if reply is None:
            return []
        if env.shares:
            return [Envelope(self.name, USER, env.round + 1, "poly", shares=split_payload(reply, len(shares)), parts=len(shares))]
        return [Envelope(self.name, USER, env.round + 1, "poly", reply)]


class _LeadServer:
    """Server 1 in M_during: gathers every share, computes, scatters the reply."""

    def __init__(self, core: _ComputeCore, servers: int):
        self.name = server_name(1)
        self.core = core
        self.servers = servers
        self._pending: dict[int, dict[int, tuple[str, ...]]] = {}
        self._kinds: dict[int, str] = {}

    def handle(self, env: Envelope) -> list[Envelope]:
        got = self._pending.setdefault(env.round, {})
        got[env.part] = env.payload
        self._kinds[env.round] = env.kind
        if len(got) < self.servers:
            return []
        shares = [got[k] for k in range(1, self.servers + 1)]
        del self._pending[env.round]
        reply = self.core.respond(env.round, self._kinds.pop(env.round), shares)
        if reply is None:
            return []
        out_shares = split_payload(reply, self.servers)
        out = [Envelope(self.name, USER, env.round + 1, "poly", out_shares[0], part=1, parts=self.servers)]
        out += [
            Envelope(self.name, server_name(k + 1), env.round + 1, "poly", out_shares[k], part=k + 1, parts=self.servers)
            for k in range(1, self.servers)
        ]
        return out


class _RelayServer:
    """Servers 2..N in M_during: forward user shares to server 1, relay replies back."""

    def __init__(self, k: int):
        self.name = server_name(k)

    def handle(self, env: Envelope) -> list[Envelope]:
        if env.sender == USER:
            return [Envelope(self.name, server_name(1), env.round, env.kind, env.payload, env.part, env.parts)]
        return [Envelope(self.name, USER, env.round, env.kind, env.payload, env.part, env.parts)]


class _AfterServer:
    """A server in M_after: answers its own rounds from the attached context only."""

    def __init__(self, k: int, arith: Arithmetization, servers: int, gossip: bool = False):
        self.name = server_name(k)
        self.k = k
        self.arith = arith
        self.servers = servers
        self.gossip = gossip
        self.pooled: list[Record] = []

    def handle(self, env: Envelope) -> list[Envelope]:
        if env.kind == "pool":
            self.pooled.extend(Record.from_dict(json.loads(s)) for s in env.payload)
            return []
        out = []
        if self.gossip:
            nxt = server_name(1 + self.k % self.servers)
            out.append(Envelope(self.name, nxt, env.round, "gossip", env.payload))
        if env.kind == "verdict":
            return out
        state = prover_from_context(self.arith, env.context)
        poly = honest_prover_round(state, self.arith)
        out.append(Envelope(self.name, USER, env.round + 1, "poly", poly.to_payload()))
        return out

    def own_records(self, view: ServerView) -> list[Record]:
        recs = [Record(e.round, USER_TO_SERVER, e.kind, e.payload) for e in view.received() if e.sender == USER]
        recs += [Record(e.round, SERVER_TO_USER, e.kind, e.payload) for e in view.sent() if e.recipient == USER]
        return recs


def _prepare(q: Qbf, p: int | None, allow_small_field: bool) -> tuple[int, Arithmetization]:
    p = p if p is not None else smallest_session_prime(q.n)
    check_field_size(q, p, allow_small_field)
    return p, Arithmetization.shared(q, p)


def _source(seed, challenges):
    return ScriptedChallenges(challenges) if challenges is not None else SeededChallenges(seed)


def _finish(config, net, user, seed, servers, p, leak=None, compute_log=()) -> SessionResult:
    records = tuple(user.records)
    rounds = sum(1 for r in records if r.direction == SERVER_TO_USER)
    return SessionResult(
        config,
        user.verifier.verdict,
        records,
        net.views,
        net.violations,
        leak,
        rounds,
        seed,
        servers,
        p,
        list(compute_log),
    )


def _check_oracle_field(oracle, p: int) -> None:
    if oracle is not None and getattr(oracle, "p", p) != p:
        raise ValueError(f"oracle built for p={oracle.p}, session uses p={p}")


def run_protocol_S(q: Qbf, seed, oracle=None, *, p: int | None = None, allow_small_field: bool = False, executor=None, challenges=None) -> SessionResult:
    """One unbounded server, classical user.

    All runners draw challenges from ``random.Random(seed)`` unless an
    explicit ``challenges`` tape is given.

    With an oracle installed the server's messages are the oracle's and the
    leak outcome is its answer to the closing message.
    """
    p, arith = _prepare(q, p, allow_small_field)
    _check_oracle_field(oracle, p)
    core = _ComputeCore(arith, oracle)
    user = _User(Verifier(arith, _source(seed, challenges)), 1, "direct")
    net = Network(CommunicationPolicy.single(), [user, _SingleServer(server_name(1), core)], executor=executor)
    net.send_all(user.start())
    net.run()
    return _finish("S", net, user, seed, 1, p, core.leak, core.log)


def run_M_during(q: Qbf, N: int, seed, *, p: int | None = None, allow_small_field: bool = False, executor=None, challenges=None) -> SessionResult:
    """N servers that may talk while computing; server 1 does all the work."""
    if N < 2:
        raise ValueError("M_during needs at least two servers")
    p, arith = _prepare(q, p, allow_small_field)
    core = _ComputeCore(arith)
    user = _User(Verifier(arith, _source(seed, challenges)), N, "split")
    actors = [user, _LeadServer(core, N)] + [_RelayServer(k) for k in range(2, N + 1)]
    net = Network(CommunicationPolicy.during(N), actors, executor=executor)
    net.send_all(user.start())
    net.run()
    return _finish("M_during", net, user, seed, N, p, None, core.log)


def simulate_M_during_on_single(q: Qbf, N: int, seed, *, p: int | None = None, allow_small_field: bool = False, executor=None, challenges=None) -> SessionResult:
    """One server receives all N shares at once and computes as server 1 would."""
    if N < 2:
        raise ValueError("simulation of M_during needs N >= 2")
    p, arith = _prepare(q, p, allow_small_field)
    core = _ComputeCore(arith)
    user = _User(Verifier(arith, _source(seed, challenges)), N, "bundle")
    net = Network(CommunicationPolicy.single(), [user, _SingleServer(server_name(1), core)], executor=executor)
    net.send_all(user.start())
    net.run()
    return _finish("S_sim", net, user, seed, N, p, None, core.log)


def round_owner(j: int, N: int) -> int:
    """Server (1-based) that answers polynomial round ``j``."""
    return 1 + (j - 1) % N


def run_M_after(
    q: Qbf,
    N: int,
    seed,
    oracle,
    *,
    p: int | None = None,
    allow_small_field: bool = False,
    executor=None,
    gossip: bool = False,
    challenges=None,
) -> SessionResult:
    """N servers, silent during the computation, colluding afterwards.

    Round j is answered by server ``round_owner(j, N)``, which sees only the
    user messages addressed to it. After the verdict every server sends its
    view to every other one, and each replays the oracle chain on the pooled
    user messages. ``gossip=True`` makes servers attempt a forbidden
    during-epoch send, which raises :class:`PolicyViolation`.
    """
    if N < 2:
        raise ValueError("M_after needs at least two servers")
    p, arith = _prepare(q, p, allow_small_field)
    _check_oracle_field(oracle, p)
    user = _User(Verifier(arith, _source(seed, challenges)), N, "round_robin")
    servers = [_AfterServer(k, arith, N, gossip) for k in range(1, N + 1)]
    net = Network(CommunicationPolicy.after(N), [user] + servers, strict=True, executor=executor)
    net.send_all(user.start())
    net.run()

    net.epoch = AFTER
    for srv in servers:
        own = srv.own_records(net.views[srv.name])
        srv.pooled.extend(own)
        payload = tuple(dumps(r.to_dict()) for r in own)
        net.send_all([Envelope(srv.name, other.name, -1, "pool", payload) for other in servers if other is not srv])
    net.run()

    outcomes = []
    for srv in servers:
        pooled = sorted(set(srv.pooled), key=lambda r: (r.round, r.direction != SERVER_TO_USER))
        user_msgs = [r for r in pooled if r.direction == USER_TO_SERVER]
        _, outcome = replay_chain(oracle, user_msgs)
        outcomes.append(outcome)
    if len(set(outcomes)) != 1:
        raise RuntimeError(f"colluding servers disagree on the leak: {outcomes}")
    return _finish("M_after", net, user, seed, N, p, outcomes[0])


def pooled_transcript(result: SessionResult) -> list[Record]:
    """Union of every server's after-epoch knowledge, in transcript order."""
    recs = set()
    for view in result.views.values():
        for e in view.received(AFTER):
            if e.kind == "pool":
                recs.update(Record.from_dict(json.loads(s)) for s in e.payload)
        for e in view.sent(AFTER):
            recs.update(Record.from_dict(json.loads(s)) for s in e.payload)
    return sorted(recs, key=lambda r: (r.round, r.direction != SERVER_TO_USER))
