"""Hacking-function oracles.

An oracle is a deterministic callable ``oracle(user_msgs, server_msgs)``
that is consulted after every user message. ``user_msgs`` holds one more
entry than ``server_msgs``. While the last user message is not the closing
verdict it returns :class:`Next` with the server's reply; on the closing
message it returns :data:`INF_NO` or an :class:`InfCircuit`.
"""

from __future__ import annotations

import operator
import re
from dataclasses import dataclass
from typing import Callable, Sequence

from ..ip import Arithmetization, ProverState, advance, honest_prover_round, initial_prover_state
from ..qbf import Qbf
from ..transcript import SERVER_TO_USER, Record


@dataclass(frozen=True)
class Next:
    payload: tuple[str, ...]


@dataclass(frozen=True)
class InfNo:
    def __str__(self):
        return "INF_NO"


@dataclass(frozen=True)
class InfCircuit:
    description: str

    def __str__(self):
        return "INF_CIRCUIT"


INF_NO = InfNo()


class OracleContractError(RuntimeError):
    pass


def challenges_of(user_msgs: Sequence[Record]) -> list[int]:
    out = []
    for m in user_msgs:
        if m.kind == "challenge" or (m.kind == "verdict" and len(m.payload) == 2):
            out.append(int(m.payload[0]))
    return out


def is_closing(msg: Record) -> bool:
    return msg.kind == "verdict"


class HonestOracle:
    """Replays the honest prover from the challenges; never leaks."""

    def __init__(self, q: Qbf, p: int):
        self.q = q
        self.p = p
        self.arith = Arithmetization.shared(q, p)
        self._memo: dict[tuple[int, ...], tuple[ProverState, object]] = {}

    def _round(self, challenges: tuple[int, ...]):
        hit = self._memo.get(challenges)
        if hit is None:
            if not challenges:
                state = initial_prover_state(self.arith)
            else:
                prev_state, prev_poly = self._round(challenges[:-1])
                state = advance(self.arith, prev_state, prev_poly, challenges[-1])
            hit = (state, honest_prover_round(state, self.arith))
            self._memo[challenges] = hit
        return hit

    def leak(self, user_msgs: Sequence[Record], server_msgs: Sequence[Record]):
        return INF_NO

    def __call__(self, user_msgs: Sequence[Record], server_msgs: Sequence[Record]):
        if is_closing(user_msgs[-1]):
            return self.leak(user_msgs, server_msgs)
        _, poly = self._round(tuple(challenges_of(user_msgs)))
        return Next(poly.to_payload())


_OPS = {
    "=": operator.eq,
    "==": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}
_PREDICATE = re.compile(r"^(r(\d+)|any|all|sum)(?:%(\d+))?(==|=|!=|<=|>=|<|>)(-?\d+)$")


def parse_predicate(spec: str) -> Callable[[Sequence[int]], bool]:
    """Predicate over the challenge sequence.

    ``r<k><op><v>`` tests the k-th challenge (1-based; false if absent),
    ``any``/``all`` test every challenge, ``sum`` their sum. An optional
    ``%m`` reduces the selected value(s) first: ``r1%2=0``, ``any=0``,
    ``sum%3!=1``.
    """
    m = _PREDICATE.match(spec.replace(" ", ""))
    if m is None:
        raise ValueError(f"bad predicate {spec!r}")
    sel, index, mod, op, value = m.groups()
    cmp = _OPS[op]
    value = int(value)

    def reduce(x: int) -> int:
        return x % int(mod) if mod else x

    if index is not None:
        k = int(index)
        if k < 1:
            raise ValueError("challenge indices are 1-based")
        return lambda rs: len(rs) >= k and cmp(reduce(rs[k - 1]), value)
    if sel == "any":
        return lambda rs: any(cmp(reduce(r), value) for r in rs)
    if sel == "all":
        return lambda rs: bool(rs) and all(cmp(reduce(r), value) for r in rs)
    return lambda rs: cmp(reduce(sum(rs)), value)


class PredicateOracle(HonestOracle):
    """Honest continuation; leaks when a challenge predicate holds."""

    def __init__(self, q: Qbf, p: int, predicate: str | Callable[[Sequence[int]], bool], description: str | None = None):
        super().__init__(q, p)
        self.spec = predicate if isinstance(predicate, str) else getattr(predicate, "__name__", "predicate")
        self.predicate = parse_predicate(predicate) if isinstance(predicate, str) else predicate
        self.description = description or f"circuit-info[{self.spec}]"

    def leak(self, user_msgs, server_msgs):
        return InfCircuit(self.description) if self.predicate(challenges_of(user_msgs)) else INF_NO


def make_oracle(spec: str, q: Qbf, p: int):
    """Build an oracle from ``honest`` or ``predicate:SPEC``."""
    if spec == "honest":
        return HonestOracle(q, p)
    if spec.startswith("predicate:"):
        return PredicateOracle(q, p, spec.split(":", 1)[1])
    raise ValueError(f"unknown oracle spec {spec!r}")


def replay_chain(oracle, user_msgs: Sequence[Record]):
    """Reconstruct ``s'_1..s'_{l}`` from the user messages alone, then ask for the leak.

    Returns ``(server_msgs, outcome)``.
    """
    server_msgs: list[Record] = []
    for i in range(len(user_msgs)):
        out = oracle(user_msgs[: i + 1], server_msgs)
        final = i == len(user_msgs) - 1
        if final:
            if isinstance(out, Next):
                raise OracleContractError("oracle continued past the closing message")
            return server_msgs, out
        if not isinstance(out, Next):
            raise OracleContractError(f"oracle stopped early at user message {i}")
        server_msgs.append(Record(user_msgs[i].round + 1, SERVER_TO_USER, "poly", out.payload))
    raise OracleContractError("empty user message sequence")
