"""Blindness audit: compare a server's view distribution across inputs.

A protocol is blind at a given leakage value when the distribution of a
server's serialized classical view is the same for every input sharing that
leakage. Views are compared as exact byte strings; the distance between two
view distributions is total variation.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .field import smallest_session_prime
from .harness import HonestOracle, run_M_after, run_M_during, run_protocol_S, server_name
from .ip import build_schedule
from .qbf import Qbf, brute_force_truth, print_qbf
from .transcript import dumps

BLIND = "BLIND_AT_SCALE"
NOT_BLIND = "NOT_BLIND"
DEFAULT_SAMPLE_TOLERANCE = 0.02
ENUMERATION_CAP = 10**6


class EnumerationTooLarge(ValueError):
    pass


class LeakageMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Enumerate:
    cap: int = ENUMERATION_CAP

    def __str__(self):
        return "enumerate"


@dataclass(frozen=True)
class Sample:
    k: int
    seed: int = 0

    def __str__(self):
        return f"sample(k={self.k},seed={self.seed})"


class PadProtocol:
    """One-time pad fixture: the user sends ``x + r mod p`` with ``r`` uniform.

    The input bit ``x`` is the formula's truth value.
    """

    name = "pad"

    def __init__(self, p: int = 17):
        self.p = p

    def modulus(self, q: Qbf) -> int:
        return self.p

    def draws(self, q: Qbf) -> int:
        return 1

    def view(self, q: Qbf, server: int, tape: Sequence[int]) -> str:
        x = int(brute_force_truth(q))
        return dumps({"from": "user", "payload": [str((x + tape[0]) % self.p)]}) + "\n"


class _IpConfig:
    def __init__(self, p: int | None = None, allow_small_field: bool = False):
        self.p = p
        self.allow_small_field = allow_small_field

    def modulus(self, q: Qbf) -> int:
        return self.p if self.p is not None else smallest_session_prime(q.n)

    def draws(self, q: Qbf) -> int:
        return len(build_schedule(q))

    def _kw(self, q: Qbf, tape) -> dict:
        return {"p": self.modulus(q), "allow_small_field": self.allow_small_field, "challenges": tape}


class SingleServerIp(_IpConfig):
    name = "S"

    def view(self, q: Qbf, server: int, tape: Sequence[int]) -> str:
        res = run_protocol_S(q, None, **self._kw(q, tape))
        return res.views[server_name(server)].serialize()


class DuringIp(_IpConfig):
    name = "M_during"

    def __init__(self, servers: int, **kw):
        super().__init__(**kw)
        self.servers = servers

    def view(self, q: Qbf, server: int, tape: Sequence[int]) -> str:
        res = run_M_during(q, self.servers, None, **self._kw(q, tape))
        return res.views[server_name(server)].serialize()


class AfterIp(_IpConfig):
    """M_after with an honest oracle; ``pre_collusion`` limits the view to the computation."""

    name = "M_after"

    def __init__(self, servers: int, pre_collusion: bool = True, **kw):
        super().__init__(**kw)
        self.servers = servers
        self.pre_collusion = pre_collusion

    def view(self, q: Qbf, server: int, tape: Sequence[int]) -> str:
        kw = self._kw(q, tape)
        res = run_M_after(q, self.servers, None, HonestOracle(q, kw["p"]), **kw)
        return res.views[server_name(server)].serialize("during" if self.pre_collusion else None)


def make_config(name: str, servers: int = 2, p: int | None = None, allow_small_field: bool = False):
    if name == "pad":
        return PadProtocol(p or 17)
    if name == "S":
        return SingleServerIp(p, allow_small_field)
    if name == "M_during":
        return DuringIp(servers, p=p, allow_small_field=allow_small_field)
    if name == "M_after":
        return AfterIp(servers, p=p, allow_small_field=allow_small_field)
    raise ValueError(f"unknown protocol configuration {name!r}")


@dataclass(frozen=True)
class ViewDistribution:
    probs: dict  # serialized view -> Fraction (exact) or float (sampled)
    exact: bool
    samples: int | None = None

    def total(self):
        return sum(self.probs.values()) if self.exact else math.fsum(self.probs.values())


def collect_view_distribution(config, q: Qbf, server: int, mode, workers: int | None = None) -> ViewDistribution:
    p = config.modulus(q)
    draws = config.draws(q)
    if isinstance(mode, Enumerate):
        space = p**draws
        if space > mode.cap:
            raise EnumerationTooLarge(
                f"{p}^{draws} = {space} challenge sequences exceeds the enumeration cap {mode.cap}; use Sample(k, seed)"
            )
        tapes = list(itertools.product(range(p), repeat=draws))
    else:
        rng = random.Random(mode.seed)
        tapes = [tuple(rng.randrange(p) for _ in range(draws)) for _ in range(mode.k)]

    def one(tape):
        return config.view(q, server, tape)

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            views = list(pool.map(one, tapes))
    else:
        views = [one(t) for t in tapes]
    counts = Counter(views)
    n = len(tapes)
    if isinstance(mode, Enumerate):
        return ViewDistribution({v: Fraction(c, n) for v, c in counts.items()}, True)
    return ViewDistribution({v: c / n for v, c in counts.items()}, False, n)


def statistical_distance(d1: ViewDistribution, d2: ViewDistribution):
    """Total variation distance, exact for enumerated distributions."""
    if d1.exact != d2.exact:
        raise ValueError("cannot compare an exact distribution with a sampled one")
    keys = set(d1.probs) | set(d2.probs)
    diffs = [abs(d1.probs.get(k, 0) - d2.probs.get(k, 0)) for k in keys]
    if d1.exact:
        return sum(diffs, Fraction(0)) / 2
    return math.fsum(diffs) / 2


def formula_hash(q: Qbf) -> str:
    return hashlib.sha256(print_qbf(q).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class AuditVerdict:
    config: str
    server: int
    mode: str
    leakage: tuple[int, int]
    hashes: tuple[str, ...]
    pairs: tuple[tuple[int, int, object], ...]  # (i, j, distance)
    max_distance: object
    tolerance: float
    verdict: str

    def records(self) -> list[dict]:
        head = {
            "kind": "audit",
            "config": self.config,
            "server": self.server,
            "mode": self.mode,
            "leakage": list(self.leakage),
            "inputs": list(self.hashes),
            "max_distance": str(self.max_distance),
            "tolerance": self.tolerance,
            "verdict": self.verdict,
        }
        rows = [
            {"kind": "pair", "i": i, "j": j, "a": self.hashes[i], "b": self.hashes[j], "distance": str(d)}
            for i, j, d in self.pairs
        ]
        return [head] + rows

    def to_text(self) -> str:
        lines = [
            f"config: {self.config}",
            f"server: {self.server}",
            f"mode: {self.mode}",
            f"leakage: n={self.leakage[0]} size={self.leakage[1]}",
        ]
        lines += [f"input[{i}]: {h}" for i, h in enumerate(self.hashes)]
        lines.append("pair  distance")
        lines += [f"{i}-{j}  {d}" for i, j, d in self.pairs]
        lines += [f"max_distance: {self.max_distance}", f"tolerance: {self.tolerance}", f"verdict: {self.verdict}"]
        return "\n".join(lines) + "\n"


def audit_blindness(
    config,
    inputs: Sequence[Qbf],
    server: int = 1,
    mode=Enumerate(),
    tolerance: float | None = None,
    workers: int | None = None,
) -> AuditVerdict:
    if len(inputs) < 2:
        raise ValueError("an audit needs at least two inputs")
    leak = {q.leakage for q in inputs}
    if len(leak) != 1:
        raise LeakageMismatch(f"inputs do not share one leakage value: {sorted(leak)}")
    exact = isinstance(mode, Enumerate)
    if tolerance is None:
        tolerance = 0 if exact else DEFAULT_SAMPLE_TOLERANCE
    dists = [collect_view_distribution(config, q, server, mode, workers) for q in inputs]
    pairs = tuple(
        (i, j, statistical_distance(dists[i], dists[j])) for i, j in itertools.combinations(range(len(inputs)), 2)
    )
    worst = max(d for _, _, d in pairs)
    return AuditVerdict(
        config.name,
        server,
        str(mode),
        inputs[0].leakage,
        tuple(formula_hash(q) for q in inputs),
        pairs,
        worst,
        tolerance,
        BLIND if worst <= tolerance else NOT_BLIND,
    )
