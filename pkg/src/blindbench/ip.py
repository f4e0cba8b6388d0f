"""Interactive proof for TQBF with explicit degree-reduction rounds.

The formula ``Q1 x1 ... Qn xn . phi`` is rewritten as the operator string::

    Q1 x1 . Q2 x2 . R x1 . Q3 x3 . R x1 . R x2 . ... . Qn xn . R x1 ... R x(n-1) . phi

where ``R v`` replaces a function by its linear extension in ``v``,
``v*f(v=1) + (1-v)*f(v=0)``. Each operator is one round. In round ``t`` the
prover sends the univariate polynomial obtained by leaving the round's
variable free in everything to the right of the operator, with every other
variable fixed at its current challenge. The verifier starts from the claim
``1`` (the formula is true), checks the round polynomial against the running
claim, draws a fresh challenge for the round's variable and moves the claim
to the polynomial's value there. After the last round it evaluates the
arithmetized matrix itself.

Arithmetization: ``NOT a -> 1-a``, ``a AND b -> a*b``,
``a OR b -> 1-(1-a)(1-b)``; ``forall`` is a product of the two boolean
evaluations and ``exists`` their probabilistic OR.
"""

from __future__ import annotations

import random
from functools import lru_cache
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

from sympy.ntheory import sqrt_mod

from .field import UnivariatePoly, interpolate_values, inverse
from .qbf import EXISTS, FORALL, And, Formula, Not, Or, Qbf, Var, occurrences
from .transcript import SERVER_TO_USER, USER_TO_SERVER, Record

REDUCE = "r"

ACCEPT = "ACCEPT"
REJECT = "REJECT"
CONTINUE = "CONTINUE"


class DegreeBoundError(AssertionError):
    pass


@dataclass(frozen=True)
class Round:
    kind: str  # FORALL, EXISTS or REDUCE
    var: int
    degree_bound: int

    def __str__(self):
        name = {FORALL: "FORALL", EXISTS: "EXISTS", REDUCE: "REDUCE"}[self.kind]
        return f"{name}({self.var})<={self.degree_bound}"


def build_schedule(q: Qbf) -> tuple[Round, ...]:
    occ = occurrences(q.matrix)
    rounds: list[Round] = []
    bound: list[int] = []
    for k, (quant, var) in enumerate(q.prefix):
        innermost = k == q.n - 1
        rounds.append(Round(quant, var, occ.get(var, 0) if innermost else 2))
        for v in bound:
            rounds.append(Round(REDUCE, v, occ.get(v, 0) if innermost else 2))
        bound.append(var)
    return tuple(rounds)


def total_degree(schedule: Sequence[Round]) -> int:
    return sum(r.degree_bound for r in schedule)


def _compile(f: Formula, p: int) -> Callable[[Sequence[int]], int]:
    if isinstance(f, Var):
        i = f.id
        return lambda a: a[i]
    if isinstance(f, Not):
        c = _compile(f.child, p)
        return lambda a: (1 - c(a)) % p
    left = _compile(f.left, p)
    right = _compile(f.right, p)
    if isinstance(f, And):
        return lambda a: left(a) * right(a) % p
    return lambda a: (1 - (1 - left(a)) * (1 - right(a))) % p


def combine(kind: str, f0: int, f1: int, p: int) -> int:
    if kind == FORALL:
        return f0 * f1 % p
    return (1 - (1 - f0) * (1 - f1)) % p


class Arithmetization:
    """Field semantics of a QBF's matrix and of its round-operator string.

    Assignments are tuples indexed by variable id (slot 0 unused). Suffix
    values at all-boolean assignments are cached for the lifetime of the
    object; a reduction at a boolean point is the identity, so only
    challenged (non-boolean) variables cause branching.
    """

    def __init__(self, q: Qbf, p: int):
        self.q = q
        self.p = p
        self.schedule = build_schedule(q)
        self._matrix = _compile(q.matrix, p)
        bound: list[int] = []
        self._bound_before: list[tuple[int, ...]] = []
        for rnd in self.schedule:
            self._bound_before.append(tuple(bound))
            if rnd.kind != REDUCE:
                bound.append(rnd.var)
        self._bound_before.append(tuple(bound))
        self._cache: dict[tuple, int] = {}

    @staticmethod
    @lru_cache(maxsize=64)
    def shared(q: Qbf, p: int) -> "Arithmetization":
        """Process-wide instance per (formula, field), so caches are reused."""
        return Arithmetization(q, p)

    def empty_assignment(self) -> tuple[int, ...]:
        return (0,) * (self.q.n + 1)

    def matrix_value(self, a: Sequence[int]) -> int:
        return self._matrix(a)

    def suffix_value(self, s: int, a: tuple[int, ...]) -> int:
        """Value of ``schedule[s:]`` applied to the matrix, at assignment ``a``."""
        p = self.p
        if s == len(self.schedule):
            return self._matrix(a)
        bound = self._bound_before[s]
        key = None
        if all(a[v] < 2 for v in bound):
            key = (s, tuple(a[v] for v in bound))
            hit = self._cache.get(key)
            if hit is not None:
                return hit
        rnd = self.schedule[s]
        v = rnd.var
        if rnd.kind == REDUCE:
            x = a[v]
            if x < 2:
                val = self.suffix_value(s + 1, a)
            else:
                f0 = self.suffix_value(s + 1, a[:v] + (0,) + a[v + 1 :])
                f1 = self.suffix_value(s + 1, a[:v] + (1,) + a[v + 1 :])
                val = (x * f1 + (1 - x) * f0) % p
        else:
            f0 = self.suffix_value(s + 1, a[:v] + (0,) + a[v + 1 :])
            f1 = self.suffix_value(s + 1, a[:v] + (1,) + a[v + 1 :])
            val = combine(rnd.kind, f0, f1, p)
        if key is not None:
            self._cache[key] = val
        return val

    def round_values(self, t: int, a: tuple[int, ...], xs: Sequence[int]) -> list[int]:
        v = self.schedule[t].var
        return [self.suffix_value(t + 1, a[:v] + (x % self.p,) + a[v + 1 :]) for x in xs]


def quantified_value(q: Qbf, p: int) -> int:
    """Quantifier operators over the full boolean cube, no reductions.

    Equals 1 exactly when the QBF is true.
    """
    matrix = _compile(q.matrix, p)
    a = [0] * (q.n + 1)

    def go(i: int) -> int:
        if i == q.n:
            return matrix(a)
        quant, var = q.prefix[i]
        a[var] = 0
        f0 = go(i + 1)
        a[var] = 1
        f1 = go(i + 1)
        return combine(quant, f0, f1, p)

    return go(0)


def consistent(rnd: Round, poly: UnivariatePoly, claim: int, current: int) -> bool:
    """Round check; ``current`` is the reduced variable's present value."""
    p = poly.modulus
    p0, p1 = poly(0), poly(1)
    if rnd.kind == REDUCE:
        return (current * p1 + (1 - current) * p0) % p == claim
    return combine(rnd.kind, p0, p1, p) == claim


@dataclass(frozen=True)
class ProverState:
    cursor: int
    assignment: tuple[int, ...]
    claim: int = 1


def initial_prover_state(arith: Arithmetization) -> ProverState:
    return ProverState(0, arith.empty_assignment(), 1)


def advance(arith: Arithmetization, state: ProverState, poly: UnivariatePoly, r: int) -> ProverState:
    v = arith.schedule[state.cursor].var
    a = state.assignment
    return ProverState(state.cursor + 1, a[:v] + (r % arith.p,) + a[v + 1 :], poly(r))


def honest_prover_round(state: ProverState, arith: Arithmetization) -> UnivariatePoly:
    """Exact round polynomial, checked against its declared degree bound."""
    rnd = arith.schedule[state.cursor]
    xs = list(range(rnd.degree_bound + 2))
    ys = arith.round_values(state.cursor, state.assignment, xs)
    poly = UnivariatePoly(interpolate_values(xs, ys, arith.p), arith.p)
    if poly.degree > rnd.degree_bound:
        raise DegreeBoundError(f"round {state.cursor + 1} {rnd}: honest polynomial has degree {poly.degree}")
    return poly


def _forced_endpoints(rnd: Round, h0: int, h1: int, claim: int, current: int, p: int):
    """Values ``(P(0), P(1))`` passing the round check, changing as few as possible.

    Returns the pair and the set of endpoints (0 and/or 1) left at their
    honest values.
    """
    if rnd.kind == REDUCE:
        if current % p != 0:
            return (h0, (claim - (1 - current) * h0) * inverse(current, p) % p), {0}
        return (claim, h1), {1}
    # forall: P0*P1 = claim; exists: (1-P0)(1-P1) = 1-claim, same shape on u = 1-P
    if rnd.kind == FORALL:
        u0, u1, target = h0, h1, claim
    else:
        u0, u1, target = (1 - h0) % p, (1 - h1) % p, (1 - claim) % p
    if u0 != 0:
        w, kept = (u0, target * inverse(u0, p) % p), {0}
    elif u1 != 0:
        w, kept = (target * inverse(u1, p) % p, u1), {1}
    else:
        w, kept = (1, target), set()
    if rnd.kind == EXISTS:
        w = ((1 - w[0]) % p, (1 - w[1]) % p)
    return w, kept


def cheating_prover_round(state: ProverState, arith: Arithmetization) -> UnivariatePoly:
    """Keep the running (possibly false) claim alive for one more round.

    Returns the honest polynomial when it already passes. Otherwise the
    endpoint values are forced to pass the check and the remaining freedom
    (up to the degree bound) is spent agreeing with the honest polynomial at
    the other endpoint and at 2, 3, ...
    """
    p = arith.p
    rnd = arith.schedule[state.cursor]
    honest = honest_prover_round(state, arith)
    current = state.assignment[rnd.var]
    if consistent(rnd, honest, state.claim, current):
        return honest
    d = rnd.degree_bound
    if d == 0:
        return _constant_cheat(rnd, state.claim, current, p) or honest
    (v0, v1), _ = _forced_endpoints(rnd, honest(0), honest(1), state.claim, current, p)
    xs, ys = [0, 1], [v0, v1]
    for x in range(2, d + 1):
        xs.append(x)
        ys.append(honest(x))
    return UnivariatePoly(interpolate_values(xs, ys, p), p)


def _constant_cheat(rnd: Round, claim: int, current: int, p: int) -> UnivariatePoly | None:
    if rnd.kind == REDUCE:
        return UnivariatePoly([claim], p)
    target = claim if rnd.kind == FORALL else (1 - claim) % p
    roots = sqrt_mod(target, p, all_roots=True)
    if not roots:
        return None
    k = min(roots)
    return UnivariatePoly([k if rnd.kind == FORALL else (1 - k) % p], p)


class SeededChallenges:
    """Uniform field challenges from a seeded generator."""

    def __init__(self, seed):
        self.seed = seed
        self._rng = random.Random(seed)

    def draw(self, p: int) -> int:
        return self._rng.randrange(p)


class ScriptedChallenges:
    """Replays a fixed challenge tape (used for exhaustive enumeration)."""

    def __init__(self, values: Sequence[int]):
        self._values = list(values)
        self._i = 0

    def draw(self, p: int) -> int:
        if self._i >= len(self._values):
            raise IndexError("challenge tape exhausted")
        v = self._values[self._i] % p
        self._i += 1
        return v


@dataclass
class VerifierState:
    cursor: int
    assignment: tuple[int, ...]
    claim: int
    source: object  # anything with draw(p) -> int
    done: bool = False


@dataclass(frozen=True)
class Decision:
    kind: str  # CONTINUE, ACCEPT or REJECT
    challenge: int | None = None


def initial_verifier_state(arith: Arithmetization, source) -> VerifierState:
    return VerifierState(0, arith.empty_assignment(), 1, source)


def verifier_round(state: VerifierState, poly: UnivariatePoly, arith: Arithmetization) -> Decision:
    """Check one round polynomial and update ``state`` in place.

    The verifier never learns the formula's truth value; it only sees the
    running claim, its own challenges and, after the last round, the matrix
    evaluated at those challenges.
    """
    if state.done:
        raise RuntimeError("verifier already reached a verdict")
    rnd = arith.schedule[state.cursor]
    if poly.degree > rnd.degree_bound or not consistent(rnd, poly, state.claim, state.assignment[rnd.var]):
        state.done = True
        return Decision(REJECT)
    r = state.source.draw(arith.p)
    v = rnd.var
    state.assignment = state.assignment[:v] + (r,) + state.assignment[v + 1 :]
    state.claim = poly(r)
    state.cursor += 1
    if state.cursor < len(arith.schedule):
        return Decision(CONTINUE, r)
    state.done = True
    final = arith.matrix_value(state.assignment) == state.claim
    return Decision(ACCEPT if final else REJECT, r)


class Verifier:
    """Message-level wrapper: opening message, then one reply per polynomial."""

    def __init__(self, arith: Arithmetization, source):
        self.arith = arith
        self.state = initial_verifier_state(arith, source)
        self.verdict: str | None = None

    def opening(self) -> tuple[str, tuple[str, ...]]:
        return "open", (str(self.state.claim),)

    def receive(self, payload: Sequence[str]) -> tuple[str, tuple[str, ...]]:
        poly = UnivariatePoly.from_payload(payload, self.arith.p)
        decision = verifier_round(self.state, poly, self.arith)
        if decision.kind == CONTINUE:
            return "challenge", (str(decision.challenge),)
        self.verdict = decision.kind
        if decision.challenge is None:
            return "verdict", (decision.kind,)
        return "verdict", (str(decision.challenge), decision.kind)

    def live_context(self) -> tuple[str, ...]:
        """Round cursor and current assignment, for servers that lack history."""
        a = self.state.assignment
        return (str(self.state.cursor),) + tuple(str(x) for x in a[1:])


class Prover:
    """Message-level prover; ``strategy`` is honest or cheating."""

    def __init__(self, arith: Arithmetization, strategy: str = "honest"):
        if strategy not in ("honest", "cheating"):
            raise ValueError(f"unknown prover strategy {strategy!r}")
        self.arith = arith
        self.round_fn = honest_prover_round if strategy == "honest" else cheating_prover_round
        self.state = initial_prover_state(arith)
        self._last: UnivariatePoly | None = None

    def respond(self, kind: str, payload: Sequence[str]) -> tuple[str, ...] | None:
        if kind == "challenge":
            self.state = advance(self.arith, self.state, self._last, int(payload[0]))
        elif kind == "verdict":
            return None
        elif kind != "open":
            raise ValueError(f"unexpected user message kind {kind!r}")
        self._last = self.round_fn(self.state, self.arith)
        return self._last.to_payload()


def prover_from_context(arith: Arithmetization, context: Sequence[str]) -> ProverState:
    """Honest prover state rebuilt from a :meth:`Verifier.live_context`."""
    cursor = int(context[0])
    return ProverState(cursor, (0,) + tuple(int(x) for x in context[1:]))


@dataclass(frozen=True)
class IpResult:
    verdict: str
    transcript: tuple[Record, ...]
    rounds: int
    p: int
    seed: object = None


def check_field_size(q: Qbf, p: int, allow_small_field: bool = False) -> None:
    if p < q.n**4 and not allow_small_field:
        raise ValueError(f"field size {p} is below n^4 = {q.n ** 4}; pass allow_small_field=True to override")


def run_ip_session(
    q: Qbf,
    p: int,
    seed=None,
    *,
    prover: str = "honest",
    challenges: Sequence[int] | None = None,
    allow_small_field: bool = False,
    arith: Arithmetization | None = None,
) -> IpResult:
    """Run prover and verifier to a verdict.

    Challenges come from ``random.Random(seed)`` unless an explicit tape is
    given. Pass a shared ``arith`` to reuse its cache across many sessions.
    """
    check_field_size(q, p, allow_small_field)
    if arith is None:
        arith = Arithmetization.shared(q, p)
    source = ScriptedChallenges(challenges) if challenges is not None else SeededChallenges(seed)
    verifier = Verifier(arith, source)
    server = Prover(arith, prover)
    records = []
    kind, payload = verifier.opening()
    records.append(Record(0, USER_TO_SERVER, kind, payload))
    t = 0
    while kind != "verdict":
        t += 1
        s = server.respond(kind, payload)
        records.append(Record(t, SERVER_TO_USER, "poly", s))
        kind, payload = verifier.receive(s)
        records.append(Record(t, USER_TO_SERVER, kind, payload))
    return IpResult(verifier.verdict, tuple(records), t, p, seed)


def exact_acceptance(q: Qbf, p: int, prover: str = "cheating", arith: Arithmetization | None = None) -> Fraction:
    """Acceptance probability over every challenge sequence, by tree search.

    Cost grows like ``p ** rounds``; meant for tiny fields.
    """
    arith = arith or Arithmetization(q, p)
    round_fn = honest_prover_round if prover == "honest" else cheating_prover_round
    last = len(arith.schedule) - 1

    def go(state: ProverState) -> Fraction:
        rnd = arith.schedule[state.cursor]
        poly = round_fn(state, arith)
        if poly.degree > rnd.degree_bound or not consistent(rnd, poly, state.claim, state.assignment[rnd.var]):
            return Fraction(0)
        total = Fraction(0)
        for r in range(p):
            nxt = advance(arith, state, poly, r)
            if state.cursor == last:
                total += arith.matrix_value(nxt.assignment) == nxt.claim
            else:
                total += go(nxt)
        return total / p

    return go(initial_prover_state(arith))
