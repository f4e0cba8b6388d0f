"""Closed prenex QBFs: parsing, printing, brute-force truth and a generator.

Text format::

    # comment
    p qbf 2
    a 1 0
    e 2 0
    (and (or 1 (not 2)) (or (not 1) 2))

The body is either one prefix s-expression (``and``/``or`` take two or more
arguments and fold left, ``not`` takes one, a bare integer is a variable and
a negative integer its negation) or QDIMACS-style clause lines ``1 -2 0``
read as a conjunction of disjunctions. The ``p`` header is optional.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Iterator, Union

FORALL = "a"
EXISTS = "e"

DEFAULT_TRUTH_CAP = 20


class QbfError(ValueError):
    pass


class QbfSyntaxError(QbfError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class QbfClosednessError(QbfError):
    pass


class QbfDuplicateError(QbfError):
    pass


@dataclass(frozen=True)
class Var:
    id: int


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


Formula = Union[Var, Not, And, Or]


def nodes(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Not):
            stack.append(node.child)
        elif isinstance(node, (And, Or)):
            stack.append(node.right)
            stack.append(node.left)


def formula_size(f: Formula) -> int:
    return sum(1 for _ in nodes(f))


def occurrences(f: Formula) -> dict[int, int]:
    counts: dict[int, int] = {}
    for node in nodes(f):
        if isinstance(node, Var):
            counts[node.id] = counts.get(node.id, 0) + 1
    return counts


def evaluate(f: Formula, assignment) -> bool:
    """Boolean value of ``f``; ``assignment`` maps variable id to bool."""
    if isinstance(f, Var):
        return bool(assignment[f.id])
    if isinstance(f, Not):
        return not evaluate(f.child, assignment)
    if isinstance(f, And):
        return evaluate(f.left, assignment) and evaluate(f.right, assignment)
    return evaluate(f.left, assignment) or evaluate(f.right, assignment)


@dataclass(frozen=True)
class Qbf:
    prefix: tuple[tuple[str, int], ...]
    matrix: Formula

    def __post_init__(self):
        seen = set()
        for quant, var in self.prefix:
            if quant not in (FORALL, EXISTS):
                raise QbfError(f"unknown quantifier {quant!r}")
            if var in seen:
                raise QbfDuplicateError(f"variable {var} quantified twice")
            seen.add(var)
        if seen != set(range(1, len(self.prefix) + 1)):
            raise QbfError(f"variable ids must be exactly 1..{len(self.prefix)}, got {sorted(seen)}")
        free = set(occurrences(self.matrix)) - seen
        if free:
            raise QbfClosednessError(f"free variables {sorted(free)} are not quantified")

    @property
    def n(self) -> int:
        return len(self.prefix)

    @property
    def size(self) -> int:
        return formula_size(self.matrix)

    @property
    def leakage(self) -> tuple[int, int]:
        """The always-revealed datum: (variable count, matrix node count)."""
        return (self.n, self.size)

    def __str__(self) -> str:
        return print_qbf(self)


def _sexpr(f: Formula) -> str:
    if isinstance(f, Var):
        return str(f.id)
    if isinstance(f, Not):
        return f"(not {_sexpr(f.child)})"
    op = "and" if isinstance(f, And) else "or"
    return f"({op} {_sexpr(f.left)} {_sexpr(f.right)})"


def print_qbf(q: Qbf) -> str:
    lines = [f"p qbf {q.n}"]
    block: list[int] = []
    current = None
    for quant, var in q.prefix:
        if quant != current and block:
            lines.append(f"{current} {' '.join(map(str, block))} 0")
            block = []
        current = quant
        block.append(var)
    if block:
        lines.append(f"{current} {' '.join(map(str, block))} 0")
    lines.append(_sexpr(q.matrix))
    return "\n".join(lines) + "\n"


_TOKEN = re.compile(r"(\()|(\))|(-?\d+)|([A-Za-z]+)|(\S)")


class _SexprParser:
    def __init__(self, text: str, line_starts: list[int]):
        self.text = text
        self.line_starts = line_starts
        self.tokens = []
        for m in _TOKEN.finditer(text):
            if m.lastindex == 5:
                raise self.error(f"unexpected character {m.group(5)!r}", m.start())
            self.tokens.append((m.lastindex, m.group(), m.start()))
        self.i = 0

    def error(self, message: str, offset: int) -> QbfSyntaxError:
        line = 0
        while line + 1 < len(self.line_starts) and self.line_starts[line + 1] <= offset:
            line += 1
        return QbfSyntaxError(message, line + 1, offset - self.line_starts[line] + 1)

    def peek(self):
        if self.i >= len(self.tokens):
            raise self.error("unexpected end of formula", len(self.text))
        return self.tokens[self.i]

    def parse(self) -> Formula:
        f = self.expr()
        if self.i != len(self.tokens):
            raise self.error("trailing tokens after formula", self.tokens[self.i][2])
        return f

    def expr(self) -> Formula:
        kind, value, offset = self.peek()
        self.i += 1
        if kind == 3:
            v = int(value)
            if v == 0:
                raise self.error("variable 0 is not allowed", offset)
            return Var(v) if v > 0 else Not(Var(-v))
        if kind != 1:
            raise self.error(f"expected '(' or a literal, got {value!r}", offset)
        kind, op, op_offset = self.peek()
        self.i += 1
        if kind != 4 or op.lower() not in ("and", "or", "not"):
            raise self.error(f"expected and/or/not, got {op!r}", op_offset)
        op = op.lower()
        args = []
        while self.peek()[0] != 2:
            args.append(self.expr())
        self.i += 1
        if op == "not":
            if len(args) != 1:
                raise self.error("'not' takes exactly one argument", op_offset)
            return Not(args[0])
        if len(args) < 2:
            raise self.error(f"'{op}' takes at least two arguments", op_offset)
        cls = And if op == "and" else Or
        acc = args[0]
        for a in args[1:]:
            acc = cls(acc, a)
        return acc


def _fold(cls, items):
    acc = items[0]
    for it in items[1:]:
        acc = cls(acc, it)
    return acc


def parse_qbf(text: str) -> Qbf:
    raw_lines = text.splitlines()
    declared_n = None
    prefix: list[tuple[str, int]] = []
    body_start = None
    for idx, raw in enumerate(raw_lines):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        col = raw.index(line[0]) + 1
        tokens = line.split()
        if tokens[0] == "p":
            if prefix or declared_n is not None:
                raise QbfSyntaxError("header must precede quantifier lines", idx + 1, col)
            if len(tokens) < 3 or tokens[1] not in ("qbf", "cnf") or not tokens[2].isdigit():
                raise QbfSyntaxError("expected 'p qbf <n>'", idx + 1, col)
            declared_n = int(tokens[2])
            continue
        if tokens[0] in (FORALL, EXISTS):
            if tokens[-1] != "0":
                raise QbfSyntaxError("quantifier line must end with 0", idx + 1, col + len(line) - 1)
            for tok in tokens[1:-1]:
                if not tok.isdigit() or int(tok) == 0:
                    raise QbfSyntaxError(f"bad variable {tok!r}", idx + 1, raw.index(tok) + 1)
                var = int(tok)
                if any(v == var for _, v in prefix):
                    raise QbfDuplicateError(f"line {idx + 1}: variable {var} quantified twice")
                prefix.append((tokens[0], var))
            continue
        body_start = idx
        break
    if body_start is None:
        raise QbfSyntaxError("missing formula body", len(raw_lines) + 1, 1)

    body_lines = [raw.split("#", 1)[0] for raw in raw_lines[body_start:]]
    first = body_lines[0].strip()
    if first.startswith("(") or (len(first.split()) == 1 and not any(l.strip() for l in body_lines[1:])):
        text_body = "\n".join(body_lines)
        starts = [0]
        for l in body_lines[:-1]:
            starts.append(starts[-1] + len(l) + 1)
        try:
            matrix = _SexprParser(text_body, starts).parse()
        except QbfSyntaxError as exc:
            raise QbfSyntaxError(str(exc).split(": ", 1)[1], exc.line + body_start, exc.column) from None
    else:
        clauses = []
        for offset, raw in enumerate(body_lines):
            toks = raw.split()
            if not toks:
                continue
            lineno = body_start + offset + 1
            try:
                lits = [int(t) for t in toks]
            except ValueError:
                bad = next(t for t in toks if not re.fullmatch(r"-?\d+", t))
                raise QbfSyntaxError(f"bad literal {bad!r}", lineno, raw.index(bad) + 1) from None
            if lits[-1] != 0 or 0 in lits[:-1] or len(lits) < 2:
                raise QbfSyntaxError("clause must be nonzero literals terminated by 0", lineno, 1)
            clauses.append(_fold(Or, [Var(l) if l > 0 else Not(Var(-l)) for l in lits[:-1]]))
        matrix = _fold(And, clauses)
    if declared_n is not None and declared_n != len(prefix):
        raise QbfError(f"header declares {declared_n} variables but prefix quantifies {len(prefix)}")
    return Qbf(tuple(prefix), matrix)


def load_qbf(path) -> Qbf:
    with open(path, encoding="utf-8") as fh:
        return parse_qbf(fh.read())


def brute_force_truth(q: Qbf, cap: int = DEFAULT_TRUTH_CAP) -> bool:
    if q.n > cap:
        raise QbfError(f"{q.n} variables exceeds brute-force cap {cap}")
    assignment: dict[int, bool] = {}

    def go(i: int) -> bool:
        if i == len(q.prefix):
            return evaluate(q.matrix, assignment)
        quant, var = q.prefix[i]
        results = []
        for b in (False, True):
            assignment[var] = b
            results.append(go(i + 1))
            # short-circuit once the quantifier is decided
            if quant == EXISTS and results[-1]:
                return True
            if quant == FORALL and not results[-1]:
                return False
        return quant == FORALL

    return go(0)


def random_qbf(n: int, size: int, seed: int) -> Qbf:
    """Deterministic random closed QBF with every variable in the matrix.

    The matrix has exactly ``size`` nodes when ``size >= 2n - 1``; smaller
    budgets are rounded up to ``2n - 1`` so that all ``n`` variables fit.
    """
    if n < 1 or size < n:
        raise ValueError(f"need n >= 1 and size >= n, got n={n}, size={size}")
    rng = random.Random(f"qbf:{n}:{size}:{seed}")
    prefix = tuple((rng.choice((FORALL, EXISTS)), v) for v in range(1, n + 1))
    size = max(size, 2 * n - 1)
    n_leaves = rng.randint(n, (size + 1) // 2)
    n_nots = size - (2 * n_leaves - 1)
    leaves = list(range(1, n + 1)) + [rng.randint(1, n) for _ in range(n_leaves - n)]
    rng.shuffle(leaves)
    # one slot per node that may receive a negation on top
    total_slots = 2 * n_leaves - 1
    not_counts = [0] * total_slots
    for _ in range(n_nots):
        not_counts[rng.randrange(total_slots)] += 1
    slot = iter(range(total_slots))

    def wrap(f: Formula) -> Formula:
        for _ in range(not_counts[next(slot)]):
            f = Not(f)
        return f

    def build(lo: int, hi: int) -> Formula:
        if hi - lo == 1:
            return wrap(Var(leaves[lo]))
        mid = rng.randint(lo + 1, hi - 1)
        left = build(lo, mid)
        right = build(mid, hi)
        op = And if rng.random() < 0.5 else Or
        return wrap(op(left, right))

    return Qbf(prefix, build(0, n_leaves))
