import itertools
from pathlib import Path
import random
from fractions import Fraction

import pytest

from blindbench.field import UnivariatePoly, interpolate_values
from blindbench.ip import (
    ACCEPT,
    REDUCE,
    REJECT,
    Arithmetization,
    DegreeBoundError,
    ProverState,
    Round,
    ScriptedChallenges,
    build_schedule,
    exact_acceptance,
    honest_prover_round,
    initial_prover_state,
    initial_verifier_state,
    quantified_value,
    run_ip_session,
    total_degree,
    verifier_round,
)
from blindbench.qbf import EXISTS, FORALL, Qbf, brute_force_truth, evaluate, occurrences, parse_qbf, random_qbf
from blindbench.transcript import transcript_from_jsonl, transcript_to_jsonl

from conftest import find_instances


def test_schedule_two_variables(xor_true):
    occ = occurrences(xor_true.matrix)
    assert build_schedule(xor_true) == (
        Round(FORALL, 1, 2),
        Round(EXISTS, 2, occ[2]),
        Round(REDUCE, 1, occ[1]),
    )


@pytest.mark.parametrize("n", range(1, 8))
def test_schedule_length_quadratic(n):
    q = random_qbf(n, 2 * n + 3, n)
    sched = build_schedule(q)
    assert len(sched) == n + n * (n - 1) // 2
    kinds = [r.kind for r in sched]
    assert kinds.count(REDUCE) == n * (n - 1) // 2


@pytest.mark.parametrize("text", ["e 1 0\n1 0\n", "a 1 0\n1 0\n"])
def test_first_polynomial_is_identity(text):
    q = parse_qbf(text)
    arith = Arithmetization(q, 17)
    poly = honest_prover_round(initial_prover_state(arith), arith)
    assert poly.coeffs == (0, 1)


def test_exists_accepts(exists_x):
    res = run_ip_session(exists_x, 17, seed=3)
    assert res.verdict == ACCEPT and res.rounds == 1


def test_false_instance_rejected_first_round(forall_x):
    res = run_ip_session(forall_x, 17, seed=3)
    assert res.verdict == REJECT and res.rounds == 1
    assert res.transcript[-1].payload == (REJECT,)


def test_xor_accepts(xor_true):
    for seed in range(50):
        assert run_ip_session(xor_true, 17, seed).verdict == ACCEPT


def test_small_field_guard():
    q = random_qbf(3, 6, 0)
    with pytest.raises(ValueError):
        run_ip_session(q, 17, 0)
    run_ip_session(q, 17, 0, allow_small_field=True)


@pytest.mark.parametrize("n", range(1, 5))
def test_arithmetization_matches_brute_force(n):
    rng = random.Random(n)
    for m in range(12):
        base = random_qbf(n, 2 * n - 1 + rng.randrange(8), 1000 * n + m)
        for quants in itertools.product((EXISTS, FORALL), repeat=n):
            q = Qbf(tuple(zip(quants, range(1, n + 1))), base.matrix)
            assert quantified_value(q, 17) == int(brute_force_truth(q))


@pytest.mark.parametrize("n", range(1, 5))
def test_matrix_polynomial_on_cube(n):
    q = random_qbf(n, 3 * n, 7)
    arith = Arithmetization(q, 257)
    for bits in itertools.product((0, 1), repeat=n):
        env = dict(zip(range(1, n + 1), bits))
        assert arith.matrix_value((0,) + bits) == int(evaluate(q.matrix, env))


def test_matrix_degree_bounded_by_occurrences():
    # fix all but one variable at random field points and recover the
    # univariate restriction by interpolation
    rng = random.Random(5)
    p = 257
    for s in range(20):
        q = random_qbf(4, 12, s)
        arith = Arithmetization(q, p)
        occ = occurrences(q.matrix)
        for v in range(1, 5):
            point = [0] + [rng.randrange(p) for _ in range(4)]
            xs = list(range(occ[v] + 3))
            ys = []
            for x in xs:
                point[v] = x
                ys.append(arith.matrix_value(tuple(point)))
            assert UnivariatePoly(interpolate_values(xs, ys, p), p).degree <= occ[v]


def test_honest_polys_respect_bounds():
    for q in find_instances(3, 8, True, 5) + find_instances(3, 8, False, 5):
        arith = Arithmetization(q, 83)
        res = run_ip_session(q, 83, 11, arith=arith)
        polys = [r for r in res.transcript if r.kind == "poly"]
        for rec, rnd in zip(polys, arith.schedule):
            assert UnivariatePoly.from_payload(rec.payload, 83).degree <= rnd.degree_bound


def test_degree_violation_raises_in_prover(exists_x):
    arith = Arithmetization(exists_x, 17)
    tight = tuple(Round(r.kind, r.var, 0) for r in arith.schedule)
    arith.schedule = tight
    with pytest.raises(DegreeBoundError):
        honest_prover_round(initial_prover_state(arith), arith)


def test_verifier_rejects_high_degree(xor_true):
    arith = Arithmetization(xor_true, 17)
    state = initial_verifier_state(arith, ScriptedChallenges([1, 2, 3]))
    too_high = UnivariatePoly([1, 0, 0, 1], 17)
    assert verifier_round(state, too_high, arith).kind == REJECT


def test_verifier_rejects_inconsistent(exists_x):
    arith = Arithmetization(exists_x, 17)
    state = initial_verifier_state(arith, ScriptedChallenges([4]))
    # 1 - (1 - P(0))(1 - P(1)) = 0 for the zero polynomial
    assert verifier_round(state, UnivariatePoly([0], 17), arith).kind == REJECT


def test_cheating_forall_x(forall_x):
    # the prover must send a line with P(0)P(1) = 1; the final check
    # compares P(r) with r, so it can pass at most once
    accepts = [run_ip_session(forall_x, 17, challenges=[r], prover="cheating").verdict == ACCEPT for r in range(17)]
    assert sum(accepts) <= 1
    assert exact_acceptance(forall_x, 17) == Fraction(sum(accepts), 17)


def test_exact_acceptance_matches_tape_enumeration():
    q = find_instances(2, 4, False, 1)[0]
    arith = Arithmetization(q, 17)
    rounds = len(arith.schedule)
    hits = 0
    for tape in itertools.product(range(17), repeat=rounds):
        hits += run_ip_session(q, 17, challenges=tape, prover="cheating", arith=arith).verdict == ACCEPT
    assert exact_acceptance(q, 17, arith=arith) == Fraction(hits, 17**rounds)
    assert Fraction(hits, 17**rounds) <= Fraction(total_degree(arith.schedule), 17)


def test_exact_acceptance_honest_true(xor_true):
    assert exact_acceptance(xor_true, 17, prover="honest") == 1


def test_soundness_bound_n2_p83():
    for q in find_instances(2, 5, False, 2):
        arith = Arithmetization(q, 83)
        assert exact_acceptance(q, 83, arith=arith) <= Fraction(total_degree(arith.schedule), 83)


def test_transcript_deterministic():
    q = find_instances(3, 8, True, 1)[0]
    texts = {transcript_to_jsonl(run_ip_session(q, 83, 42).transcript) for _ in range(100)}
    assert len(texts) == 1


def test_transcript_jsonl_roundtrip(xor_true):
    res = run_ip_session(xor_true, 17, 9)
    text = transcript_to_jsonl(res.transcript)
    assert transcript_from_jsonl(text) == list(res.transcript)


def test_seeded_challenges_follow_stdlib(xor_true):
    res = run_ip_session(xor_true, 17, 123)
    rng = random.Random(123)
    user = [r for r in res.transcript if r.kind in ("challenge", "verdict")]
    drawn = [int(r.payload[0]) for r in user if len(r.payload) > 1 or r.kind == "challenge"]
    assert drawn == [rng.randrange(17) for _ in drawn]


def test_cheating_bound_six_over_83():
    q = parse_qbf((Path(__file__).parent.parent / "demos" / "formulas" / "both.qbf").read_text())
    assert not brute_force_truth(q)
    exact = exact_acceptance(q, 83)
    assert exact <= Fraction(6, 83)
    arith = Arithmetization.shared(q, 83)
    hits = sum(run_ip_session(q, 83, s, prover="cheating", arith=arith).verdict == ACCEPT for s in range(10_000))
    sigma = (float(exact) * (1 - float(exact)) / 10_000) ** 0.5
    assert hits / 10_000 <= total_degree(arith.schedule) / 83 + 3 * sigma
