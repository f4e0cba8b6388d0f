"""Walk through one interactive-proof session on a tiny true formula.

Run:  python3 demos/01_ip_session.py
"""

from pathlib import Path

from blindbench.field import UnivariatePoly, smallest_session_prime
from blindbench.ip import build_schedule, run_ip_session
from blindbench.qbf import brute_force_truth, load_qbf, print_qbf

HERE = Path(__file__).parent

q = load_qbf(HERE / "formulas" / "xor.qbf")
p = smallest_session_prime(q.n)
print(print_qbf(q))
print(f"brute force says: {brute_force_truth(q)}; working mod p={p}\n")

print("round operators (kind, variable, degree bound):")
for i, rnd in enumerate(build_schedule(q), 1):
    print(f"  {i}: {rnd}")

res = run_ip_session(q, p, seed=7)
print("\ntranscript:")
for rec in res.transcript:
    if rec.kind == "poly":
        poly = UnivariatePoly.from_payload(rec.payload, p)
        print(f"  {rec.round:2d} {rec.direction} poly coeffs={list(poly.coeffs)}")
    else:
        print(f"  {rec.round:2d} {rec.direction} {rec.kind} {list(rec.payload)}")
print(f"\nverdict: {res.verdict} after {res.rounds} polynomial rounds")

# the same session on a false formula stops at the first check
bad = load_qbf(HERE / "formulas" / "both.qbf")
res = run_ip_session(bad, p, seed=7)
print(f"false formula, honest prover: {res.verdict} after {res.rounds} round(s)")
