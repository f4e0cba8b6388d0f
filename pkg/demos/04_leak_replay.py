"""A hacking function that leaks on one server also leaks after collusion.

Servers in M_after stay silent while the protocol runs, each answering
only the rounds dealt to it. Once the verdict is out they pool their
logs and replay the hacking function over the full set of user messages.

Run:  python3 demos/04_leak_replay.py
"""

from pathlib import Path

from blindbench.harness import PredicateOracle, PolicyViolation, HonestOracle, run_M_after, run_protocol_S
from blindbench.qbf import load_qbf

q = load_qbf(Path(__file__).parent / "formulas" / "xor.qbf")
oracle = PredicateOracle(q, 17, "r1<8")  # leaks whenever the first challenge is below 8

single, colluding = [], []
for seed in range(40):
    single.append(run_protocol_S(q, seed, oracle).leak_label)
    colluding.append(run_M_after(q, 3, seed, oracle).leak_label)

print("seed  S            M_after")
for seed in range(10):
    print(f"{seed:4d}  {single[seed]:12s} {colluding[seed]}")
same = sum(a == b for a, b in zip(single, colluding))
print(f"... agreement on {same}/40 seeds")

try:
    run_M_after(q, 2, 0, HonestOracle(q, 17), gossip=True)
except PolicyViolation as exc:
    print(f"\ntalking during the computation is refused: {exc}")
