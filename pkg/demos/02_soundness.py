"""How often does a lying prover get through?

The cheating prover below fixes up each round polynomial just enough to
pass the verifier's consistency check. Its only hope is that a random
challenge lands on a point where the lie and the truth agree.

Run:  python3 demos/02_soundness.py
"""

from pathlib import Path

from blindbench.ip import ACCEPT, Arithmetization, exact_acceptance, run_ip_session, total_degree
from blindbench.qbf import load_qbf

q = load_qbf(Path(__file__).parent / "formulas" / "both.qbf")

for p in (17, 83, 257):
    arith = Arithmetization.shared(q, p)
    bound = total_degree(arith.schedule) / p
    runs = 5000
    hits = sum(run_ip_session(q, p, s, prover="cheating", arith=arith).verdict == ACCEPT for s in range(runs))
    line = f"p={p:4d}  bound={bound:.4f}  empirical={hits / runs:.4f}"
    if p <= 83:
        exact = exact_acceptance(q, p, arith=arith)
        line += f"  exact={exact} ({float(exact):.4f})"
    print(line)

print("\nLarger fields push the lie's success rate down roughly like 1/p.")
