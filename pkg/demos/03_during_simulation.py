"""Several servers allowed to talk mid-computation buy nothing over one server.

Server 1 collects every share, computes, and scatters the answer; a
single server fed the same shares in one bundle produces exactly the
same I/O log.

Run:  python3 demos/03_during_simulation.py
"""

from pathlib import Path

from blindbench.harness import run_M_during, run_protocol_S, server_name, simulate_M_during_on_single
from blindbench.qbf import load_qbf

q = load_qbf(Path(__file__).parent / "formulas" / "cnf3.qbf")

real = run_M_during(q, 3, seed=1)
sim = simulate_M_during_on_single(q, 3, seed=1)
single = run_protocol_S(q, seed=1)

print("first entries of server 1's compute log:")
for line in real.compute_view().splitlines()[:4]:
    print("  " + line)

print(f"\nlogs identical: {real.compute_view() == sim.compute_view()}")
print(f"verdicts: M_during={real.verdict} simulation={sim.verdict} S={single.verdict}")

for k in (2, 3):
    parts = {e.part for e in real.views[server_name(k)].received()}
    print(f"server {k} only ever held share(s) {sorted(parts)}")
