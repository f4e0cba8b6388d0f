"""Measure what a server's view gives away about the input.

A one-time pad view is identically distributed whatever the input; the
plain interactive proof is not, since a true and a false formula of the
same size produce visibly different transcripts.

Run:  python3 demos/05_blindness_audit.py
"""

from pathlib import Path

from blindbench.audit import Enumerate, PadProtocol, Sample, SingleServerIp, audit_blindness
from blindbench.qbf import load_qbf

HERE = Path(__file__).parent / "formulas"
exists_x = load_qbf(HERE / "exists.qbf")
forall_x = load_qbf(HERE / "forall.qbf")

print(audit_blindness(PadProtocol(), [exists_x, forall_x], mode=Enumerate()).to_text())
print(audit_blindness(SingleServerIp(), [exists_x, forall_x], mode=Enumerate()).to_text())

print("sampled pad distance shrinks with the sample size:")
for k in (100, 1000, 10000):
    v = audit_blindness(PadProtocol(), [exists_x, forall_x], mode=Sample(k, 1), tolerance=0.05)
    print(f"  k={k:6d}  distance={v.max_distance:.4f}")
