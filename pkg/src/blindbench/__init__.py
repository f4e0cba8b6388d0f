"""Simulator and verification harness for classical-user delegated computation.

The delegated workload is the TQBF interactive proof; the harness runs it
under single-server and multi-server communication policies, replays
hacking-function oracles after server collusion, and audits whether a
server's view distribution depends on the input.
"""

__version__ = "0.1.0"

from .field import FieldElement, UnivariatePoly, field_arith, poly_eval, poly_interpolate, smallest_session_prime
from .qbf import Qbf, brute_force_truth, parse_qbf, print_qbf, random_qbf
from .ip import IpResult, build_schedule, run_ip_session
