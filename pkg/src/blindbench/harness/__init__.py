"""Actors, routing and the single/multi-server protocol configurations."""

from .network import (
    AFTER,
    BLOCK,
    DELIVER,
    DURING,
    USER,
    CommunicationPolicy,
    Envelope,
    Network,
    PolicyViolation,
    ServerView,
    epoch_guard,
    is_server,
    server_name,
)
from .oracles import (
    INF_NO,
    HonestOracle,
    InfCircuit,
    InfNo,
    Next,
    OracleContractError,
    PredicateOracle,
    challenges_of,
    make_oracle,
    parse_predicate,
    replay_chain,
)
from .protocols import (
    NONE,
    SessionResult,
    join_shares,
    pooled_transcript,
    round_owner,
    run_M_after,
    run_M_during,
    run_protocol_S,
    simulate_M_during_on_single,
    split_payload,
)
