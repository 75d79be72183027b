"""BB84 simulation, the distinguishing game, and the pattern-aware eavesdropper."""

from .protocol import (
    EveStrategy,
    PartyConfig,
    ProtocolParams,
    ProtocolTranscript,
    Seeds,
    alice_budget,
    bob_budget,
    replay,
    run_protocol,
)
from .eve import PublicView, eve_pattern_attack, expected_guess_probability, pattern_guess
from .game import (
    GameResult,
    MonteCarloResult,
    game_g_exact,
    game_g_monte_carlo,
    theorem_check,
)
