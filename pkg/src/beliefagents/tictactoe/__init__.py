"""Tic-Tac-Toe environment, player strategies and match harness."""

from .board import (
    Board,
    BoardError,
    BoardFull,
    CellOccupied,
    GameOver,
    GameStatus,
    MoveDecision,
    OutOfRange,
    OutOfTurn,
    apply_move,
    board_to_json,
    status,
)
from .match import POLICIES, PLAYER_TYPES, MatchResult, MatchRules, PlayerStats, make_strategy, play_match
from .players import (
    IllegalMoveProposed,
    NonInteger,
    UnexpectedAnswer,
    defensive_decide,
    extract_move,
    linear_decide,
    llm_decide,
    random_decide,
    reflective_decide,
)
