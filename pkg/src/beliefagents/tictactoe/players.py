"""
Move-selection strategies.

Every ``*_decide`` function reads the board without modifying it and returns
a :class:`MoveDecision`. LLM strategies raise :class:`IllegalMoveProposed`
when the model names an occupied or off-board cell, so a match harness can
count those separately from unparseable replies.
"""

from __future__ import annotations

import logging
import random
import textwrap

from ..providers import ChatProvider
from ..templates import NoMatch, create_prompt_template, create_response_template
from .board import Board, BoardFull, MoveDecision

log = logging.getLogger(__name__)


class NonInteger(ValueError):
    pass


class IllegalMoveProposed(Exception):
    def __init__(self, row: int, col: int, reason: str):
        super().__init__(f"proposed ({row}, {col}): {reason}")
        self.row, self.col, self.reason = row, col, reason


class UnexpectedAnswer(ValueError):
    pass


def _prompt(text: str) -> str:
    return textwrap.dedent(text).strip()


BASIC_PROMPT = _prompt("""
    if the following json is a representation of a tic-tac-toe
    board ${board}, what is the best move player '${player}'
    can make?
    Answer in the form '**Play ${player} at <X>, <Y>**'
""")

LOOSABLE_PROMPT = _prompt("""
    I am a tic-tac-toe playing agent. if the following json
    is a representation of a tic-tac-toe board ${board},
    and I am player ${player}. Can I lose the game? Answer
    YES or NO only using the template '**Result <answer>**'
""")

DEFENSIVE_PROMPT = _prompt("""
    I am a tic-tac-toe playing agent.
    if the following json is a representation of a
    tic-tac-toe board ${board}, what location should
    player '${player}' select to not loose the game?
    Answer in the form '**Play ${player} at <X>, <Y>**'
""")

NEUTRAL_PROMPT = _prompt("""
    I am a tic-tac-toe playing agent.
    if the following json is a representation of a
    tic-tac-toe board ${board},what location should
    player '${player}' select?
    Answer in the form '**Play ${player} at <X>, <Y>**'
""")

EVALUATE_PROMPT = (
    "Is playing ${player} at ${x}, ${y} on board ${board} a good move? "
    "Answer YES or NO only using the template '**Result <answer>**'"
)

REJECTED_SUFFIX = (
    "\nThe following moves have already been rejected: ${rejected}. "
    "Do not pick the same move again."
)

MOVE_RESPONSE = "**Play ${player} at ${x}, ${y}**"
RESULT_RESPONSE = "**Result ${answer}**"


def linear_decide(board: Board) -> MoveDecision:
    """First empty cell scanning rows, then columns."""
    for i in range(3):
        for j in range(3):
            if board.cells[i][j] == "":
                return MoveDecision(i, j)
    raise BoardFull("no empty cell")


def random_decide(board: Board, rng: random.Random) -> MoveDecision:
    cells = board.empty_cells()
    if not cells:
        raise BoardFull("no empty cell")
    return MoveDecision(*rng.choice(cells))


def _to_int(text: str, name: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise NonInteger(f"{name}={text!r} is not an integer") from None


def extract_move(reply: str, token: str, board: Board) -> MoveDecision:
    response = create_response_template(MOVE_RESPONSE)
    response.add_binding("player", token)
    response.infer_bindings(reply)
    row = _to_int(response.get_binding("x"), "x")
    col = _to_int(response.get_binding("y"), "y")
    if not (0 <= row < 3 and 0 <= col < 3):
        raise IllegalMoveProposed(row, col, "off the board")
    if board.cells[row][col]:
        raise IllegalMoveProposed(row, col, f"cell holds {board.cells[row][col]}")
    return MoveDecision(row, col)


def _ask(provider: ChatProvider, source: str, board: Board, token: str, **extra) -> str:
    template = create_prompt_template(source)
    template.add_binding("board", board.to_json())
    template.add_binding("player", token)
    for k, v in extra.items():
        template.add_binding(k, v)
    return provider.chat_templated(template)


def llm_decide(provider: ChatProvider, board: Board, token: str) -> MoveDecision:
    return extract_move(_ask(provider, BASIC_PROMPT, board, token), token, board)


def ask_yes_no(provider: ChatProvider, source: str, board: Board, token: str, **extra) -> bool:
    reply = _ask(provider, source, board, token, **extra)
    response = create_response_template(RESULT_RESPONSE)
    response.infer_bindings(reply)
    answer = response.get_binding("answer").strip().upper()
    if answer not in ("YES", "NO"):
        raise UnexpectedAnswer(f"expected YES or NO, got {response.get_binding('answer')!r}")
    return answer == "YES"


def defensive_decide(provider: ChatProvider, board: Board, token: str) -> MoveDecision:
    loosable = ask_yes_no(provider, LOOSABLE_PROMPT, board, token)
    source = DEFENSIVE_PROMPT if loosable else NEUTRAL_PROMPT
    return extract_move(_ask(provider, source, board, token), token, board)


def reflective_decide(provider: ChatProvider, board: Board, token: str, max_rounds: int = 3) -> MoveDecision:
    """Propose, let the model judge the proposal, and re-propose on rejection."""
    if max_rounds < 1:
        raise ValueError("max_rounds must be positive")
    rejected: list[MoveDecision] = []
    proposal = None
    for _ in range(max_rounds):
        if rejected:
            listed = ", ".join(f"({m.row}, {m.col})" for m in rejected)
            reply = _ask(provider, BASIC_PROMPT + REJECTED_SUFFIX, board, token, rejected=listed)
        else:
            reply = _ask(provider, BASIC_PROMPT, board, token)
        proposal = extract_move(reply, token, board)
        if ask_yes_no(provider, EVALUATE_PROMPT, board, token, x=str(proposal.row), y=str(proposal.col)):
            return proposal
        rejected.append(proposal)
    log.warning("reflective player %s rejected %d proposals; keeping the last", token, len(rejected))
    return MoveDecision(proposal.row, proposal.col, exhausted=True)


# Errors a decide call may raise that a harness treats as a bad proposal.
DECISION_ERRORS = (NoMatch, NonInteger, IllegalMoveProposed, UnexpectedAnswer)
