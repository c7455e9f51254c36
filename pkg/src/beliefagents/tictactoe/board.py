"""3x3 board, move validation and win/draw adjudication."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

EMPTY = ""
TOKENS = ("X", "O")

LINES = tuple(
    [tuple((r, c) for c in range(3)) for r in range(3)]
    + [tuple((r, c) for r in range(3)) for c in range(3)]
    + [tuple((i, i) for i in range(3)), tuple((i, 2 - i) for i in range(3))]
)


class BoardError(Exception):
    pass


class CellOccupied(BoardError):
    pass


class OutOfTurn(BoardError):
    pass


class GameOver(BoardError):
    pass


class OutOfRange(BoardError):
    pass


class BoardFull(BoardError):
    pass


@dataclass(frozen=True)
class GameStatus:
    state: str  # "in-progress" | "win" | "draw"
    winner: str | None = None

    def __str__(self) -> str:
        return f"win({self.winner})" if self.state == "win" else self.state


IN_PROGRESS = GameStatus("in-progress")
DRAW = GameStatus("draw")


@dataclass(frozen=True)
class MoveDecision:
    row: int
    col: int
    exhausted: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        if not (0 <= self.row < 3 and 0 <= self.col < 3):
            raise OutOfRange(f"({self.row}, {self.col}) is off the board")


def grid_status(cells) -> GameStatus:
    for line in LINES:
        a, b, c = (cells[r][col] for r, col in line)
        if a and a == b == c:
            return GameStatus("win", a)
    if all(v for row in cells for v in row):
        return DRAW
    return IN_PROGRESS


class Board:
    """Grid plus move history. X always moves first."""

    def __init__(self) -> None:
        self.cells: list[list[str]] = [[EMPTY] * 3 for _ in range(3)]
        self.history: list[tuple[str, int, int]] = []

    @classmethod
    def from_cells(cls, cells) -> "Board":
        """Build a board from a grid, synthesising a history in row-major order."""
        xs = [(r, c) for r in range(3) for c in range(3) if cells[r][c] == "X"]
        os_ = [(r, c) for r in range(3) for c in range(3) if cells[r][c] == "O"]
        for row in cells:
            for v in row:
                if v not in ("X", "O", EMPTY):
                    raise ValueError(f"invalid cell value {v!r}")
        if not 0 <= len(xs) - len(os_) <= 1:
            raise ValueError("X count must equal O count or exceed it by one")
        b = cls()
        for i in range(len(xs) + len(os_)):
            token = TOKENS[i % 2]
            r, c = (xs if token == "X" else os_)[i // 2]
            b.cells[r][c] = token
            b.history.append((token, r, c))
        return b

    def copy(self) -> "Board":
        b = Board()
        b.cells = [row[:] for row in self.cells]
        b.history = list(self.history)
        return b

    def __eq__(self, other) -> bool:
        return isinstance(other, Board) and self.cells == other.cells and self.history == other.history

    def __repr__(self) -> str:
        return "Board(" + "/".join("".join(v or "." for v in row) for row in self.cells) + ")"

    @property
    def to_move(self) -> str:
        return TOKENS[len(self.history) % 2]

    def empty_cells(self) -> list[tuple[int, int]]:
        return [(r, c) for r in range(3) for c in range(3) if not self.cells[r][c]]

    def status(self) -> GameStatus:
        return grid_status(self.cells)

    def check_move(self, token: str, row: int, col: int) -> None:
        """Raise the matching error if the move is not legal now."""
        if self.status() != IN_PROGRESS:
            raise GameOver(f"game already finished: {self.status()}")
        if not (isinstance(row, int) and isinstance(col, int) and 0 <= row < 3 and 0 <= col < 3):
            raise OutOfRange(f"({row}, {col}) is off the board")
        if token != self.to_move:
            raise OutOfTurn(f"it is {self.to_move}'s turn, not {token}'s")
        if self.cells[row][col]:
            raise CellOccupied(f"({row}, {col}) already holds {self.cells[row][col]}")

    def apply_move(self, token: str, row: int, col: int) -> GameStatus:
        self.check_move(token, row, col)
        self.cells[row][col] = token
        self.history.append((token, row, col))
        return self.status()

    def to_json(self) -> str:
        return json.dumps({"cells": self.cells})

    @classmethod
    def from_json(cls, text: str) -> "Board":
        return cls.from_cells(json.loads(text)["cells"])


def status(board: Board) -> GameStatus:
    return board.status()


def board_to_json(board: Board) -> str:
    return board.to_json()


def apply_move(board: Board, token: str, row: int, col: int) -> Board:
    """Functional form: returns a new board, leaving ``board`` untouched."""
    b = board.copy()
    b.apply_move(token, row, col)
    return b
