"""
Belief base: ground predicates with insertion-ordered storage and
unification queries over variable-bearing patterns.

Terms are plain Python values (``str`` or ``int``) when ground and
:class:`Var` instances when variable. ``bool`` is rejected as a term value
even though it subclasses ``int``.
"""

from __future__ import annotations

import re
from contextvars import ContextVar
from dataclasses import dataclass
from typing import Callable, Iterator, Union

__all__ = [
    "Var",
    "Predicate",
    "Term",
    "Substitution",
    "BeliefBase",
    "BeliefError",
    "NonGroundBelief",
    "OwnershipViolation",
    "PredicateSyntaxError",
    "parse_predicate",
    "pred",
    "unify",
    "current_agent",
]


class BeliefError(Exception):
    """Base class for belief base errors."""


class NonGroundBelief(BeliefError):
    """A predicate containing variables was stored or removed."""


class OwnershipViolation(BeliefError):
    """An agent touched a belief base it does not own."""


class PredicateSyntaxError(BeliefError):
    """Text could not be parsed as a predicate."""


# Name of the agent whose execution context is active. Set by the runtime.
current_agent: ContextVar[str | None] = ContextVar("current_agent", default=None)

_TYPES = {"string": str, "int": int}


@dataclass(frozen=True)
class Var:
    """A typed logical variable. ``type`` is ``"string"`` or ``"int"``."""

    name: str
    type: str = "string"

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("variable name must be nonempty")
        if self.type not in _TYPES:
            raise ValueError(f"unknown variable type {self.type!r}")

    def accepts(self, value: object) -> bool:
        return _is_value(value) and isinstance(value, _TYPES[self.type])

    def __str__(self) -> str:
        return f"{self.type} {self.name}"


Term = Union[str, int, Var]
Substitution = dict  # variable name -> str | int


def _is_value(v: object) -> bool:
    return isinstance(v, (str, int)) and not isinstance(v, bool)


def _render_term(t: Term) -> str:
    if isinstance(t, Var):
        return str(t)
    if isinstance(t, str):
        return '"' + t.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'
    return str(t)


@dataclass(frozen=True)
class Predicate:
    functor: str
    args: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        if not self.functor:
            raise ValueError("functor must be nonempty")
        object.__setattr__(self, "args", tuple(self.args))
        for a in self.args:
            if not isinstance(a, Var) and not _is_value(a):
                raise TypeError(f"invalid term {a!r} in {self.functor}")

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def is_ground(self) -> bool:
        return not any(isinstance(a, Var) for a in self.args)

    def variables(self) -> list[str]:
        """Variable names in first-occurrence order."""
        seen: list[str] = []
        for a in self.args:
            if isinstance(a, Var) and a.name not in seen:
                seen.append(a.name)
        return seen

    def apply(self, subst: Substitution) -> "Predicate":
        return Predicate(
            self.functor,
            tuple(subst.get(a.name, a) if isinstance(a, Var) else a for a in self.args),
        )

    def __str__(self) -> str:
        return f"{self.functor}({','.join(_render_term(a) for a in self.args)})"


def pred(functor: str, *args: Term) -> Predicate:
    """Shorthand constructor: ``pred("on", "a", Var("B"))``."""
    return Predicate(functor, args)


def unify(pattern: Predicate, fact: Predicate) -> Substitution | None:
    """Match ``pattern`` against a ground ``fact``; ``None`` if they don't unify."""
    if pattern.functor != fact.functor or pattern.arity != fact.arity:
        return None
    subst: Substitution = {}
    for p, f in zip(pattern.args, fact.args):
        if isinstance(p, Var):
            if not p.accepts(f):
                return None
            bound = subst.get(p.name, _UNSET)
            if bound is _UNSET:
                subst[p.name] = f
            elif type(bound) is not type(f) or bound != f:
                return None
        elif type(p) is not type(f) or p != f:
            return None
    return subst


_UNSET = object()


class BeliefBase:
    """
    Agent-private store of ground predicates.

    Duplicates are ignored, iteration follows insertion order, and removing
    then re-adding a belief moves it to the end. When ``owner`` is set, every
    access made while another agent's context is active raises
    :class:`OwnershipViolation`.
    """

    def __init__(self, beliefs=(), *, owner: str | None = None) -> None:
        self.owner = owner
        self._seq: dict[Predicate, int] = {}
        self._counter = 0
        self._listeners: list[Callable[[str, Predicate], None]] = []
        for b in beliefs:
            self.add(b)

    def _audit(self) -> None:
        if self.owner is None:
            return
        who = current_agent.get()
        if who is not None and who != self.owner:
            raise OwnershipViolation(f"agent {who!r} accessed beliefs of {self.owner!r}")

    def subscribe(self, listener: Callable[[str, Predicate], None]) -> None:
        """Register ``listener(change, predicate)``; change is "add" or "remove"."""
        self._listeners.append(listener)

    def add(self, p: Predicate) -> bool:
        """Add a ground belief. Returns False when it was already present."""
        self._audit()
        if not p.is_ground:
            raise NonGroundBelief(f"cannot add non-ground belief {p}")
        if p in self._seq:
            return False
        self._counter += 1
        self._seq[p] = self._counter
        for fn in self._listeners:
            fn("add", p)
        return True

    def remove(self, p: Predicate) -> bool:
        """Remove a ground belief. Returns False when it was absent."""
        self._audit()
        if not p.is_ground:
            raise NonGroundBelief(f"cannot remove non-ground belief {p}")
        if self._seq.pop(p, None) is None:
            return False
        for fn in self._listeners:
            fn("remove", p)
        return True

    def query(self, pattern: Predicate) -> list[Substitution]:
        self._audit()
        out = []
        for fact in self._seq:
            s = unify(pattern, fact)
            if s is not None:
                out.append(s)
        return out

    def holds(self, pattern: Predicate) -> bool:
        self._audit()
        return any(unify(pattern, fact) is not None for fact in self._seq)

    def sequence(self, p: Predicate) -> int | None:
        """Insertion sequence number of a belief, or None if absent."""
        return self._seq.get(p)

    def snapshot(self) -> "BeliefBase":
        """Unowned copy preserving order; safe to hand to another context."""
        self._audit()
        copy = BeliefBase()
        copy._seq = dict(self._seq)
        copy._counter = self._counter
        return copy

    def __contains__(self, p: Predicate) -> bool:
        self._audit()
        return p in self._seq

    def __iter__(self) -> Iterator[Predicate]:
        self._audit()
        return iter(list(self._seq))

    def __len__(self) -> int:
        return len(self._seq)

    def dumps(self) -> str:
        """One belief per line, ``functor(arg1,arg2,...)``."""
        return "".join(f"{p}\n" for p in self)

    @classmethod
    def loads(cls, text: str, **kwargs) -> "BeliefBase":
        return cls((parse_predicate(line) for line in text.splitlines() if line.strip()), **kwargs)


# --- predicate text syntax -------------------------------------------------

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<str>"(?:[^"\\]|\\.)*")
      | (?P<int>-?\d+)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<punct>[(),])
    )""",
    re.VERBOSE,
)
_ESCAPES = {"n": "\n", '"': '"', "\\": "\\"}


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", lambda m: _ESCAPES.get(m.group(1), m.group(1)), s[1:-1])


def parse_predicate(text: str) -> Predicate:
    """
    Parse ``functor(arg, ...)`` where each arg is a double-quoted string, an
    integer, or a typed variable such as ``string A`` / ``int row``.
    ``functor`` alone (no parentheses) is a zero-arity predicate.
    """
    tokens: list[tuple[str, str]] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PredicateSyntaxError(f"unexpected input at {pos} in {text!r}")
        tokens.append((m.lastgroup, m.group(m.lastgroup)))
        pos = m.end()
    if not tokens or tokens[0][0] != "ident":
        raise PredicateSyntaxError(f"missing functor in {text!r}")
    functor = tokens[0][1]
    if len(tokens) == 1:
        return Predicate(functor)
    if tokens[1] != ("punct", "(") or tokens[-1] != ("punct", ")"):
        raise PredicateSyntaxError(f"malformed argument list in {text!r}")
    body = tokens[2:-1]
    args: list[Term] = []
    i = 0
    while i < len(body):
        kind, val = body[i]
        if kind == "str":
            args.append(_unquote(val))
            i += 1
        elif kind == "int":
            args.append(int(val))
            i += 1
        elif kind == "ident" and val in _TYPES and i + 1 < len(body) and body[i + 1][0] == "ident":
            args.append(Var(body[i + 1][1], val))
            i += 2
        else:
            raise PredicateSyntaxError(f"bad argument {val!r} in {text!r}")
        if i < len(body):
            if body[i] != ("punct", ","):
                raise PredicateSyntaxError(f"expected ',' in {text!r}")
            i += 1
            if i == len(body):
                raise PredicateSyntaxError(f"trailing ',' in {text!r}")
    return Predicate(functor, tuple(args))
