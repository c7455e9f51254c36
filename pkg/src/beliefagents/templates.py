"""
Prompt, response, RAG and composite templates.

Template source text marks parameters with ``${name}``. Prompt templates are
rendered by substituting bindings; response templates run the other way and
infer bindings from an LLM reply; RAG templates mine a belief base for lines
of text; composite templates concatenate any of these into one prompt.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from .beliefs import BeliefBase, Predicate

__all__ = [
    "TemplateError",
    "MalformedTemplate",
    "UnknownParameter",
    "UnboundParameter",
    "NoMatch",
    "AmbiguousPattern",
    "InconsistentCapture",
    "EmptyComposite",
    "Param",
    "TemplateBody",
    "PromptTemplate",
    "ResponseTemplate",
    "RAGTemplate",
    "CompositeTemplate",
    "create_prompt_template",
    "create_response_template",
    "create_rag_template",
    "create_composite",
    "render",
]


class TemplateError(Exception):
    """Base class for template errors."""


class MalformedTemplate(TemplateError):
    pass


class UnknownParameter(TemplateError):
    pass


class UnboundParameter(TemplateError):
    def __init__(self, names):
        self.names = list(names)
        super().__init__("unbound parameter(s): " + ", ".join(self.names))


class NoMatch(TemplateError):
    """The response pattern does not occur in the reply."""


class AmbiguousPattern(TemplateError):
    """Two unbound parameters sit next to each other with no literal between."""


class InconsistentCapture(TemplateError):
    """A repeated parameter captured different text at different positions."""


class EmptyComposite(TemplateError):
    pass


@dataclass(frozen=True)
class Param:
    name: str


Segment = Union[str, Param]


@dataclass(frozen=True)
class TemplateBody:
    source: str
    segments: tuple[Segment, ...]

    @classmethod
    def parse(cls, source: str) -> "TemplateBody":
        segments: list[Segment] = []
        pos = 0
        while True:
            start = source.find("${", pos)
            if start < 0:
                break
            end = source.find("}", start + 2)
            if end < 0:
                raise MalformedTemplate(f"unclosed '${{' at offset {start}")
            name = source[start + 2 : end]
            if not name:
                raise MalformedTemplate(f"empty parameter name at offset {start}")
            if start > pos:
                segments.append(source[pos:start])
            segments.append(Param(name))
            pos = end + 1
        if pos < len(source):
            segments.append(source[pos:])
        return cls(source, tuple(segments))

    @property
    def params(self) -> list[str]:
        """Distinct parameter names in first-occurrence order."""
        out: list[str] = []
        for s in self.segments:
            if isinstance(s, Param) and s.name not in out:
                out.append(s.name)
        return out

    def reconstruct(self) -> str:
        return "".join(s if isinstance(s, str) else "${" + s.name + "}" for s in self.segments)

    def substitute(self, bindings: dict[str, str]) -> str:
        missing = [p for p in self.params if p not in bindings]
        if missing:
            raise UnboundParameter(missing)
        return "".join(s if isinstance(s, str) else bindings[s.name] for s in self.segments)


class _Bindable:
    """Shared binding bookkeeping for prompt and response templates."""

    def __init__(self, source: str) -> None:
        self.body = TemplateBody.parse(source)
        self.bindings: dict[str, str] = {}

    @property
    def params(self) -> list[str]:
        return self.body.params

    def add_binding(self, name: str, value: str):
        if name not in self.body.params:
            raise UnknownParameter(f"{name!r} is not a parameter of this template")
        self.bindings[name] = str(value)
        return self

    def get_binding(self, name: str) -> str:
        try:
            return self.bindings[name]
        except KeyError:
            raise UnboundParameter([name]) from None

    def reset(self):
        self.bindings.clear()
        return self

    def render(self, beliefs: BeliefBase | None = None) -> str:
        return self.body.substitute(self.bindings)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.body.source!r}, bindings={self.bindings!r})"


class PromptTemplate(_Bindable):
    pass


_WS = re.compile(r"\s+")


def _literal_regex(text: str, at_start: bool, at_end: bool) -> str:
    # Whitespace runs in anchors match any whitespace run in the reply.
    # Leading/trailing runs of the whole template are optional.
    parts = _WS.split(text)
    seps = _WS.findall(text)
    out = re.escape(parts[0])
    for i, sep in enumerate(seps):
        edge = (i == 0 and at_start and parts[0] == "") or (
            i == len(seps) - 1 and at_end and parts[-1] == ""
        )
        out += (r"\s*" if edge else r"\s+") + re.escape(parts[i + 1])
    return out


class ResponseTemplate(_Bindable):
    """
    A template whose unbound parameters are inferred from a reply.

    Parameters already bound are matched as literal text. Each unbound
    parameter captures the shortest text between its neighbouring anchors;
    a parameter with nothing after it runs to the end of the reply.
    """

    def _pattern(self) -> tuple[re.Pattern, list[str]]:
        segs = self.body.segments
        groups: list[str] = []
        regex = ""
        prev_unbound = False
        for i, seg in enumerate(segs):
            last = i == len(segs) - 1
            if isinstance(seg, Param) and seg.name not in self.bindings:
                if prev_unbound:
                    raise AmbiguousPattern(
                        f"parameter {seg.name!r} directly follows another unbound parameter"
                    )
                groups.append(seg.name)
                regex += "(.*)" if last else "(.*?)"
                prev_unbound = True
                continue
            text = seg if isinstance(seg, str) else self.bindings[seg.name]
            if text:
                regex += _literal_regex(text, at_start=(i == 0), at_end=last)
                prev_unbound = False
        return re.compile(regex, re.DOTALL), groups

    def infer_bindings(self, reply: str):
        pattern, groups = self._pattern()
        m = pattern.search(reply)
        if m is None:
            raise NoMatch(f"reply does not match template {self.body.source!r}")
        captured: dict[str, str] = {}
        for name, value in zip(groups, m.groups()):
            if name in captured and captured[name] != value:
                raise InconsistentCapture(
                    f"{name!r} captured {captured[name]!r} and {value!r}"
                )
            captured[name] = value
        self.bindings.update(captured)
        return self


@dataclass
class RAGInput:
    pattern: Predicate
    line: TemplateBody


class RAGTemplate:
    """Introductory text followed by one line per belief matching each input."""

    def __init__(self, intro: str = "") -> None:
        self.intro = intro
        self.inputs: list[RAGInput] = []

    @property
    def params(self) -> list[str]:
        return []

    def add_input(self, pattern: Predicate, line: str):
        body = TemplateBody.parse(line)
        variables = pattern.variables()
        for p in body.params:
            if p not in variables:
                raise UnknownParameter(f"{p!r} is not a variable of {pattern}")
        self.inputs.append(RAGInput(pattern, body))
        return self

    def lines(self, beliefs: BeliefBase | None) -> list[str]:
        if beliefs is None:
            return []
        out = []
        for inp in self.inputs:
            for subst in beliefs.query(inp.pattern):
                out.append(inp.line.substitute({k: str(v) for k, v in subst.items()}))
        return out

    def render(self, beliefs: BeliefBase | None = None) -> str:
        lines = self.lines(beliefs)
        if self.intro:
            lines.insert(0, self.intro)
        return "\n".join(lines)

    def reset(self):
        return self

    def __repr__(self) -> str:
        return f"RAGTemplate({self.intro!r}, inputs={len(self.inputs)})"


Part = Union[PromptTemplate, RAGTemplate]


@dataclass
class CompositeTemplate:
    parts: list = field(default_factory=list)

    def add_template(self, part: Part):
        self.parts.append(part)
        return self

    @property
    def params(self) -> list[str]:
        out: list[str] = []
        for part in self.parts:
            out.extend(p for p in part.params if p not in out)
        return out

    def add_binding(self, name: str, value: str):
        targets = [p for p in self.parts if name in p.params]
        if not targets:
            raise UnknownParameter(f"{name!r} is not a parameter of any part")
        for part in targets:
            part.add_binding(name, value)
        return self

    def get_binding(self, name: str) -> str:
        for part in self.parts:
            if name in part.params and name in part.bindings:
                return part.bindings[name]
        raise UnboundParameter([name])

    def reset(self):
        for part in self.parts:
            part.reset()
        return self

    def render(self, beliefs: BeliefBase | None = None) -> str:
        if not self.parts:
            raise EmptyComposite("composite template has no parts")
        missing: list[str] = []
        for part in self.parts:
            if isinstance(part, _Bindable):
                missing.extend(p for p in part.params if p not in part.bindings and p not in missing)
        if missing:
            raise UnboundParameter(missing)
        return "\n".join(part.render(beliefs) for part in self.parts)


def create_prompt_template(source: str) -> PromptTemplate:
    return PromptTemplate(source)


def create_response_template(source: str) -> ResponseTemplate:
    return ResponseTemplate(source)


def create_rag_template(intro: str = "") -> RAGTemplate:
    return RAGTemplate(intro)


def create_composite(*parts: Part) -> CompositeTemplate:
    return CompositeTemplate(list(parts))


def render(template, beliefs: BeliefBase | None = None) -> str:
    """Render any template kind (or pass a plain string through)."""
    if isinstance(template, str):
        return template
    return template.render(beliefs)
