"""Propositional sentences, truth assignments, and possible-world spaces.

Sentence syntax (EBNF):

    sentence := iff
    iff      := impl ("<->" impl)*
    impl     := or ("->" impl)?
    or       := and ("|" and)*
    and      := unary ("&" unary)*
    unary    := "!" unary | "(" sentence ")" | "true" | "false" | IDENT

Operator precedence is ``<->`` < ``->`` < ``|`` < ``&`` < ``!``;
``->`` is right-associative, ``<->`` folds left, and ``&``/``|`` parse
to flat variadic nodes.  Identifiers start with a letter and may contain
letters, digits, and underscores; ``true`` and ``false`` are reserved.

A world space is the full enumeration of truth assignments over a fixed
atom list, filtered by a hard background theory.  Worlds are kept in
lexicographic order on the atom-ordered boolean vector (false < true),
so variable indices in downstream linear programs are deterministic.
All types here are immutable after construction and every operation is
pure, so they are safe to share across threads.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from .errors import (
    AtomCapError,
    EmptyWorldSpaceError,
    SentenceParseError,
    UnknownAtomError,
)

DEFAULT_ATOM_CAP = 20

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
_RESERVED = frozenset({"true", "false"})


class Sentence:
    """Base class for propositional formula nodes."""

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class TrueConst(Sentence):
    pass


@dataclass(frozen=True)
class FalseConst(Sentence):
    pass


TRUE = TrueConst()
FALSE = FalseConst()


@dataclass(frozen=True)
class Atom(Sentence):
    """A named primitive proposition; doubles as the leaf AST node."""

    name: str

    def __post_init__(self):
        if not _IDENT_RE.match(self.name) or self.name in _RESERVED:
            raise ValueError(f"invalid atom name: {self.name!r}")


@dataclass(frozen=True)
class Not(Sentence):
    child: Sentence


@dataclass(frozen=True)
class And(Sentence):
    children: tuple[Sentence, ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ValueError("And requires at least two children")


@dataclass(frozen=True)
class Or(Sentence):
    children: tuple[Sentence, ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ValueError("Or requires at least two children")


@dataclass(frozen=True)
class Implies(Sentence):
    left: Sentence
    right: Sentence


@dataclass(frozen=True)
class Iff(Sentence):
    left: Sentence
    right: Sentence


def conjunction(*parts: Sentence) -> Sentence:
    """Conjunction of the given parts, dropping redundant ``true`` terms."""
    real = [p for p in parts if p != TRUE]
    if not real:
        return TRUE
    if len(real) == 1:
        return real[0]
    return And(tuple(real))


def disjunction(*parts: Sentence) -> Sentence:
    real = [p for p in parts if p != FALSE]
    if not real:
        return FALSE
    if len(real) == 1:
        return real[0]
    return Or(tuple(real))


def atom_names(s: Sentence) -> frozenset[str]:
    """All atom names occurring in the sentence."""
    out: set[str] = set()
    stack = [s]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            out.add(node.name)
        elif isinstance(node, Not):
            stack.append(node.child)
        elif isinstance(node, (And, Or)):
            stack.extend(node.children)
        elif isinstance(node, (Implies, Iff)):
            stack.append(node.left)
            stack.append(node.right)
    return frozenset(out)


# --- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(<->|->|[()!&|]|[A-Za-z][A-Za-z0-9_]*)")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or not m.group(1):
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise SentenceParseError(
                f"unexpected character {stripped[0]!r}", at,
                "identifier, constant, operator, or parenthesis",
            )
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def pos(self) -> int:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def take(self) -> str:
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def fail(self, expected: str):
        got = self.peek()
        msg = "unexpected end of input" if got is None else f"unexpected token {got!r}"
        raise SentenceParseError(msg, self.pos(), expected)

    def sentence(self) -> Sentence:
        node = self.impl()
        while self.peek() == "<->":
            self.take()
            node = Iff(node, self.impl())
        return node

    def impl(self) -> Sentence:
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.impl())
        return left

    def disj(self) -> Sentence:
        parts = [self.conj()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self) -> Sentence:
        parts = [self.unary()]
        while self.peek() == "&":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Sentence:
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok == "(":
            self.take()
            inner = self.sentence()
            if self.peek() != ")":
                self.fail("')'")
            self.take()
            return inner
        if tok == "true":
            self.take()
            return TRUE
        if tok == "false":
            self.take()
            return FALSE
        if tok is not None and _IDENT_RE.match(tok):
            self.take()
            return Atom(tok)
        self.fail("'!', '(', 'true', 'false', or identifier")
        raise AssertionError("unreachable")


def parse_sentence(text: str) -> Sentence:
    """Parse sentence text into an AST; raises SentenceParseError on bad input."""
    parser = _Parser(text)
    node = parser.sentence()
    if parser.peek() is not None:
        parser.fail("end of input")
    return node


# --- printing --------------------------------------------------------------

def _needs_parens(child: Sentence, tighter_than: tuple[type, ...]) -> bool:
    return isinstance(child, tighter_than)


def to_text(s: Sentence) -> str:
    """Render a sentence so that re-parsing yields the identical AST."""
    if isinstance(s, TrueConst):
        return "true"
    if isinstance(s, FalseConst):
        return "false"
    if isinstance(s, Atom):
        return s.name
    if isinstance(s, Not):
        inner = to_text(s.child)
        if _needs_parens(s.child, (And, Or, Implies, Iff)):
            inner = f"({inner})"
        return f"!{inner}"
    if isinstance(s, And):
        parts = []
        for c in s.children:
            text = to_text(c)
            if _needs_parens(c, (And, Or, Implies, Iff)):
                text = f"({text})"
            parts.append(text)
        return " & ".join(parts)
    if isinstance(s, Or):
        parts = []
        for c in s.children:
            text = to_text(c)
            if _needs_parens(c, (Or, Implies, Iff)):
                text = f"({text})"
            parts.append(text)
        return " | ".join(parts)
    if isinstance(s, Implies):
        left = to_text(s.left)
        if _needs_parens(s.left, (Implies, Iff)):
            left = f"({left})"
        right = to_text(s.right)
        if _needs_parens(s.right, (Iff,)):
            right = f"({right})"
        return f"{left} -> {right}"
    if isinstance(s, Iff):
        # <-> folds left, so only a nested Iff on the right needs parens
        left = to_text(s.left)
        right = to_text(s.right)
        if isinstance(s.right, Iff):
            right = f"({right})"
        return f"{left} <-> {right}"
    raise TypeError(f"not a sentence node: {s!r}")


# --- worlds ----------------------------------------------------------------

@dataclass(frozen=True)
class World:
    """One total truth assignment over a fixed atom order."""

    atoms: tuple[str, ...]
    values: tuple[bool, ...]

    def value(self, name: str) -> bool:
        try:
            return self.values[self.atoms.index(name)]
        except ValueError:
            raise UnknownAtomError(f"atom {name!r} not in world") from None

    def as_dict(self) -> dict[str, bool]:
        return dict(zip(self.atoms, self.values))


def evaluate(s: Sentence, w: World) -> bool:
    """Classical truth-functional evaluation of ``s`` in world ``w``."""
    if isinstance(s, TrueConst):
        return True
    if isinstance(s, FalseConst):
        return False
    if isinstance(s, Atom):
        return w.value(s.name)
    if isinstance(s, Not):
        return not evaluate(s.child, w)
    if isinstance(s, And):
        return all(evaluate(c, w) for c in s.children)
    if isinstance(s, Or):
        return any(evaluate(c, w) for c in s.children)
    if isinstance(s, Implies):
        return (not evaluate(s.left, w)) or evaluate(s.right, w)
    if isinstance(s, Iff):
        return evaluate(s.left, w) == evaluate(s.right, w)
    raise TypeError(f"not a sentence node: {s!r}")


@dataclass(frozen=True)
class WorldSpace:
    """All truth assignments consistent with the background theory.

    Worlds are in lexicographic order of their boolean vectors, so index
    ``i`` is stable across runs and usable as an LP variable index.
    """

    atoms: tuple[str, ...]
    worlds: tuple[World, ...]
    background: tuple[Sentence, ...]
    _ext_cache: dict = field(
        default_factory=dict, repr=False, compare=False, hash=False
    )

    def __len__(self) -> int:
        return len(self.worlds)


def _atom_name(a) -> str:
    return a.name if isinstance(a, Atom) else str(a)


def build_world_space(
    atoms,
    background=(),
    atom_cap: int = DEFAULT_ATOM_CAP,
) -> WorldSpace:
    """Enumerate all assignments over ``atoms`` and keep those satisfying
    every background sentence.

    Raises AtomCapError beyond ``atom_cap`` atoms (enumeration is 2^n),
    EmptyWorldSpaceError when the background is unsatisfiable, and
    UnknownAtomError when a background sentence mentions an undeclared atom.
    """
    names = tuple(_atom_name(a) for a in atoms)
    if not names:
        raise ValueError("atom list must be non-empty")
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate atom names in {names}")
    if len(names) > atom_cap:
        raise AtomCapError(
            f"{len(names)} atoms exceeds cap {atom_cap}; pass a larger atom_cap"
        )
    background = tuple(background)
    declared = set(names)
    for s in background:
        extra = atom_names(s) - declared
        if extra:
            raise UnknownAtomError(
                f"background sentence uses undeclared atoms {sorted(extra)}"
            )
    worlds = []
    for bits in itertools.product((False, True), repeat=len(names)):
        w = World(names, bits)
        if all(evaluate(s, w) for s in background):
            worlds.append(w)
    if not worlds:
        raise EmptyWorldSpaceError("background theory is unsatisfiable")
    return WorldSpace(names, tuple(worlds), background)


def extension(s: Sentence, ws: WorldSpace) -> frozenset[int]:
    """Indices of the worlds where ``s`` holds (cached per world space)."""
    cached = ws._ext_cache.get(s)
    if cached is not None:
        return cached
    extra = atom_names(s) - set(ws.atoms)
    if extra:
        raise UnknownAtomError(f"sentence uses undeclared atoms {sorted(extra)}")
    ext = frozenset(i for i, w in enumerate(ws.worlds) if evaluate(s, w))
    ws._ext_cache[s] = ext
    return ext
