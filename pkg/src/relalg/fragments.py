"""Signature fragments: which operation symbols an algebra carries.

pqf = substitutions and lattice operations only; qf adds negation; pe adds
projection; fo has both.  Equality constants are an independent flag.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import FormatError


@dataclass(frozen=True)
class Fragment:
    name: str
    negation: bool
    exists: bool
    equality: bool

    def __str__(self) -> str:
        return self.name + ("+eq" if self.equality else "")

    def with_equality(self) -> "Fragment":
        return Fragment(self.name, self.negation, self.exists, True)


PQF = Fragment("pqf", negation=False, exists=False, equality=False)
QF = Fragment("qf", negation=True, exists=False, equality=False)
PE = Fragment("pe", negation=False, exists=True, equality=False)
FO = Fragment("fo", negation=True, exists=True, equality=False)

_BASE = {f.name: f for f in (PQF, QF, PE, FO)}


def parse_fragment(text: str) -> Fragment:
    """Parse names like ``pqf``, ``fo+eq``."""
    text = text.strip().lower()
    eq = False
    if text.endswith("+eq"):
        eq = True
        text = text[:-3]
    base = _BASE.get(text)
    if base is None:
        raise FormatError(f"unknown fragment {text!r} (expected pqf, qf, pe or fo, optionally +eq)")
    return base.with_equality() if eq else base
