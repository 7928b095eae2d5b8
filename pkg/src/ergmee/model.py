"""Model term definitions.

A model is an ordered list of statistic terms; parameter vectors, statistic
vectors and change vectors all follow the term order. Only linear models
are supported: one parameter per statistic.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .graph import AttributeTable

EDGE = "edge"
ALT_STAR = "alt_star"
ALT_TRIANGLE = "alt_triangle"
ALT_TWO_PATH = "alt_two_path"
ISOLATES = "isolates"
ACTIVITY = "activity"
INTERACTION = "interaction"
MISMATCH = "mismatch"

ALTERNATING_KINDS = frozenset({ALT_STAR, ALT_TRIANGLE, ALT_TWO_PATH})
BINARY_ATTR_KINDS = frozenset({ACTIVITY, INTERACTION})
CATEGORICAL_ATTR_KINDS = frozenset({MISMATCH})
ALL_KINDS = (
    frozenset({EDGE, ISOLATES}) | ALTERNATING_KINDS | BINARY_ATTR_KINDS | CATEGORICAL_ATTR_KINDS
)

#: Conventional decay for alternating statistics, user-overridable per term.
DEFAULT_DECAY = 2.0


@dataclass(frozen=True)
class Term:
    """One statistic term: a kind plus its hyperparameters.

    ``decay`` applies to the alternating kinds only (must be > 1);
    ``attribute`` names the node attribute for activity/interaction
    (binary) and mismatch (categorical) terms.
    """

    kind: str
    decay: float | None = None
    attribute: str | None = None

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValueError(f"unknown term kind {self.kind!r}")
        if self.kind in ALTERNATING_KINDS:
            if self.decay is None or not math.isfinite(self.decay) or self.decay <= 1.0:
                raise ValueError(f"{self.kind} decay must be > 1, got {self.decay}")
        elif self.decay is not None:
            raise ValueError(f"{self.kind} takes no decay")
        if self.kind in BINARY_ATTR_KINDS or self.kind in CATEGORICAL_ATTR_KINDS:
            if not self.attribute:
                raise ValueError(f"{self.kind} requires an attribute name")
        elif self.attribute is not None:
            raise ValueError(f"{self.kind} takes no attribute")

    @property
    def name(self) -> str:
        if self.kind in ALTERNATING_KINDS:
            return f"{self.kind}({self.decay:g})"
        if self.attribute:
            return f"{self.kind}({self.attribute})"
        return self.kind

    # convenience constructors
    @classmethod
    def edge(cls) -> "Term":
        return cls(EDGE)

    @classmethod
    def alt_star(cls, decay: float = DEFAULT_DECAY) -> "Term":
        return cls(ALT_STAR, decay=decay)

    @classmethod
    def alt_triangle(cls, decay: float = DEFAULT_DECAY) -> "Term":
        return cls(ALT_TRIANGLE, decay=decay)

    @classmethod
    def alt_two_path(cls, decay: float = DEFAULT_DECAY) -> "Term":
        return cls(ALT_TWO_PATH, decay=decay)

    @classmethod
    def isolates(cls) -> "Term":
        return cls(ISOLATES)

    @classmethod
    def activity(cls, attribute: str) -> "Term":
        return cls(ACTIVITY, attribute=attribute)

    @classmethod
    def interaction(cls, attribute: str) -> "Term":
        return cls(INTERACTION, attribute=attribute)

    @classmethod
    def mismatch(cls, attribute: str) -> "Term":
        return cls(MISMATCH, attribute=attribute)


@dataclass(frozen=True)
class ModelSpec:
    """Ordered, duplicate-free list of terms."""

    terms: tuple[Term, ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.terms:
            raise ValueError("model needs at least one term")
        seen = set()
        for t in self.terms:
            key = (t.kind, t.decay, t.attribute)
            if key in seen:
                raise ValueError(f"duplicate term {t.name}")
            seen.add(key)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(t.name for t in self.terms))
        elif len(self.labels) != len(self.terms):
            raise ValueError("one label per term required")

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    def index_of(self, kind: str) -> int | None:
        """Index of the first term of the given kind, or None."""
        for k, t in enumerate(self.terms):
            if t.kind == kind:
                return k
        return None

    def validate_attributes(self, attrs: AttributeTable | None) -> None:
        """Check every attribute reference resolves in the table."""
        for t in self.terms:
            if t.kind in BINARY_ATTR_KINDS:
                if attrs is None or t.attribute not in attrs.binary:
                    raise ValueError(
                        f"term {t.name} needs binary attribute {t.attribute!r}"
                    )
            elif t.kind in CATEGORICAL_ATTR_KINDS:
                if attrs is None or t.attribute not in attrs.categorical:
                    raise ValueError(
                        f"term {t.name} needs categorical attribute {t.attribute!r}"
                    )


_ALIASES = {
    "edge": EDGE,
    "edges": EDGE,
    "altstar": ALT_STAR,
    "alt_star": ALT_STAR,
    "as": ALT_STAR,
    "alttriangle": ALT_TRIANGLE,
    "alt_triangle": ALT_TRIANGLE,
    "at": ALT_TRIANGLE,
    "alttwopath": ALT_TWO_PATH,
    "alt_two_path": ALT_TWO_PATH,
    "a2p": ALT_TWO_PATH,
    "isolates": ISOLATES,
    "activity": ACTIVITY,
    "interaction": INTERACTION,
    "mismatch": MISMATCH,
}

_TERM_RE = re.compile(r"^\s*([a-z_0-9]+)\s*(?:\(\s*([^)]*?)\s*\))?\s*$", re.IGNORECASE)


def parse_term(text: str) -> Term:
    """Parse one term like ``edge``, ``altstar(2)`` or ``activity(plant)``."""
    m = _TERM_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse model term {text!r}")
    head, arg = m.group(1).lower(), m.group(2)
    kind = _ALIASES.get(head)
    if kind is None:
        raise ValueError(f"unknown model term {head!r}")
    if kind in ALTERNATING_KINDS:
        decay = float(arg) if arg else DEFAULT_DECAY
        return Term(kind, decay=decay)
    if kind in BINARY_ATTR_KINDS or kind in CATEGORICAL_ATTR_KINDS:
        if not arg:
            raise ValueError(f"term {head!r} needs an attribute name argument")
        return Term(kind, attribute=arg)
    if arg:
        raise ValueError(f"term {head!r} takes no argument")
    return Term(kind)


def parse_model(text: str) -> ModelSpec:
    """Parse a comma-separated model string, e.g. ``edge,altstar(2),at(2)``."""
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty model string")
    return ModelSpec(tuple(parse_term(p) for p in parts))
