"""Combinatorial gluing algebra of elementary models.

An elementary model is a 2-codimensional piece with exactly two special
complex points; its type is named by the endpoint kinds: (a) two elliptic,
(b) elliptic + down-hyperbolic, (c1)/(c2) elliptic + 1-up/2-up hyperbolic,
(d1)/(d2) two 1-up / two 2-up, (e) two down.  Models glue at special
1-hyperbolic points: one junction consumes one free down endpoint and the
matching 1-up and 2-up endpoints (the two components under the singular
orbit), so a junction contributes exactly one hyperbolic point of the glued
surface and the Euler characteristic is

    chi = (number of elliptic endpoints) - (number of junctions).

Expressions use the arrow/dash notation, e.g. torus ``(b)->(d1)-(d2)->(b)``:
a dash pairs the 1-up and 2-up models, an arrow glues the pair onto the free
down endpoint of the single model on its other side.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

__all__ = [
    "Endpoint",
    "MODEL_ENDPOINTS",
    "MODEL_TAGS",
    "EndpointRef",
    "GlueGraph",
    "GlueParseError",
    "GlueStructureError",
    "GlueValidation",
    "parse_glue_expr",
    "format_glue_expr",
    "validate",
    "euler_characteristic",
    "GLUE_EXPRESSIONS",
]


class Endpoint(str, Enum):
    ELLIPTIC = "E"
    H_DOWN = "Hdown"
    H_UP1 = "Hup1"
    H_UP2 = "Hup2"


MODEL_ENDPOINTS: dict[str, tuple[Endpoint, Endpoint]] = {
    "a": (Endpoint.ELLIPTIC, Endpoint.ELLIPTIC),
    "b": (Endpoint.ELLIPTIC, Endpoint.H_DOWN),
    "c1": (Endpoint.ELLIPTIC, Endpoint.H_UP1),
    "c2": (Endpoint.ELLIPTIC, Endpoint.H_UP2),
    "d1": (Endpoint.H_UP1, Endpoint.H_UP1),
    "d2": (Endpoint.H_UP2, Endpoint.H_UP2),
    "e": (Endpoint.H_DOWN, Endpoint.H_DOWN),
}

MODEL_TAGS = tuple(sorted(MODEL_ENDPOINTS))

_HYPERBOLIC = (Endpoint.H_DOWN, Endpoint.H_UP1, Endpoint.H_UP2)
_JUNCTION_KINDS = frozenset(_HYPERBOLIC)


class GlueParseError(ValueError):
    """Malformed gluing expression; carries the failing position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (position {position})")
        self.position = position


class GlueStructureError(ValueError):
    """Structurally invalid or open gluing."""


@dataclass(frozen=True)
class EndpointRef:
    model: int
    slot: int


@dataclass
class GlueGraph:
    """Elementary models plus junctions between their endpoints."""

    models: list[str]
    junctions: list[tuple[EndpointRef, EndpointRef, EndpointRef]]
    items: list[tuple[int, ...]] | None = None  # parsed chain structure, for printing

    def endpoint_kind(self, ref: EndpointRef) -> Endpoint:
        return MODEL_ENDPOINTS[self.models[ref.model]][ref.slot]

    def all_endpoints(self) -> list[tuple[EndpointRef, Endpoint]]:
        out = []
        for mi, tag in enumerate(self.models):
            for slot, kind in enumerate(MODEL_ENDPOINTS[tag]):
                out.append((EndpointRef(mi, slot), kind))
        return out

    def endpoint_counts(self) -> dict[str, int]:
        counts = {e.value: 0 for e in Endpoint}
        for _, kind in self.all_endpoints():
            counts[kind.value] += 1
        return counts

    def free_endpoints(self) -> list[tuple[EndpointRef, Endpoint]]:
        used = {ref for junction in self.junctions for ref in junction}
        return [(ref, kind) for ref, kind in self.all_endpoints() if ref not in used]


@dataclass(frozen=True)
class GlueValidation:
    ok: bool
    closed: bool
    violations: tuple[str, ...]
    endpoint_counts: dict[str, int]
    free_counts: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "closed": self.closed,
            "violations": list(self.violations),
            "endpoint_counts": self.endpoint_counts,
            "free_counts": self.free_counts,
        }


# ---------------------------------------------------------------------------
# parsing


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "(":
            j = text.find(")", i)
            if j < 0:
                raise GlueParseError("unclosed '('", i)
            tag = text[i + 1 : j].strip().lower().replace("_", "")
            if tag not in MODEL_ENDPOINTS:
                raise GlueParseError(f"unknown model tag {tag!r}", i)
            tokens.append(("group", tag, i))
            i = j + 1
        elif text.startswith("->", i):
            tokens.append(("arrow", "->", i))
            i += 2
        elif ch == "→":  # unicode arrow
            tokens.append(("arrow", "->", i))
            i += 1
        elif ch == "-":
            tokens.append(("dash", "-", i))
            i += 1
        else:
            raise GlueParseError(f"unexpected character {ch!r}", i)
    return tokens


def parse_glue_expr(text: str) -> GlueGraph:
    """Parse an arrow/dash gluing expression into a GlueGraph.

    Every arrow forms one junction: the side holding a dashed pair supplies
    the 1-up and 2-up endpoints (in that order within the pair) and the single
    model on the other side supplies the free down endpoint.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise GlueParseError("empty expression", 0)

    models: list[str] = []
    items: list[tuple[int, ...]] = []  # indices into models
    seps: list[int] = []  # token positions of arrows

    i = 0
    while i < len(tokens):
        kind, value, pos = tokens[i]
        if kind != "group":
            raise GlueParseError("expected '(tag)'", pos)
        first = len(models)
        models.append(value)
        if i + 1 < len(tokens) and tokens[i + 1][0] == "dash":
            if i + 2 >= len(tokens) or tokens[i + 2][0] != "group":
                raise GlueParseError("expected '(tag)' after '-'", tokens[i + 1][2])
            models.append(tokens[i + 2][1])
            items.append((first, first + 1))
            i += 3
        else:
            items.append((first,))
            i += 1
        if i < len(tokens):
            kind, value, pos = tokens[i]
            if kind == "dash":
                raise GlueParseError("chained '-' pairs are not supported", pos)
            if kind != "arrow":
                raise GlueParseError("expected '->' between groups", pos)
            seps.append(pos)
            i += 1
            if i >= len(tokens):
                raise GlueParseError("dangling '->'", pos)

    free_slots: dict[int, list[int]] = {
        mi: list(range(len(MODEL_ENDPOINTS[tag]))) for mi, tag in enumerate(models)
    }

    def take(model_idx: int, kind: Endpoint, pos: int) -> EndpointRef:
        tag = models[model_idx]
        for slot in free_slots[model_idx]:
            if MODEL_ENDPOINTS[tag][slot] is kind:
                free_slots[model_idx].remove(slot)
                return EndpointRef(model_idx, slot)
        raise GlueParseError(f"model ({tag}) has no free {kind.value} endpoint", pos)

    junctions = []
    for k, pos in enumerate(seps):
        left, right = items[k], items[k + 1]
        left_pair, right_pair = len(left) == 2, len(right) == 2
        if left_pair == right_pair:
            raise GlueParseError(
                "a junction needs a dashed pair on exactly one side of '->'", pos
            )
        pair = left if left_pair else right
        single = right if left_pair else left
        up1 = take(pair[0], Endpoint.H_UP1, pos)
        up2 = take(pair[1], Endpoint.H_UP2, pos)
        down = take(single[0], Endpoint.H_DOWN, pos)
        junctions.append((down, up1, up2))

    return GlueGraph(models=models, junctions=junctions, items=items)


def format_glue_expr(graph: GlueGraph) -> str:
    """Canonical text of a parsed chain; inverse of parse on canonical input."""
    if graph.items is None:
        raise GlueStructureError("graph was not built from an expression")
    chunks = []
    for item in graph.items:
        chunks.append("-".join(f"({graph.models[mi]})" for mi in item))
    return "->".join(chunks)


# ---------------------------------------------------------------------------
# validation and invariants


def validate(graph: GlueGraph) -> GlueValidation:
    """Check the gluing invariants; violations are reported as data."""
    violations: list[str] = []
    seen: set[EndpointRef] = set()
    for j, junction in enumerate(graph.junctions):
        kinds = []
        for ref in junction:
            if not 0 <= ref.model < len(graph.models):
                violations.append(f"junction {j}: model index {ref.model} out of range")
                continue
            tag = graph.models[ref.model]
            if not 0 <= ref.slot < len(MODEL_ENDPOINTS[tag]):
                violations.append(f"junction {j}: slot {ref.slot} out of range for ({tag})")
                continue
            if ref in seen:
                violations.append(f"junction {j}: endpoint {ref} used more than once")
            seen.add(ref)
            kinds.append(MODEL_ENDPOINTS[tag][ref.slot])
        if sorted(k.value for k in kinds) != sorted(k.value for k in _HYPERBOLIC):
            violations.append(
                f"junction composition: junction {j} has "
                f"{{{', '.join(k.value for k in kinds)}}}, needs one of each "
                f"{{Hdown, Hup1, Hup2}}"
            )

    free = graph.free_endpoints()
    free_counts = {e.value: 0 for e in Endpoint}
    for _, kind in free:
        free_counts[kind.value] += 1
    closed = not violations and all(free_counts[k.value] == 0 for k in _HYPERBOLIC)
    return GlueValidation(
        ok=not violations,
        closed=closed,
        violations=tuple(violations),
        endpoint_counts=graph.endpoint_counts(),
        free_counts=free_counts,
    )


def euler_characteristic(graph: GlueGraph) -> int:
    """Euler characteristic of a closed glued surface.

    Each junction realizes one special 1-hyperbolic point and each elliptic
    endpoint one special elliptic point, so chi is their difference.
    """
    v = validate(graph)
    if not v.ok:
        raise GlueStructureError("invalid gluing: " + "; ".join(v.violations))
    if not v.closed:
        raise GlueStructureError("chi undefined for open gluing (free hyperbolic endpoints)")
    return v.endpoint_counts[Endpoint.ELLIPTIC.value] - len(graph.junctions)


GLUE_EXPRESSIONS = {
    "sphere": "(a)",
    "horned_sphere": "(b)->(c1)-(c2)",
    "torus": "(b)->(d1)-(d2)->(b)",
    "bitorus": "(b)->(d1)-(d2)->(e)->(d1)-(d2)->(b)",
}
