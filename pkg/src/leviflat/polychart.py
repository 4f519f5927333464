"""Exact multivariate polynomials and graph charts for 2-codimensional submanifolds.

A submanifold S of C^n (n >= 3) is described in real coordinates
``x1, y1, ..., x_{n-1}, y_{n-1}`` by one or more graph charts: each chart is a
polynomial ``phi`` giving the graph value (the ``x_n`` coordinate for the
real-graph model) over an axis-aligned box, together with a validity interval
that selects which band of graph values belongs to the chart.  Coefficients
are 64-bit floats; the shipped fixtures use integer coefficients so that
evaluation at grid-friendly points is exact up to round-off of the final sum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "SpecError",
    "PolyExpr",
    "Chart",
    "GraphModel",
    "ManifoldSpec",
    "load_manifold_spec",
    "manifold_spec_from_dict",
    "manifold_spec_to_dict",
    "save_manifold_spec",
    "quintic_smoothstep",
    "blended_graph_value",
]


class DomainError(ValueError):
    """A point lies outside a chart's domain box."""


class SpecError(ValueError):
    """Malformed or unsupported manifold specification."""


Term = tuple[float, tuple[int, ...]]


@dataclass(frozen=True)
class PolyExpr:
    """Polynomial in canonical merged form.

    Terms are ``(coefficient, multi-index)`` pairs over ``nvars`` real
    variables, stored in graded lexicographic order.  No two terms share a
    multi-index; the fixed term order also fixes the summation order, so
    identical inputs evaluate to bit-identical outputs.
    """

    nvars: int
    terms: tuple[Term, ...]

    @classmethod
    def from_terms(cls, nvars: int, terms: Iterable[Sequence]) -> "PolyExpr":
        """Build a canonical polynomial, merging duplicate multi-indices."""
        merged: dict[tuple[int, ...], float] = {}
        for coeff, exps in terms:
            e = tuple(int(k) for k in exps)
            if len(e) != nvars:
                raise SpecError(f"multi-index {e} does not have {nvars} entries")
            if any(k < 0 for k in e):
                raise SpecError(f"negative exponent in multi-index {e}")
            merged[e] = merged.get(e, 0.0) + float(coeff)
        ordered = sorted(e for e, c in merged.items() if c != 0.0)
        ordered.sort(key=lambda e: (sum(e), e))
        return cls(nvars, tuple((merged[e], e) for e in ordered))

    @classmethod
    def zero(cls, nvars: int) -> "PolyExpr":
        return cls(nvars, ())

    @property
    def degree(self) -> int:
        return max((sum(e) for _, e in self.terms), default=0)

    @cached_property
    def _coeffs(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms], dtype=float)

    @cached_property
    def _exps(self) -> np.ndarray:
        if not self.terms:
            return np.zeros((0, self.nvars), dtype=np.int64)
        return np.array([e for _, e in self.terms], dtype=np.int64)

    def evaluate(self, point: Sequence[float]) -> float:
        p = np.asarray(point, dtype=float)
        if p.shape != (self.nvars,):
            raise SpecError(f"point has shape {p.shape}, expected ({self.nvars},)")
        if not self.terms:
            return 0.0
        prods = np.prod(p[None, :] ** self._exps, axis=1)
        return float(self._coeffs @ prods)

    __call__ = evaluate

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at an ``(N, nvars)`` array of points."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.nvars:
            raise SpecError(f"points have shape {pts.shape}, expected (N, {self.nvars})")
        if not self.terms:
            return np.zeros(len(pts))
        prods = np.prod(pts[:, None, :] ** self._exps[None, :, :], axis=2)
        return prods @ self._coeffs

    def evaluate_grid(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        """Evaluate on the tensor grid spanned by per-axis coordinate arrays.

        Uses per-axis power tables, so the cost is one broadcast multiply per
        variable per term instead of a full ``pow`` at every grid node.
        """
        if len(axes) != self.nvars:
            raise SpecError(f"{len(axes)} axes given, expected {self.nvars}")
        axes = [np.asarray(a, dtype=float) for a in axes]
        shape = tuple(len(a) for a in axes)
        out = np.zeros(shape)
        if not self.terms:
            return out
        max_exp = self._exps.max(axis=0)
        tables = [
            np.power.outer(axes[i], np.arange(max_exp[i] + 1)) for i in range(self.nvars)
        ]
        for coeff, exps in self.terms:
            term = None
            for i, e in enumerate(exps):
                col = tables[i][:, e]
                bshape = [1] * self.nvars
                bshape[i] = -1
                col = col.reshape(bshape)
                term = col if term is None else term * col
            out += coeff * term
        return out

    def diff(self, var: int) -> "PolyExpr":
        """Exact partial derivative with respect to variable ``var``."""
        if not 0 <= var < self.nvars:
            raise SpecError(f"variable index {var} out of range")
        new_terms = []
        for coeff, exps in self.terms:
            if exps[var] == 0:
                continue
            e = list(exps)
            e[var] -= 1
            new_terms.append((coeff * exps[var], tuple(e)))
        return PolyExpr.from_terms(self.nvars, new_terms)

    @cached_property
    def partials(self) -> tuple["PolyExpr", ...]:
        return tuple(self.diff(i) for i in range(self.nvars))

    @cached_property
    def second_partials(self) -> tuple[tuple["PolyExpr", ...], ...]:
        rows = []
        for i in range(self.nvars):
            rows.append(tuple(self.partials[i].diff(j) for j in range(self.nvars)))
        return tuple(rows)

    def to_jsonable(self) -> list:
        return [[c, list(e)] for c, e in self.terms]

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for c, e in self.terms:
            mono = "*".join(f"v{i}^{k}" if k > 1 else f"v{i}" for i, k in enumerate(e) if k)
            pieces.append(f"{c:g}" + (f"*{mono}" if mono else ""))
        return " + ".join(pieces)


@dataclass(frozen=True)
class Chart:
    """Graph chart: ``graph value = phi(base point)`` over a domain box.

    ``validity`` is the closed band of graph values that belongs to this chart
    (either end may be infinite for half-line conditions).  Sibling charts of
    a piecewise spec overlap only at a shared interface value.
    """

    phi: PolyExpr
    domain: tuple[tuple[float, float], ...]
    validity: tuple[float, float] = (-math.inf, math.inf)
    name: str = ""

    def __post_init__(self):
        if len(self.domain) != self.phi.nvars:
            raise SpecError(
                f"domain has {len(self.domain)} axes, polynomial has {self.phi.nvars} variables"
            )
        for lo, hi in self.domain:
            if not lo < hi:
                raise SpecError(f"degenerate domain axis ({lo}, {hi})")
        lo, hi = self.validity
        if not lo < hi:
            raise SpecError(f"degenerate validity interval ({lo}, {hi})")

    @property
    def nvars(self) -> int:
        return self.phi.nvars

    def contains(self, point: Sequence[float], tol: float = 1e-12) -> bool:
        p = np.asarray(point, dtype=float)
        return all(lo - tol <= v <= hi + tol for v, (lo, hi) in zip(p, self.domain))

    def _require_inside(self, point: Sequence[float]) -> None:
        if not self.contains(point):
            raise DomainError(f"point {list(point)} outside chart domain {self.domain}")

    def value_valid(self, value: float, tol: float = 1e-9) -> bool:
        lo, hi = self.validity
        return lo - tol <= value <= hi + tol

    def eval(self, point: Sequence[float]) -> float:
        self._require_inside(point)
        return self.phi.evaluate(point)

    def grad(self, point: Sequence[float]) -> np.ndarray:
        self._require_inside(point)
        return np.array([p.evaluate(point) for p in self.phi.partials])

    def hessian(self, point: Sequence[float]) -> np.ndarray:
        self._require_inside(point)
        d = self.nvars
        H = np.zeros((d, d))
        for i in range(d):
            for j in range(i, d):
                H[i, j] = self.phi.second_partials[i][j].evaluate(point)
                H[j, i] = H[i, j]
        return H

    def grad_many(self, points: np.ndarray) -> np.ndarray:
        return np.stack([p.evaluate_many(points) for p in self.phi.partials], axis=1)

    def hessian_many(self, points: np.ndarray) -> np.ndarray:
        d = self.nvars
        H = np.zeros((len(points), d, d))
        for i in range(d):
            for j in range(i, d):
                H[:, i, j] = self.phi.second_partials[i][j].evaluate_many(points)
                H[:, j, i] = H[:, i, j]
        return H

    def tangent_frame(self, point: Sequence[float]) -> np.ndarray:
        """Frame of ``nvars`` tangent vectors in the ambient R^{2n}.

        The i-th vector is ``e_i + (d phi / d v_i) e_graph`` where ``e_graph``
        is the unit vector of the graph axis (``x_n``); the last ambient
        coordinate (``y_n``) has no component for a real graph.
        """
        g = self.grad(point)
        d = self.nvars
        frame = np.zeros((d, d + 2))
        frame[:, :d] = np.eye(d)
        frame[:, d] = g
        return frame


class GraphModel(str, Enum):
    REAL_GRAPH = "real_graph"
    V_GRAPH = "v_graph"


@dataclass(frozen=True)
class ManifoldSpec:
    """Piecewise polynomial graph description of S in C^n."""

    n: int
    charts: tuple[Chart, ...]
    graph_model: GraphModel = GraphModel.REAL_GRAPH
    expected_chi: int | None = None
    name: str = ""

    def __post_init__(self):
        if self.n < 3:
            raise SpecError(f"ambient complex dimension must be >= 3, got {self.n}")
        if not self.charts:
            raise SpecError("at least one chart is required")
        if self.graph_model is GraphModel.REAL_GRAPH:
            want = 2 * self.n - 2
            for ch in self.charts:
                if ch.nvars != want:
                    raise SpecError(
                        f"real-graph charts must use {want} variables, chart has {ch.nvars}"
                    )

    @property
    def nvars(self) -> int:
        return self.charts[0].nvars

    def charts_valid_at(self, value: float, tol: float = 1e-9) -> list[int]:
        return [i for i, ch in enumerate(self.charts) if ch.value_valid(value, tol)]

    def value_range(self) -> tuple[float, float]:
        """Union of the chart validity bands (may have infinite ends)."""
        lo = min(ch.validity[0] for ch in self.charts)
        hi = max(ch.validity[1] for ch in self.charts)
        return lo, hi

    def require_real_graph(self, op: str) -> None:
        if self.graph_model is not GraphModel.REAL_GRAPH:
            raise SpecError(f"{op} requires a real-graph spec, got {self.graph_model.value}")


# ---------------------------------------------------------------------------
# spec file format


def manifold_spec_from_dict(data: dict, name: str = "") -> ManifoldSpec:
    try:
        n = int(data["n"])
        model = GraphModel(data.get("graph_model", "real_graph"))
        charts = []
        for k, cdata in enumerate(data["charts"]):
            nvars = 2 * n - 2
            phi = PolyExpr.from_terms(nvars, cdata["terms"])
            domain = tuple((float(lo), float(hi)) for lo, hi in cdata["domain"])
            v = cdata.get("validity", [None, None])
            lo = -math.inf if v[0] is None else float(v[0])
            hi = math.inf if len(v) < 2 or v[1] is None else float(v[1])
            charts.append(Chart(phi, domain, (lo, hi), name=cdata.get("name", f"chart{k}")))
        chi = data.get("expected_chi")
        return ManifoldSpec(
            n=n,
            charts=tuple(charts),
            graph_model=model,
            expected_chi=None if chi is None else int(chi),
            name=data.get("name", name),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"invalid manifold spec: {exc}") from exc


def manifold_spec_to_dict(spec: ManifoldSpec) -> dict:
    def _end(v: float) -> float | None:
        return None if math.isinf(v) else v

    return {
        "n": spec.n,
        "graph_model": spec.graph_model.value,
        "name": spec.name,
        "expected_chi": spec.expected_chi,
        "charts": [
            {
                "name": ch.name,
                "terms": ch.phi.to_jsonable(),
                "domain": [list(ax) for ax in ch.domain],
                "validity": [_end(ch.validity[0]), _end(ch.validity[1])],
            }
            for ch in spec.charts
        ],
    }


def load_manifold_spec(path: str | Path) -> ManifoldSpec:
    """Read a spec from a ``.json`` or ``.toml`` file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise SpecError(f"cannot read spec file {path}: {exc}") from exc
    if path.suffix.lower() == ".toml":
        try:
            import tomllib as toml_reader  # type: ignore[import-not-found]
        except ModuleNotFoundError:
            import tomli as toml_reader  # type: ignore[import-not-found]
        try:
            data = toml_reader.loads(raw.decode("utf-8"))
        except Exception as exc:
            raise SpecError(f"invalid TOML in {path}: {exc}") from exc
    else:
        try:
            data = json.loads(raw.decode("utf-8"))
        except Exception as exc:
            raise SpecError(f"invalid JSON in {path}: {exc}") from exc
    return manifold_spec_from_dict(data, name=path.stem)


def save_manifold_spec(spec: ManifoldSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(manifold_spec_to_dict(spec), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# optional C^1 interface regularization


def quintic_smoothstep(t: np.ndarray | float) -> np.ndarray | float:
    """Monotone quintic with vanishing first and second derivatives at 0 and 1."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def blended_graph_value(
    lower: Chart, upper: Chart, point: Sequence[float], eps_blend: float = 0.05
) -> float:
    """Blend two sibling charts across the band ``|phi_lower| <= eps_blend``.

    This is a numerical regularization of the piecewise model near the shared
    interface value 0, not part of the geometric definition of S; analyses
    operate on the raw charts and only the explicitly handled interface points.
    """
    lo_val = lower.eval(point)
    if lo_val <= -eps_blend:
        return lo_val
    up_val = upper.eval(point)
    if lo_val >= eps_blend:
        return up_val
    w = quintic_smoothstep((lo_val + eps_blend) / (2.0 * eps_blend))
    return (1.0 - w) * lo_val + w * up_val
