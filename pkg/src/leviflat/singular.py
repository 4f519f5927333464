"""Complex (CR-singular) points: location, 2-jets, normal forms, classification.

At a complex point the graph has a critical base point; the second-order jet
of the local graph ``w = phi(p + xi) - phi(p)`` determines a quadratic

    Q(z) = z^T A z + z^T B conj(z) + conj(z)^T C conj(z),   z_j = x_j + i y_j.

For a real-valued graph ``C = conj(A)`` and ``B`` is Hermitian.  When the
Hermitian part can be made positive definite by a unit rescaling of ``w``,
coordinates can be chosen so that

    Q(z) = sum_j mu_j (z_j conj(z_j) + lambda_j Re z_j^2),  mu_j > 0,

and after absorbing the weights ``mu_j`` the sorted vector ``lambda`` is a
complete invariant.  All ``lambda_j < 1`` gives a special elliptic point;
exactly ``k`` of them ``> 1`` a special k-hyperbolic point; a value at 1 is
the non-generic parabolic case and is reported as degenerate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .polychart import Chart, ManifoldSpec, SpecError
from .takagi import takagi

__all__ = [
    "TOL_FLAT",
    "TOL_PARAB",
    "NotFlatError",
    "Jet2",
    "RealQuadratic",
    "FlatnessResult",
    "NormalForm",
    "NonSpecial",
    "PointClass",
    "Classification",
    "ComplexPoint",
    "EulerReport",
    "second_jet",
    "jet_from_hessian",
    "flatness_test",
    "flat_normal_form",
    "special_reduction",
    "classify",
    "point_index",
    "euler_check",
    "find_complex_points",
    "attach_classification",
    "analyze_complex_points",
]

TOL_FLAT = 1e-8
TOL_PARAB = 1e-6
_NEWTON_MAX_ITER = 50
_NEWTON_TOL = 1e-10
_DEDUP_RADIUS = 1e-6
_COND_LIMIT = 1e12


class NotFlatError(ValueError):
    """Operation requires a flat jet."""


# ---------------------------------------------------------------------------
# jets


def _real_to_complex_basis(m: int) -> np.ndarray:
    """Matrix P with xi = P (z, conj(z)) for interleaved (x1, y1, ...)."""
    P = np.zeros((2 * m, 2 * m), dtype=complex)
    for j in range(m):
        P[2 * j, j] = 0.5
        P[2 * j, m + j] = 0.5
        P[2 * j + 1, j] = -0.5j
        P[2 * j + 1, m + j] = 0.5j
    return P


def _complex_from_real_basis(m: int) -> np.ndarray:
    """Matrix R with (z, conj(z)) = R xi."""
    R = np.zeros((2 * m, 2 * m), dtype=complex)
    for j in range(m):
        R[j, 2 * j] = 1.0
        R[j, 2 * j + 1] = 1.0j
        R[m + j, 2 * j] = 1.0
        R[m + j, 2 * j + 1] = -1.0j
    return R


@dataclass(frozen=True)
class Jet2:
    """Second-order jet coefficients (A, B, C) of Q(z)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def reconstruct(self, z: np.ndarray) -> complex:
        z = np.asarray(z, dtype=complex)
        return complex(z @ self.A @ z + z @ self.B @ z.conj() + z.conj() @ self.C @ z.conj())

    def norm(self) -> float:
        return float(np.linalg.norm(self.A) + np.linalg.norm(self.B) + np.linalg.norm(self.C))


def jet_from_hessian(M: np.ndarray) -> Jet2:
    """Jet of the quadratic ``q(xi) = xi^T M xi / 2`` in complex coordinates."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
        raise ValueError(f"expected an even-sized square matrix, got {M.shape}")
    m = M.shape[0] // 2
    P = _real_to_complex_basis(m)
    N = 0.5 * P.T @ M @ P
    A = 0.5 * (N[:m, :m] + N[:m, :m].T)
    C = 0.5 * (N[m:, m:] + N[m:, m:].T)
    B = 2.0 * N[:m, m:]
    return Jet2(A=A, B=B, C=C)


def second_jet(chart: Chart, point: Sequence[float], check_tol: float = 1e-12) -> Jet2:
    """Jet of the local graph at a complex point of the chart."""
    H = chart.hessian(point)
    jet = jet_from_hessian(H)
    # spot-check the change of variables against the real quadratic
    rng = np.random.default_rng(12345)
    m = jet.m
    scale = max(1.0, float(np.linalg.norm(H)))
    for _ in range(4):
        xi = rng.normal(size=2 * m)
        z = xi[0::2] + 1j * xi[1::2]
        q = 0.5 * xi @ H @ xi
        if abs(jet.reconstruct(z) - q) > check_tol * scale * (1 + xi @ xi):
            raise ArithmeticError("jet reconstruction residual exceeded tolerance")
    return jet


@dataclass(frozen=True)
class RealQuadratic:
    """Real quadratic ``q(xi) = xi^T M xi / 2`` on the base coordinates."""

    M: np.ndarray

    @property
    def m(self) -> int:
        return self.M.shape[0] // 2

    def value(self, xi: Sequence[float]) -> float:
        xi = np.asarray(xi, dtype=float)
        return float(0.5 * xi @ self.M @ xi)

    def jet(self) -> Jet2:
        return jet_from_hessian(self.M)


# ---------------------------------------------------------------------------
# flatness


class FlatnessResult(NamedTuple):
    flat: bool
    phase: complex
    degenerate: bool
    residual: float


def _vec_hermitian(H: np.ndarray) -> np.ndarray:
    return np.concatenate([H.real.ravel(), H.imag.ravel()])


def flatness_test(jet: Jet2, tol_flat: float = TOL_FLAT) -> FlatnessResult:
    """Decide whether the Hermitian pairing takes values on one real line.

    The pairing ``z -> z^T B conj(z)`` is real-line valued iff ``e^{i theta} B``
    is Hermitian for some angle, i.e. iff the Hermitian and anti-Hermitian
    parts of ``B`` are linearly dependent over R.  The returned phase
    ``e^{i theta}`` minimizes the anti-Hermitian residual of ``phase * B`` and
    is normalized to non-negative real part (it is only defined up to sign).
    """
    B = jet.B
    scale = float(np.linalg.norm(B))
    if scale <= 1e-15 * max(1.0, jet.norm()):
        return FlatnessResult(flat=True, phase=1.0 + 0.0j, degenerate=True, residual=0.0)

    H1 = 0.5 * (B + B.conj().T)
    H2 = (B - B.conj().T) / 2.0j
    rows = np.vstack([_vec_hermitian(H1), _vec_hermitian(H2)])
    U, s, _ = np.linalg.svd(rows, full_matrices=False)
    residual = float(s[1] / s[0]) if s[0] > 0 else 0.0
    flat = residual <= tol_flat

    # null combination sin(theta) H1 + cos(theta) H2 = 0
    u = U[:, 1]
    if u[1] < 0 or (abs(u[1]) < 1e-14 and u[0] < 0):
        u = -u
    theta = math.atan2(u[0], u[1])
    phase = complex(math.cos(theta), math.sin(theta))
    return FlatnessResult(flat=flat, phase=phase, degenerate=False, residual=residual)


def flat_normal_form(jet: Jet2, phase: complex, tol_flat: float = TOL_FLAT) -> RealQuadratic:
    """Rotate ``w`` by the phase and symmetrize to a real-valued quadratic."""
    scale = max(np.linalg.norm(jet.B), 1e-300)
    B2 = phase * jet.B
    anti = 0.5 * (B2 - B2.conj().T)
    if np.linalg.norm(anti) > max(10.0 * tol_flat * scale, 1e-13):
        raise NotFlatError("not flat: Hermitian pairing is not real-line valued")
    B2 = 0.5 * (B2 + B2.conj().T)
    A2 = 0.5 * (phase * jet.A + np.conj(phase * jet.C))

    m = jet.m
    N = np.zeros((2 * m, 2 * m), dtype=complex)
    N[:m, :m] = A2
    N[m:, m:] = A2.conj()
    N[:m, m:] = 0.5 * B2
    N[m:, :m] = 0.5 * B2.T
    R = _complex_from_real_basis(m)
    M = 2.0 * (R.T @ N @ R)
    imag_resid = float(np.abs(M.imag).max())
    if imag_resid > 1e-10 * max(1.0, float(np.abs(M).max())):
        raise ArithmeticError(f"flat normal form has imaginary residue {imag_resid:g}")
    Mr = M.real
    return RealQuadratic(0.5 * (Mr + Mr.T))


# ---------------------------------------------------------------------------
# special reduction and classification


@dataclass(frozen=True)
class NormalForm:
    """Diagonalized quadratic ``sum_j mu_j (z_j conj(z_j) + lambda_j Re z_j^2)``.

    ``z_change`` maps new coordinates to old (``z_old = z_change @ z_new``);
    ``phase`` is the unit factor applied to ``w``.  The weights are normalized
    to ``mu_j = 1`` by absorbing scale into the coordinates, so the reported
    invariant is the descending ``lambdas`` vector alone.
    """

    mus: np.ndarray
    lambdas: np.ndarray
    phase: complex
    z_change: np.ndarray
    residual: float = 0.0


@dataclass(frozen=True)
class NonSpecial:
    """Reduction obstruction: the Hermitian part is not positive definite."""

    reason: str


def special_reduction(
    q: RealQuadratic, phase: complex = 1.0 + 0.0j, cond_limit: float = _COND_LIMIT
) -> NormalForm | NonSpecial:
    """Reduce a real quadratic to the diagonal special form, if possible.

    The Hermitian part is normalized to the identity by a Cholesky-based
    change of ``z``; the remaining symmetric part is Takagi-diagonalized by a
    unitary, which leaves the Hermitian part unchanged.  A negative definite
    Hermitian part is first flipped with a sign on ``w`` (the graph direction
    is a convention); an indefinite or numerically singular one has no special
    form and is reported as such.
    """
    jet = q.jet()
    A, B = jet.A, jet.B
    eigs = np.linalg.eigvalsh(B)
    scale = max(1.0, float(np.abs(eigs).max()))
    sign = 1.0
    if eigs[-1] < 0:
        sign = -1.0
        A, B = -A, -B
        eigs = -eigs[::-1]
    if eigs[0] <= scale / cond_limit:
        return NonSpecial(
            reason=(
                "hermitian part not positive definite: eigenvalues "
                f"[{eigs[0]:.3e}, {eigs[-1]:.3e}]"
            )
        )

    L = np.linalg.cholesky(B)
    U1 = np.linalg.inv(L).T  # U1^T B conj(U1) = I
    A1 = U1.T @ A @ U1
    V, sing = takagi(A1)
    U2 = V.conj()  # unitary change keeping the Hermitian part at I
    lambdas = 2.0 * sing
    z_change = U1 @ U2
    total_phase = complex(phase * sign)

    # verify the normal-form invariant on the transformed jet
    A_new = sign * (z_change.T @ jet.A @ z_change)
    B_new = sign * (z_change.T @ jet.B @ z_change.conj())
    m = jet.m
    target_A = np.diag(lambdas / 2.0)
    resid = np.linalg.norm(A_new - target_A) + np.linalg.norm(B_new - np.eye(m))
    resid /= max(1.0, jet.norm())
    if resid > 1e-8:
        raise ArithmeticError(f"normal form residual {resid:g} exceeds tolerance")

    return NormalForm(
        mus=np.ones(m),
        lambdas=lambdas,
        phase=total_phase,
        z_change=z_change,
        residual=float(resid),
    )


class PointClass(str, Enum):
    SPECIAL_ELLIPTIC = "special_elliptic"
    SPECIAL_HYPERBOLIC = "special_hyperbolic"
    DEGENERATE = "degenerate"
    NON_SPECIAL = "non_special"
    NON_FLAT = "non_flat"


@dataclass(frozen=True)
class Classification:
    kind: PointClass
    k: int = 0

    @property
    def is_special(self) -> bool:
        return self.kind in (PointClass.SPECIAL_ELLIPTIC, PointClass.SPECIAL_HYPERBOLIC)

    @property
    def label(self) -> str:
        if self.kind is PointClass.SPECIAL_HYPERBOLIC:
            return f"special_{self.k}_hyperbolic"
        return self.kind.value


def classify(nf: NormalForm, tol_parab: float = TOL_PARAB) -> Classification:
    """Classify by the lambda vector; values within ``tol_parab`` of 1 are
    the non-generic parabolic case and yield a degenerate classification."""
    lam = np.asarray(nf.lambdas, dtype=float)
    if np.any(np.abs(lam - 1.0) <= tol_parab):
        return Classification(PointClass.DEGENERATE)
    k = int(np.count_nonzero(lam > 1.0))
    if k == 0:
        return Classification(PointClass.SPECIAL_ELLIPTIC)
    return Classification(PointClass.SPECIAL_HYPERBOLIC, k=k)


def point_index(classification: Classification) -> int:
    """Orientation intersection index: ``(-1)^k`` with ``k = 0`` for elliptic."""
    if classification.kind is PointClass.SPECIAL_ELLIPTIC:
        return 1
    if classification.kind is PointClass.SPECIAL_HYPERBOLIC:
        return -1 if classification.k % 2 else 1
    raise ValueError(f"index undefined for {classification.label} point")


# ---------------------------------------------------------------------------
# complex point records


@dataclass
class ComplexPoint:
    """A located complex point of S with its invariants."""

    location: np.ndarray
    value: float
    chart_index: int
    grad_norm: float
    verified: bool = True
    jet: Jet2 | None = None
    flatness: FlatnessResult | None = None
    normal_form: NormalForm | None = None
    reduction_failure: NonSpecial | None = None
    classification: Classification | None = None
    index: int | None = None

    @property
    def lambdas(self) -> np.ndarray | None:
        return None if self.normal_form is None else self.normal_form.lambdas

    @property
    def is_special_hyperbolic_1(self) -> bool:
        c = self.classification
        return c is not None and c.kind is PointClass.SPECIAL_HYPERBOLIC and c.k == 1

    def report_dict(self) -> dict:
        lam = self.lambdas
        return {
            "location": [float(v) for v in self.location],
            "value": float(self.value),
            "chart": self.chart_index,
            "grad_norm": float(self.grad_norm),
            "verified": self.verified,
            "flat": None if self.flatness is None else bool(self.flatness.flat),
            "lambda": None if lam is None else [float(v) for v in lam],
            "class": None if self.classification is None else self.classification.label,
            "index": self.index,
        }


@dataclass(frozen=True)
class EulerReport:
    index_sum: int
    chi_expected: int | None
    matches: bool | None

    def to_dict(self) -> dict:
        return {
            "index_sum": self.index_sum,
            "chi_expected": self.chi_expected,
            "matches": self.matches,
        }


def euler_check(points: Sequence[ComplexPoint], chi_expected: int | None) -> EulerReport:
    """Sum the orientation indices and compare with the expected Euler number."""
    total = 0
    for p in points:
        if p.classification is None or not p.classification.is_special:
            label = "unclassified" if p.classification is None else p.classification.label
            raise ValueError(f"index formula inapplicable: {label} point at {list(p.location)}")
        total += point_index(p.classification)
    matches = None if chi_expected is None else (total == chi_expected)
    return EulerReport(index_sum=total, chi_expected=chi_expected, matches=matches)


# ---------------------------------------------------------------------------
# root finding


def _newton_on_chart(
    chart: Chart,
    grid_density: int,
    max_iter: int = _NEWTON_MAX_ITER,
    tol: float = _NEWTON_TOL,
) -> np.ndarray:
    """Converged critical points of the chart graph from grid-seeded Newton."""
    axes = [np.linspace(lo, hi, grid_density) for lo, hi in chart.domain]
    seeds = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    pts = seeds.copy()
    alive = np.ones(len(pts), dtype=bool)
    converged = np.zeros(len(pts), dtype=bool)
    lo = np.array([a for a, _ in chart.domain])
    hi = np.array([b for _, b in chart.domain])
    span = hi - lo

    for _ in range(max_iter):
        work = alive & ~converged
        if not work.any():
            break
        idx = np.flatnonzero(work)
        G = chart.grad_many(pts[idx])
        res = np.linalg.norm(G, axis=1)
        done = res <= tol
        converged[idx[done]] = True
        idx = idx[~done]
        if len(idx) == 0:
            continue
        G = G[~done]
        res = res[~done]
        H = chart.hessian_many(pts[idx])
        dets = np.abs(np.linalg.det(H))
        ok = dets > 1e-300
        alive[idx[~ok]] = False
        idx, G, res, H = idx[ok], G[ok], res[ok], H[ok]
        if len(idx) == 0:
            continue
        step = np.linalg.solve(H, G[..., None])[..., 0]
        # damp by halving when the residual does not decrease
        alpha = np.ones(len(idx))
        pending = np.ones(len(idx), dtype=bool)
        trial = pts[idx].copy()
        for _ in range(10):
            if not pending.any():
                break
            trial[pending] = pts[idx[pending]] - alpha[pending, None] * step[pending]
            new_res = np.linalg.norm(chart.grad_many(trial[pending]), axis=1)
            improved = new_res <= res[pending]
            sel = np.flatnonzero(pending)
            pending[sel[improved]] = False
            alpha[sel[~improved]] *= 0.5
        failed = pending
        alive[idx[failed]] = False
        moved = idx[~failed]
        pts[moved] = trial[~failed]
        # a seed wandering far outside the box has diverged
        off = (pts[moved] < lo - span) | (pts[moved] > hi + span)
        alive[moved[off.any(axis=1)]] = False

    return pts[converged & alive]


def find_complex_points(
    spec: ManifoldSpec,
    grid_density: int = 5,
    dedup_radius: float = _DEDUP_RADIUS,
    cond_limit: float = _COND_LIMIT,
) -> list[ComplexPoint]:
    """Locate complex points of S: critical base points of each chart graph.

    Newton iteration runs from ``grid_density`` seeds per axis on every chart;
    converged roots are kept when they lie in the chart's domain with a graph
    value inside the validity band, deduplicated within ``dedup_radius`` so a
    root on a shared chart interface is attributed once, and sorted
    lexicographically by location (then value) for determinism.  A root whose
    Hessian is numerically singular is kept but flagged unverified.
    """
    spec.require_real_graph("find_complex_points")
    if grid_density < 2:
        raise SpecError("grid_density must be at least 2")

    found: list[ComplexPoint] = []
    for ci, chart in enumerate(spec.charts):
        roots = _newton_on_chart(chart, grid_density)
        for root in roots:
            if not chart.contains(root, tol=1e-9):
                continue
            g = chart.grad(root)
            gnorm = float(np.linalg.norm(g))
            if gnorm > _NEWTON_TOL:
                continue
            value = chart.phi.evaluate(root)
            if not chart.value_valid(value, tol=1e-9):
                continue
            H = chart.hessian(root)
            sv = np.linalg.svd(H, compute_uv=False)
            verified = bool(sv[-1] > max(1.0, sv[0]) / cond_limit)
            found.append(
                ComplexPoint(
                    location=np.asarray(root, dtype=float),
                    value=float(value),
                    chart_index=ci,
                    grad_norm=gnorm,
                    verified=verified,
                )
            )

    # Dedupe on (location, value).  Roots with a singular Hessian stagnate,
    # so their localization is only about the cube root of the gradient
    # tolerance; pairs of unverified roots merge within that coarser radius.
    # Sorting by gradient norm first makes the best-converged root the
    # cluster representative (ties: lowest chart index wins, so a root on a
    # shared interface is attributed once).
    unverified_radius = max(dedup_radius, _NEWTON_TOL ** (1.0 / 3.0))
    found.sort(
        key=lambda p: (p.grad_norm, p.chart_index, tuple(np.round(p.location, 9)), p.value)
    )
    unique: list[ComplexPoint] = []
    for p in found:
        key = np.append(p.location, p.value)
        merged = False
        for q in unique:
            radius = dedup_radius if (p.verified and q.verified) else unverified_radius
            if np.linalg.norm(key - np.append(q.location, q.value)) <= radius:
                merged = True
                break
        if not merged:
            unique.append(p)

    unique.sort(key=lambda p: (tuple(np.round(p.location, 9)), round(p.value, 9)))
    return unique


def attach_classification(
    spec: ManifoldSpec,
    points: Sequence[ComplexPoint],
    tol_flat: float = TOL_FLAT,
    tol_parab: float = TOL_PARAB,
) -> list[ComplexPoint]:
    """Fill jets, flatness, normal forms, classifications and indices in place."""
    for p in points:
        chart = spec.charts[p.chart_index]
        p.jet = second_jet(chart, p.location)
        p.flatness = flatness_test(p.jet, tol_flat=tol_flat)
        if not p.flatness.flat:
            p.classification = Classification(PointClass.NON_FLAT)
            continue
        q = flat_normal_form(p.jet, p.flatness.phase, tol_flat=tol_flat)
        result = special_reduction(q, phase=p.flatness.phase)
        if isinstance(result, NonSpecial):
            p.reduction_failure = result
            p.classification = Classification(PointClass.NON_SPECIAL)
            continue
        p.normal_form = result
        p.classification = classify(result, tol_parab=tol_parab)
        if p.classification.is_special:
            p.index = point_index(p.classification)
    return list(points)


def analyze_complex_points(
    spec: ManifoldSpec,
    grid_density: int = 5,
    tol_flat: float = TOL_FLAT,
    tol_parab: float = TOL_PARAB,
) -> list[ComplexPoint]:
    """Locate and fully classify the complex points of a real-graph spec."""
    points = find_complex_points(spec, grid_density=grid_density)
    return attach_classification(spec, points, tol_flat=tol_flat, tol_parab=tol_parab)
