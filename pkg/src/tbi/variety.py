"""Local equations and sampling for the variety of compatible structure pairs.

For a fixed extension form, the pairs (base structure, fibre structure) that
satisfy the membership condition cut out a subvariety of a product of two
Grassmannians.  Fixing the base structure, the condition is linear in the
fibre subspace: every pairwise value

    w_{h,l} = A(v_h, v_l)   (columns h < l of the base period matrix)

must lie in the fibre subspace.  In the graph chart of the fibre Grassmannian,
where the subspace is { (u', U* u') }, this reads w'' = U* w' per pair, which
is what LocalEquations records.
"""

from dataclasses import dataclass

import numpy as np

from .decomposition import riemann_check
from .errors import StructureDegenerateError
from .lattices import ExtensionForm
from .periods import ComplexStructure, DEFAULT_TOL, random_structure, validate_structure


@dataclass(frozen=True)
class LocalEquations:
    """Pairwise values and chart residuals at one (base, chart) point.

    pairs holds the 1-based index pairs (h, l) with h < l; w_vectors the
    corresponding values in ambient fibre coordinates (one row per pair);
    residuals the per-pair defects w'' - U* w'.  chart is None when only the
    values were requested.
    """

    pairs: tuple
    w_vectors: np.ndarray
    chart: np.ndarray | None
    residuals: np.ndarray | None
    tol: float

    @property
    def max_residual(self) -> float:
        if self.residuals is None or self.residuals.size == 0:
            return 0.0
        return float(np.max(np.abs(self.residuals)))

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.w_vectors))) if self.w_vectors.size else 0.0

    @property
    def member(self) -> bool:
        return self.max_residual <= self.tol * self.scale


def pairwise_values(form: ExtensionForm, base: ComplexStructure):
    """The vectors A(v_h, v_l) for h < l, plus the 1-based pair labels."""
    period = base.period
    m = base.half_rank
    pairs = tuple((h + 1, l + 1) for h in range(m) for l in range(h + 1, m))
    if not pairs:
        return pairs, np.zeros((0, form.fibre_rank), dtype=complex)
    coeff = form.coefficients.astype(complex)
    values = np.array([
        np.einsum("kij,i,j->k", coeff, period[:, h - 1], period[:, l - 1])
        for h, l in pairs
    ])
    return pairs, values


def chart_structure(chart) -> ComplexStructure:
    """The fibre structure whose subspace is the graph { (u', chart @ u') }."""
    chart = np.asarray(chart, dtype=complex)
    if chart.ndim != 2 or chart.shape[0] != chart.shape[1]:
        raise ValueError("chart must be a square matrix")
    d = chart.shape[0]
    return ComplexStructure(np.vstack([np.eye(d), chart]))


def graph_chart(fibre: ComplexStructure, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Express a fibre structure in the graph chart: the d x d matrix U* with
    column span { (u', U* u') }.  Fails when the subspace does not project
    onto the first d coordinates (the point is outside this chart)."""
    d = fibre.half_rank
    top = fibre.period[:d, :]
    bottom = fibre.period[d:, :]
    if np.linalg.matrix_rank(top, tol=tol * max(1.0, float(np.max(np.abs(top))))) < d:
        raise StructureDegenerateError("fibre subspace is outside the graph chart")
    return np.linalg.solve(top.T, bottom.T).T


def local_equations(form: ExtensionForm, base: ComplexStructure, chart=None,
                    tol: float = DEFAULT_TOL) -> LocalEquations:
    """Evaluate the chart equations w'' = U* w' at a (base, chart) point.

    chart may be a d x d matrix, a ComplexStructure (converted via
    graph_chart), or None to record the pairwise values alone.
    """
    pairs, values = pairwise_values(form, base)
    if chart is None:
        return LocalEquations(pairs, values, None, None, tol)
    if isinstance(chart, ComplexStructure):
        chart = graph_chart(chart, tol)
    chart = np.asarray(chart, dtype=complex)
    structure = chart_structure(chart)
    if not validate_structure(structure, tol):
        raise StructureDegenerateError(
            "chart does not describe a complex structure (graph meets its conjugate)"
        )
    d = chart.shape[0]
    if values.size:
        residuals = values[:, d:] - values[:, :d] @ chart.T
    else:
        residuals = np.zeros((0, d), dtype=complex)
    return LocalEquations(pairs, values, chart, residuals, tol)


def codim_bound(m: int, d: int) -> int:
    """Upper bound for the codimension of the compatible locus inside the
    product of Grassmannians: one fibre-coordinate equation per pair h < l."""
    if m < 1 or d < 1:
        raise ValueError("ranks must be positive")
    return d * m * (m - 1) // 2


@dataclass(frozen=True)
class SampleResult:
    found: bool
    base: ComplexStructure | None
    fibre: ComplexStructure | None
    attempts: int
    best_residual: float | None

    def __bool__(self):
        return self.found


def _seed_prefix(seed) -> list:
    if np.ndim(seed) == 0:
        return [int(seed)]
    return [int(x) for x in seed]


def sample_point(form: ExtensionForm, seed=0, max_attempts: int = 100,
                 tol: float = DEFAULT_TOL) -> SampleResult:
    """Search for a compatible structure pair for the given form.

    Each attempt draws a random base structure, collects the pairwise values,
    and -- when their span fits inside a d-dimensional subspace -- completes
    that span with random directions to a candidate fibre structure.  The
    candidate is kept if it is a valid structure and the membership check
    passes.  seed is a non-negative integer or sequence of them; attempts use
    per-attempt derived seeds, so they are independent and the first success
    (lowest attempt index) is returned deterministically.
    """
    d = form.fibre_rank // 2
    m = form.base_rank // 2
    prefix = _seed_prefix(seed)
    best_residual = None
    for attempt in range(1, max_attempts + 1):
        rng = np.random.default_rng(prefix + [attempt])
        base = random_structure(m, rng)
        _, values = pairwise_values(form, base)
        stacked = values.T  # ambient coordinates in rows -> vectors in columns
        if stacked.size:
            u_svd, sing, _ = np.linalg.svd(stacked, full_matrices=True)
            rank = int(np.sum(sing > tol * sing[0])) if sing[0] > 0 else 0
        else:
            u_svd = np.eye(2 * d, dtype=complex)
            rank = 0
        if rank > d:
            continue
        padding = rng.standard_normal((2 * d, d - rank)) \
            + 1j * rng.standard_normal((2 * d, d - rank))
        candidate = np.hstack([u_svd[:, :rank], padding])
        # QR keeps leading column spans, so the candidate still contains the
        # span of the pairwise values.
        q, _ = np.linalg.qr(candidate)
        fibre = ComplexStructure(q)
        if not validate_structure(fibre, tol):
            continue
        verdict = riemann_check(form, base, fibre, tol)
        if best_residual is None or verdict.residual < best_residual:
            best_residual = verdict.residual
        if verdict.member:
            return SampleResult(True, base, fibre, attempt, verdict.residual)
    return SampleResult(False, None, None, max_attempts, best_residual)
