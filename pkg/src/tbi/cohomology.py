"""Sheaf-cohomology dimensions of a torus bundle from its split form.

Everything here is linear algebra over the six blocks of a DecomposedForm.
The structure-sheaf dimensions come from a two-page spectral table whose
only differential contracts a conjugated fibre index into the conjugated
holomorphic two-form block; the tangent-sheaf dimensions come from level
maps that wedge a hermitian-block one-form into the chosen representatives.

All rank decisions go through numerical_rank, which records the smallest
singular value kept and the largest discarded, so a dimension jump can be
traced to the singular value that caused it.  Block computations are
independent of one another (they could run concurrently); assembly of the
tables and reports is deterministic.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .decomposition import BundleDatum
from .errors import ToleranceAmbiguityError

_NEAR_FACTOR = 10.0  # singular values within this factor of the cut are flagged


@dataclass(frozen=True)
class RankDecision:
    """Audit record for one numerical rank determination."""

    label: str
    rank: int
    smallest_kept: float
    largest_dropped: float
    threshold: float


def numerical_rank(matrix, tol, scale, label, decisions=None, warnings=None) -> int:
    """Rank by singular values, cut at tol * max(scale, largest value).

    Measuring against an external scale (typically the max-norm of the whole
    split tensor) keeps a block of pure roundoff at rank zero instead of
    letting its own largest singular value promote noise to full rank.
    """
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        if decisions is not None:
            decisions.append(RankDecision(label, 0, 0.0, 0.0, 0.0))
        return 0
    sing = np.linalg.svd(matrix, compute_uv=False)
    threshold = tol * max(scale, float(sing[0]))
    rank = int(np.sum(sing > threshold))
    smallest_kept = float(sing[rank - 1]) if rank else 0.0
    largest_dropped = float(sing[rank]) if rank < sing.size else 0.0
    if decisions is not None:
        decisions.append(RankDecision(label, rank, smallest_kept, largest_dropped, threshold))
    if warnings is not None and threshold > 0:
        near = (sing > threshold / _NEAR_FACTOR) & (sing < threshold * _NEAR_FACTOR)
        if np.any(near):
            warnings.append(
                f"rank decision '{label}': {int(np.sum(near))} singular value(s) "
                f"within a factor {_NEAR_FACTOR:g} of the threshold {threshold:.3e}"
            )
    return rank


# ---------------------------------------------------------------------------
# Annihilator-style dimension counts


@dataclass(frozen=True)
class OneFormsSpace:
    """Dimension of the global holomorphic 1-forms, with the fibre-functional
    annihilator that produced the fibre contribution (rows are orthonormal
    functionals killing the image of the hermitian block)."""

    dim: int
    annihilator: np.ndarray


def _hermitian_flat(datum: BundleDatum) -> np.ndarray:
    split = datum.split
    d = split.fibre_half_rank
    return split.hermitian.reshape(d, -1)


def _holomorphic_flat(datum: BundleDatum) -> np.ndarray:
    split = datum.split
    d = split.fibre_half_rank
    return split.holomorphic.reshape(d, -1)


def h0_forms(datum: BundleDatum, decisions=None, warnings=None) -> OneFormsSpace:
    """Global 1-forms: the m base forms always survive; a fibre functional
    survives exactly when it annihilates the image of the hermitian block."""
    split = datum.split
    flat = _hermitian_flat(datum)
    rank = numerical_rank(flat, datum.tol, split.scale, "hermitian block",
                          decisions, warnings)
    u_svd = np.linalg.svd(flat)[0] if flat.size else np.eye(split.fibre_half_rank)
    annihilator = u_svd[:, rank:].conj().T
    return OneFormsSpace(split.base_half_rank + split.fibre_half_rank - rank, annihilator)


def closed_forms_dim(datum: BundleDatum, decisions=None, warnings=None) -> int:
    """Closed global 1-forms: the fibre functional must annihilate both the
    holomorphic and the hermitian block images."""
    split = datum.split
    combined = np.concatenate([_holomorphic_flat(datum), _hermitian_flat(datum)], axis=1)
    rank = numerical_rank(combined, datum.tol, split.scale,
                          "holomorphic+hermitian blocks", decisions, warnings)
    return split.base_half_rank + split.fibre_half_rank - rank


def h1_structure_sheaf(datum: BundleDatum, decisions=None, warnings=None) -> int:
    """First cohomology of the structure sheaf: m plus the corank of the
    holomorphic block as a map from fibre functionals to base two-forms."""
    split = datum.split
    rank = numerical_rank(_holomorphic_flat(datum), datum.tol, split.scale,
                          "holomorphic block", decisions, warnings)
    return split.base_half_rank + split.fibre_half_rank - rank


def is_parallelizable(datum: BundleDatum) -> bool:
    """The bundle's total space is parallelizable exactly when the hermitian
    block vanishes (then all m + d frame forms are global)."""
    split = datum.split
    return bool(np.max(np.abs(split.hermitian)) <= datum.tol * split.scale)


# ---------------------------------------------------------------------------
# Wedge bookkeeping on index tuples


def _prepend_one(index, subset):
    """Left-wedge a basis one-form into a sorted index tuple: sign and the
    merged tuple, or None when the index already occurs."""
    if index in subset:
        return None
    position = sum(1 for x in subset if x < index)
    return (-1) ** position, tuple(sorted(subset + (index,)))


def _prepend_two(low, high, subset):
    """Left-wedge e_low ∧ e_high (low < high) into a sorted index tuple."""
    first = _prepend_one(high, subset)
    if first is None:
        return None
    sign_high, merged = first
    second = _prepend_one(low, merged)
    if second is None:
        return None
    sign_low, final = second
    return sign_high * sign_low, final


def _bases(count):
    return {k: list(itertools.combinations(range(count), k)) for k in range(count + 1)}


def _degree_blocks(m, d, p):
    """(i, j) with i + j = p in range, ascending base degree i."""
    return [(i, p - i) for i in range(max(0, p - d), min(m, p) + 1)]


# ---------------------------------------------------------------------------
# The two-differential spectral table


@dataclass(frozen=True, eq=False)
class SpectralTable:
    """First page dimensions, the differential, and the second page.

    e2/e3 are (m+1) x (d+1) integer grids indexed by (base degree, fibre
    degree).  d2 maps are stored by source block; representatives holds an
    orthonormal basis of the surviving subspace (kernel intersected with the
    orthogonal complement of the image) per block, and images the orthonormal
    image bases used for that choice.
    """

    e2: np.ndarray
    d2: dict
    e3: np.ndarray
    representatives: dict
    images: dict
    decisions: tuple
    warnings: tuple

    @property
    def base_degrees(self) -> int:
        return self.e2.shape[0] - 1

    @property
    def fibre_degrees(self) -> int:
        return self.e2.shape[1] - 1

    def total_dims(self, page) -> list:
        grid = self.e2 if page == 2 else self.e3
        m, d = self.base_degrees, self.fibre_degrees
        return [int(sum(grid[i, j] for i, j in _degree_blocks(m, d, p)))
                for p in range(m + d + 1)]


def _d2_block(conj_two_forms, i, j, s_bases, t_bases):
    """Matrix of the differential out of block (i, j).

    Acts on e_S ⊗ e_T by removing one conjugated fibre index t (interior
    product, sign (-1)^position) and left-wedging the corresponding
    conjugated two-form into e_S.  Vector index is S-major.
    """
    m = len(s_bases) - 1
    s_src, t_src = s_bases[i], t_bases[j]
    s_dst, t_dst = s_bases[i + 2], t_bases[j - 1]
    row_of = {(s, t): si * len(t_dst) + ti
              for si, s in enumerate(s_dst) for ti, t in enumerate(t_dst)}
    matrix = np.zeros((len(s_dst) * len(t_dst), len(s_src) * len(t_src)), dtype=complex)
    for si, s_tuple in enumerate(s_src):
        for ti, t_tuple in enumerate(t_src):
            col = si * len(t_src) + ti
            for t_pos, t in enumerate(t_tuple):
                t_rest = t_tuple[:t_pos] + t_tuple[t_pos + 1:]
                sign_t = (-1) ** t_pos
                for low in range(m):
                    for high in range(low + 1, m):
                        wedge = _prepend_two(low, high, s_tuple)
                        if wedge is None:
                            continue
                        sign_w, s_new = wedge
                        matrix[row_of[(s_new, t_rest)], col] += \
                            sign_t * sign_w * conj_two_forms[t, low, high]
    return matrix


def leray_table(datum: BundleDatum) -> SpectralTable:
    """Build the spectral table for the structure sheaf of the bundle.

    First-page block (i, j) is spanned by wedges of i conjugated base forms
    and j conjugated fibre forms, so has dimension C(m,i)·C(d,j).  The
    differential contracts a fibre index into the conjugated holomorphic
    block.  Surviving dimensions come from the rank bookkeeping

        e3[i,j] = e2[i,j] - rank(out of (i,j)) - rank(into (i,j)),

    and the representative count must agree with it; a mismatch means the
    tolerance cannot separate the kernel from the image and is reported as
    ToleranceAmbiguityError.
    """
    split = datum.split
    m, d = split.base_half_rank, split.fibre_half_rank
    tol, scale = datum.tol, split.scale
    conj_two_forms = np.conj(split.holomorphic)
    s_bases, t_bases = _bases(m), _bases(d)

    e2 = np.array([[math.comb(m, i) * math.comb(d, j) for j in range(d + 1)]
                   for i in range(m + 1)], dtype=np.int64)

    decisions: list = []
    warnings: list = []
    d2 = {}
    ranks = {}
    for i in range(m + 1):
        for j in range(d + 1):
            if i + 2 <= m and j - 1 >= 0:
                block = _d2_block(conj_two_forms, i, j, s_bases, t_bases)
                d2[(i, j)] = block
                ranks[(i, j)] = numerical_rank(
                    block, tol, scale, f"d2 out of ({i},{j})", decisions, warnings)

    e3 = np.zeros_like(e2)
    representatives = {}
    images = {}
    for i in range(m + 1):
        for j in range(d + 1):
            dim = int(e2[i, j])
            rank_out = ranks.get((i, j), 0)
            rank_in = ranks.get((i - 2, j + 1), 0)
            survivors = dim - rank_out - rank_in
            if survivors < 0:
                raise ToleranceAmbiguityError(
                    f"spectral block ({i},{j}): rank bookkeeping gives negative "
                    f"dimension {survivors}"
                )
            e3[i, j] = survivors

            if (i, j) in d2:
                _, _, vh = np.linalg.svd(d2[(i, j)])
                kernel = vh[rank_out:].conj().T
            else:
                kernel = np.eye(dim, dtype=complex)
            incoming = d2.get((i - 2, j + 1))
            if incoming is not None and rank_in:
                image = np.linalg.svd(incoming)[0][:, :rank_in]
            else:
                image = np.zeros((dim, 0), dtype=complex)
            images[(i, j)] = image

            overlap = image.conj().T @ kernel
            overlap_rank = numerical_rank(
                overlap, tol, 1.0, f"image/kernel overlap at ({i},{j})",
                decisions, warnings)
            if overlap_rank != rank_in:
                raise ToleranceAmbiguityError(
                    f"spectral block ({i},{j}): image does not lie in the kernel "
                    f"at the working tolerance (overlap rank {overlap_rank}, "
                    f"image rank {rank_in})"
                )
            if overlap.size:
                _, _, vh_overlap = np.linalg.svd(overlap)
                coeff = vh_overlap[overlap_rank:].conj().T
                reps = kernel @ coeff
            else:
                reps = kernel
            if reps.shape[1] != survivors:
                raise ToleranceAmbiguityError(
                    f"spectral block ({i},{j}): {reps.shape[1]} representatives "
                    f"for reported dimension {survivors}"
                )
            representatives[(i, j)] = reps

    return SpectralTable(e2, d2, e3, representatives, images,
                         tuple(decisions), tuple(warnings))


def structure_sheaf_dims(datum: BundleDatum, table: SpectralTable | None = None) -> list:
    """h^p of the structure sheaf for p = 0..m+d."""
    if table is None:
        table = leray_table(datum)
    return table.total_dims(3)


# ---------------------------------------------------------------------------
# Tangent-sheaf dimensions via level maps on representatives


def _stack_representatives(table, blocks):
    """Block-diagonal embedding of per-block representatives into the stacked
    degree space; returns (matrix, block offsets, total ambient dim)."""
    offsets = {}
    ambient = 0
    count = 0
    for (i, j) in blocks:
        offsets[(i, j)] = ambient
        ambient += table.representatives[(i, j)].shape[0]
        count += table.representatives[(i, j)].shape[1]
    stacked = np.zeros((ambient, count), dtype=complex)
    col = 0
    for (i, j) in blocks:
        reps = table.representatives[(i, j)]
        stacked[offsets[(i, j)]:offsets[(i, j)] + reps.shape[0],
                col:col + reps.shape[1]] = reps
        col += reps.shape[1]
    return stacked, offsets, ambient


def _stack_images(table, blocks, ambient, offsets):
    columns = []
    for (i, j) in blocks:
        image = table.images[(i, j)]
        lifted = np.zeros((ambient, image.shape[1]), dtype=complex)
        lifted[offsets[(i, j)]:offsets[(i, j)] + image.shape[0]] = image
        columns.append(lifted)
    return np.hstack(columns) if columns else np.zeros((ambient, 0), dtype=complex)


def _one_form_level_map(one_form, blocks_src, offsets_src, ambient_src,
                        offsets_dst, ambient_dst, s_bases, t_bases):
    """Left-wedging a conjugated base one-form, acting block (i,j) -> (i+1,j)
    on the stacked degree spaces."""
    matrix = np.zeros((ambient_dst, ambient_src), dtype=complex)
    for (i, j) in blocks_src:
        if (i + 1, j) not in offsets_dst:
            continue
        s_src, t_src = s_bases[i], t_bases[j]
        s_dst, t_dst = s_bases[i + 1], t_bases[j]
        row_of = {s: si for si, s in enumerate(s_dst)}
        base_src = offsets_src[(i, j)]
        base_dst = offsets_dst[(i + 1, j)]
        for si, s_tuple in enumerate(s_src):
            for index in range(len(one_form)):
                wedge = _prepend_one(index, s_tuple)
                if wedge is None:
                    continue
                sign, s_new = wedge
                for ti in range(len(t_src)):
                    matrix[base_dst + row_of[s_new] * len(t_dst) + ti,
                           base_src + si * len(t_src) + ti] += sign * one_form[index]
    return matrix


@dataclass(frozen=True, eq=False)
class TangentTable:
    """Tangent-sheaf dimensions with the level-map ranks behind them."""

    dims: tuple
    level_ranks: tuple
    twist_residual: float
    decisions: tuple
    warnings: tuple


def tangent_table(datum: BundleDatum, table: SpectralTable | None = None) -> TangentTable:
    """Tangent-sheaf cohomology dimensions for all degrees.

    In degree p the space splits into the cokernel of the level-(p-1) map
    and the kernel of the level-p map, where the level map pairs a base
    frame direction with a representative by wedging the hermitian one-form
    of that direction into the representative and reading the result in fibre
    components.  The part of the image falling outside kernel+image of the
    differential (which the representative projection drops) is reported as
    twist_residual.
    """
    if table is None:
        table = leray_table(datum)
    split = datum.split
    m, d = split.base_half_rank, split.fibre_half_rank
    tol, scale = datum.tol, split.scale
    s_bases, t_bases = _bases(m), _bases(d)
    total = m + d

    decisions: list = []
    warnings: list = []
    h = table.total_dims(3)

    stacked = {}
    for p in range(total + 1):
        blocks = _degree_blocks(m, d, p)
        reps, offsets, ambient = _stack_representatives(table, blocks)
        image = _stack_images(table, blocks, ambient, offsets)
        stacked[p] = (blocks, reps, offsets, ambient, image)

    level_ranks = []
    twist = 0.0
    for p in range(total + 1):
        blocks_p, reps_p, offsets_p, ambient_p, _ = stacked[p]
        if p + 1 > total or h[p] == 0:
            level_ranks.append(0)
            decisions.append(RankDecision(f"level map at degree {p}", 0, 0.0, 0.0, 0.0))
            continue
        blocks_q, reps_q, offsets_q, ambient_q, image_q = stacked[p + 1]
        big = np.zeros((d * h[p + 1], m * h[p]), dtype=complex)
        for s in range(m):
            for a in range(d):
                one_form = split.hermitian[a, s, :]
                level = _one_form_level_map(one_form, blocks_p, offsets_p,
                                            ambient_p, offsets_q, ambient_q,
                                            s_bases, t_bases)
                pushed = level @ reps_p
                coeff = reps_q.conj().T @ pushed
                big[a * h[p + 1]:(a + 1) * h[p + 1],
                    s * h[p]:(s + 1) * h[p]] = coeff
                dropped = pushed - reps_q @ coeff - image_q @ (image_q.conj().T @ pushed)
                pushed_norm = float(np.linalg.norm(pushed))
                if pushed_norm > tol * scale:
                    twist = max(twist, float(np.linalg.norm(dropped)) / pushed_norm)
        level_ranks.append(numerical_rank(
            big, tol, scale, f"level map at degree {p}", decisions, warnings))

    dims = []
    for p in range(total + 1):
        from_below = level_ranks[p - 1] if p >= 1 else 0
        dims.append((d * h[p] - from_below) + (m * h[p] - level_ranks[p]))
    return TangentTable(tuple(dims), tuple(level_ranks), twist,
                        tuple(decisions), tuple(warnings))


@dataclass(frozen=True)
class ThetaCohomology:
    dim: int
    coker_dim: int
    ker_dim: int


def theta_cohomology(datum: BundleDatum, degree: int,
                     table: SpectralTable | None = None) -> ThetaCohomology:
    """Tangent-sheaf cohomology in one degree, split into the cokernel of the
    incoming level map and the kernel of the outgoing one."""
    if table is None:
        table = leray_table(datum)
    split = datum.split
    total = split.base_half_rank + split.fibre_half_rank
    if not 0 <= degree <= total:
        raise ValueError(f"degree must lie in 0..{total}, got {degree}")
    tangent = tangent_table(datum, table)
    h = table.total_dims(3)
    from_below = tangent.level_ranks[degree - 1] if degree >= 1 else 0
    coker = split.fibre_half_rank * h[degree] - from_below
    ker = split.base_half_rank * h[degree] - tangent.level_ranks[degree]
    return ThetaCohomology(coker + ker, coker, ker)


# ---------------------------------------------------------------------------
# Reports


def classify_blocks(datum: BundleDatum) -> str | None:
    """Coarse label by which blocks vanish; only defined for one-dimensional
    fibres (d=1), None otherwise."""
    split = datum.split
    if split.fibre_half_rank != 1:
        return None
    tol, scale = datum.tol, split.scale
    if scale <= tol:
        return "abelian"
    hermitian_zero = np.max(np.abs(split.hermitian)) <= tol * scale
    holomorphic_zero = np.max(np.abs(split.holomorphic)) <= tol * scale
    if hermitian_zero:
        return "zero_hermitian"
    if holomorphic_zero:
        return "pure_hermitian"
    return "mixed"


@dataclass(frozen=True)
class KodairaSpencerReport:
    """First tangent cohomology against the dimension count of the family of
    deformations obtained by moving the structure pair (m^2 base moduli plus
    m fibre-direction moduli per base dimension when d = 1)."""

    h1_tangent: int
    target: int
    classification: str | None

    @property
    def matches_target(self) -> bool:
        return self.h1_tangent == self.target


def kodaira_spencer_report(datum: BundleDatum) -> KodairaSpencerReport:
    split = datum.split
    m = split.base_half_rank
    h1 = theta_cohomology(datum, 1).dim
    return KodairaSpencerReport(h1, m * m + m, classify_blocks(datum))


@dataclass(frozen=True, eq=False)
class CohomologyReport:
    """Everything the report command prints for one bundle datum."""

    h_structure: tuple
    h0_one_forms: int
    closed_one_forms: int
    h1_structure: int
    parallelizable: bool
    h_tangent: tuple
    deformation_target: int
    classification: str | None
    twist_residual: float
    decisions: tuple
    warnings: tuple


def bundle_report(datum: BundleDatum) -> CohomologyReport:
    """Run every dimension computation once and collect the audit trail."""
    decisions: list = []
    warnings: list = []
    forms = h0_forms(datum, decisions, warnings)
    closed = closed_forms_dim(datum, decisions, warnings)
    h1 = h1_structure_sheaf(datum, decisions, warnings)
    table = leray_table(datum)
    decisions.extend(table.decisions)
    warnings.extend(table.warnings)
    tangent = tangent_table(datum, table)
    decisions.extend(tangent.decisions)
    warnings.extend(tangent.warnings)
    m = datum.split.base_half_rank
    return CohomologyReport(
        h_structure=tuple(table.total_dims(3)),
        h0_one_forms=forms.dim,
        closed_one_forms=closed,
        h1_structure=h1,
        parallelizable=is_parallelizable(datum),
        h_tangent=tangent.dims,
        deformation_target=m * m + m,
        classification=classify_blocks(datum),
        twist_residual=tangent.twist_residual,
        decisions=tuple(decisions),
        warnings=tuple(warnings),
    )
