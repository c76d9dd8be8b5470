import math

import numpy as np
import pytest

from tbi import (BundleDatum, bundle_report, classify_blocks, closed_forms_dim,
                 h0_forms, h1_structure_sheaf, is_parallelizable,
                 kodaira_spencer_report, leray_table, numerical_rank,
                 product_datum, random_structure, sample_point,
                 structure_sheaf_dims, tangent_table, theta_cohomology)

from support import random_alternating_form


def _random_datum(seed, m, d):
    rng = np.random.default_rng(seed)
    form = random_alternating_form(rng, m, d)
    return BundleDatum(form, random_structure(m, rng), random_structure(d, rng))


def _sampled_member(seed, m=2, d=1):
    rng = np.random.default_rng(seed)
    form = random_alternating_form(rng, m, d)
    result = sample_point(form, seed=seed)
    assert result.found
    return BundleDatum(form, result.base, result.fibre)


# ---------------------------------------------------------------------------
# Rank audit


def test_numerical_rank_records_decision():
    decisions = []
    rank = numerical_rank(np.diag([3.0, 2.0, 1e-12]), 1e-9, 3.0, "probe", decisions)
    assert rank == 2
    (decision,) = decisions
    assert decision.label == "probe"
    assert decision.rank == 2
    assert decision.smallest_kept == pytest.approx(2.0)
    assert decision.largest_dropped == pytest.approx(1e-12)
    assert decision.threshold == pytest.approx(3e-9)


def test_numerical_rank_near_threshold_warns():
    warnings = []
    rank = numerical_rank(np.diag([1.0, 5e-9]), 1e-9, 1.0, "close", None, warnings)
    assert rank == 2
    assert len(warnings) == 1
    assert "close" in warnings[0]


def test_numerical_rank_external_scale_suppresses_noise():
    noise = np.full((2, 2), 1e-12)
    assert numerical_rank(noise, 1e-9, 1.0, "noise") == 0
    # without the external scale the block's own norm promotes the noise
    assert numerical_rank(noise, 1e-9, 0.0, "noise") == 1


def test_numerical_rank_empty_matrix():
    decisions = []
    assert numerical_rank(np.zeros((0, 3)), 1e-9, 1.0, "empty", decisions) == 0
    assert decisions[0].rank == 0


# ---------------------------------------------------------------------------
# One-forms and low-degree counts


def test_h0_forms_fixtures(iwasawa, kodaira_surface):
    space = h0_forms(iwasawa)
    assert space.dim == 3
    assert space.annihilator.shape == (1, 1)
    surface = h0_forms(kodaira_surface)
    assert surface.dim == 1
    assert surface.annihilator.shape == (0, 1)


def test_h0_forms_product_keeps_everything():
    datum = product_datum(2, 1)
    assert h0_forms(datum).dim == 3


def test_annihilator_kills_hermitian_image():
    datum = _sampled_member(71)
    space = h0_forms(datum)
    flat = datum.split.hermitian.reshape(datum.split.fibre_half_rank, -1)
    if space.annihilator.size:
        assert np.max(np.abs(space.annihilator @ flat)) < 1e-9 * max(1.0, datum.split.scale)
        gram = space.annihilator @ space.annihilator.conj().T
        assert np.allclose(gram, np.eye(space.annihilator.shape[0]), atol=1e-10)


def test_closed_forms_fixtures(iwasawa, kodaira_surface):
    assert closed_forms_dim(iwasawa) == 2
    assert closed_forms_dim(kodaira_surface) == 1
    assert closed_forms_dim(product_datum(2, 1)) == 3


@pytest.mark.parametrize("seed", [72, 73, 74])
def test_closed_forms_at_most_h0(seed):
    datum = _random_datum(seed, 3, 2)
    assert closed_forms_dim(datum) <= h0_forms(datum).dim


def test_h1_structure_fixtures(iwasawa, kodaira_surface):
    assert h1_structure_sheaf(iwasawa) == 2
    assert h1_structure_sheaf(kodaira_surface) == 2


def test_parallelizable_fixtures(iwasawa, kodaira_surface):
    assert is_parallelizable(iwasawa)
    assert not is_parallelizable(kodaira_surface)
    assert is_parallelizable(product_datum(2, 1))


@pytest.mark.parametrize("seed,m,d", [(75, 2, 1), (76, 3, 2), (77, 1, 1)])
def test_parallelizable_iff_all_forms_survive(seed, m, d):
    datum = _random_datum(seed, m, d)
    assert is_parallelizable(datum) == (h0_forms(datum).dim == m + d)


# ---------------------------------------------------------------------------
# Spectral table for the structure sheaf


def test_leray_iwasawa_frozen(iwasawa):
    table = leray_table(iwasawa)
    assert np.array_equal(table.e2, [[1, 1], [2, 2], [1, 1]])
    assert np.array_equal(table.e3, [[1, 0], [2, 2], [0, 1]])
    assert table.total_dims(2) == [1, 3, 3, 1]
    assert table.total_dims(3) == [1, 2, 2, 1]
    assert structure_sheaf_dims(iwasawa) == [1, 2, 2, 1]


def test_leray_iwasawa_d2_entry(iwasawa):
    table = leray_table(iwasawa)
    assert set(table.d2) == {(0, 1)}
    assert np.allclose(table.d2[(0, 1)], [[2.0]], atol=1e-12)


def test_leray_kodaira_no_differential(kodaira_surface):
    table = leray_table(kodaira_surface)
    assert table.d2 == {}
    assert np.array_equal(table.e3, table.e2)
    assert structure_sheaf_dims(kodaira_surface) == [1, 2, 1]


@pytest.mark.parametrize("m,d", [(1, 1), (2, 1), (2, 2), (3, 2)])
def test_leray_product_is_binomial(m, d):
    dims = structure_sheaf_dims(product_datum(m, d))
    assert dims == [math.comb(m + d, p) for p in range(m + d + 1)]


def test_e3_never_exceeds_e2():
    table = leray_table(_sampled_member(78))
    assert np.all(table.e3 <= table.e2)
    assert np.all(table.e3 >= 0)


def test_d2_squares_to_zero_off_variety():
    datum = _random_datum(79, 4, 2)
    table = leray_table(datum)
    scale = max(1.0, datum.split.scale)
    composed = table.d2[(2, 1)] @ table.d2[(0, 2)]
    assert np.max(np.abs(composed)) < 1e-10 * scale**2
    for (i, j), outgoing in table.d2.items():
        inner = table.d2.get((i - 2, j + 1))
        if inner is not None:
            assert np.max(np.abs(outgoing @ inner)) < 1e-10 * scale**2


def test_euler_characteristic_preserved():
    for datum in (_random_datum(80, 3, 1), _sampled_member(81)):
        table = leray_table(datum)
        e2_sum = sum((-1) ** p * n for p, n in enumerate(table.total_dims(2)))
        e3_sum = sum((-1) ** p * n for p, n in enumerate(table.total_dims(3)))
        assert e2_sum == e3_sum == 0


def test_dimension_symmetry_on_members(iwasawa, kodaira_surface):
    for datum in (iwasawa, kodaira_surface, _sampled_member(82)):
        dims = structure_sheaf_dims(datum)
        assert dims == dims[::-1]
        assert dims[0] == 1


@pytest.mark.parametrize("seed", [83, 84])
def test_h1_two_paths_agree(seed):
    datum = _sampled_member(seed)
    assert structure_sheaf_dims(datum)[1] == h1_structure_sheaf(datum)


def test_representatives_orthonormal_and_clear_images(iwasawa):
    table = leray_table(iwasawa)
    for key, reps in table.representatives.items():
        if reps.shape[1]:
            gram = reps.conj().T @ reps
            assert np.allclose(gram, np.eye(reps.shape[1]), atol=1e-10)
        image = table.images[key]
        if image.size and reps.size:
            assert np.max(np.abs(image.conj().T @ reps)) < 1e-10


def test_representative_counts_match_e3():
    table = leray_table(_random_datum(85, 3, 2))
    for (i, j), reps in table.representatives.items():
        assert reps.shape[1] == table.e3[i, j]


# ---------------------------------------------------------------------------
# Tangent-sheaf dimensions


def test_tangent_iwasawa_frozen(iwasawa):
    tangent = tangent_table(iwasawa)
    assert tangent.dims == (3, 6, 6, 3)
    assert tangent.level_ranks == (0, 0, 0, 0)
    assert tangent.twist_residual == 0.0


def test_tangent_kodaira_frozen(kodaira_surface):
    tangent = tangent_table(kodaira_surface)
    assert tangent.dims == (1, 2, 1)
    assert tangent.level_ranks == (1, 1, 0)


@pytest.mark.parametrize("m,d", [(1, 1), (2, 1), (2, 2)])
def test_tangent_product_scales_binomials(m, d):
    tangent = tangent_table(product_datum(m, d))
    expected = tuple((m + d) * math.comb(m + d, p) for p in range(m + d + 1))
    assert tangent.dims == expected


def test_theta_cohomology_fixtures(iwasawa, kodaira_surface):
    middle = theta_cohomology(iwasawa, 1)
    assert (middle.dim, middle.coker_dim, middle.ker_dim) == (6, 2, 4)
    surface = theta_cohomology(kodaira_surface, 1)
    assert (surface.dim, surface.coker_dim, surface.ker_dim) == (2, 1, 1)


def test_theta_cohomology_matches_table(iwasawa):
    table = leray_table(iwasawa)
    tangent = tangent_table(iwasawa, table)
    for degree, dim in enumerate(tangent.dims):
        assert theta_cohomology(iwasawa, degree, table).dim == dim


@pytest.mark.parametrize("degree", [-1, 4])
def test_theta_cohomology_rejects_bad_degree(iwasawa, degree):
    with pytest.raises(ValueError):
        theta_cohomology(iwasawa, degree)


# ---------------------------------------------------------------------------
# Classification and reports


def test_classify_fixtures(iwasawa, kodaira_surface):
    assert classify_blocks(iwasawa) == "zero_hermitian"
    assert classify_blocks(kodaira_surface) == "pure_hermitian"
    assert classify_blocks(product_datum(2, 1)) == "abelian"


def test_classify_mixed_and_undefined():
    datum = _random_datum(86, 2, 1)
    split = datum.split
    assert np.max(np.abs(split.holomorphic)) > 1e-6
    assert np.max(np.abs(split.hermitian)) > 1e-6
    assert classify_blocks(datum) == "mixed"
    assert classify_blocks(_random_datum(87, 2, 2)) is None


def test_kodaira_spencer_fixtures(iwasawa, kodaira_surface):
    report = kodaira_spencer_report(iwasawa)
    assert (report.h1_tangent, report.target) == (6, 6)
    assert report.matches_target
    assert report.classification == "zero_hermitian"

    surface = kodaira_spencer_report(kodaira_surface)
    assert (surface.h1_tangent, surface.target) == (2, 2)
    assert surface.matches_target

    product = kodaira_spencer_report(product_datum(2, 1))
    assert (product.h1_tangent, product.target) == (9, 6)
    assert not product.matches_target


def test_bundle_report_fields(iwasawa):
    report = bundle_report(iwasawa)
    assert report.h_structure == (1, 2, 2, 1)
    assert report.h0_one_forms == 3
    assert report.closed_one_forms == 2
    assert report.h1_structure == 2
    assert report.parallelizable is True
    assert report.h_tangent == (3, 6, 6, 3)
    assert report.deformation_target == 6
    assert report.classification == "zero_hermitian"
    assert report.twist_residual == 0.0
    assert report.warnings == ()
    labels = [decision.label for decision in report.decisions]
    assert "hermitian block" in labels
    assert "holomorphic block" in labels


def test_bundle_report_endpoints_are_one():
    for datum in (_sampled_member(88), product_datum(3, 1)):
        report = bundle_report(datum)
        assert report.h_structure[0] == 1
        assert report.h_structure[-1] == 1
        assert len(report.h_structure) == \
            datum.split.base_half_rank + datum.split.fibre_half_rank + 1
