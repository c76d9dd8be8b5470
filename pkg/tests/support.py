"""Shared construction helpers for the test suite."""

import numpy as np

from tbi import ComplexStructure, ExtensionForm, standard_structure


def random_alternating_form(rng, m, d, span=3):
    """Random integer extension form with entries in [-span, span]."""
    raw = rng.integers(-span, span + 1, size=(2 * d, 2 * m, 2 * m))
    return ExtensionForm(raw - raw.transpose(0, 2, 1))


def random_group_element_parts(rng, form, span=5):
    fibre = rng.integers(-span, span + 1, size=form.fibre_rank)
    base = rng.integers(-span, span + 1, size=form.base_rank)
    return fibre, base


def gaussian_bilinear_form(m, coeffs) -> ExtensionForm:
    """Extension form (d = 1) of a complex-bilinear alternating form on the
    Gaussian-integer lattice Z[i]^m with Gaussian-integer coefficients:
    sum over h < l of coeffs[h, l] * (x_h y_l - x_l y_h), expanded in the
    basis e_{2a} = unit_a, e_{2a+1} = i * unit_a (and f1 = 1, f2 = i).

    Such forms split with hermitian and antiholomorphic blocks exactly zero
    for the standard structures, which makes them the building block for
    parallelizable non-product instances.
    """
    coeffs = np.asarray(coeffs)
    generators = []
    for a in range(m):
        for unit in (1, 1j):
            vector = np.zeros(m, dtype=complex)
            vector[a] = unit
            generators.append(vector)
    tensor = np.zeros((2, 2 * m, 2 * m), dtype=np.int64)
    for i, x in enumerate(generators):
        for j, y in enumerate(generators):
            value = 0j
            for h in range(m):
                for l in range(h + 1, m):
                    value += coeffs[h, l] * (x[h] * y[l] - x[l] * y[h])
            tensor[0, i, j] = int(round(value.real))
            tensor[1, i, j] = int(round(value.imag))
    return ExtensionForm(tensor)


def unimodular_matrix(rng, n, steps=None) -> np.ndarray:
    """Random GL(n, Z) matrix built from row shears, a permutation and sign
    flips.  Shear counts and magnitudes are kept small so the matrix stays
    well-conditioned (the tests rely on exact-zero blocks surviving the
    change of basis numerically)."""
    if steps is None:
        steps = n
    matrix = np.eye(n, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(n, size=2, replace=False)
        matrix[i] += int(rng.choice([-1, 1])) * matrix[j]
    matrix = matrix[rng.permutation(n)]
    matrix *= rng.choice([-1, 1], size=(n, 1))
    return matrix


def integer_inverse(matrix) -> np.ndarray:
    inverse = np.rint(np.linalg.inv(matrix)).astype(np.int64)
    assert np.array_equal(matrix @ inverse, np.eye(len(matrix), dtype=np.int64))
    return inverse


def transport(form, base, fibre, basis_change_base, basis_change_fibre):
    """Rewrite a bundle datum in new lattice bases.

    The new basis vectors are the columns of the change matrices expressed in
    the old bases; the subspaces do not move, so membership and all block
    norms are preserved up to roundoff.
    """
    q_inv = integer_inverse(basis_change_fibre)
    tensor = np.einsum("lk,kij,ia,jb->lab", q_inv, form.coefficients,
                       basis_change_base, basis_change_base)
    new_base = ComplexStructure(
        np.linalg.solve(basis_change_base.astype(float), base.period))
    new_fibre = ComplexStructure(q_inv @ fibre.period)
    return ExtensionForm(tensor), new_base, new_fibre


def transported_case1(rng, m):
    """A parallelizable-type instance (hermitian block exactly zero) in a
    scrambled lattice basis: complex-bilinear Gaussian-integer form with the
    standard structures, transported by random unimodular matrices."""
    while True:
        coeffs = rng.integers(-2, 3, size=(m, m)) + 1j * rng.integers(-2, 3, size=(m, m))
        if np.any(np.triu(coeffs, k=1)):
            break
    form = gaussian_bilinear_form(m, coeffs)
    p = unimodular_matrix(rng, 2 * m)
    q = unimodular_matrix(rng, 2)
    return transport(form, standard_structure(m), standard_structure(1), p, q)
