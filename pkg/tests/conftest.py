import numpy as np
import pytest

import tbi


@pytest.fixture
def iwasawa():
    return tbi.iwasawa_datum()


@pytest.fixture
def kodaira_surface():
    """An elliptic surface bundle (m = d = 1) that is not parallelizable:
    the form pairs the two base generators into i times the second fibre
    generator, and with the structures below the split has holomorphic block
    zero and hermitian block i."""
    form = tbi.ExtensionForm(np.array([[[0, 0], [0, 0]], [[0, 1], [-1, 0]]]))
    base = tbi.ComplexStructure(np.array([[1.0], [-1j]]))
    fibre = tbi.ComplexStructure(np.array([[2j], [1.0]]))
    return tbi.BundleDatum.checked(form, base, fibre)
