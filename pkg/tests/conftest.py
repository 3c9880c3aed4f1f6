import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def classification_box():
    """classify() over {0..3}^3 for all families; shared by the acceptance tests."""
    from itertools import product

    from qhd.curve_config import FamilyParams
    from qhd.search import classify

    table = {}
    for family in "WNM":
        for p, q, r in product(range(4), repeat=3):
            params = FamilyParams(family, p, q, r)
            table[(family, p, q, r)] = classify(params)
    return table
