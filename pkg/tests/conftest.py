import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bpexplain import Mrf

# Three-node star used throughout: center 0 with leaves 1 and 2, strongly
# homophilous edges, and deliberately conflicting leaf priors.  All expected
# numbers asserted against it were derived by hand sum-product evaluation.
STAR_POT = np.array([[0.99, 0.01], [0.01, 0.99]])
STAR_PRIORS = {0: [0.5, 0.5], 1: [0.8, 0.2], 2: [0.1, 0.9]}


@pytest.fixture
def tiny_star() -> Mrf:
    return Mrf(priors=STAR_PRIORS, edges=[(0, 1), (0, 2)], potentials=STAR_POT)


@pytest.fixture
def square_with_chord() -> Mrf:
    """Four nodes, four edges, one cycle: 0-1, 0-2, 1-3, 2-3."""
    return Mrf(priors={0: [0.5, 0.5], 1: [0.7, 0.3], 2: [0.4, 0.6], 3: [0.2, 0.8]},
               edges=[(0, 1), (0, 2), (1, 3), (2, 3)], potentials=STAR_POT)
