"""KL divergence utilities for probability vectors.

Entries are clamped to [1e-12, 1] before any log so that hard-zero entries
from deterministic priors stay finite without perturbing comparisons at the
tolerances used anywhere in the package.
"""

from __future__ import annotations

import numpy as np

CLAMP_FLOOR = 1e-12


def _clamped(p) -> np.ndarray:
    return np.clip(np.asarray(p, dtype=np.float64), CLAMP_FLOOR, 1.0)


def kl(p, q) -> float:
    """KL(p || q) = sum_x p(x) ln(p(x) / q(x)), natural log."""
    p = _clamped(p)
    q = _clamped(q)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    return float(np.sum(p * np.log(p / q)))


def sym_kl(p, q) -> float:
    """Symmetric KL divergence: kl(p, q) + kl(q, p)."""
    return kl(p, q) + kl(q, p)
