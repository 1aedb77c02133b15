"""Backend selection for the hot kernels.

The compiled extension is used when importable. Set ``TGCNTRACK_PURE=1`` to
force the pure-Python fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("TGCNTRACK_PURE"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass


def available_backends():
    names = {"python": _kernels_py}
    try:
        from . import _kernels

        names["cython"] = _kernels
    except ImportError:
        pass
    return names


def solve_assignment(cost) -> list:
    """Row-to-column assignment (-1 for unassigned) with non-finite entries forbidden.

    Forbidden cells are replaced by a penalty exceeding any achievable
    difference in finite cost, so the solver first maximises the number of
    admissible pairs and then minimises their total cost. Pairs landing on a
    forbidden cell are reported as unassigned.
    """
    c = np.array(cost, dtype=float, ndmin=2)
    if c.size == 0:
        return [-1] * (c.shape[0] if c.ndim == 2 else 0)
    ok = np.isfinite(c)
    if not ok.any():
        return [-1] * c.shape[0]
    if not ok.all():
        finite = c[ok]
        lo, hi = float(finite.min()), float(finite.max())
        k = min(c.shape)
        c = np.where(ok, c, hi + (hi - lo + 1.0) * (k + 1))
    out = _impl.solve_assignment(c)
    return [j if j >= 0 and ok[i, j] else -1 for i, j in enumerate(out)]


def iou_matrix(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float).reshape(-1, 4)
    b = np.asarray(b, dtype=float).reshape(-1, 4)
    if len(a) == 0 or len(b) == 0:
        return np.zeros((len(a), len(b)))
    return np.asarray(_impl.iou_matrix(a, b), dtype=float)
