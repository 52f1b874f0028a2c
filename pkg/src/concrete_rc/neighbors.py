"""Brute-force nearest-neighbour search with a Theiler exclusion window.

Chunked exact search rather than a tree: results are deterministic, and ties
go to the lowest index because ``argmin`` returns the first occurrence.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InsufficientDataError

_CHUNK_ELEMS = 4_000_000


def nearest_neighbors(points, theiler: int = 0, metric: str = "euclidean",
                      skip_within: float | None = None, limit: int | None = None):
    """Index and distance of each point's nearest neighbour.

    Candidates j with ``|i - j| <= theiler`` are excluded (``i`` itself always).
    ``limit`` restricts both queries and candidates to the first ``limit``
    points. Candidates at distance ``<= skip_within`` count as coincident and
    are ignored.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if limit is not None:
        pts = pts[:limit]
    m = pts.shape[0]
    if m <= 2 * theiler + 1:
        raise InsufficientDataError(
            f"{m} points leave no neighbour candidates outside a Theiler window of {theiler}"
        )
    metric_name = "sqeuclidean" if metric == "euclidean" else metric
    idx = np.empty(m, dtype=np.int64)
    dist = np.empty(m)
    step = max(1, _CHUNK_ELEMS // m)
    cols = np.arange(m)
    for start in range(0, m, step):
        stop = min(m, start + step)
        d = cdist(pts[start:stop], pts, metric=metric_name)
        rows = np.arange(start, stop)[:, None]
        d[np.abs(cols[None, :] - rows) <= theiler] = np.inf
        if skip_within is not None:
            d[d <= (skip_within**2 if metric == "euclidean" else skip_within)] = np.inf
        j = np.argmin(d, axis=1)
        idx[start:stop] = j
        dist[start:stop] = d[np.arange(stop - start), j]
    if not np.all(np.isfinite(dist)):
        raise InsufficientDataError("some points have no admissible neighbour")
    if metric == "euclidean":
        dist = np.sqrt(dist)
    return idx, dist
