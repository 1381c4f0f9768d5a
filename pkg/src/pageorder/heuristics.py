"""Zero-parameter ordering baselines over embedding similarity."""

from __future__ import annotations

import warnings

import numpy as np

from .errors import DomainError
from .numcore import RngStream

__all__ = ["order_random", "order_greedy_nn", "order_tsp_nn", "cosine_similarity_matrix"]


def _require_pages(n: int) -> None:
    if n < 2:
        raise DomainError(f"ordering needs at least 2 pages, got {n}")


def order_random(n: int, seed: int | RngStream) -> np.ndarray:
    """Uniformly random permutation of slot indices."""
    _require_pages(n)
    stream = seed if isinstance(seed, RngStream) else RngStream(seed).split("random-order")
    return stream.permutation(n).astype(np.int64)


def cosine_similarity_matrix(pages: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarity; zero-norm rows fall back to -1 with a warning."""
    pages = np.asarray(pages, dtype=np.float64)
    norms = np.linalg.norm(pages, axis=1)
    zero = norms == 0.0
    if zero.any():
        warnings.warn("zero-norm embedding: treating its similarities as -1", stacklevel=3)
    safe = np.where(zero, 1.0, norms)
    unit = pages / safe[:, None]
    sim = unit @ unit.T
    sim[zero, :] = -1.0
    sim[:, zero] = -1.0
    return sim


def _greedy_from(sim: np.ndarray, start: int) -> tuple[np.ndarray, float]:
    """Nearest-neighbor chain from a start page; ties go to the lowest slot."""
    n = sim.shape[0]
    visited = np.zeros(n, dtype=bool)
    order = [start]
    visited[start] = True
    total_distance = 0.0
    current = start
    for _ in range(n - 1):
        candidates = np.where(~visited, sim[current], -np.inf)
        nxt = int(np.argmax(candidates))  # argmax returns the lowest index on ties
        total_distance += 1.0 - sim[current, nxt]
        order.append(nxt)
        visited[nxt] = True
        current = nxt
    return np.asarray(order, dtype=np.int64), total_distance


def order_greedy_nn(pages: np.ndarray, seed: int | RngStream) -> np.ndarray:
    """Start from a seeded-random page, repeatedly append the most similar unvisited page."""
    pages = np.asarray(pages)
    _require_pages(pages.shape[0])
    stream = seed if isinstance(seed, RngStream) else RngStream(seed).split("greedy-start")
    start = int(stream.integers(0, pages.shape[0]))
    sim = cosine_similarity_matrix(pages)
    order, _ = _greedy_from(sim, start)
    return order


def order_tsp_nn(pages: np.ndarray) -> np.ndarray:
    """Open nearest-neighbor tour, best over all start pages.

    Distance is 1 - cosine similarity; ties between tours break toward
    the lowest start index.
    """
    pages = np.asarray(pages)
    n = pages.shape[0]
    _require_pages(n)
    sim = cosine_similarity_matrix(pages)
    best_order: np.ndarray | None = None
    best_cost = np.inf
    for start in range(n):
        order, cost = _greedy_from(sim, start)
        if cost < best_cost:
            best_cost = cost
            best_order = order
    assert best_order is not None
    return best_order
