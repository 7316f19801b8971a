"""Bloch-sphere lattices, sphere quadrature and the ordered row map used for grids."""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Tuple, TypeVar

import numpy as np
from scipy.integrate import trapezoid

from ..models import BlochGrid

logger = logging.getLogger(__name__)

WORKERS_ENV = "TWISTING_SQUEEZING_WORKERS"

T = TypeVar("T")
R = TypeVar("R")


def default_workers() -> int:
    """Thread count from TWISTING_SQUEEZING_WORKERS, else min(8, cpu count)."""
    fallback = min(8, os.cpu_count() or 1)
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return fallback
    try:
        workers = int(raw)
    except ValueError:
        logger.warning("Ignoring %s=%r: not an integer", WORKERS_ENV, raw)
        return fallback
    if workers < 1:
        logger.warning("Ignoring %s=%d: must be positive", WORKERS_ENV, workers)
        return fallback
    return workers


def map_rows(func: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Apply `func` to every item on a thread pool, results in input order."""
    items = list(items)
    workers = workers or default_workers()
    if workers == 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def direction_vectors(thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Unit vectors on a θ×φ lattice, shape (len(thetas), len(phis), 3)."""
    theta, phi = np.meshgrid(thetas, phis, indexing="ij")
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def vector_angles(vectors: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Polar and azimuthal angles of unit vectors (last axis of length 3)."""
    theta = np.arccos(np.clip(vectors[..., 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(vectors[..., 1], vectors[..., 0]), 2 * np.pi)
    return theta, phi


def sphere_quadrature(grid: BlochGrid) -> float:
    """∫ f dΩ: trapezoid rule in θ with the sinθ weight, uniform sum over φ."""
    ring = trapezoid(grid.values * np.sin(grid.theta)[:, None], grid.theta, axis=0)
    return float(ring.sum() * 2 * np.pi / grid.phi.size)
