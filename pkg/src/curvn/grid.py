"""Blocked, thread-parallel double sums with a fixed reduction order.

Rows are cut into blocks of ``BLOCK_ROWS`` regardless of the worker count,
each block is reduced to per-row sums, and the row sums are combined by a
pairwise tree.  The result is therefore bit-identical for any number of
workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, NamedTuple

import numpy as np

BLOCK_ROWS = 64


class Samples(NamedTuple):
    """Parameters, per-point data and quadrature weight factors of a grid."""

    param: np.ndarray
    x: np.ndarray
    v: np.ndarray
    a: np.ndarray
    weight: np.ndarray

    def take(self, index) -> "Samples":
        return Samples(*(f[index] for f in self))


def worker_count() -> int:
    value = os.environ.get("CURVN_THREADS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return os.cpu_count() or 1


def pairwise_sum(values) -> float:
    """Sum by a balanced binary tree, independent of any chunking."""
    vals = np.asarray(values, dtype=float).ravel()
    if vals.size == 0:
        return 0.0
    while vals.size > 1:
        if vals.size % 2:
            vals = np.append(vals, 0.0)
        vals = vals[0::2] + vals[1::2]
    return float(vals[0])


KernelBlock = Callable[[Samples, Samples], np.ndarray]


def grid_sum(kernel_block: KernelBlock, rows: Samples, cols: Samples, workers: int | None = None) -> float:
    """Sum_ij w_i w_j K(row_i, col_j) over the full rows x cols grid."""
    n = rows.param.size
    starts = list(range(0, n, BLOCK_ROWS))

    def block(i0):
        sub = rows.take(slice(i0, i0 + BLOCK_ROWS))
        K = kernel_block(sub, cols)
        return np.sum(K * cols.weight[None, :], axis=1) * sub.weight

    workers = worker_count() if workers is None else workers
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, starts))
    else:
        parts = [block(i0) for i0 in starts]
    return pairwise_sum(np.concatenate(parts)) if parts else 0.0


def nested_sum(kernel_block: KernelBlock, old_sum: float | None, grid: Samples) -> float:
    """Full-grid sum, reusing the sum over the even-indexed subgrid.

    ``grid`` is the refined grid whose even-indexed points form the previous
    grid; the kernel is symmetric, so the mixed even/odd part is counted twice.
    """
    if old_sum is None:
        return grid_sum(kernel_block, grid, grid)
    even, odd = grid.take(slice(0, None, 2)), grid.take(slice(1, None, 2))
    mixed = grid_sum(kernel_block, odd, even)
    return old_sum + 2.0 * mixed + grid_sum(kernel_block, odd, odd)
