import numpy as np

from curvn.grid import Samples, grid_sum, nested_sum, pairwise_sum, worker_count


def _grid(n):
    s = np.linspace(0, 1, n, endpoint=False)
    z = np.zeros((n, 2))
    return Samples(s, np.stack([s, s**2], 1), z, z, np.ones(n))


def _block(rows, cols):
    return np.cos(3 * rows.param[:, None] - cols.param[None, :]) * rows.x[:, None, 1]


def test_pairwise_sum_matches_fsum():
    rng = np.random.default_rng(1)
    vals = rng.standard_normal(1001)
    assert abs(pairwise_sum(vals) - np.sum(vals)) < 1e-12
    assert pairwise_sum([]) == 0.0


def test_sum_is_identical_for_any_worker_count():
    g = _grid(300)
    sums = {grid_sum(_block, g, g, workers=w) for w in (1, 2, 3, 8)}
    assert len(sums) == 1


def test_worker_count_reads_environment(monkeypatch):
    monkeypatch.setenv("CURVN_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("CURVN_THREADS", "junk")
    assert worker_count() >= 1


def test_nested_sum_reuses_coarse_sum():
    sym = lambda r, c: np.cos(r.param[:, None] - c.param[None, :])  # noqa: E731
    fine = _grid(256)
    coarse = fine.take(slice(0, None, 2))
    old = grid_sum(sym, coarse, coarse)
    assert abs(nested_sum(sym, old, fine) - grid_sum(sym, fine, fine)) < 1e-9
