"""The compiled kernels and the numpy fallback must agree bit for bit."""

import numpy as np
import pytest

from texsom import _backend
from texsom.som import TrainConfig, epoch_schedule, init_grid

C = _backend.compiled_kernels
P = _backend.python_kernels
pytestmark = pytest.mark.skipif(C is None, reason="compiled kernels not built")


def test_backend_flag():
    assert _backend.BACKEND in ("cython", "python")


@pytest.mark.parametrize("offset", [(0, 1), (1, 0), (1, 1), (1, -1), (-3, 2), (0, -4)])
def test_glcm_counts(rng, offset):
    q = rng.integers(0, 16, size=(23, 17)).astype(np.int64)
    np.testing.assert_array_equal(C.glcm_counts(q, 16, *offset), P.glcm_counts(q, 16, *offset))


def test_bmu(rng):
    W = rng.random((50, 13))
    for x in rng.random((100, 13)):
        assert C.bmu(W, x) == P.bmu(W, x)


def _run(k, kind, X, y, rule, match):
    grid = init_grid(6, 7, X.shape[1], seed=8)
    W = grid.weights
    wcc = np.zeros((grid.n_nodes, 3), dtype=np.int64)
    cfg = TrainConfig(epochs=6, seed=8)
    counts = []
    for t, eta, H, order in epoch_schedule(grid, cfg, len(X)):
        if kind == "som":
            counts.append(k.som_epoch(W, X, order, H, cfg.cutoff, eta))
        else:
            wcc[:] = 0
            counts.append(k.isom_epoch(W, wcc, X, y, order, H, cfg.cutoff, eta, match, rule))
    return W.tobytes(), wcc.tobytes(), counts


@pytest.mark.parametrize("kind", ["som", "isom"])
@pytest.mark.parametrize("inc_selected", [True, False])
@pytest.mark.parametrize("match_bmu", [True, False])
def test_epochs_bit_identical(rng, kind, inc_selected, match_bmu):
    X = rng.random((60, 9))
    y = rng.integers(0, 3, 60).astype(np.int64)
    assert _run(C, kind, X, y, inc_selected, match_bmu) == _run(P, kind, X, y, inc_selected, match_bmu)


def test_isom_step(rng):
    W1 = rng.random((25, 4))
    W2 = W1.copy()
    wcc1 = rng.integers(0, 3, (25, 2)).astype(np.int64)
    wcc2 = wcc1.copy()
    grid = init_grid(5, 5, 4)
    H = np.ascontiguousarray(np.exp(-grid.lattice_sq_dists() / 4.0))
    for x, c in zip(rng.random((40, 4)), rng.integers(0, 2, 40)):
        b1, s1 = C.isom_step(W1, wcc1, x, int(c), H, 1e-3, 0.3, False, True)
        b2, s2 = P.isom_step(W2, wcc2, x, int(c), H, 1e-3, 0.3, False, True)
        assert b1 == b2
        np.testing.assert_array_equal(s1, s2)
    assert W1.tobytes() == W2.tobytes()
    np.testing.assert_array_equal(wcc1, wcc2)
