import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdhkb import _backend, _kernels_py
from sdhkb.coverage_sim import WorkloadParams, simulate_uncoverage

try:
    compiled = _backend.get_backend("cython")
except ImportError:
    compiled = None

needs_ext = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def test_active_backend_reported():
    assert _backend.BACKEND in ("cython", "python")


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.get_backend("fortran")


def _attach(mod, uniforms, freqs, n_active, lam, grow):
    freqs = freqs.copy()
    choices, n = mod.attach_draws(uniforms, freqs, n_active, lam, grow)
    return choices, n, freqs


@needs_ext
@settings(max_examples=100, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    size=st.integers(1, 60),
    draws=st.integers(0, 300),
    lam=st.floats(0.01, 20),
    grow=st.booleans(),
)
def test_attach_draws_identical(seed, size, draws, lam, grow):
    rng = np.random.default_rng(seed)
    uniforms = rng.random(draws)
    if grow:
        freqs = np.zeros(size + draws, dtype=np.int64)
        n_active = 0
    else:
        freqs = rng.integers(0, 5, size=size).astype(np.int64)
        n_active = size
    a = _attach(_kernels_py, uniforms, freqs, n_active, lam, grow)
    b = _attach(compiled, uniforms, freqs, n_active, lam, grow)
    assert np.array_equal(a[0], b[0]) and a[1] == b[1] and np.array_equal(a[2], b[2])


@needs_ext
@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_work=st.integers(1, 30), universe=st.integers(1, 50))
def test_uncoverage_identical(seed, n_work, universe):
    rng = np.random.default_rng(seed)
    ranks, offsets = [], [0]
    for _ in range(n_work):
        links = rng.choice(universe, size=rng.integers(1, universe + 1), replace=False)
        ranks.extend(links.tolist())
        offsets.append(len(ranks))
    ranks = np.array(ranks, dtype=np.int64)
    offsets = np.array(offsets, dtype=np.int64)
    sizes = np.arange(universe + 1, dtype=np.int64)
    a = _kernels_py.uncoverage_by_size(ranks, offsets, sizes)
    b = compiled.uncoverage_by_size(ranks, offsets, sizes)
    assert a.tobytes() == b.tobytes()


@needs_ext
@pytest.mark.parametrize("open_universe", [False, True])
def test_simulation_identical_across_backends(open_universe):
    params = WorkloadParams(open_universe=open_universe)
    sizes = [0, 5, 10, 20, 30, 50, 100]
    a = simulate_uncoverage(params, sizes, seed=3, replicates=5, backend=_kernels_py)
    b = simulate_uncoverage(params, sizes, seed=3, replicates=5, backend=compiled)
    assert a == b


def test_python_kernel_matches_weights_directly():
    # frequencies [1, 0] at lam 2.5: boundary of index 0 sits at 3.5/6
    picks = []
    for u in (0.0, 3.5 / 6 - 1e-12, 3.5 / 6 + 1e-12, 0.999999):
        freqs = np.array([1, 0], dtype=np.int64)
        choices, _ = _kernels_py.attach_draws(np.array([u]), freqs, 2, 2.5, False)
        picks.append(int(choices[0]))
        assert freqs.sum() == 2
    assert picks == [0, 0, 1, 1]


def test_growing_pool_mints_first():
    freqs = np.zeros(4, dtype=np.int64)
    choices, n = _kernels_py.attach_draws(np.array([0.3, 0.3]), freqs, 0, 2.5, True)
    assert choices[0] == 0 and n >= 1 and freqs.sum() == 2
