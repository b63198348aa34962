"""
Property-based tests for transform and metric invariants

Tests verify:
1. Beamspace transform is unitary and exactly invertible
2. vec / unvec are inverse column-major maps
3. SN^-1(SN(Hv)) = Hv for any positive statistics
4. NMSE is invariant under common scaling and the beamspace change of basis
5. Averaged critic weights stay inside the element-wise range of the updates
"""

import numpy as np
import torch
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from src.channel.beamspace import from_beamspace, to_beamspace, unvec, vec
from src.channel.normalization import compute_norm_stats, stack_normalize, unstack_unnormalize
from src.estimation.metrics import NMSE_DB_FLOOR, nmse, to_db
from src.federated.averaging import average_critic_weights

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
dims = st.sampled_from([1, 2, 3, 4, 8])


@st.composite
def complex_matrices(draw, batch=None):
    n_r, n_t = draw(dims), draw(dims)
    shape = (n_r, n_t) if batch is None else (batch, n_r, n_t)
    re = draw(arrays(np.float64, shape, elements=finite))
    im = draw(arrays(np.float64, shape, elements=finite))
    return re + 1j * im


@given(complex_matrices())
def test_beamspace_round_trip(h):
    assert np.allclose(from_beamspace(to_beamspace(h)), h, atol=1e-8)


@given(complex_matrices())
def test_beamspace_preserves_energy(h):
    assert np.isclose(np.sum(np.abs(to_beamspace(h)) ** 2), np.sum(np.abs(h) ** 2),
                      rtol=1e-9, atol=1e-6)


@given(complex_matrices())
def test_vec_unvec(h):
    v = vec(h)
    assert v.shape == (h.size,)
    assert np.array_equal(unvec(v, *h.shape), h)
    assert np.array_equal(v[: h.shape[0]], h[:, 0])


@settings(max_examples=50, deadline=None)
@given(complex_matrices(batch=5))
def test_normalization_round_trip(hv):
    stats = compute_norm_stats(hv)
    x = stack_normalize(hv, stats)
    assert x.shape == (5, 2, hv.shape[2], hv.shape[1])
    assert np.allclose(unstack_unnormalize(x, stats), hv, atol=1e-6)


@given(complex_matrices(), st.floats(min_value=1e-3, max_value=1e3))
def test_nmse_scale_invariant(h, c):
    if np.sum(np.abs(h) ** 2) < 1e-6:
        return
    est = 0.5 * h + 0.1
    base = nmse(h, est).linear
    assert np.isclose(nmse(c * h, c * est).linear, base, rtol=1e-9)
    assert np.isclose(nmse(to_beamspace(h), to_beamspace(est)).linear, base, rtol=1e-6)


@given(st.floats(min_value=0.0, max_value=1e6))
def test_to_db_floor(x):
    db = to_db(x)
    assert db >= NMSE_DB_FLOOR
    if x > 1e-10:
        assert np.isclose(db, 10 * np.log10(x))


@settings(deadline=None)
@given(st.lists(arrays(np.float32, (3, 2), elements=st.floats(-10, 10, width=32)),
                min_size=1, max_size=6))
def test_average_within_bounds(updates):
    tensors = [{"w": torch.from_numpy(u)} for u in updates]
    avg = average_critic_weights(tensors)["w"].numpy()
    stack = np.stack(updates)
    assert np.all(avg >= stack.min(axis=0) - 1e-5)
    assert np.all(avg <= stack.max(axis=0) + 1e-5)
