import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, strategies as st

from rbmlab import EnsembleSpec, build_variance_profile, sample
from rbmlab.counter_rng import normal_pair


# ---------------------------------------------------------------------------
# variance profiles
# ---------------------------------------------------------------------------

def test_smooth_profile_small_oracle():
    # For N=3, W=1 the resolvent (1 + L)^{-1} of the second-difference
    # operator can be inverted by hand:
    #   M = [[2, -1, 0], [-1, 3, -1], [0, -1, 2]],  det M = 8
    #   J = M^{-1} = (1/8) [[5, 2, 1], [2, 4, 2], [1, 2, 5]]
    prof = build_variance_profile("smooth", 3, 1.0)
    expected = np.array([[5, 2, 1], [2, 4, 2], [1, 2, 5]]) / 8.0
    npt.assert_allclose(prof.to_dense(), expected, atol=1e-14)


def test_smooth_profile_decay_rate():
    # interior variances fall off like exp(-theta |i-j|) with
    # cosh(theta) = 1 + 1/(2 W^2)
    w = 5.0
    prof = build_variance_profile("smooth", 400, w)
    theta = np.arccosh(1.0 + 1.0 / (2 * w * w))
    i = 200
    d = np.arange(1, 20)
    ratios = prof.bands[d, i] / prof.bands[0, i]
    npt.assert_allclose(ratios, np.exp(-theta * d), rtol=1e-6)


def test_simple_profile_literal_values():
    prof = build_variance_profile("simple", 12, 3, edge_renorm=False)
    dense = prof.to_dense()
    assert prof.half_bandwidth == 3
    npt.assert_allclose(dense[5, 2:9], np.full(7, 1 / 6))
    assert dense[5, 1] == 0.0
    # corner row has only W+1 entries
    npt.assert_allclose(prof.row_sums()[0], (3 + 1) / 6)


def test_simple_renormalization_keeps_symmetry():
    prof = build_variance_profile("simple", 40, 6)
    dense = prof.to_dense()
    npt.assert_allclose(dense, dense.T, atol=0)
    npt.assert_allclose(prof.row_sums(), np.ones(40), atol=1e-13)
    # scaling must not touch the band support
    assert np.all(dense[0, 8:] == 0.0)


def test_block_profile_example_values():
    prof = build_variance_profile("block", 12, 4, alpha=0.1)
    dense = prof.to_dense()
    assert prof.half_bandwidth == 7
    npt.assert_allclose(dense[5, 6], (1 - 0.2) / 4)    # interior block
    npt.assert_allclose(dense[0, 1], (1 - 0.1) / 4)    # edge block
    npt.assert_allclose(dense[1, 4], 0.1 / 4)          # neighbour coupling
    assert dense[0, 8] == 0.0                          # beyond neighbours


def test_block_profile_validation():
    with pytest.raises(ValueError):
        build_variance_profile("block", 12, 4, alpha=0.3)
    with pytest.raises(ValueError):
        build_variance_profile("block", 13, 4, alpha=0.1)
    with pytest.raises(ValueError):
        build_variance_profile("block", 12, 4)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError, match="unknown profile kind"):
        build_variance_profile("banded", 10, 2)


@given(
    kind=st.sampled_from(["simple", "smooth", "block"]),
    nblocks=st.integers(2, 6),
    w=st.integers(1, 7),
)
def test_profiles_have_unit_row_sums(kind, nblocks, w):
    n = nblocks * w if kind == "block" else nblocks * w + 3
    alpha = 0.1 if kind == "block" else None
    prof = build_variance_profile(kind, n, w, alpha=alpha)
    npt.assert_allclose(prof.row_sums(), np.ones(n), atol=1e-12)
    assert np.all(prof.bands >= 0)
    dense = prof.to_dense()
    npt.assert_allclose(dense, dense.T, atol=0)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def small_spec():
    return EnsembleSpec(profile=build_variance_profile("simple", 48, 6), seed=99)


def test_sample_is_deterministic(small_spec):
    a = sample(small_spec, 17)
    b = sample(small_spec, 17)
    assert np.array_equal(a.bands, b.bands)
    # and does not depend on what was sampled before
    sample(small_spec, 2)
    c = sample(small_spec, 17)
    assert np.array_equal(a.bands, c.bands)


def test_sample_seed_and_index_matter(small_spec):
    other = EnsembleSpec(profile=small_spec.profile, seed=100)
    assert not np.array_equal(sample(small_spec, 0).bands, sample(other, 0).bands)
    assert not np.array_equal(sample(small_spec, 0).bands, sample(small_spec, 1).bands)


def test_sample_is_hermitian_with_real_diagonal(small_spec):
    h = sample(small_spec, 0)
    dense = h.to_dense()
    npt.assert_allclose(dense, dense.conj().T, atol=0)
    assert np.max(np.abs(h.bands[0].imag)) == 0.0


def test_sample_band_support_matches_profile(small_spec):
    h = sample(small_spec, 5)
    dense = h.to_dense()
    i, j = np.nonzero(dense)
    assert np.max(np.abs(i - j)) <= small_spec.profile.half_bandwidth


def test_entry_moments_match_profile():
    spec = EnsembleSpec(profile=build_variance_profile("smooth", 24, 2.0), seed=5)
    nsamp = 6000
    offdiag = np.empty(nsamp, dtype=np.complex128)
    diag = np.empty(nsamp)
    for k in range(nsamp):
        h = sample(spec, k)
        offdiag[k] = h.bands[1, 10]
        diag[k] = h.bands[0, 10].real
    j_off = spec.profile.bands[1, 10]
    j_diag = spec.profile.bands[0, 10]
    # complex entry: E H = 0, E|H|^2 = J, E H^2 = 0 (phase symmetry)
    assert abs(offdiag.mean()) < 4 * np.sqrt(j_off / nsamp)
    npt.assert_allclose(np.mean(np.abs(offdiag) ** 2), j_off, rtol=0.1)
    assert abs(np.mean(offdiag**2)) < 5 * j_off / np.sqrt(nsamp)
    # diagonal: real with variance J
    npt.assert_allclose(diag.var(), j_diag, rtol=0.1)
    assert abs(diag.mean()) < 4 * np.sqrt(j_diag / nsamp)


def test_counter_stream_decorrelated():
    # neighbouring counters must give unrelated output
    g0a, g1a = normal_pair(3, 0, np.arange(200_000))
    g0b, _ = normal_pair(3, 1, np.arange(200_000))
    assert abs(np.corrcoef(g0a, g1a)[0, 1]) < 0.01
    assert abs(np.corrcoef(g0a, g0b)[0, 1]) < 0.01
    assert abs(np.corrcoef(g0a[:-1], g0a[1:])[0, 1]) < 0.01


def test_normal_pair_moments():
    g0, g1 = normal_pair(7, 0, np.arange(1_000_000))
    for g in (g0, g1):
        assert abs(g.mean()) < 0.005
        npt.assert_allclose(g.var(), 1.0, rtol=0.01)
        npt.assert_allclose(np.mean(g**4), 3.0, rtol=0.03)
