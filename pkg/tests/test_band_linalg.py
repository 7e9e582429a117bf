import time

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings, strategies as st

from rbmlab import EnsembleSpec, HermitianBandMatrix, build_variance_profile, sample
from rbmlab.band_linalg import (
    SingularPivotError,
    dense_oracle_eigs,
    dense_oracle_logdet,
    eigenvalues,
    shifted_logdet,
)


def _random_matrix(kind, n, w, seed):
    alpha = 0.05 if kind == "block" else None
    spec = EnsembleSpec(profile=build_variance_profile(kind, n, w, alpha=alpha), seed=seed)
    return sample(spec, 0)


@given(
    kind=st.sampled_from(["simple", "smooth", "block"]),
    w=st.integers(1, 6),
    seed=st.integers(0, 10**6),
    zre=st.floats(-2.5, 2.5),
    zim=st.floats(-1.0, 1.0),
)
@settings(max_examples=40)
def test_logdet_matches_dense_oracle(kind, w, seed, zre, zim):
    n = 4 * w if kind == "block" else 4 * w + 3
    h = _random_matrix(kind, n, w, seed)
    z = complex(zre, zim if abs(zim) > 1e-3 else 0.17)
    got = shifted_logdet(h, z)
    want = dense_oracle_logdet(h.to_dense(), z)
    npt.assert_allclose(got.log_abs, want.log_abs, rtol=1e-10, atol=1e-10)
    npt.assert_allclose(got.phase, want.phase, atol=1e-9)
    assert abs(got.phase) == pytest.approx(1.0, abs=1e-12)


def test_logdet_jit_and_fallback_agree():
    h = _random_matrix("simple", 60, 7, seed=3)
    for z in (0.5 + 0.25j, -1.0 + 1e-4j, 2.2 + 0.9j):
        a = shifted_logdet(h, z, use_jit=True)
        b = shifted_logdet(h, z, use_jit=False)
        npt.assert_allclose(a.log_abs, b.log_abs, rtol=1e-13)
        npt.assert_allclose(a.phase, b.phase, atol=1e-13)


def test_logdet_value_identity():
    h = _random_matrix("simple", 12, 3, seed=8)
    z = 0.4 + 0.3j
    ld = shifted_logdet(h, z)
    det = np.linalg.det(h.to_dense() - z * np.eye(12))
    npt.assert_allclose(ld.value, det, rtol=1e-10)


def test_real_shift_gives_real_determinant_phase():
    # det(H - x) is real for Hermitian H and real x, so the phase is +-1
    h = _random_matrix("smooth", 30, 3, seed=0)
    for x in (-1.0, 0.0, 0.7):
        ld = shifted_logdet(h, x)
        assert abs(ld.phase.imag) < 1e-12
        assert abs(abs(ld.phase.real) - 1.0) < 1e-12


def test_singular_pivot_raises():
    bands = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=np.complex128)
    h = HermitianBandMatrix(size=2, half_bandwidth=1, bands=bands)
    with pytest.raises(SingularPivotError):
        shifted_logdet(h, 0.0)
    # the same matrix is perfectly fine once shifted off the bad point
    ld = shifted_logdet(h, 1e-3)
    assert np.isfinite(ld.log_abs)


@given(
    kind=st.sampled_from(["simple", "smooth", "block"]),
    w=st.integers(1, 5),
    seed=st.integers(0, 10**6),
)
@settings(max_examples=25)
def test_eigenvalues_match_jacobi_oracle(kind, w, seed):
    n = 4 * w if kind == "block" else 3 * w + 5
    h = _random_matrix(kind, n, w, seed)
    fast = eigenvalues(h)
    slow = dense_oracle_eigs(h.to_dense())
    scale = max(1.0, np.max(np.abs(fast)))
    npt.assert_allclose(fast, slow, atol=1e-8 * scale)
    assert np.all(np.diff(fast) >= -1e-12)


def test_eigenvalues_trace_identities():
    h = _random_matrix("simple", 80, 9, seed=21)
    ev = eigenvalues(h)
    dense = h.to_dense()
    npt.assert_allclose(ev.sum(), np.trace(dense).real, atol=1e-9)
    npt.assert_allclose((ev**2).sum(), np.linalg.norm(dense) ** 2, rtol=1e-12)


def test_jacobi_oracle_on_analytic_two_by_two():
    a = np.array([[1.0, 2.0 - 1.0j], [2.0 + 1.0j, -1.0]])
    # eigenvalues of [[a, b], [conj(b), -a]] are +-sqrt(a^2 + |b|^2)
    want = np.array([-np.sqrt(6.0), np.sqrt(6.0)])
    npt.assert_allclose(dense_oracle_eigs(a), want, atol=1e-12)


def _median_lu_seconds(n, b, reps=9):
    spec = EnsembleSpec(profile=build_variance_profile("simple", n, b), seed=1)
    h = sample(spec, 0)
    shifted_logdet(h, 0.3j)  # warm the jit cache
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        shifted_logdet(h, 0.3j)
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def test_logdet_cost_scales_like_band_not_dense():
    # doubling N at fixed b should roughly double the cost (never ~4x as a
    # dense sweep would), and the b-dependence must stay polynomial ~b^2;
    # generous brackets keep this robust to timer noise
    t_n = _median_lu_seconds(768, 8)
    t_2n = _median_lu_seconds(1536, 8)
    assert t_2n / t_n < 3.2, (t_n, t_2n)
    t_b = _median_lu_seconds(1024, 8)
    t_4b = _median_lu_seconds(1024, 32)
    assert t_4b / t_b < 60.0, (t_b, t_4b)
    assert t_4b > t_b
