import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcwave.pulses import (
    DegeneratePulseError,
    PulseKind,
    PulsePrototype,
    build_prototype,
    dzt_orthogonalize,
    edge_window,
)


def rc_formula(t, a):
    """sin(pi t) cos(pi a t) / (pi t (1 - (2 a t)^2)), written out term by term."""
    out = np.empty_like(t)
    for i, ti in enumerate(t):
        if ti == 0:
            out[i] = 1.0
        else:
            out[i] = np.sin(np.pi * ti) * np.cos(np.pi * a * ti) / (np.pi * ti * (1 - (2 * a * ti) ** 2))
    return out


def oqam_gram(q, K, M):
    """Re<b_i, b_j> over all real OQAM basis signals, built from their definition."""
    N = K * M
    D = N - 1
    n = np.arange(N)
    cols = []
    for k in range(K):
        for m in range(2 * M):
            shifted = q[(n - m * K // 2) % N]
            cols.append(shifted * np.exp(2j * np.pi * k / K * (n - D / 2)) * np.exp(1j * np.pi / 2 * (k + m)))
    B = np.stack(cols, axis=1)
    return np.real(B.conj().T @ B)


class TestBuildPrototype:
    def test_rect_k4(self):
        p = build_prototype("rect", 4, 1)
        np.testing.assert_allclose(p.taps, [0.5] * 4, atol=1e-15)

    def test_rect_support_is_first_k_samples(self):
        p = build_prototype("rect", 8, 3)
        assert np.count_nonzero(p.taps) == 8
        assert np.all(p.taps[:8] > 0)

    def test_rc_center_tap_is_max(self):
        p = build_prototype("rc", 128, 9, 0.1)
        assert np.argmax(p.taps) == 128 * 9 // 2

    def test_rc_matches_formula(self):
        K, M, a = 8, 3, 0.1
        t = (np.arange(K * M) - K * M / 2) / K
        ref = rc_formula(t, a)
        ref /= np.sqrt(np.sum(ref**2))
        np.testing.assert_allclose(build_prototype("rc", K, M, a).taps, ref, atol=1e-12)

    def test_rc_singular_points(self):
        # t = +-1/(2a) = +-2.5 symbols is on the grid for a = 0.2, K = 2
        p = build_prototype("rc", 2, 8, 0.2)
        assert np.all(np.isfinite(p.taps))
        i = 8 + 5
        lim = np.pi / 4 * np.sinc(1 / 0.4)
        nearby = rc_formula(np.array([2.5 + 1e-7]), 0.2)[0]
        assert lim == pytest.approx(nearby, rel=1e-5)
        assert p.taps[i] / p.taps[8] == pytest.approx(lim, rel=1e-12)

    @pytest.mark.parametrize("kind", list(PulseKind))
    @pytest.mark.parametrize("K, M", [(8, 3), (128, 9), (16, 1)])
    def test_unit_energy_and_length(self, kind, K, M):
        p = build_prototype(kind, K, M, 0.3)
        assert p.taps.size == K * M
        assert np.sum(p.taps**2) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("kind", ["rc", "rrc", "gaussian", "dirichlet"])
    def test_circularly_even(self, kind):
        p = build_prototype(kind, 16, 5, 0.3)
        n = np.arange(p.N)
        np.testing.assert_allclose(p.taps, p.taps[(-n) % p.N], atol=1e-12)

    @pytest.mark.parametrize("rolloff", [-0.1, 1.5])
    def test_bad_rolloff(self, rolloff):
        with pytest.raises(ValueError):
            build_prototype("rc", 8, 3, rolloff)

    def test_zero_size(self):
        with pytest.raises(ValueError):
            build_prototype("rc", 0, 3)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            PulsePrototype(np.ones(5), "rc", 2, 3)


class TestDztOrthogonalize:
    def test_gram_identity_small(self):
        q = dzt_orthogonalize(build_prototype("rc", 8, 3, 0.1))
        G = oqam_gram(q.taps, 8, 3)
        assert np.max(np.abs(G - np.eye(G.shape[0]))) < 1e-10

    @pytest.mark.parametrize("kind", ["rrc", "gaussian", "dirichlet"])
    def test_gram_identity_other_families(self, kind):
        q = dzt_orthogonalize(build_prototype(kind, 16, 5, 0.3))
        G = oqam_gram(q.taps, 16, 5)
        assert np.max(np.abs(G - np.eye(G.shape[0]))) < 1e-10

    def test_idempotent(self):
        q = dzt_orthogonalize(build_prototype("rc", 128, 9, 0.1))
        np.testing.assert_allclose(dzt_orthogonalize(q).taps, q.taps, atol=1e-12)

    def test_symmetric_and_unit_energy(self):
        q = dzt_orthogonalize(build_prototype("rc", 8, 3, 0.1)).taps
        # symmetric about the OQAM modulation centre (MK - 1) / 2
        np.testing.assert_allclose(q, q[::-1], atol=1e-12)
        assert np.sum(q**2) == pytest.approx(1.0, abs=1e-12)

    def test_flags_orthogonalized(self):
        p = build_prototype("rc", 8, 3)
        assert not p.orthogonalized
        assert dzt_orthogonalize(p).orthogonalized

    def test_rect_m1_unchanged_up_to_scale(self):
        p = build_prototype("rect", 8, 1)
        q = dzt_orthogonalize(p).taps
        scale = q[0] / p.taps[0]
        np.testing.assert_allclose(q, scale * p.taps, atol=1e-10)

    def test_degenerate_pulse(self):
        # an off-centre impulse leaves most Zak coefficient pairs empty
        taps = np.zeros(24)
        taps[1] = 1.0
        with pytest.raises(DegeneratePulseError):
            dzt_orthogonalize(PulsePrototype(taps, "rect", 8, 3))

    def test_odd_k(self):
        with pytest.raises(ValueError):
            dzt_orthogonalize(build_prototype("rc", 7, 3))


class TestEdgeWindow:
    def test_no_ramp(self):
        np.testing.assert_array_equal(edge_window(6, 0).taps, np.ones(6))

    def test_four_two(self):
        np.testing.assert_allclose(edge_window(4, 2).taps, [0.25, 0.75, 0.75, 0.25], atol=1e-15)

    def test_interior_exactly_one(self):
        w = edge_window(200, 18).taps
        assert np.all(w[18:182] == 1.0)
        assert w[17] < 1.0 and w[182] < 1.0

    def test_ramp_too_long(self):
        with pytest.raises(ValueError):
            edge_window(10, 6)

    def test_zero_end_ramp(self):
        w = edge_window(40, 18, zero_ends=True).taps
        assert w[0] == 0.0 and w[-1] == 0.0
        np.testing.assert_allclose(w[:18], 0.5 * (1 - np.cos(np.pi * np.arange(18) / 18)))

    @settings(max_examples=100)
    @given(st.integers(0, 30), st.integers(0, 40), st.booleans())
    def test_shape(self, ramp, extra, zero_ends):
        total = 2 * ramp + extra
        if total == 0:
            return
        w = edge_window(total, ramp, zero_ends).taps
        assert np.all((w >= 0) & (w <= 1))
        np.testing.assert_array_equal(w, w[::-1])
        assert np.all(np.diff(w[:ramp]) > 0)
        assert np.all(w[ramp:total - ramp] == 1.0)
