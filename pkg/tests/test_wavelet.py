import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from wavefuse.errors import (
    DimensionMismatchError,
    LevelCapacityError,
    PyramidStructureError,
    UnknownWaveletError,
)
from wavefuse.imagery import GrayImage
from wavefuse.wavelet import (
    DecompositionPyramid,
    SubbandQuad,
    analyze_1d,
    decompose,
    dwt2_step,
    extend_signal,
    idwt2_step,
    load_pyramid,
    make_filter_bank,
    reconstruct,
    save_pyramid,
    subband_length,
    synthesize_1d,
    zero_approximation,
)

MODES = ["symmetric", "periodic"]


def solve_db2_taps():
    """Independent oracle: the 4-tap orthonormal filter with two vanishing moments.

    Unknowns h0..h3 (lowpass, ``H(z) = sum h_k z^-k``) satisfy
    sum h = sqrt2, sum h^2 = 1, h0 h2 + h1 h3 = 0 (double-shift orthogonality)
    and sum (-1)^k k h_k = 0 (second vanishing moment of the wavelet).
    """
    h = sp.symbols("h0:4", real=True)
    eqs = [
        sum(h) - sp.sqrt(2),
        sum(x ** 2 for x in h) - 1,
        h[0] * h[2] + h[1] * h[3],
        sum((-1) ** k * k * h[k] for k in range(4)),
    ]
    sols = sp.solve(eqs, h, dict=True)
    return [np.array([float(s[x]) for x in h]) for s in sols]


def test_db2_matches_solved_system(bank):
    sols = solve_db2_taps()
    assert len(sols) == 2  # the filter and its time reverse
    assert any(np.abs(bank.lo_d - s).max() <= 1e-9 for s in sols)
    assert any(np.abs(bank.lo_d[::-1] - s).max() <= 1e-9 for s in sols)


def test_db2_invariants(bank):
    L = bank.length
    assert L == 4
    assert abs(bank.lo_d.sum() - math.sqrt(2)) <= 1e-12
    assert abs(bank.hi_d.sum()) <= 1e-12
    assert abs(np.sum(bank.lo_d ** 2) - 1) <= 1e-12
    for k in range(L):
        assert bank.hi_d[k] == (-1) ** k * bank.lo_d[L - 1 - k]
    np.testing.assert_array_equal(bank.lo_r, bank.lo_d[::-1])
    np.testing.assert_array_equal(bank.hi_r, bank.hi_d[::-1])
    assert abs(sum(k * v for k, v in enumerate(bank.hi_d))) <= 1e-12


def test_db2_listed_constants(bank):
    expected = [-0.129409522551, 0.224143868042, 0.836516303738, 0.482962913145]
    np.testing.assert_allclose(bank.lo_d, expected, atol=1e-12)


def test_unknown_wavelet():
    with pytest.raises(UnknownWaveletError):
        make_filter_bank("haar9")


class TestExtend:
    def test_symmetric(self):
        np.testing.assert_array_equal(extend_signal([1, 2, 3], "symmetric", 2), [2, 1, 1, 2, 3, 3, 2])

    def test_periodic(self):
        np.testing.assert_array_equal(extend_signal([1, 2, 3], "periodic", 2), [2, 3, 1, 2, 3, 1, 2])

    def test_single_element(self):
        np.testing.assert_array_equal(extend_signal([5], "symmetric", 1), [5, 5, 5])

    def test_pad_too_large(self):
        with pytest.raises(ValueError):
            extend_signal([1, 2], "symmetric", 3)


class TestOneD:
    def test_constant_signal(self, bank):
        a, d = analyze_1d([3.0] * 4, bank, "symmetric")
        np.testing.assert_allclose(a, math.sqrt(2) * 3.0, atol=1e-14)
        np.testing.assert_allclose(d, 0.0, atol=1e-14)

    def test_lengths(self, bank):
        a, d = analyze_1d(np.arange(6.0), bank, "symmetric")
        assert a.size == d.size == 4
        a, d = analyze_1d(np.arange(7.0), bank, "periodic")
        assert a.size == 4

    @pytest.mark.parametrize("mode,n", [("symmetric", n) for n in (3, 5, 6, 16, 17)]
                             + [("periodic", n) for n in (2, 3, 5, 6, 16, 17)])
    def test_perfect_reconstruction(self, bank, rng, mode, n):
        x = rng.standard_normal(n)
        a, d = analyze_1d(x, bank, mode)
        assert np.abs(synthesize_1d(a, d, bank, mode, n) - x).max() <= 1e-10

    def test_reconstruct_ramp(self, bank):
        x = np.arange(1.0, 7.0)
        a, d = analyze_1d(x, bank, "symmetric")
        np.testing.assert_allclose(synthesize_1d(a, d, bank, "symmetric", 6), x, atol=1e-10)

    def test_zero_input(self, bank):
        assert np.all(synthesize_1d(np.zeros(4), np.zeros(4), bank, "symmetric", 6) == 0)

    def test_mismatched_lengths(self, bank):
        with pytest.raises(DimensionMismatchError):
            synthesize_1d(np.zeros(4), np.zeros(3), bank, "symmetric", 6)

    def test_inconsistent_target(self, bank):
        with pytest.raises(DimensionMismatchError):
            synthesize_1d(np.zeros(4), np.zeros(4), bank, "symmetric", 10)


class TestDwt2:
    def test_constant_image(self, bank):
        q = dwt2_step(np.ones((4, 4)), bank)
        assert q.dims == (3, 3)
        np.testing.assert_allclose(q.ca, 2.0, atol=1e-14)
        for band in (q.ch, q.cv, q.cd):
            assert np.abs(band).max() <= 1e-12

    def test_reference_size(self, bank):
        assert dwt2_step(np.zeros((240, 320)), bank).dims == (121, 161)

    @pytest.mark.parametrize("mode", MODES)
    def test_inverse(self, bank, rng, mode):
        x = rng.standard_normal((8, 8))
        assert np.abs(idwt2_step(dwt2_step(x, bank, mode), bank, mode, (8, 8)) - x).max() <= 1e-10

    def test_inverse_of_constant_quad(self, bank):
        z = np.zeros((3, 3))
        x = idwt2_step(SubbandQuad(np.full((3, 3), 2.0), z, z, z), bank, "symmetric", (4, 4))
        np.testing.assert_allclose(x, 1.0, atol=1e-10)

    def test_zero_quad(self, bank):
        z = np.zeros((3, 3))
        assert np.all(idwt2_step(SubbandQuad(z, z, z, z), bank, "symmetric", (4, 4)) == 0)

    def test_incompatible_target(self, bank):
        z = np.zeros((3, 3))
        with pytest.raises(DimensionMismatchError):
            idwt2_step(SubbandQuad(z, z, z, z), bank, "symmetric", (9, 9))

    def test_horizontal_edge_goes_to_ch(self, bank):
        x = np.zeros((16, 16))
        x[8:, :] = 1.0
        q = dwt2_step(x, bank, "periodic")
        e = {k: float(np.sum(getattr(q, k) ** 2)) for k in ("ch", "cv", "cd")}
        assert e["ch"] > 0.1
        assert e["cv"] < 1e-20 and e["cd"] < 1e-20

    def test_vertical_edge_goes_to_cv(self, bank):
        x = np.zeros((16, 16))
        x[:, 8:] = 1.0
        q = dwt2_step(x, bank, "periodic")
        assert np.sum(q.cv ** 2) > 0.1 and np.sum(q.ch ** 2) < 1e-20

    def test_degenerate(self, bank):
        with pytest.raises(DimensionMismatchError):
            dwt2_step(np.zeros((1, 5)), bank, "periodic")


class TestPyramid:
    def test_level_dims_64(self, bank):
        p = decompose(GrayImage(np.zeros((64, 64))), bank, "symmetric", 5)
        assert [d.ch.shape[0] for d in p.details] == [33, 18, 10, 6, 4]
        assert p.approximation.shape == (4, 4)
        assert p.original_dims == ((64, 64), (33, 33), (18, 18), (10, 10), (6, 6))

    def test_single_level_is_one_step(self, bank, rng):
        x = rng.standard_normal((12, 10))
        p = decompose(x, bank, "symmetric", 1)
        q = dwt2_step(x, bank, "symmetric")
        np.testing.assert_array_equal(p.approximation, q.ca)
        np.testing.assert_array_equal(p.details[0].cd, q.cd)

    def test_capacity_error_names_level(self, bank):
        with pytest.raises(LevelCapacityError) as exc:
            decompose(np.zeros((4, 4)), bank, "periodic", 5)
        assert exc.value.level == 3
        assert "level 3" in str(exc.value)

    def test_symmetric_capacity(self, bank):
        with pytest.raises(LevelCapacityError) as exc:
            decompose(np.zeros((2, 8)), bank, "symmetric", 1)
        assert exc.value.level == 1
        # the symmetric recurrence settles at 3 and never runs out
        assert decompose(np.zeros((4, 4)), bank, "symmetric", 5).approximation.shape == (3, 3)

    @pytest.mark.parametrize("mode", MODES)
    def test_round_trip_64_level5(self, bank, rng, mode):
        x = rng.standard_normal((64, 64))
        assert np.abs(reconstruct(decompose(x, bank, mode, 5), bank).pixels - x).max() <= 1e-8

    def test_constant_round_trip(self, bank):
        x = np.full((20, 24), 0.7)
        np.testing.assert_allclose(reconstruct(decompose(x, bank, "symmetric", 3)).pixels, 0.7, atol=1e-10)

    def test_broken_chain(self, bank, rng):
        p = decompose(rng.standard_normal((32, 32)), bank, "symmetric", 3)
        bad = DecompositionPyramid(p.approximation, p.details, ((32, 32), (17, 17), (9, 8)),
                                   p.boundary_mode, p.wavelet_name)
        with pytest.raises(PyramidStructureError):
            reconstruct(bad, bank)

    def test_zero_approximation_on_constant(self, bank):
        p = zero_approximation(decompose(np.full((32, 32), 0.4), bank, "symmetric", 3))
        assert np.abs(reconstruct(p).pixels).max() <= 1e-8

    def test_zero_approximation_idempotent_and_local(self, bank, rng):
        p = decompose(rng.standard_normal((32, 32)), bank, "symmetric", 3)
        once = zero_approximation(p)
        twice = zero_approximation(once)
        np.testing.assert_array_equal(once.approximation, twice.approximation)
        for a, b in zip(p.arrays()[1:], once.arrays()[1:]):
            np.testing.assert_array_equal(a, b)
        assert np.all(once.approximation == 0)

    def test_serialization_round_trip(self, bank, rng, tmp_path):
        p = decompose(rng.standard_normal((21, 30)), bank, "periodic", 3)
        save_pyramid(p, tmp_path / "p.json")
        q = load_pyramid(tmp_path / "p.json")
        assert (q.levels, q.boundary_mode, q.wavelet_name, q.original_dims) == \
               (p.levels, p.boundary_mode, p.wavelet_name, p.original_dims)
        for a, b in zip(p.arrays(), q.arrays()):
            np.testing.assert_array_equal(a, b)


def min_size(mode, levels):
    """Smallest side length that survives ``levels`` decomposition steps."""
    n = 1
    while True:
        m, ok = n, True
        for _ in range(levels):
            if m < (3 if mode == "symmetric" else 2):
                ok = False
                break
            m = subband_length(m, mode)
        if ok:
            return n
        n += 1


def test_min_size_table():
    assert [min_size("periodic", j) for j in range(1, 6)] == [2, 3, 5, 9, 17]
    assert [min_size("symmetric", j) for j in range(1, 6)] == [3] * 5


@st.composite
def image_and_levels(draw):
    mode = draw(st.sampled_from(MODES))
    levels = draw(st.integers(1, 5))
    lo = max(8, min_size(mode, levels))
    rows = draw(st.integers(lo, 48))
    cols = draw(st.integers(lo, 48))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return mode, levels, np.random.default_rng(seed).standard_normal((rows, cols))


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(image_and_levels())
    def test_perfect_reconstruction(self, bank, case):
        mode, levels, x = case
        assert np.abs(reconstruct(decompose(x, bank, mode, levels), bank).pixels - x).max() <= 1e-8

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.floats(-3, 3), st.floats(-3, 3), st.sampled_from(MODES))
    def test_linearity(self, bank, seed, alpha, beta, mode):
        r = np.random.default_rng(seed)
        x, y = r.standard_normal((24, 20)), r.standard_normal((24, 20))
        pz = decompose(alpha * x + beta * y, bank, mode, 3)
        px, py = decompose(x, bank, mode, 3), decompose(y, bank, mode, 3)
        for a, b, c in zip(pz.arrays(), px.arrays(), py.arrays()):
            assert np.abs(a - (alpha * b + beta * c)).max() <= 1e-10

    @settings(max_examples=20, deadline=None)
    @given(st.sampled_from([8, 16, 32, 64]), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
    def test_periodic_energy(self, bank, n, levels, seed):
        x = np.random.default_rng(seed).standard_normal((n, n))
        p = decompose(x, bank, "periodic", levels)
        assert abs(np.sum(x * x) - p.energy()) / np.sum(x * x) <= 1e-8

    @settings(max_examples=20, deadline=None)
    @given(st.floats(-5, 5), st.integers(6, 40), st.integers(6, 40), st.sampled_from(MODES))
    def test_constant_annihilation(self, bank, c, rows, cols, mode):
        p = decompose(np.full((rows, cols), c), bank, mode, 2)
        for det in p.details:
            for band in det:
                assert np.abs(band).max() <= 1e-12

    @given(st.integers(2, 300), st.sampled_from(MODES))
    def test_length_recurrence(self, bank, n, mode):
        if mode == "symmetric" and n < 3:
            return
        a, _ = analyze_1d(np.zeros(n), bank, mode)
        expect = (n + 3) // 2 if mode == "symmetric" else (n + 1) // 2
        assert a.size == expect == subband_length(n, mode)
