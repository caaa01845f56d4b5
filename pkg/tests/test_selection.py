import numpy as np
import pytest

from cfthz import phy, selection
from cfthz.phy import AntennaConfig
from cfthz.selection import AccessPoint, Scheme

CFG = AntennaConfig(f_co=100e9)
P = 1.0 / 16e9
F_UPPER = 300e9
GAMMA_TH = phy.dbm_per_hz_to_w_per_hz(-174.5)


def random_aps(rng, n):
    return [
        AccessPoint(i, rng.uniform(0.5, 50.0), rng.uniform(0.01, np.pi / 2 - 0.01))
        for i in range(n)
    ]


def constant_gain(f, theta, cfg):
    """Test hook: frequency- and angle-independent antenna gain."""
    return 1.0 * np.ones_like(np.asarray(f, dtype=float))


class TestSelectMrt:
    def test_single_ap(self):
        mask = selection.select_mrt([AccessPoint(1, 5.0, 0.6)])
        assert mask.static_set == {1}

    def test_all_selected(self):
        aps = random_aps(np.random.default_rng(0), 20)
        assert len(selection.select_mrt(aps).static_set) == 20

    def test_order_invariant(self):
        aps = random_aps(np.random.default_rng(1), 6)
        m1 = selection.select_mrt(aps)
        m2 = selection.select_mrt(aps[::-1])
        assert m1.static_set == m2.static_set

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            selection.select_mrt([])


class TestSelectBestNsel:
    def test_full_selection_equals_mrt(self):
        aps = random_aps(np.random.default_rng(2), 7)
        full = selection.select_best_nsel(aps, 7, P, CFG, F_UPPER)
        assert full.static_set == selection.select_mrt(aps).static_set

    def test_closer_ap_wins_at_equal_angle(self):
        aps = [AccessPoint(0, 5.0, 0.7), AccessPoint(1, 40.0, 0.7)]
        mask = selection.select_best_nsel(aps, 1, P, CFG, F_UPPER)
        assert mask.static_set == {0}

    def test_matches_exhaustive_ranking(self):
        aps = random_aps(np.random.default_rng(3), 5)
        # brute-force oracle: evaluate every AP at its clamped peak frequency
        scored = sorted(
            aps,
            key=lambda ap: (
                -phy.link_rss(
                    min(phy.peak_frequency(ap.angle, CFG.f_co), F_UPPER), ap, P, CFG
                ),
                ap.id,
            ),
        )
        for n_sel in (1, 2, 3):
            mask = selection.select_best_nsel(aps, n_sel, P, CFG, F_UPPER)
            assert mask.static_set == {ap.id for ap in scored[:n_sel]}

    def test_out_of_range_rejected(self):
        aps = random_aps(np.random.default_rng(4), 3)
        for bad in (0, 4):
            with pytest.raises(ValueError):
                selection.select_best_nsel(aps, bad, P, CFG, F_UPPER)


class TestSelectBestAt:
    def test_single_ap(self):
        assert selection.select_best_at([AccessPoint(3, 9.0, 0.5)], 150e9, P, CFG) == 3

    def test_distance_decides_at_equal_angle(self):
        aps = [AccessPoint(0, 40.0, 0.7), AccessPoint(1, 5.0, 0.7)]
        for f in (110e9, 150e9, 250e9):
            assert selection.select_best_at(aps, f, P, CFG) == 1

    def test_matches_exhaustive_argmax(self):
        aps = random_aps(np.random.default_rng(5), 5)
        f = 250e9
        rss = [phy.link_rss(f, ap, P, CFG) for ap in aps]
        assert selection.select_best_at(aps, f, P, CFG) == int(np.argmax(rss))

    def test_below_band_rejected(self):
        with pytest.raises(phy.BelowCutoffError):
            selection.select_best_at([AccessPoint(0, 5.0, 0.5)], 90e9, P, CFG)


class TestSelectNearest:
    def test_min_distance(self):
        aps = [AccessPoint(0, 12.0, 0.5), AccessPoint(1, 3.0, 0.9), AccessPoint(2, 44.0, 1.1)]
        assert selection.select_nearest(aps).static_set == {1}

    def test_permutation_invariant(self):
        aps = random_aps(np.random.default_rng(6), 8)
        a = selection.select_nearest(aps)
        b = selection.select_nearest(aps[::-1])
        assert a.static_set == b.static_set

    def test_tie_breaks_to_lower_id(self):
        aps = [AccessPoint(0, 7.0, 0.5), AccessPoint(1, 7.0, 0.9)]
        assert selection.select_nearest(aps).static_set == {0}


class TestCombinedRss:
    def test_zero_when_all_below_threshold(self):
        aps = [AccessPoint(0, 49.0, 0.3), AccessPoint(1, 48.0, 1.2)]
        mask = selection.select_mrt(aps)
        # absurdly high threshold annihilates every link
        assert selection.combined_rss(mask, aps, 150e9, P, CFG, gamma_th=1.0) == 0.0

    def test_mrt_additivity_two_identical_aps(self):
        aps = [AccessPoint(0, 10.0, 0.8), AccessPoint(1, 10.0, 0.8)]
        mask = selection.select_mrt(aps)
        single = phy.link_rss(150e9, aps[0], P, CFG)
        got = selection.combined_rss(mask, aps, 150e9, P, CFG, gamma_th=0.0)
        assert got == pytest.approx(2 * single)

    def test_mrt_term_by_term(self):
        aps = random_aps(np.random.default_rng(7), 4)
        mask = selection.select_mrt(aps)
        f = 180e9
        expected = sum(
            rss
            for rss in (phy.link_rss(f, ap, P, CFG) for ap in aps)
            if rss >= GAMMA_TH
        )
        got = selection.combined_rss(mask, aps, f, P, CFG, GAMMA_TH)
        assert got == pytest.approx(expected)

    def test_best_per_subchannel_is_max_form(self):
        aps = random_aps(np.random.default_rng(8), 5)
        mask = selection.select_best_per_subchannel()
        f = 220e9
        rss = np.array([phy.link_rss(f, ap, P, CFG) for ap in aps])
        rss[rss < GAMMA_TH] = 0.0
        got = selection.combined_rss(mask, aps, f, P, CFG, GAMMA_TH)
        assert got == pytest.approx(rss.max())

    def test_vectorized_matches_scalar(self):
        aps = random_aps(np.random.default_rng(9), 3)
        mask = selection.select_mrt(aps)
        f = np.array([120e9, 150e9, 290e9])
        vec = selection.combined_rss(mask, aps, f, P, CFG, GAMMA_TH)
        scal = [selection.combined_rss(mask, aps, fi, P, CFG, GAMMA_TH) for fi in f]
        np.testing.assert_allclose(vec, scal)


class TestProperties:
    def test_mrt_dominates_any_subset_pointwise(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            aps = random_aps(rng, 6)
            f = rng.uniform(100e9, 300e9, 16)
            mrt = selection.combined_rss(selection.select_mrt(aps), aps, f, P, CFG, GAMMA_TH)
            for n_sel in (1, 3):
                sub = selection.combined_rss(
                    selection.select_best_nsel(aps, n_sel, P, CFG, F_UPPER),
                    aps, f, P, CFG, GAMMA_TH,
                )
                assert np.all(mrt >= sub - 1e-30)
            bps = selection.combined_rss(
                selection.select_best_per_subchannel(), aps, f, P, CFG, GAMMA_TH
            )
            assert np.all(mrt >= bps - 1e-30)
            assert np.all(bps >= 0)

    def test_scheme_chain_in_mean(self):
        # MRT >= best-2 >= best-1-per-subchannel on average over scenarios
        rng = np.random.default_rng(11)
        f = np.linspace(100e9, 300e9, 64)
        tot = {"mrt": 0.0, "b2": 0.0, "bps": 0.0}
        for _ in range(50):
            aps = random_aps(rng, 8)
            tot["mrt"] += selection.combined_rss(
                selection.select_mrt(aps), aps, f, P, CFG, GAMMA_TH
            ).mean()
            tot["b2"] += selection.combined_rss(
                selection.select_best_nsel(aps, 2, P, CFG, F_UPPER), aps, f, P, CFG, GAMMA_TH
            ).mean()
            tot["bps"] += selection.combined_rss(
                selection.select_best_per_subchannel(), aps, f, P, CFG, GAMMA_TH
            ).mean()
        assert tot["mrt"] >= tot["b2"] >= tot["bps"] > 0

    def test_constant_gain_reduces_best_at_to_nearest(self):
        rng = np.random.default_rng(12)
        for _ in range(25):
            aps = random_aps(rng, 6)
            nearest = next(iter(selection.select_nearest(aps).static_set))
            for f in rng.uniform(100e9, 300e9, 8):
                assert (
                    selection.select_best_at(aps, f, P, CFG, gain_fn=constant_gain)
                    == nearest
                )

    def test_psd_scaling_never_changes_selection(self):
        rng = np.random.default_rng(13)
        aps = random_aps(rng, 7)
        for scale in (1e-3, 1.0, 1e6):
            assert (
                selection.select_best_nsel(aps, 3, P * scale, CFG, F_UPPER).static_set
                == selection.select_best_nsel(aps, 3, P, CFG, F_UPPER).static_set
            )
            assert selection.select_best_at(aps, 211e9, P * scale, CFG) == (
                selection.select_best_at(aps, 211e9, P, CFG)
            )


class TestMaskInvariants:
    def test_nearest_must_be_singleton(self):
        with pytest.raises(ValueError):
            selection.SelectionMask(Scheme.NEAREST, frozenset({1, 2}))

    def test_per_subchannel_carries_no_set(self):
        with pytest.raises(ValueError):
            selection.SelectionMask(Scheme.BEST_PER_SUBCHANNEL, frozenset({1}))

    def test_static_schemes_need_aps(self):
        with pytest.raises(ValueError):
            selection.SelectionMask(Scheme.MRT, frozenset())
