import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import cdist

from oracles import idw_brute, ordinary_kriging_by_hand
from sweetspot.errors import NoSamples, TooFewSamples
from sweetspot.geostat import (
    EmpiricalVariogram,
    InterpolationConfig,
    SpatialSamples,
    VariogramModel,
    empirical_variogram,
    fit_variogram,
    idw,
    interpolate_features,
    krige,
)
from sweetspot.production import CumulativeProductionFrame


def samples(points, values):
    return SpatialSamples.from_arrays(points, values)


class TestVariogramModel:
    @pytest.mark.parametrize("family", ["spherical", "exponential", "gaussian"])
    def test_shape(self, family):
        vm = VariogramModel(family, 0.2, 1.0, 10.0)
        h = np.linspace(0.0, 200.0, 400)
        g = vm(h)
        assert g[0] == 0.0
        assert np.all(np.diff(g[1:]) >= -1e-15)
        assert g[-1] == pytest.approx(1.2, abs=1e-6)


class TestEmpirical:
    def test_constant_field(self, rng):
        e = empirical_variogram(samples(rng.uniform(0, 10, (20, 2)), np.full(20, 3.0)))
        assert np.all(e.gammas == 0.0)

    def test_single_pair(self):
        e = empirical_variogram(samples([(0, 0), (1, 0)], [0.0, 2.0]), n_bins=4, max_dist=2.0)
        assert list(e) == [(1.0, 2.0, 1)]

    def test_too_few(self):
        with pytest.raises(TooFewSamples):
            empirical_variogram(samples([(0, 0)], [1.0]))

    def test_seeded_exponential_field(self):
        # average over replicate fields: the binned estimator is unbiased
        rng = np.random.default_rng(5)
        pts = rng.uniform(0, 100, (50, 2))
        true = VariogramModel("exponential", 0.0, 1.0, 20.0)
        L = np.linalg.cholesky(np.exp(-cdist(pts, pts) / 20.0) + 1e-12 * np.eye(50))
        acc = []
        for _ in range(200):
            e = empirical_variogram(samples(pts, L @ rng.standard_normal(50)), n_bins=10, max_dist=40.0)
            acc.append(e.gammas)
        g = np.mean(acc, axis=0)
        lags = e.lags
        below = lags < 20.0
        np.testing.assert_allclose(g[below], true(lags[below]), rtol=0.25)


class TestFit:
    def test_spherical_recovery(self):
        lags = np.arange(1.0, 9.0) * 1.5
        vm0 = VariogramModel("spherical", 0.0, 1.0, 10.0)
        fit = fit_variogram(EmpiricalVariogram(lags, vm0(lags), np.full(8, 10)), "spherical")
        assert fit.range == pytest.approx(10.0, rel=1e-3)
        assert fit.partial_sill == pytest.approx(1.0, rel=1e-3)
        assert fit.nugget <= 1e-3

    @pytest.mark.parametrize("family", ["exponential", "gaussian"])
    def test_recovery_with_nugget(self, family):
        lags = np.linspace(1.0, 30.0, 10)
        vm0 = VariogramModel(family, 0.3, 2.0, 8.0)
        fit = fit_variogram(EmpiricalVariogram(lags, vm0(lags), np.full(10, 5)), family)
        assert (fit.nugget, fit.partial_sill, fit.range) == pytest.approx((0.3, 2.0, 8.0), rel=1e-3)

    def test_flat_is_degenerate(self):
        fit = fit_variogram(EmpiricalVariogram(np.array([1.0, 2.0, 3.0]), np.full(3, 0.5), np.ones(3)))
        assert fit.degenerate and fit.nugget == 0.5 and fit.partial_sill == 0.0 and fit.range == 3.0

    def test_single_bin_is_degenerate(self):
        fit = fit_variogram(EmpiricalVariogram(np.array([2.0]), np.array([0.7]), np.array([3])))
        assert fit.degenerate and fit.nugget == pytest.approx(0.7, abs=1e-15)

    def test_bounds(self, rng):
        lags = np.linspace(1.0, 10.0, 8)
        fit = fit_variogram(EmpiricalVariogram(lags, rng.uniform(0, 1, 8), np.ones(8)))
        assert fit.nugget >= 0 and fit.partial_sill >= 0
        assert lags.min() - 1e-9 <= fit.range <= 2 * lags.max() + 1e-9


class TestKrige:
    vm = VariogramModel("exponential", 0.0, 1.5, 4.0)

    def test_hand_system(self):
        pts = [(0.0, 0.0), (3.0, 1.0), (1.0, 4.0)]
        vals = [1.0, 2.5, -0.5]
        target = (1.2, 1.1)
        pred, var, w = ordinary_kriging_by_hand(pts, vals, target, 0.0, 1.5, 4.0)
        res = krige(samples(pts, vals), self.vm, [target])
        assert res.predictions[0] == pytest.approx(pred, abs=1e-8)
        assert res.variances[0] == pytest.approx(var, abs=1e-8)
        np.testing.assert_allclose(res.weights[0], w, atol=1e-8)

    def test_hand_system_with_nugget(self):
        pts = [(0.0, 0.0), (2.0, 0.0), (0.0, 5.0)]
        vals = [3.0, 1.0, 4.0]
        pred, _, _ = ordinary_kriging_by_hand(pts, vals, (1.0, 1.0), 0.4, 1.0, 2.0)
        res = krige(samples(pts, vals), VariogramModel("exponential", 0.4, 1.0, 2.0), [(1.0, 1.0)])
        assert res.predictions[0] == pytest.approx(pred, abs=1e-8)

    def test_single_sample(self):
        res = krige(samples([(2, 2)], [5.0]), self.vm, [(10, -3), (0, 0)])
        assert res.predictions.tolist() == [5.0, 5.0]

    def test_no_samples(self):
        with pytest.raises(NoSamples):
            krige(SpatialSamples(np.zeros((0, 2)), np.zeros(0)), self.vm, [(0, 0)])

    def test_singular_falls_back(self):
        # pure-nugget model with two samples: constant off-diagonal system
        s = samples([(0, 0), (1, 0), (2, 0)], [1.0, 2.0, 3.0])
        res = krige(s, VariogramModel("exponential", 1.0, 0.0, 1.0), [(0.5, 0.0)])
        assert res.fallback[0] or np.isfinite(res.predictions[0])

    def test_uses_32_nearest(self, rng):
        s = samples(rng.uniform(0, 100, (60, 2)), rng.normal(size=60))
        res = krige(s, self.vm, [(50.0, 50.0)])
        assert len(res.neighbors[0]) == 32
        d = np.hypot(*(s.points - 50.0).T)
        assert set(res.neighbors[0]) == set(np.argsort(d)[:32])

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.integers(3, 40), c=st.floats(-1e3, 1e3), dx=st.floats(-1e4, 1e4))
    def test_properties(self, seed, n, c, dx):
        r = np.random.default_rng(seed)
        pts = r.uniform(0, 50, (n, 2))
        vals = r.normal(size=n)
        tg = np.vstack([r.uniform(0, 50, (5, 2)), pts[:3]])
        s = samples(pts, vals)
        base = krige(s, self.vm, tg)
        ok = ~base.fallback
        for w in (w for w, f in zip(base.weights, base.fallback) if not f):
            assert abs(w.sum() - 1.0) <= 1e-10
        # exactness at samples
        k = len(tg) - 3
        np.testing.assert_allclose(base.predictions[k:][ok[k:]], vals[:3][ok[k:]], atol=1e-8)
        shifted = krige(samples(pts, vals + c), self.vm, tg)
        np.testing.assert_allclose(shifted.predictions[ok], base.predictions[ok] + c, atol=1e-8 * max(1, abs(c)))
        moved = krige(samples(pts + [dx, -dx], vals), self.vm, tg + [dx, -dx])
        np.testing.assert_allclose(moved.predictions[ok], base.predictions[ok], atol=1e-8)


class TestIdw:
    def test_coincident(self):
        assert idw([(0, 0), (1, 1)], [7.0, 9.0], [(1, 1)])[0] == 9.0

    def test_equidistant(self):
        assert idw([(0, 0), (2, 0)], [2.0, 4.0], [(1, 0)])[0] == 3.0

    def test_three_unequal(self):
        pts, vals = [(1, 0), (0, 2), (-3, 0)], [10.0, 20.0, 40.0]
        hand = (10.0 / 1 + 20.0 / 4 + 40.0 / 9) / (1 + 1 / 4 + 1 / 9)
        assert idw(pts, vals, [(0, 0)], power=2)[0] == pytest.approx(hand, abs=1e-12)
        assert idw_brute(pts, vals, (0, 0), 2) == pytest.approx(hand, abs=1e-12)

    def test_empty(self):
        with pytest.raises(NoSamples):
            idw(np.zeros((0, 2)), [], [(0, 0)])

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 10_000), power=st.floats(0.5, 4.0))
    def test_within_range(self, seed, power):
        r = np.random.default_rng(seed)
        vals = r.normal(size=8)
        out = idw(r.uniform(0, 1, (8, 2)), vals, r.uniform(-1, 2, (20, 2)), power=power)
        assert np.all(out >= vals.min() - 1e-12) and np.all(out <= vals.max() + 1e-12)


def test_duplicate_points_merged():
    s = SpatialSamples.from_arrays([(0, 0), (0, 0), (1, 1)], [1.0, 3.0, 5.0], ids=["a", "b", "c"])
    assert s.values.tolist() == [2.0, 5.0] and s.ids == ["a", "c"]


def horizontal_frame(wells):
    df = pd.DataFrame(
        {"TARGET FORMATION": [f for _, f, _ in wells], "surface_X": [xy[0] for *_, xy in wells], "surface_Y": [xy[1] for *_, xy in wells]},
        index=pd.Index([w for w, _, _ in wells], name="API"),
    )
    return CumulativeProductionFrame(df)


class TestInterpolateFeatures:
    def setup_method(self):
        r = np.random.default_rng(3)
        self.vids = [f"V{i}" for i in range(12)]
        self.coords = {w: tuple(r.uniform(0, 100, 2)) for w in self.vids}
        self.scores = {
            ("GR", "A"): (self.vids, r.normal(size=(12, 3))),
            ("GR", "B"): (self.vids, 100.0 + r.normal(size=(12, 3))),
        }

    def test_target_formation_only(self):
        fr = horizontal_frame([("H1", "A", (50, 50)), ("H2", "B", (20, 70))])
        out, _, _ = interpolate_features(fr, self.scores, self.coords, 2)
        assert np.isfinite(out.df.at["H1", "GR_A_fpc1"]) and np.isnan(out.df.at["H1", "GR_B_fpc1"])
        assert np.isfinite(out.df.at["H2", "GR_B_fpc2"]) and np.isnan(out.df.at["H2", "GR_A_fpc2"])
        assert out.df.at["H2", "GR_B_fpc1"] > 50

    def test_coincident_with_vertical(self):
        xy = self.coords["V4"]
        fr = horizontal_frame([("H1", "A", xy)])
        cfg = InterpolationConfig(family="exponential")
        out, vgs, _ = interpolate_features(fr, self.scores, self.coords, 1, cfg)
        if vgs["GR_A_fpc1"]["nugget"] == 0.0:
            assert out.df.at["H1", "GR_A_fpc1"] == pytest.approx(self.scores[("GR", "A")][1][4, 0], abs=1e-8)
        # with IDW the coincidence rule is exact regardless of the fit
        out, _, _ = interpolate_features(fr, self.scores, self.coords, 1, InterpolationConfig(method="idw"))
        assert out.df.at["H1", "GR_A_fpc1"] == self.scores[("GR", "A")][1][4, 0]

    def test_too_few_donors(self):
        few = {("GR", "A"): (self.vids[:3], self.scores[("GR", "A")][1][:3])}
        fr = horizontal_frame([("H1", "A", (50, 50))])
        out, _, audit = interpolate_features(fr, few, self.coords, 2)
        assert out.df["GR_A_fpc1"].isna().all()
        assert {a["status"] for a in audit} == {"too_few_donors"}
