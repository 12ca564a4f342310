import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sweetspot.errors import DuplicateFeature, FormationUnrecognized, NegativeVolume, WellAbsent
from sweetspot.production import (
    CumulativeProductionFrame,
    build_production_frame,
    cum_column,
    cumulative_production,
    find_target_formation,
    load_daily,
    load_meta,
)


def days(start, n):
    return np.arange(np.datetime64(start), np.datetime64(start) + n)


class TestCumulative:
    def test_constant_rate_six_months(self):
        d = days("2020-01-01", 400)
        assert cumulative_production(d, np.full(400, 10.0), 6) == 1820.0

    def test_short_series_missing(self):
        d = days("2020-01-01", 91)
        assert np.isnan(cumulative_production(d, np.ones(91), 12))

    def test_empty_missing(self):
        assert np.isnan(cumulative_production([], [], 6))

    def test_negative(self):
        with pytest.raises(NegativeVolume):
            cumulative_production(days("2020-01-01", 3), [1.0, -1.0, 2.0], 1)

    def test_series_ending_on_last_day_counts(self):
        d = days("2021-03-01", 30)  # March 1..30, horizon ends March 31 inclusive
        assert np.isnan(cumulative_production(d, np.ones(30), 1))
        assert cumulative_production(days("2021-03-01", 31), np.ones(31), 1) == 31.0

    @settings(max_examples=60, deadline=None)
    @given(vols=st.lists(st.floats(0, 1e4), min_size=200, max_size=260), cut=st.integers(1, 180))
    def test_additive_split(self, vols, cut):
        d = days("2019-05-17", len(vols))
        v = np.array(vols)
        total = cumulative_production(d, v, 6)
        end = np.datetime64("2019-11-17")
        head = v[:cut][d[:cut] < end].sum()
        tail = v[cut:][d[cut:] < end].sum()
        assert total == pytest.approx(head + tail, rel=1e-12, abs=1e-9)


META = "well_id,target_formation,x,y\nW42,WolfcampA,1,2\nW7,wolfcamp a,3,4\nW8,Zeta,0,0\n"


class TestTargetFormation:
    meta = load_meta(META)

    def test_exact(self):
        assert find_target_formation(self.meta, "W42", ["WolfcampA"]) == "WolfcampA"

    def test_fold(self):
        assert find_target_formation(self.meta, "W7", ["WolfcampA"]) == "WolfcampA"

    def test_absent(self):
        with pytest.raises(WellAbsent):
            find_target_formation(self.meta, "W99", ["WolfcampA"])

    def test_unrecognized(self):
        with pytest.raises(FormationUnrecognized):
            find_target_formation(self.meta, "W8", ["WolfcampA"])


def daily_csv(wells, n_days):
    rows = ["well_id,date,oil,gas"]
    for w in wells:
        for d in days("2020-01-01", n_days):
            rows.append(f"{w},{d},5.0,7.5")
    return "\n".join(rows) + "\n"


class TestFrame:
    def frame(self):
        meta = load_meta("well_id,target_formation,x,y\nA1,F,0,0\nA2,F,1,1\n")
        return build_production_frame(load_daily(daily_csv(["A1", "A2"], 400)), meta, ["F", "G"], horizons=(6, 12))

    def test_two_wells(self):
        fr = self.frame()
        cums = [cum_column(p, m) for p in ("oil", "gas") for m in (6, 12)]
        assert len(fr) == 2
        assert fr.df[cums].notna().all().all()
        assert fr.df.at["A1", cum_column("oil", 6)] == 5.0 * 182

    def test_well_without_production(self):
        meta = load_meta("well_id,target_formation,x,y\nA1,F,0,0\nA3,F,1,1\n")
        fr = build_production_frame(load_daily(daily_csv(["A1"], 400)), meta, ["F", "G"], horizons=(6,))
        assert len(fr) == 2
        assert fr.df.loc["A3", [cum_column("oil", 6), cum_column("gas", 6)]].isna().all()

    def test_append_full_half_duplicate(self):
        fr = self.frame()
        before = fr.column_hash()
        full = fr.append_features("GR_fpc1", {"A1": 1.0, "A2": 2.0})
        assert full.df["GR_fpc1"].notna().all()
        assert full.column_hash(fr.df.columns) == before
        half = fr.append_features("GR_fpc1", {"A1": 1.0})
        assert half.df["GR_fpc1"].isna().sum() == 1
        assert fr.column_hash() == before
        with pytest.raises(DuplicateFeature):
            full.append_features("GR_fpc1", {})

    def test_csv_roundtrip(self, tmp_path):
        fr = self.frame().append_features("GR_A_fpc1", {"A1": 0.1 + 0.2})
        fr.to_csv(tmp_path / "f.csv")
        back = CumulativeProductionFrame.read_csv(tmp_path / "f.csv")
        assert back.features == ("GR_A_fpc1",)
        pd.testing.assert_frame_equal(back.df, fr.df, check_exact=True)


def test_synthetic_censoring_counts(small_field):
    _, field, cfg = small_field
    meta = load_meta(field.files["meta.csv"])
    fr = build_production_frame(load_daily(field.files["production.csv"]), meta, [f for f, _ in cfg.formations], horizons=(12,))
    assert fr.target("oil", 12).notna().sum() == cfg.n_horizontal - cfg.n_short_history
    assert fr.target("gas", 12).notna().sum() == cfg.n_horizontal - cfg.n_short_history - cfg.n_gas_unreported
