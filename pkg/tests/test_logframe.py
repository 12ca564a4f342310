import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sweetspot.errors import CurveAbsent, EmptyList, InsufficientCoverage
from sweetspot.formation import Formation3dMap, Interval
from sweetspot.las import LasFile
from sweetspot.logframe import (
    StandardizedLogFrame,
    build_standardized_frame,
    choose_resample_count,
    extract_log_section,
    fill_row_gaps,
    resample_depths,
)


def well(wid, depth, **curves):
    depth = np.asarray(depth, dtype=float)
    return LasFile(wid, depth, {k: np.asarray(v, dtype=float) for k, v in curves.items()})


@pytest.mark.parametrize("counts, n", [([30, 50, 40], 40), ([5, 5, 5], 16), ([100], 100)])
def test_resample_count(counts, n):
    assert choose_resample_count(counts) == n


def test_resample_count_empty():
    with pytest.raises(EmptyList):
        choose_resample_count([])


class TestExtract:
    def test_linear_curve(self):
        d = np.arange(990.0, 1111.0, 0.5)
        out = extract_log_section(well("W", d, V=d), "V", (1000.0, 1100.0), 5)
        assert out.tolist() == [1000.0, 1025.0, 1050.0, 1075.0, 1100.0]

    def test_constant(self):
        d = np.arange(0.0, 50.0)
        out = extract_log_section(well("W", d, V=np.full(50, 7.0)), "V", (10.3, 30.7), 3)
        assert out.tolist() == [7.0, 7.0, 7.0]

    def test_midpoint(self):
        f = well("W", [1000.0, 1002.0], V=[2.0, 6.0])
        assert extract_log_section(f, "V", (1000.0, 1002.0), 3)[1] == 4.0

    def test_curve_absent(self):
        with pytest.raises(CurveAbsent):
            extract_log_section(well("W", [0.0, 1.0], V=[1, 2]), "GR", (0.0, 1.0), 3)

    def test_low_overlap(self):
        d = np.arange(0.0, 10.0)
        with pytest.raises(InsufficientCoverage):
            extract_log_section(well("W", d, V=d), "V", (6.0, 20.0), 16)

    def test_too_many_missing(self):
        d = np.arange(0.0, 101.0)
        v = d.copy()
        v[10:40] = np.nan
        with pytest.raises(InsufficientCoverage):
            extract_log_section(well("W", d, V=v), "V", (0.0, 100.0), 51)

    def test_outside_range_is_missing(self):
        d = np.arange(0.0, 81.0)
        out = extract_log_section(well("W", d, V=d), "V", (0.0, 90.0), 10)
        assert np.isnan(out[-1]) and np.isfinite(out[:-1]).all()

    @settings(max_examples=80, deadline=None)
    @given(
        a=st.floats(-100, 100),
        b=st.floats(-1e4, 1e4),
        top=st.floats(1000, 2000),
        thick=st.floats(5, 300),
        n=st.integers(2, 200),
        step=st.sampled_from([0.1, 0.25, 0.5, 1.0]),
    )
    def test_affine_exact(self, a, b, top, thick, n, step):
        bottom = top + thick
        d = np.arange(np.floor(top) - 2, bottom + 2, step)
        f = well("W", d, V=a * d + b)
        out = extract_log_section(f, "V", (top, bottom), n)
        q = resample_depths(top, bottom, n)
        assert q[0] == top and q[-1] == bottom
        ref = a * q + b
        np.testing.assert_allclose(out, ref, rtol=1e-9, atol=1e-9 * (abs(b) + abs(a) * bottom))


def test_fill_row_gaps():
    row = np.array([np.nan, 1.0, np.nan, 3.0, np.nan])
    assert fill_row_gaps(row).tolist() == [1.0, 1.0, 2.0, 3.0, 3.0]


def fmap_for(wells, top=1000.0, bottom=1050.0):
    return Formation3dMap({(w, "A"): Interval(top, bottom) for w in wells})


class TestFrame:
    d = np.arange(990.0, 1060.5, 0.5)

    def test_linear_rows(self):
        files = {f"W{i}": well(f"W{i}", self.d, GR=(i + 1) * self.d) for i in range(3)}
        fr = build_standardized_frame(files, fmap_for(files), "GR", ["A"])
        b = fr.blocks["A"]
        assert b.matrix.shape == (3, b.n)
        assert b.n == 101  # 101 samples from 1000 to 1050 inclusive
        for i, row in enumerate(b.matrix):
            np.testing.assert_allclose(np.diff(row, 2), 0.0, atol=1e-9)
            assert row[0] == pytest.approx((i + 1) * 1000.0)

    def test_one_well_lacks_curve(self):
        files = {
            "W1": well("W1", self.d, GR=self.d),
            "W2": well("W2", self.d, RHOB=self.d),
            "W3": well("W3", self.d, GR=self.d),
        }
        fr = build_standardized_frame(files, fmap_for(files), "GR", ["A"])
        assert fr.blocks["A"].well_ids == ["W1", "W3"]
        assert fr.rejections == [{"well_id": "W2", "formation": "A", "reason": "CurveAbsent"}]

    def test_all_lack_curve(self):
        files = {f"W{i}": well(f"W{i}", self.d, RHOB=self.d) for i in range(3)}
        fr = build_standardized_frame(files, fmap_for(files), "GR", ["A"])
        assert "A" not in fr.blocks
        assert any(r["reason"] == "EmptyBlock" for r in fr.rejections)

    def test_csv_roundtrip_and_determinism(self, rng):
        files = {f"W{i}": well(f"W{i}", self.d, GR=rng.normal(size=len(self.d))) for i in range(4)}
        a = build_standardized_frame(files, fmap_for(files), "GR", ["A"])
        b = build_standardized_frame(files, fmap_for(files), "GR", ["A"])
        assert a.block_csv("A") == b.block_csv("A")
        back = StandardizedLogFrame.read("GR", {"A": a.block_csv("A")}, a.sidecar())
        np.testing.assert_array_equal(back.blocks["A"].matrix, a.blocks["A"].matrix)
        assert back.provenance == a.provenance
