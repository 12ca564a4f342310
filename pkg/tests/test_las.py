import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sweetspot.errors import DuplicateRaw, MissingSection, NoDepthCurve, RowArity, WrappedNotSupported
from sweetspot.las import LasFile, apply_dictionary, load_dictionary, parse_las, to_las


def las_text(rows, curves=("DEPT", "GR"), null="-999.25", wrap="NO", extra_well=""):
    lines = [
        "~VERSION INFORMATION",
        " VERS.   2.0 : CWLS",
        f" WRAP.   {wrap} : ONE LINE PER DEPTH STEP",
        "~WELL INFORMATION",
        f" NULL.  {null} : NULL VALUE",
        " UWI.   42-001-00001 : UWI",
        " X.m    1500.0 : EASTING",
        " Y.m    2500.0 : NORTHING",
    ]
    if extra_well:
        lines.append(extra_well)
    lines.append("~CURVE INFORMATION")
    lines += [f" {c}.M : " for c in curves]
    lines.append("~A")
    lines += [" ".join(str(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


class TestParse:
    def test_null_sentinel_becomes_missing(self):
        f = parse_las(las_text([(1000.0, 55.1), (1000.5, 60.2), (1001.0, -999.25)]))
        assert f.depth.tolist() == [1000.0, 1000.5, 1001.0]
        assert f.curves["GR"][:2].tolist() == [55.1, 60.2]
        assert np.isnan(f.curves["GR"][2])
        assert f.well_id == "42-001-00001"
        assert f.location == (1500.0, 2500.0)

    def test_duplicate_depth_row_dropped(self):
        f = parse_las(las_text([(1000.0, 1.0), (1000.5, 2.0), (1000.5, 3.0)]))
        assert f.depth.tolist() == [1000.0, 1000.5]
        assert f.curves["GR"].tolist() == [1.0, 2.0]
        assert f.dropped_rows == 1

    def test_decreasing_depth_dropped(self):
        f = parse_las(las_text([(1000.0, 1.0), (999.0, 2.0), (1001.0, 3.0)]))
        assert f.depth.tolist() == [1000.0, 1001.0]
        assert f.dropped_rows == 1

    def test_row_arity(self):
        with pytest.raises(RowArity):
            parse_las(las_text([(1000.0, 1.0, 2.0)]))

    def test_missing_curve_section(self):
        text = las_text([(1000.0, 1.0)]).replace("~CURVE INFORMATION", "#")
        with pytest.raises(MissingSection):
            parse_las(text)

    def test_missing_ascii_section(self):
        text = las_text([(1000.0, 1.0)]).split("~A")[0]
        with pytest.raises(MissingSection):
            parse_las(text)

    def test_wrapped_rejected(self):
        with pytest.raises(WrappedNotSupported):
            parse_las(las_text([(1000.0, 1.0)], wrap="YES"))
        assert issubclass(WrappedNotSupported, MissingSection)

    def test_first_curve_must_be_depth(self):
        with pytest.raises(NoDepthCurve):
            parse_las(las_text([(1.0, 1000.0)], curves=("GR", "DEPT")))

    def test_custom_null(self):
        f = parse_las(las_text([(1000.0, -9999), (1001.0, 4.0)], null="-9999"))
        assert np.isnan(f.curves["GR"][0])
        assert f.null_value == -9999.0

    def test_missing_plus_finite_is_length(self):
        f = parse_las(las_text([(1.0, -999.25), (2.0, 3.0), (3.0, -999.25)]))
        for c in f.curves.values():
            assert np.isnan(c).sum() + np.isfinite(c).sum() == len(f.depth)


finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


class TestRoundTrip:
    @settings(max_examples=60, deadline=None)
    @given(
        steps=st.lists(st.floats(min_value=0.01, max_value=10.0), min_size=1, max_size=30),
        data=st.data(),
    )
    def test_serialize_parse_identity(self, steps, data):
        depth = 1000.0 + np.cumsum(steps)
        gr = np.array(data.draw(st.lists(finite | st.just(float("nan")), min_size=len(depth), max_size=len(depth))))
        f = LasFile("W-1", depth, {"GR": gr, "RHOB": gr * 0.5}, location=(1.0, 2.0), depth_unit="M")
        back = parse_las(to_las(f))
        assert back == f


class TestDictionary:
    def test_aliases_and_self_mapping(self):
        d = load_dictionary("raw,alias\nGammaRay,GR\nGamma,GR\nGR,GR\n")
        assert len(d) == 3
        assert d.canonical_set == {"GR"}
        assert d.lookup("gammaray") == "GR"

    def test_header_only(self):
        assert len(load_dictionary("raw,alias\n")) == 0

    def test_case_insensitive_conflict(self):
        with pytest.raises(DuplicateRaw):
            load_dictionary("raw,alias\nGamma,GR\ngamma,RHOB\n")

    def test_canonical_aliases_map_to_themselves(self):
        d = load_dictionary("raw,alias\nDEN,RHOB\n")
        assert d.lookup("RHOB") == "RHOB"


def _file(curves):
    depth = np.arange(len(next(iter(curves.values())))) + 1000.0
    return LasFile("W", depth, {k: np.asarray(v, dtype=float) for k, v in curves.items()})


class TestApplyDictionary:
    d = load_dictionary("raw,alias\nGammaRay,GR\nGamma,GR\nRHOB,RHOB\n")

    def test_rename(self):
        f, skipped = apply_dictionary(_file({"GammaRay": [1, 2], "RHOB": [3, 4]}), self.d)
        assert list(f.curves) == ["GR", "RHOB"]
        assert skipped == []

    def test_unknown_curve_skipped(self):
        f, skipped = apply_dictionary(_file({"XYZ": [1, 2]}), self.d)
        assert f.curves == {}
        assert skipped == ["XYZ"]

    def test_fewest_missing_wins(self):
        gamma = np.arange(20.0)
        gamma[:10] = np.nan
        ray = np.full(20, 5.0)
        ray[:2] = np.nan
        f, _ = apply_dictionary(_file({"Gamma": gamma, "GammaRay": ray}), self.d)
        np.testing.assert_array_equal(f.curves["GR"], ray)

    def test_tie_keeps_first(self):
        f, _ = apply_dictionary(_file({"Gamma": [1.0, 2.0], "GammaRay": [3.0, 4.0]}), self.d)
        assert f.curves["GR"].tolist() == [1.0, 2.0]

    def test_idempotent(self):
        once, _ = apply_dictionary(_file({"Gamma": [1.0, 2.0], "GammaRay": [3.0, 4.0], "XYZ": [0, 0]}), self.d)
        twice, skipped = apply_dictionary(once, self.d)
        assert twice == once
        assert skipped == []
