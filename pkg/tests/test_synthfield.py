import io

import numpy as np
import pandas as pd
import pytest

from sweetspot.errors import ConfigInvalid, Mismatch
from sweetspot.formation import load_tops
from sweetspot.geostat import SpatialSamples, empirical_variogram, fit_variogram
from sweetspot.las import parse_las
from sweetspot.production import build_production_frame, cum_column, load_daily, load_meta
from sweetspot.synthfield import SynthConfig, generate, oracle_r2

SMALL = dict(n_vertical=12, n_horizontal=15, n_short_history=2, n_gas_unreported=1, n_missing_tops=1)


def production(field, horizons=(12,)):
    order = field.files["formation_order.txt"].split()
    return build_production_frame(load_daily(field.files["production.csv"]), load_meta(field.files["meta.csv"]), order, horizons=horizons)


class TestGenerate:
    def test_deterministic(self):
        a = generate(SynthConfig(seed=4, **SMALL))
        b = generate(SynthConfig(seed=4, **SMALL))
        assert a.files == b.files and a.ground_truth == b.ground_truth

    def test_seed_matters(self):
        assert generate(SynthConfig(seed=1, **SMALL)).files != generate(SynthConfig(seed=2, **SMALL)).files

    def test_byte_identical_on_disk(self, tmp_path):
        for d in ("a", "b"):
            generate(SynthConfig(seed=9, **SMALL)).write(tmp_path / d)
        for p in sorted((tmp_path / "a").rglob("*")):
            if p.is_file():
                assert p.read_bytes() == (tmp_path / "b" / p.relative_to(tmp_path / "a")).read_bytes()

    def test_layout(self):
        f = generate(SynthConfig(seed=0, **SMALL))
        las = [k for k in f.files if k.startswith("las")]
        assert len(las) == 12
        assert {"dictionary.csv", "tops.csv", "coords.csv", "formation_order.txt", "meta.csv", "production.csv"} <= set(f.files)
        assert len(f.ground_truth["wells"]) == 15

    def test_las_parse(self):
        f = generate(SynthConfig(seed=0, **SMALL))
        for name, text in f.files.items():
            if name.startswith("las"):
                las = parse_las(text)
                assert np.all(np.diff(las.depth) > 0)

    def test_tops_ordered(self):
        f = generate(SynthConfig(seed=0, **SMALL))
        t = load_tops(f.files["tops.csv"], f.files["coords.csv"], f.files["formation_order.txt"])
        order = t.formation_order
        for w in t.well_coords:
            vals = [t.tops[(w, fm)] for fm in order if (w, fm) in t.tops]
            assert vals == sorted(vals)
        assert sum(1 for w in t.well_coords for fm in order if (w, fm) not in t.tops) == 1

    def test_noiseless_production_exact(self):
        f = generate(SynthConfig(seed=3, noise_sd=0.0, **SMALL))
        df = production(f).df
        col = cum_column("oil", 12)
        for w, info in f.ground_truth["wells"].items():
            if info["short_history"]:
                assert np.isnan(df.at[w, col])
                continue
            # daily rates are written with six decimals
            assert df.at[w, col] == pytest.approx(np.exp(info["log_mean_oil"]), abs=366 * 5e-7)

    def test_censoring_counts(self):
        f = generate(SynthConfig(seed=0))
        df = production(f).df
        assert df[cum_column("oil", 12)].notna().sum() == 88
        assert df[cum_column("gas", 12)].notna().sum() == 86

    def test_null_signal_uses_null_noise(self):
        f = generate(SynthConfig(seed=0, signal_coefficients={}, **SMALL))
        means = {w["log_mean_oil"] for w in f.ground_truth["wells"].values()}
        assert len(means) == 1
        assert f.ground_truth["noise_sd"] == 1.0

    def test_calibrated_noise_halves_variance(self):
        r2 = []
        for seed in range(20):
            f = generate(SynthConfig(seed=seed, n_short_history=0, n_gas_unreported=0))
            df = production(f).df
            truth = {w: v["log_mean_oil"] for w, v in f.ground_truth["wells"].items()}
            obs = {w: float(np.log(df.at[w, cum_column("oil", 12)])) for w in truth}
            r2.append(oracle_r2(truth, obs))
        assert np.mean(r2) == pytest.approx(0.5, abs=0.1)

    def test_latent_range(self):
        ranges = []
        for seed in range(20):
            cfg = SynthConfig(seed=seed, n_vertical=60, n_horizontal=200, pad_offset_sd=None, n_short_history=0, n_gas_unreported=0)
            f = generate(cfg)
            meta = pd.read_csv(io.StringIO(f.files["meta.csv"]))
            z = np.array(f.ground_truth["latent"]["GR|Target"])[:, 0]
            s = SpatialSamples.from_arrays(meta[["x", "y"]].to_numpy(), z)
            ranges.append(fit_variogram(empirical_variogram(s, n_bins=15), "exponential").range)
        assert abs(np.median(ranges) / cfg.correlation_length - 1.0) < 0.5

    def test_pads_near_vertical_wells(self):
        f = generate(SynthConfig(seed=0, **SMALL))
        v = pd.read_csv(io.StringIO(f.files["coords.csv"]))[["x", "y"]].to_numpy()
        h = pd.read_csv(io.StringIO(f.files["meta.csv"]))[["x", "y"]].to_numpy()
        nearest = np.min(np.linalg.norm(h[:, None] - v[None], axis=2), axis=1)
        assert np.median(nearest) < 1000.0


class TestValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_vertical": 0},
            {"n_horizontal": 0},
            {"noise_sd": -1.0},
            {"correlation_length": 0.0},
            {"pad_offset_sd": -5.0},
            {"n_short_history": 50, "n_horizontal": 40},
            {"target_formation": "Base"},
            {"target_formation": "Nowhere"},
            {"signal_coefficients": {("GR", "Target", 2): 1.0}},
            {"formations": (("A", 10.0), ("B", -1.0))},
            {"latent_fields": {("GR", "Target"): (-1.0, 1.0)}},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigInvalid):
            generate(SynthConfig(**kwargs))


class TestOracleR2:
    def test_perfect(self):
        t = {"a": 1.0, "b": 2.0, "c": 4.0}
        assert oracle_r2(t, dict(t)) == pytest.approx(1.0)

    def test_constant(self):
        assert np.isnan(oracle_r2({"a": 1.0, "b": 2.0, "c": 4.0}, {"a": 3.0, "b": 3.0, "c": 3.0}))

    def test_mismatch(self):
        with pytest.raises(Mismatch):
            oracle_r2({"a": 1.0, "b": 2.0}, {"a": 1.0, "c": 2.0})

    def test_attenuation(self):
        vals = []
        for seed in range(20):
            r = np.random.default_rng(seed)
            mu = r.normal(size=98)
            t = {f"w{i}": m for i, m in enumerate(mu)}
            p = {f"w{i}": m + r.normal() for i, m in enumerate(mu)}
            vals.append(oracle_r2(t, p))
        assert np.mean(vals) == pytest.approx(0.5, abs=0.1)
