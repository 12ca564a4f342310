"""Benchmark ranking, nested leave-one-well-out validation and the
kriging-on-production baseline."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import BadK, EmptyDataset, MissingFeatures, ZeroVariance
from .geostat import SpatialSamples, empirical_variogram, fit_variogram, krige, VariogramModel
from .models import Dataset, ModelSpec, Scaling, kfold_labels, select_features_enet

log = logging.getLogger(__name__)


@dataclass
class EvalConfig:
    K: int = 10
    B: int = 3
    inner_K: int = 10
    inner_B: int = 1
    seed: int = 0
    top_m: int = 3
    enet_alpha: float = 0.5
    n_lambda: int = 50
    lambda_min_ratio: float = 1e-3
    transform: str = "log1p"
    min_wells: int = 10
    family: str = "exponential"


# -- resampling --------------------------------------------------------------


@dataclass
class ResamplePlan:
    N: int
    K: int
    B: int
    seed: object
    assignments: np.ndarray  # B x N, labels 1..K

    def splits(self):
        """Yield ``(repeat, fold, train_idx, test_idx)`` in fixed order."""
        for b in range(self.B):
            for k in range(1, self.K + 1):
                test = np.flatnonzero(self.assignments[b] == k)
                train = np.flatnonzero(self.assignments[b] != k)
                yield b, k, train, test


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, (tuple, list)):
        return np.random.default_rng(np.random.SeedSequence([int(s) for s in seed]))
    return np.random.default_rng(seed)


def make_plan(N: int, K: int, B: int, seed=0) -> ResamplePlan:
    if not 2 <= K <= N:
        raise BadK(f"need 2 <= K <= N, got K={K}, N={N}")
    if B < 1:
        raise BadK(f"need B >= 1, got {B}")
    rng = _rng(seed)
    assignments = np.vstack([kfold_labels(N, K, rng) for _ in range(B)])
    return ResamplePlan(N, K, B, seed, assignments)


# -- metrics -----------------------------------------------------------------


def rmse(obs, pred) -> float:
    obs = np.asarray(obs, dtype=float)
    pred = np.asarray(pred, dtype=float)
    return float(np.sqrt(np.mean((obs - pred) ** 2)))


def pearson(obs, pred) -> float:
    """Pearson correlation; ``nan`` when either side has zero variance."""
    try:
        return pearson_strict(obs, pred)
    except ZeroVariance:
        return float("nan")


def pearson_strict(obs, pred) -> float:
    obs = np.asarray(obs, dtype=float)
    pred = np.asarray(pred, dtype=float)
    a, b = obs - obs.mean(), pred - pred.mean()
    den = np.sqrt((a @ a) * (b @ b))
    if not den > 0 or np.ptp(obs) == 0 or np.ptp(pred) == 0:
        raise ZeroVariance("correlation undefined for a constant vector")
    return float(np.clip((a @ b) / den, -1.0, 1.0))


# -- dataset assembly --------------------------------------------------------


TRANSFORMS = {
    "none": (lambda v: v, lambda v: v),
    "log1p": (np.log1p, np.expm1),
}


def assemble_dataset(frame, phase: str, horizon: int, transform: str = "log1p") -> Dataset:
    """Rows with a non-missing target; feature columns may contain ``nan``
    (imputed later inside each training split)."""
    if not frame.features:
        raise MissingFeatures("production frame carries no feature columns")
    target = frame.target(phase, horizon)
    keep = [w for w, v in target.items() if np.isfinite(v)]
    if not keep:
        raise EmptyDataset(f"no wells with {horizon}-month {phase} production")
    fwd, _ = TRANSFORMS[transform]
    sub = frame.df.loc[keep]
    return Dataset(
        X=sub[list(frame.features)].to_numpy(dtype=float),
        y=fwd(target.loc[keep].to_numpy(dtype=float)),
        feature_names=list(frame.features),
        well_ids=keep,
        coords=frame.filter_wells(keep).coords(),
    )


# -- benchmark ---------------------------------------------------------------


@dataclass
class ModelResult:
    name: str
    grid: list[dict]
    rmse_grid: np.ndarray  # n_grid x (K*B)
    best: int
    selected: list = field(default_factory=list)

    @property
    def rmses(self) -> np.ndarray:
        return self.rmse_grid[self.best]

    @property
    def params(self) -> dict:
        return self.grid[self.best]

    @property
    def median(self) -> float:
        return float(np.median(self.rmses))

    @property
    def iqr(self) -> float:
        q75, q25 = np.percentile(self.rmses, [75, 25])
        return float(q75 - q25)


@dataclass
class BenchmarkResult:
    models: dict[str, ModelResult]
    ranking: list[str]
    failures: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "ranking": self.ranking,
            "failures": self.failures,
            "models": {
                name: {
                    "params": r.params,
                    "median_rmse": r.median,
                    "iqr_rmse": r.iqr,
                    "rmse": r.rmses.tolist(),
                }
                for name, r in self.models.items()
            },
        }


def _split_selection(Xtr, ytr, cfg: EvalConfig, seed):
    K = min(cfg.inner_K, max(2, len(ytr) // 2))
    return select_features_enet(
        Xtr, ytr, K=K, alpha=cfg.enet_alpha, n_lambda=cfg.n_lambda, min_ratio=cfg.lambda_min_ratio, seed=seed
    ).features


def benchmark(ds: Dataset, zoo: list[ModelSpec], plan: ResamplePlan, cfg: EvalConfig | None = None) -> BenchmarkResult:
    """Repeated K-fold RMSE distribution per model at its best grid point.

    Imputation, scaling and elastic-net pre-selection are recomputed inside
    every training fold. Ranking: median RMSE, then IQR, then name.
    """
    cfg = cfg or EvalConfig()
    if plan.N != ds.N:
        raise BadK(f"plan is for N={plan.N}, dataset has N={ds.N}")
    _, inv = TRANSFORMS["none"]
    splits = list(plan.splits())
    R = len(splits)
    grids = {s.name: s.grid_points() for s in zoo}
    scores = {s.name: np.full((len(grids[s.name]), R), np.nan) for s in zoo}
    selected = {s.name: [] for s in zoo}
    failures: dict[str, str] = {}
    need_sel = any(s.feature_selection == "elastic_net_pre" for s in zoo)
    for r, (b, k, tr, te) in enumerate(splits):
        sc = Scaling.fit(ds.X[tr], ds.y[tr])
        Xtr, ytr, Xte = sc.transform(ds.X[tr]), sc.transform_y(ds.y[tr]), sc.transform(ds.X[te])
        sel = _split_selection(Xtr, ytr, cfg, (_seed_int(plan.seed), b, k)) if need_sel else None
        for spec in zoo:
            if spec.name in failures:
                continue
            cols = sel if spec.feature_selection == "elastic_net_pre" else slice(None)
            selected[spec.name].append([ds.feature_names[j] for j in sc.kept[cols]])
            try:
                for g, model in enumerate(spec.fit_all(Xtr[:, cols], ytr, grids[spec.name])):
                    pred = sc.inverse_y(model.predict(Xte[:, cols]))
                    scores[spec.name][g, r] = rmse(ds.y[te], pred)
            except (np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
                failures[spec.name] = f"{type(exc).__name__}: {exc}"
                log.warning("model %s failed in benchmark: %s", spec.name, exc)
    results = {}
    for spec in zoo:
        if spec.name in failures:
            continue
        mean_cv = scores[spec.name].mean(axis=1)
        best = int(np.argmin(mean_cv))
        results[spec.name] = ModelResult(spec.name, grids[spec.name], scores[spec.name], best, selected[spec.name])
    ranking = sorted(results, key=lambda n: (results[n].median, results[n].iqr, n))
    return BenchmarkResult(results, ranking, failures)


def _seed_int(seed) -> int:
    if isinstance(seed, (tuple, list)):
        return int(np.random.SeedSequence([int(s) for s in seed]).generate_state(1)[0])
    return int(seed)


# -- nested leave-one-well-out -----------------------------------------------


@dataclass
class IterationState:
    """Everything learned from the N-1 training wells of one outer iteration."""

    well_id: str
    scaling: Scaling
    selected: np.ndarray
    ranking: list[str]
    params: dict[str, dict]
    medians: dict[str, float]
    trained: dict[str, dict]
    predictions: dict[str, float]

    @property
    def top(self) -> str:
        return self.ranking[0]

    def fingerprint(self) -> dict:
        """Trained state without the held-out prediction."""
        return {
            "scaling": self.scaling.to_dict(),
            "selected": self.selected.tolist(),
            "ranking": self.ranking,
            "params": self.params,
            "medians": self.medians,
            "trained": self.trained,
        }


def nested_loo_iteration(ds: Dataset, i: int, zoo: list[ModelSpec], cfg: EvalConfig) -> IterationState:
    """Feature and model selection on all wells but ``i``; predict well ``i``.

    Row ``i`` is only touched to form the final prediction.
    """
    train = np.array([j for j in range(ds.N) if j != i])
    sub = ds.subset(train)
    plan = make_plan(sub.N, min(cfg.inner_K, sub.N), cfg.inner_B, seed=(cfg.seed, i))
    bench = benchmark(sub, zoo, plan, cfg)
    if not bench.ranking:
        raise EmptyDataset(f"every model failed for held-out well {ds.well_ids[i]}")
    sc = Scaling.fit(sub.X, sub.y)
    Xtr, ytr = sc.transform(sub.X), sc.transform_y(sub.y)
    x_i = sc.transform(ds.X[i : i + 1])
    sel = _split_selection(Xtr, ytr, cfg, (cfg.seed, i, 1_000_003))
    by_name = {s.name: s for s in zoo}
    trained, preds = {}, {}
    for name in bench.ranking:
        spec = by_name[name]
        cols = sel if spec.feature_selection == "elastic_net_pre" else slice(None)
        model = spec.fit(Xtr[:, cols], ytr, bench.models[name].params)
        trained[name] = model.to_dict()
        preds[name] = float(sc.inverse_y(model.predict(x_i[:, cols]))[0])
    return IterationState(
        well_id=ds.well_ids[i],
        scaling=sc,
        selected=sel,
        ranking=bench.ranking,
        params={n: bench.models[n].params for n in bench.ranking},
        medians={n: bench.models[n].median for n in bench.ranking},
        trained=trained,
        predictions=preds,
    )


@dataclass
class LooEntry:
    name: str
    well_ids: list[str]
    observed: np.ndarray
    predicted: np.ndarray
    y_sd: float

    @property
    def rmse(self) -> float:
        return rmse(self.observed, self.predicted)

    @property
    def rmse_std(self) -> float:
        return self.rmse / self.y_sd

    @property
    def pearson(self) -> float:
        return pearson(self.observed, self.predicted)

    def to_dict(self, inverse=None) -> dict:
        out = {
            "rmse": self.rmse,
            "rmse_standardized": self.rmse_std,
            "pearson": _nan_to_none(self.pearson),
            "n": len(self.observed),
        }
        if inverse is not None:
            out["rmse_raw"] = rmse(inverse(self.observed), inverse(self.predicted))
        return out


def _nan_to_none(v):
    return None if v is None or not np.isfinite(v) else v


@dataclass
class LooReport:
    entries: dict[str, LooEntry]
    finalists: list[str]
    iterations: list[dict]
    failed_wells: list[str] = field(default_factory=list)
    first_place: dict[str, int] = field(default_factory=dict)

    def table(self, baseline: str = "kriging") -> list[dict]:
        rows = []
        for name in self.finalists + [baseline]:
            if name in self.entries:
                e = self.entries[name]
                rows.append({"method": name, "rmse": e.rmse_std, "pearson": _nan_to_none(e.pearson)})
        return rows


def _iteration_or_failure(args):
    ds, i, zoo, cfg = args
    try:
        return nested_loo_iteration(ds, i, zoo, cfg)
    except EmptyDataset as exc:
        return exc


def _iterations(ds, zoo, cfg, n_jobs):
    jobs = [(ds, i, zoo, cfg) for i in range(ds.N)]
    if n_jobs == 1:
        yield from map(_iteration_or_failure, jobs)
        return
    from concurrent.futures import ProcessPoolExecutor

    workers = n_jobs if n_jobs > 0 else (os.cpu_count() or 1)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves input order, so results do not depend on scheduling
        yield from pool.map(_iteration_or_failure, jobs, chunksize=max(1, ds.N // (4 * workers)))


def nested_loo(
    ds: Dataset, zoo: list[ModelSpec], cfg: EvalConfig | None = None, finalists=None, progress=None, n_jobs: int = 1
) -> LooReport:
    """External leave-one-well-out loop around feature and model selection.

    Entries: ``nested_top`` (the model ranked first in each iteration) and
    every zoo model evaluated at every well with its inner-tuned
    hyperparameters. ``finalists`` defaults to the ``top_m`` models that
    ranked first most often (ties and never-first models by name).
    """
    cfg = cfg or EvalConfig()
    if ds.N < cfg.min_wells:
        raise EmptyDataset(f"nested LOO needs at least {cfg.min_wells} wells, got {ds.N}")
    y_sd = float(np.std(ds.y, ddof=1))
    preds: dict[str, list] = {"nested_top": []}
    ids: dict[str, list] = {"nested_top": []}
    iterations, failed = [], []
    first: dict[str, int] = {}
    for i, st in enumerate(_iterations(ds, zoo, cfg, n_jobs)):
        if isinstance(st, EmptyDataset):
            log.warning("%s", st)
            failed.append(ds.well_ids[i])
            continue
        first[st.top] = first.get(st.top, 0) + 1
        preds["nested_top"].append(st.predictions[st.top])
        ids["nested_top"].append(i)
        for name, v in st.predictions.items():
            preds.setdefault(name, []).append(v)
            ids.setdefault(name, []).append(i)
        iterations.append(
            {
                "well_id": st.well_id,
                "top_model": st.top,
                "params": st.params[st.top],
                "selected_features": [ds.feature_names[j] for j in st.scaling.kept[st.selected]],
            }
        )
        if progress:
            progress(i + 1, ds.N)
    entries = {
        name: LooEntry(
            name,
            [ds.well_ids[j] for j in ids[name]],
            ds.y[np.array(ids[name], dtype=int)],
            np.array(preds[name]),
            y_sd,
        )
        for name in preds
        if preds[name]
    }
    if finalists is None:
        # models that never ranked first still fill empty slots
        pool = [n for n in entries if n != "nested_top"]
        finalists = sorted(pool, key=lambda n: (-first.get(n, 0), n))[: cfg.top_m]
    return LooReport(entries, list(finalists), iterations, failed, dict(sorted(first.items())))


# -- kriging baseline --------------------------------------------------------


def kriging_baseline(ds: Dataset, cfg: EvalConfig | None = None, n_bins: int = 12) -> LooEntry:
    """Leave-one-well-out ordinary kriging of the target over surface
    coordinates; the variogram is refit on each training set."""
    cfg = cfg or EvalConfig()
    if ds.coords is None or ds.N < cfg.min_wells:
        raise EmptyDataset(f"kriging baseline needs at least {cfg.min_wells} wells with coordinates")
    preds = np.empty(ds.N)
    for i in range(ds.N):
        train = np.array([j for j in range(ds.N) if j != i])
        s = SpatialSamples.from_arrays(ds.coords[train], ds.y[train])
        if len(s) >= 2:
            vm = fit_variogram(empirical_variogram(s, n_bins=n_bins), cfg.family)
        else:
            vm = VariogramModel(cfg.family, 0.0, 0.0, 1.0, degenerate=True)
        preds[i] = krige(s, vm, ds.coords[i : i + 1]).predictions[0]
    return LooEntry("kriging", list(ds.well_ids), ds.y.copy(), preds, float(np.std(ds.y, ddof=1)))
