"""Regression model zoo, preprocessing and elastic-net feature selection.

Every model is fit on standardized features and a standardized target;
`fit_predict` maps predictions back to the target's original scale.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial.distance import cdist, pdist

from . import _cd_py, cd
from .errors import ColumnMismatch

log = logging.getLogger(__name__)

ENET_TOL = 1e-7
ENET_MAX_SWEEPS = 10_000


@dataclass
class Scaling:
    """Training-split statistics: imputation means, retained columns,
    column means/sds after imputation, and target mean/sd."""

    impute: np.ndarray
    kept: np.ndarray
    x_mean: np.ndarray
    x_sd: np.ndarray
    y_mean: float
    y_sd: float
    dropped: list[str] = field(default_factory=list)

    @classmethod
    def fit(cls, X, y, feature_names=None) -> "Scaling":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        with np.errstate(invalid="ignore"):
            counts = np.isfinite(X).sum(axis=0)
            impute = np.where(counts > 0, np.nansum(X, axis=0) / np.maximum(counts, 1), 0.0)
        Xf = np.where(np.isfinite(X), X, impute)
        sd = Xf.std(axis=0, ddof=1) if len(X) > 1 else np.zeros(X.shape[1])
        kept = np.flatnonzero(sd > 1e-12 * np.maximum(np.abs(Xf).max(axis=0), 1.0))
        names = feature_names if feature_names is not None else [str(j) for j in range(X.shape[1])]
        kept_set = set(kept.tolist())
        dropped = [names[j] for j in range(X.shape[1]) if j not in kept_set]
        y_sd = float(y.std(ddof=1)) if len(y) > 1 else 1.0
        return cls(
            impute=impute,
            kept=kept,
            x_mean=Xf[:, kept].mean(axis=0),
            x_sd=sd[kept],
            y_mean=float(y.mean()),
            y_sd=y_sd if y_sd > 0 else 1.0,
            dropped=dropped,
        )

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        Xf = np.where(np.isfinite(X), X, self.impute)
        return (Xf[:, self.kept] - self.x_mean) / self.x_sd

    def transform_y(self, y) -> np.ndarray:
        return (np.asarray(y, dtype=float) - self.y_mean) / self.y_sd

    def inverse_y(self, z) -> np.ndarray:
        return np.asarray(z, dtype=float) * self.y_sd + self.y_mean

    def to_dict(self) -> dict:
        return {
            "impute": self.impute.tolist(),
            "kept": self.kept.tolist(),
            "x_mean": self.x_mean.tolist(),
            "x_sd": self.x_sd.tolist(),
            "y_mean": self.y_mean,
            "y_sd": self.y_sd,
            "dropped": self.dropped,
        }


@dataclass
class Dataset:
    """Rows are wells. ``X`` may hold ``nan`` until a split is prepared."""

    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    well_ids: list[str]
    coords: np.ndarray | None = None
    scaling: Scaling | None = None

    @property
    def N(self) -> int:
        return len(self.y)

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(
            X=self.X[rows],
            y=self.y[rows],
            feature_names=self.feature_names,
            well_ids=[self.well_ids[i] for i in rows],
            coords=None if self.coords is None else self.coords[rows],
        )


def standardize(ds: Dataset) -> Dataset:
    """Impute, drop zero-variance columns and z-score X and y (ddof=1).

    The returned dataset carries the `Scaling` used, for inverse transforms.
    """
    sc = Scaling.fit(ds.X, ds.y, ds.feature_names)
    if sc.dropped:
        log.info("dropped zero-variance columns: %s", sc.dropped)
    return Dataset(
        X=sc.transform(ds.X),
        y=sc.transform_y(ds.y),
        feature_names=[ds.feature_names[j] for j in sc.kept],
        well_ids=ds.well_ids,
        coords=ds.coords,
        scaling=sc,
    )


# -- elastic net -------------------------------------------------------------


@dataclass
class ElasticNetFit:
    coef: np.ndarray
    intercept: float
    sweeps: int
    converged: bool


def _gram(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = X.mean(axis=0), y.mean()
    Xc, yc = X - xm, y - ym
    n = len(y)
    G = np.ascontiguousarray(Xc.T @ Xc / n)
    q = np.ascontiguousarray(Xc.T @ yc / n)
    return G, q, xm, ym


def lambda_max(X, y, alpha: float) -> float:
    """Smallest penalty at which every coefficient is zero."""
    _, q, _, _ = _gram(X, y)
    if q.size == 0:
        return 0.0
    return float(np.abs(q).max() / max(alpha, 1e-3))


def fit_elastic_net(X, y, alpha: float, lam: float, tol=ENET_TOL, max_sweeps=ENET_MAX_SWEEPS, debug=False) -> ElasticNetFit:
    """Minimize ``(1/2N)|y - b0 - Xb|^2 + lam*(alpha*|b|_1 + (1-alpha)/2*|b|^2)``
    by cyclic coordinate descent.

    With ``debug=True`` the pure-Python kernel runs and asserts that the
    objective never increases between sweeps.
    """
    G, q, xm, ym = _gram(X, y)
    beta = np.zeros(len(q))
    impl = _cd_py if debug else cd
    kwargs = {"debug": True} if debug else {}
    sweeps, converged = impl.enet_gram(G, q, lam * alpha, lam * (1.0 - alpha), beta, tol, max_sweeps, **kwargs)
    if not converged:
        log.warning("elastic net hit the sweep cap (%d) at lambda=%g", max_sweeps, lam)
    return ElasticNetFit(beta, float(ym - xm @ beta), int(sweeps), bool(converged))


def enet_path(X, y, alpha: float, lambdas) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients (L x p) and intercepts along a decreasing lambda path."""
    G, q, xm, ym = _gram(X, y)
    lambdas = np.ascontiguousarray(lambdas, dtype=float)
    coefs, _, converged = cd.enet_path_gram(G, q, lambdas, alpha, ENET_TOL, ENET_MAX_SWEEPS)
    if not np.all(converged):
        log.warning("elastic net path: %d of %d penalties hit the sweep cap", int((~converged).sum()), len(lambdas))
    # row by row, so a path prefix yields bit-identical intercepts
    return coefs, np.array([ym - c @ xm for c in coefs])


def kkt_violation(X, y, fit: ElasticNetFit, alpha: float, lam: float) -> float:
    """Largest violation of the elastic-net subgradient conditions."""
    X = np.asarray(X, dtype=float)
    r = y - fit.intercept - X @ fit.coef
    corr = X.T @ r / len(y) - (1.0 - alpha) * lam * fit.coef
    nz = fit.coef != 0
    v_zero = np.maximum(np.abs(corr[~nz]) - alpha * lam, 0.0)
    v_nz = np.abs(corr[nz] - alpha * lam * np.sign(fit.coef[nz]))
    return float(max(v_zero.max(initial=0.0), v_nz.max(initial=0.0)))


def kfold_labels(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Fold labels 1..k for n rows; fold sizes differ by at most one."""
    labels = np.empty(n, dtype=int)
    labels[rng.permutation(n)] = np.arange(n) % k + 1
    return labels


@dataclass
class Selection:
    features: np.ndarray
    lam: float
    lambdas: np.ndarray
    cv_mse: np.ndarray


def select_features_enet(X, y, K: int = 10, alpha: float = 0.5, n_lambda: int = 50, min_ratio: float = 1e-3, seed=0) -> Selection:
    """Columns with nonzero elastic-net coefficients at the CV-optimal penalty.

    The penalty grid is log-spaced from ``lambda_max`` down to
    ``min_ratio * lambda_max``; ties in CV error go to the larger penalty.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if p == 0:
        return Selection(np.array([], dtype=int), 0.0, np.array([]), np.array([]))
    lmax = lambda_max(X, y, alpha)
    if lmax <= 0.0:
        return Selection(np.array([], dtype=int), 0.0, np.array([]), np.array([]))
    lambdas = lmax * np.logspace(0.0, np.log10(min_ratio), n_lambda)
    labels = kfold_labels(n, min(K, n), np.random.default_rng(seed))
    sse = np.zeros(n_lambda)
    for k in range(1, min(K, n) + 1):
        tr, te = labels != k, labels == k
        coefs, b0 = enet_path(X[tr], y[tr], alpha, lambdas)
        resid = y[te][:, None] - (X[te] @ coefs.T + b0)
        sse += (resid**2).sum(axis=0)
    cv = sse / n
    best = int(np.flatnonzero(cv <= cv.min() * (1.0 + 1e-12))[0])
    fit = fit_elastic_net(X, y, alpha, lambdas[best])
    return Selection(np.flatnonzero(fit.coef != 0.0), float(lambdas[best]), lambdas, cv)


# -- model zoo ---------------------------------------------------------------


@dataclass
class Trained:
    """Fitted state on standardized data."""

    name: str
    params: dict
    kind: str
    coef: np.ndarray | None = None
    intercept: float = 0.0
    X_train: np.ndarray | None = None
    dual: np.ndarray | None = None
    sigma: float | None = None
    y_train: np.ndarray | None = None

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.kind == "linear":
            return self.intercept + X @ self.coef
        if self.kind == "kernel":
            if X.shape[1] == 0:
                return np.full(len(X), self.intercept)
            K = np.exp(-cdist(X, self.X_train, "sqeuclidean") / (2.0 * self.sigma**2))
            return self.intercept + K @ self.dual
        if self.kind == "knn":
            k = int(self.params["k"])
            if X.shape[1] == 0:
                return np.full(len(X), self.y_train.mean())
            d = cdist(X, self.X_train)
            nn = np.argsort(d, axis=1, kind="stable")[:, :k]
            return self.y_train[nn].mean(axis=1)
        raise ValueError(self.kind)

    def to_dict(self) -> dict:
        out = {"name": self.name, "params": self.params, "kind": self.kind, "intercept": self.intercept}
        if self.coef is not None:
            out["coef"] = self.coef.tolist()
        if self.dual is not None:
            out["dual"] = self.dual.tolist()
            out["sigma"] = self.sigma
        return out


def _fit_mean(X, y, params):
    return Trained("mean", params, "linear", coef=np.zeros(X.shape[1]), intercept=float(y.mean()))


def _fit_ols(X, y, params):
    if X.shape[1] == 0:
        return _fit_mean(X, y, params)
    xm, ym = X.mean(axis=0), y.mean()
    coef = np.linalg.lstsq(X - xm, y - ym, rcond=None)[0]
    return Trained("ols", params, "linear", coef=coef, intercept=float(ym - xm @ coef))


def _fit_ridge(X, y, params):
    if X.shape[1] == 0:
        return _fit_mean(X, y, params)
    G, q, xm, ym = _gram(X, y)
    coef = np.linalg.solve(G + params["lambda"] * np.eye(len(q)), q)
    return Trained("ridge", params, "linear", coef=coef, intercept=float(ym - xm @ coef))


def ratio_step(i: int) -> float:
    """The i-th point ``10**(-i/10)`` of the penalty-ratio ladder."""
    return 10.0 ** (-i / 10.0)


def penalty_ladder(ratio: float) -> np.ndarray:
    """Ladder ratios from 1 down to ``ratio``; warm starts follow this order.

    Ratios on the ladder (``ratio_step(i)``) reproduce the same prefix for
    every target, so a grid of ladder ratios can share one path.
    """
    n = int(np.ceil(-10.0 * np.log10(ratio) - 1e-9))
    steps = np.array([ratio_step(i) for i in range(n + 1)])
    steps = steps[steps > ratio * (1.0 + 1e-12)]
    return np.append(steps, ratio)


def _fit_enet_grid(name, X, y, points, alpha_of):
    """Fit every grid point; one warm-started path per distinct alpha."""
    out: list = [None] * len(points)
    groups: dict[float, list[int]] = {}
    for i, pt in enumerate(points):
        groups.setdefault(alpha_of(pt), []).append(i)
    for alpha, idx in groups.items():
        if X.shape[1] == 0 or lambda_max(X, y, alpha) <= 0.0:
            for i in idx:
                out[i] = _fit_mean(X, y, points[i])
            continue
        lmax = lambda_max(X, y, alpha)
        smallest = min(points[i]["lambda_ratio"] for i in idx)
        ladder = penalty_ladder(smallest)
        coefs, b0 = enet_path(X, y, alpha, lmax * ladder)
        for i in idx:
            r = points[i]["lambda_ratio"]
            hits = np.flatnonzero(ladder == r)
            if hits.size == 0:
                # off-ladder ratio: its own path
                c, b = enet_path(X, y, alpha, lmax * penalty_ladder(r))
                out[i] = Trained(name, points[i], "linear", coef=c[-1], intercept=float(b[-1]))
            else:
                out[i] = Trained(name, points[i], "linear", coef=coefs[hits[0]].copy(), intercept=float(b0[hits[0]]))
    return out


def _fit_lasso_grid(X, y, points):
    return _fit_enet_grid("lasso", X, y, points, lambda pt: 1.0)


def _fit_elastic_net_grid(X, y, points):
    return _fit_enet_grid("elastic_net", X, y, points, lambda pt: pt["alpha"])


def _fit_lasso(X, y, params):
    return _fit_lasso_grid(X, y, [params])[0]


def _fit_elastic_net(X, y, params):
    return _fit_elastic_net_grid(X, y, [params])[0]


def _fit_krr(X, y, params):
    ym = float(y.mean())
    if X.shape[1] == 0:
        return Trained("kernel_ridge_rbf", params, "kernel", intercept=ym, X_train=X, dual=np.zeros(len(y)), sigma=1.0)
    d = pdist(X)
    med = float(np.median(d)) if d.size else 1.0
    sigma = params["sigma_scale"] * (med if med > 0 else 1.0)
    K = np.exp(-cdist(X, X, "sqeuclidean") / (2.0 * sigma**2))
    dual = np.linalg.solve(K + params["lambda"] * np.eye(len(y)), y - ym)
    return Trained("kernel_ridge_rbf", params, "kernel", intercept=ym, X_train=X.copy(), dual=dual, sigma=sigma)


def _fit_knn(X, y, params):
    k = min(int(params["k"]), len(y))
    return Trained("knn", {**params, "k": k}, "knn", X_train=X.copy(), y_train=np.asarray(y, dtype=float).copy())


@dataclass
class ModelSpec:
    name: str
    grid: dict[str, list]
    feature_selection: str  # "built_in" or "elastic_net_pre"
    fit: Callable = field(repr=False, default=None)
    fit_grid: Callable | None = field(repr=False, default=None)

    def grid_points(self) -> list[dict]:
        keys = list(self.grid)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(self.grid[k] for k in keys))]

    def fit_all(self, X, y, points) -> list[Trained]:
        """Fit several grid points; same results as calling `fit` on each."""
        if self.fit_grid is not None:
            return self.fit_grid(X, y, points)
        return [self.fit(X, y, pt) for pt in points]


def registry() -> list[ModelSpec]:
    """The default model zoo."""
    ratios = [ratio_step(i) for i in (3, 5, 7, 10, 13, 17)]
    return [
        ModelSpec("ols", {"none": [None]}, "elastic_net_pre", _fit_ols),
        ModelSpec("ridge", {"lambda": [0.01, 0.1, 1.0, 10.0, 100.0]}, "elastic_net_pre", _fit_ridge),
        ModelSpec("lasso", {"lambda_ratio": ratios}, "built_in", _fit_lasso, _fit_lasso_grid),
        ModelSpec(
            "elastic_net",
            {"alpha": [0.25, 0.5, 0.75], "lambda_ratio": [ratio_step(i) for i in (3, 7, 10, 13, 17)]},
            "built_in",
            _fit_elastic_net,
            _fit_elastic_net_grid,
        ),
        ModelSpec(
            "kernel_ridge_rbf",
            {"lambda": [0.01, 0.1, 1.0], "sigma_scale": [0.5, 1.0, 2.0]},
            "elastic_net_pre",
            _fit_krr,
        ),
        ModelSpec("knn", {"k": [3, 5, 7, 9]}, "elastic_net_pre", _fit_knn),
    ]


def constant_mean_spec() -> ModelSpec:
    """Intercept-only model; useful as a null reference."""
    return ModelSpec("mean", {"none": [None]}, "built_in", _fit_mean)


def get_zoo(names=None) -> list[ModelSpec]:
    specs = {s.name: s for s in registry() + [constant_mean_spec()]}
    if names is None:
        return registry()
    missing = [n for n in names if n not in specs]
    if missing:
        raise KeyError(f"unknown models: {missing}")
    return [specs[n] for n in names]


def fit_predict(
    spec: ModelSpec,
    train: Dataset,
    test_X,
    params: dict | None = None,
    selected=None,
    selection_seed=0,
    K: int = 10,
) -> np.ndarray:
    """Fit ``spec`` on ``train`` and predict ``test_X`` on the original target scale.

    Imputation, scaling and (for ``elastic_net_pre`` models) feature
    selection use training rows only.
    """
    test_X = np.asarray(test_X, dtype=float)
    if test_X.ndim != 2 or test_X.shape[1] != train.p:
        raise ColumnMismatch(f"test matrix has {test_X.shape[-1]} columns, training has {train.p}")
    sc = Scaling.fit(train.X, train.y, train.feature_names)
    Xtr, ytr, Xte = sc.transform(train.X), sc.transform_y(train.y), sc.transform(test_X)
    if spec.feature_selection == "elastic_net_pre":
        if selected is None:
            selected = select_features_enet(Xtr, ytr, K=min(K, max(2, len(ytr) // 2)), seed=selection_seed).features
        Xtr, Xte = Xtr[:, selected], Xte[:, selected]
    params = params if params is not None else spec.grid_points()[0]
    model = spec.fit(Xtr, ytr, params)
    return sc.inverse_y(model.predict(Xte))
