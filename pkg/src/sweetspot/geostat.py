"""Empirical variograms, variogram model fitting, ordinary kriging and IDW.

Distances are planar Euclidean in the units of the supplied coordinates.
The exponential family is parameterized so that ``range`` is the
correlation length: ``gamma(h) = nugget + psill * (1 - exp(-h / range))``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial.distance import cdist, pdist

from .errors import NoSamples, TooFewSamples

log = logging.getLogger(__name__)

COINCIDENT = 1e-9
MAX_NEIGHBORS = 32
COND_LIMIT = 1e12


def _spherical(h, a):
    r = np.minimum(h / a, 1.0)
    return 1.5 * r - 0.5 * r**3


def _exponential(h, a):
    return 1.0 - np.exp(-h / a)


def _gaussian(h, a):
    return 1.0 - np.exp(-((h / a) ** 2))


FAMILIES = {"spherical": _spherical, "exponential": _exponential, "gaussian": _gaussian}


@dataclass
class VariogramModel:
    family: str = "exponential"
    nugget: float = 0.0
    partial_sill: float = 1.0
    range: float = 1.0
    loss: float = float("nan")
    degenerate: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown variogram family {self.family!r}")

    def __call__(self, h):
        h = np.asarray(h, dtype=float)
        g = self.nugget + self.partial_sill * FAMILIES[self.family](h, self.range)
        return np.where(h > 0.0, g, 0.0)

    @property
    def sill(self) -> float:
        return self.nugget + self.partial_sill

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "nugget": self.nugget,
            "partial_sill": self.partial_sill,
            "range": self.range,
            "loss": self.loss,
            "degenerate": self.degenerate,
        }


@dataclass
class SpatialSamples:
    """Scattered point values. Points closer than 1e-9 are merged by mean."""

    points: np.ndarray
    values: np.ndarray
    ids: list = field(default_factory=list)

    @classmethod
    def from_arrays(cls, points, values, ids=None) -> "SpatialSamples":
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        vals = np.asarray(values, dtype=float).ravel()
        ids = list(ids) if ids is not None else list(range(len(vals)))
        if len(vals) < 2 or pdist(pts).min() >= COINCIDENT:
            return cls(points=pts.copy(), values=vals.copy(), ids=ids)
        close = cdist(pts, pts) < COINCIDENT
        group = np.arange(len(vals))
        for i in range(len(vals)):
            earlier = np.flatnonzero(close[i, :i] & (group[:i] == np.arange(i)))
            if earlier.size:
                group[i] = earlier[0]
        heads = np.flatnonzero(group == np.arange(len(vals)))
        sums = np.bincount(group, weights=vals, minlength=len(vals))[heads]
        counts = np.bincount(group, minlength=len(vals))[heads]
        return cls(points=pts[heads], values=sums / counts, ids=[ids[i] for i in heads])

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class EmpiricalVariogram:
    lags: np.ndarray
    gammas: np.ndarray
    counts: np.ndarray

    def __len__(self) -> int:
        return len(self.lags)

    def __iter__(self):
        return iter(zip(self.lags, self.gammas, self.counts))


def empirical_variogram(s: SpatialSamples, n_bins: int = 12, max_dist: float | None = None) -> EmpiricalVariogram:
    """Binned semivariance ``mean(0.5 * (v_i - v_j)**2)`` over equal-width lag bins.

    The lag reported for a bin is the mean separation of its pairs; empty
    bins are omitted. ``max_dist`` defaults to half the largest pairwise
    distance.
    """
    if len(s) < 2:
        raise TooFewSamples("need at least 2 samples for a variogram")
    d = pdist(s.points)
    sq = 0.5 * pdist(s.values[:, None], "sqeuclidean")
    if max_dist is None:
        max_dist = 0.5 * d.max()
    edges = np.linspace(0.0, max_dist, n_bins + 1)
    ok = (d > 0.0) & (d <= max_dist)
    which = np.clip(np.searchsorted(edges, d[ok], side="left") - 1, 0, n_bins - 1)
    counts = np.bincount(which, minlength=n_bins)
    gsum = np.bincount(which, weights=sq[ok], minlength=n_bins)
    dsum = np.bincount(which, weights=d[ok], minlength=n_bins)
    nz = counts > 0
    return EmpiricalVariogram(lags=dsum[nz] / counts[nz], gammas=gsum[nz] / counts[nz], counts=counts[nz])


def _nonneg_linear(f, g, w, sw, sg, sgg):
    """Weighted least squares ``g ~ nugget + psill * f`` with both
    coefficients constrained to be non-negative; returns (nugget, psill, loss).

    ``sw``, ``sg`` and ``sgg`` are the weighted sums of 1, g and g**2.
    """
    wf = w * f
    sf, sff, sfg = float(wf.sum()), float(wf @ f), float(wf @ g)

    def loss(n, s):
        # expanded weighted sum of (n + s f - g)^2
        return n * n * sw + s * s * sff + sgg + 2.0 * (n * s * sf - n * sg - s * sfg)

    cands = [(0.0, max(sfg / sff, 0.0) if sff > 0 else 0.0), (max(sg / sw, 0.0), 0.0)]
    det = sw * sff - sf * sf
    if det > 1e-14 * sw * sff:
        n = (sff * sg - sf * sfg) / det
        s = (sw * sfg - sf * sg) / det
        if n >= 0.0 and s >= 0.0:
            cands.insert(0, (n, s))
    best = None
    for n, s in cands:
        val = max(loss(n, s), 0.0)
        if best is None or val < best[2]:
            best = (n, s, val)
    return best


def fit_variogram(emp: EmpiricalVariogram, family: str = "exponential") -> VariogramModel:
    """Weighted least-squares fit (weights ``count / lag**2``).

    For a given range the nugget and partial sill enter linearly, so they
    are solved exactly under non-negativity; the range is located on a
    log-spaced grid over ``[min lag, 2 * max lag]`` and refined by a
    bounded scalar search between the neighbouring grid points.

    Fewer than three bins, or a flat empirical curve, gives a pure-nugget
    model with ``degenerate=True``.
    """
    lags = np.asarray(emp.lags, dtype=float)
    gam = np.asarray(emp.gammas, dtype=float)
    cnt = np.asarray(emp.counts, dtype=float)
    if len(lags) == 0:
        return VariogramModel(family, 0.0, 0.0, 1.0, loss=0.0, degenerate=True)
    max_lag = float(lags.max())
    if len(lags) < 3 or np.ptp(gam) <= 1e-12 * max(abs(gam.mean()), 1e-300):
        gbar = float(np.average(gam, weights=cnt))
        return VariogramModel(family, gbar, 0.0, max_lag, loss=0.0, degenerate=True)

    fam = FAMILIES[family]
    gscale = float(gam.max())
    w = cnt / lags**2
    w = w / w.sum()
    g = gam / gscale
    h = lags / max_lag
    lo, hi = float(lags.min()) / max_lag, 2.0

    sw, sg, sgg = float(w.sum()), float(w @ g), float(w @ (g * g))

    def profile(a):
        a = min(max(float(a), lo), hi)
        return _nonneg_linear(fam(h, a), g, w, sw, sg, sgg), a

    def loss(theta):
        return profile(theta[0])[0][2]

    grid = np.geomspace(lo, hi, 48)
    vals = [loss((a,)) for a in grid]
    i = int(np.argmin(vals))
    lo_b, hi_b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(lambda a: loss((a,)), bounds=(lo_b, hi_b), method="bounded", options={"xatol": 1e-9})
    a_best = float(res.x) if res.fun <= vals[i] else float(grid[i])
    (nugget, psill, fun), rng = profile(a_best)
    return VariogramModel(
        family,
        nugget=float(nugget * gscale),
        partial_sill=float(psill * gscale),
        range=rng * max_lag,
        loss=fun * gscale**2,
    )


def idw(points, values, targets, power: float = 2.0) -> np.ndarray:
    """Shepard inverse-distance weighting; exact at coincident targets."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    vals = np.asarray(values, dtype=float).ravel()
    if len(vals) == 0:
        raise NoSamples("IDW needs at least one sample")
    tg = np.asarray(targets, dtype=float).reshape(-1, 2)
    d = cdist(tg, pts)
    out = np.empty(len(tg))
    for i, row in enumerate(d):
        hit = np.flatnonzero(row < COINCIDENT)
        if hit.size:
            out[i] = vals[hit[0]]
            continue
        wts = row ** (-power)
        out[i] = np.dot(wts, vals) / wts.sum()
    return out


@dataclass
class KrigingResult:
    predictions: np.ndarray
    variances: np.ndarray
    fallback: np.ndarray
    weights: list = field(default_factory=list)
    neighbors: list = field(default_factory=list)


def krige(
    s: SpatialSamples,
    vm: VariogramModel,
    targets,
    max_neighbors: int = MAX_NEIGHBORS,
    idw_power: float = 2.0,
) -> KrigingResult:
    """Ordinary kriging with a local neighborhood of the nearest samples.

    A target whose kriging matrix has condition number above 1e12 is
    predicted by IDW instead and flagged in ``fallback``.
    """
    if len(s) == 0:
        raise NoSamples("kriging needs at least one sample")
    tg = np.asarray(targets, dtype=float).reshape(-1, 2)
    m = min(len(s), max_neighbors)
    dist = cdist(tg, s.points)
    preds = np.empty(len(tg))
    var = np.empty(len(tg))
    fallback = np.zeros(len(tg), dtype=bool)
    weights, neighbors = [], []
    for t in range(len(tg)):
        nb = np.argsort(dist[t], kind="stable")[:m]
        pts = s.points[nb]
        a = np.ones((m + 1, m + 1))
        a[:m, :m] = vm(cdist(pts, pts))
        a[m, m] = 0.0
        b = np.ones(m + 1)
        b[:m] = vm(dist[t, nb])
        if np.linalg.cond(a) > COND_LIMIT:
            preds[t] = idw(pts, s.values[nb], tg[t], power=idw_power)[0]
            var[t] = np.nan
            fallback[t] = True
            weights.append(None)
        else:
            sol = np.linalg.solve(a, b)
            w = sol[:m]
            preds[t] = np.dot(w, s.values[nb])
            var[t] = max(np.dot(w, b[:m]) + sol[m], 0.0)
            weights.append(w)
        neighbors.append(nb)
    return KrigingResult(preds, var, fallback, weights, neighbors)


def krige_values(points, values, targets, family: str = "exponential", n_bins: int = 12) -> tuple[KrigingResult, VariogramModel]:
    """Fit a variogram to ``values`` and krige them to ``targets``."""
    s = SpatialSamples.from_arrays(points, values)
    if len(s) >= 2:
        vm = fit_variogram(empirical_variogram(s, n_bins=n_bins), family)
    else:
        vm = VariogramModel(family, 0.0, 0.0, 1.0, loss=0.0, degenerate=True)
    return krige(s, vm, targets), vm


@dataclass
class InterpolationConfig:
    method: str = "kriging"
    family: str = "exponential"
    min_donors: int = 5
    n_bins: int = 12
    idw_power: float = 2.0


def interpolate_features(frame, scores, vertical_coords, k: int, config: InterpolationConfig | None = None):
    """Carry fPCA scores from vertical wells to horizontal wells.

    Parameters
    ----------
    frame : CumulativeProductionFrame
        Horizontal wells with target formation and surface coordinates.
    scores : dict
        ``(property, formation) -> (well_ids, N x k_max score matrix)``.
    vertical_coords : dict
        ``well_id -> (x, y)`` of the vertical wells.
    k : int
        Number of leading components to interpolate per block.

    Returns
    -------
    frame, variograms, audit
        The frame with one appended column per ``(property, formation, j)``
        named ``<property>_<formation>_fpc<j>``; a dict of fitted variograms
        per feature; and a list of audit rows. A horizontal well only
        receives values for blocks of its own target formation.
    """
    from .production import feature_name

    config = config or InterpolationConfig()
    variograms = {}
    audit = []
    targets_by_formation = frame.wells_by_formation()
    for (prop, formation), (well_ids, mat) in sorted(scores.items()):
        horiz = targets_by_formation.get(formation, [])
        donors = [i for i, w in enumerate(well_ids) if w in vertical_coords]
        kk = min(k, mat.shape[1])
        for j in range(kk):
            name = feature_name(prop, formation, j + 1)
            values = {}
            if len(donors) < config.min_donors:
                for w in horiz:
                    audit.append({"well_id": w, "feature": name, "donors": len(donors), "fallback": False, "status": "too_few_donors"})
            elif horiz:
                pts = np.array([vertical_coords[well_ids[i]] for i in donors])
                vals = mat[donors, j]
                tg = np.array([frame.xy(w) for w in horiz])
                if config.method == "idw":
                    preds = idw(pts, vals, tg, power=config.idw_power)
                    flags = np.zeros(len(horiz), dtype=bool)
                else:
                    res, vm = krige_values(pts, vals, tg, family=config.family, n_bins=config.n_bins)
                    preds, flags = res.predictions, res.fallback
                    variograms[name] = vm.to_dict()
                for w, p, fl in zip(horiz, preds, flags):
                    values[w] = float(p)
                    audit.append({"well_id": w, "feature": name, "donors": len(donors), "fallback": bool(fl), "status": "ok"})
            frame = frame.append_features(name, values)
    return frame, variograms, audit
