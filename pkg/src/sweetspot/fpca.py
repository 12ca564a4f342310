"""Functional PCA of depth-normalized log sections.

Curves are observed on a uniform grid over normalized depth ``[0, 1]``; the
L2 inner product is approximated with trapezoid weights ``w``. The
eigenproblem ``Cov W phi = lambda phi`` is solved through its symmetric form
``W^1/2 Cov W^1/2 u = lambda u`` with ``phi = W^-1/2 u``, so eigenfunctions
come out orthonormal under the quadrature inner product.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGrid, KOutOfRange, TooFewWells
from .production import feature_name

EIG_CLAMP = 1e-10

PRIMARY_CURVES = (
    "RHOB",  # density
    "GR",  # gamma ray
    "LIME",  # limestone
    "NPHI",  # neutron porosity
    "RDEEP",  # deep resistivity
    "RSHAL",  # shallow resistivity
    "PEF",  # photoelectric factor
    "RMED",  # medium resistivity
    "DTC",  # compressional slowness
    "DTS",  # shear slowness
)


def trapezoid_weights(n: int) -> np.ndarray:
    if n < 2:
        raise DegenerateGrid(f"grid needs at least 2 points, got {n}")
    w = np.full(n, 1.0 / (n - 1))
    w[0] = w[-1] = 0.5 / (n - 1)
    return w


@dataclass
class FpcaModel:
    mean_curve: np.ndarray
    eigenfunctions: np.ndarray  # k_max x n
    eigenvalues: np.ndarray
    scores: np.ndarray  # N x k_max
    weights: np.ndarray
    well_ids: list = field(default_factory=list)
    prop: str = ""
    formation: str = ""

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, len(self.mean_curve))

    @property
    def k_max(self) -> int:
        return len(self.eigenvalues)

    def inner(self, f, g) -> np.ndarray:
        return (np.asarray(f) * self.weights) @ np.asarray(g).T

    def to_json(self) -> str:
        return json.dumps(
            {
                "property": self.prop,
                "formation": self.formation,
                "mean_curve": self.mean_curve.tolist(),
                "eigenvalues": self.eigenvalues.tolist(),
                "eigenfunctions": self.eigenfunctions.tolist(),
            },
            indent=2,
            sort_keys=True,
        )


def _orient(vecs: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vecs), axis=1)
    signs = np.sign(vecs[np.arange(len(vecs)), idx])
    signs[signs == 0] = 1.0
    return vecs * signs[:, None]


def fit_fpca(block, well_ids=None, prop: str = "", formation: str = "") -> FpcaModel:
    """Discretized fPCA of an ``N x n`` block of resampled curves."""
    x = np.asarray(block, dtype=float)
    if x.ndim != 2:
        raise DegenerateGrid("block must be a 2-D matrix")
    N, n = x.shape
    if n < 2:
        raise DegenerateGrid(f"grid needs at least 2 points, got {n}")
    if N < 3:
        raise TooFewWells(f"fPCA needs at least 3 wells, got {N}")
    w = trapezoid_weights(n)
    sw = np.sqrt(w)
    mean = x.mean(axis=0)
    c = x - mean
    cov = c.T @ c / (N - 1)
    sym = sw[:, None] * cov * sw[None, :]
    evals, evecs = np.linalg.eigh(0.5 * (sym + sym.T))
    order = np.argsort(evals, kind="stable")[::-1]
    k_max = min(N - 1, n)
    evals = evals[order][:k_max]
    u = evecs[:, order][:, :k_max]
    evals = np.where(evals < EIG_CLAMP, np.maximum(evals, 0.0), evals)
    phi = _orient((u / sw[:, None]).T)
    scores = (c * w) @ phi.T
    return FpcaModel(
        mean_curve=mean,
        eigenfunctions=phi,
        eigenvalues=evals,
        scores=scores,
        weights=w,
        well_ids=list(well_ids) if well_ids is not None else list(range(N)),
        prop=prop,
        formation=formation,
    )


def _check_k(model: FpcaModel, k: int) -> None:
    if not 1 <= k <= model.k_max:
        raise KOutOfRange(f"k={k} outside [1, {model.k_max}]")


def fpca_scores(model: FpcaModel, k: int) -> tuple[np.ndarray, list[str]]:
    """Leading ``k`` score columns and their feature names."""
    _check_k(model, k)
    names = [feature_name(model.prop, model.formation, j + 1) for j in range(k)]
    return model.scores[:, :k], names


def reconstruct(model: FpcaModel, k: int) -> np.ndarray:
    _check_k(model, k)
    return model.mean_curve + model.scores[:, :k] @ model.eigenfunctions[:k]


def summary_features(block) -> dict[str, np.ndarray]:
    """Per-well mean, variance, max and min of each curve section."""
    x = np.asarray(block, dtype=float)
    return {
        "mean": x.mean(axis=1),
        "var": x.var(axis=1, ddof=1),
        "max": x.max(axis=1),
        "min": x.min(axis=1),
    }
